#!/usr/bin/env python
# coding: utf-8

# matchlearn - Learning Matchgate Hierarchy operations from black-box access
# Copyright (C) 2026 The matchlearn developers
# 
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation; either version 3 of the License, or
# (at your option) any later version.
# 
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
# 
# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.


import numpy as np
import pytest

from ..dense_oracle import DenseUnitary, monomial_matrix
from ..gaussian import OrthogonalMatrix, haar_orthogonal
from ..learner import LearnConfig, fix_signs


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def swap_matrix(n: int) -> np.ndarray:
    d = 1 << n
    matrix = np.zeros((d, d), dtype=complex)
    high, low = 1 << (n - 1), 1 << (n - 2)
    for b in range(d):
        q1, q2 = bool(b & high), bool(b & low)
        swapped = (b & ~(high | low)) | (high if q2 else 0) | (low if q1 else 0)
        matrix[swapped, b] = 1.0
    return matrix


@pytest.fixture
def swap2():
    return DenseUnitary(2, swap_matrix(2))


@pytest.fixture
def cz2():
    return DenseUnitary(2, np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex))


def gammas(n: int):
    return [monomial_matrix(1 << mu, n) for mu in range(2 * n)]


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    d = 1 << n
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_hermitian(n: int, rng: np.random.Generator) -> np.ndarray:
    d = 1 << n
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = 0.5 * (z + z.conj().T)
    return h - np.trace(h) / d * np.eye(d)


def reflection_q(n: int, rng: np.random.Generator) -> OrthogonalMatrix:
    """2 v v^T - I for a random unit vector v."""
    v = haar_orthogonal(n, rng).q[0]
    return OrthogonalMatrix(n, 2.0 * np.outer(v, v) - np.eye(2 * n))


def exact_minors(q: np.ndarray, reference_column: int = 1) -> np.ndarray:
    n = q.shape[0] // 2
    j = reference_column - 1
    c = np.zeros((n, 2 * n))
    for l in range(n):
        for k in range(2 * n):
            if k != j:
                c[l, k] = q[2 * l, j] * q[2 * l + 1, k] - q[2 * l, k] * q[2 * l + 1, j]
    return c


def well_conditioned_orthogonal(n: int, rng: np.random.Generator, floor: float, attempts: int = 5000) -> OrthogonalMatrix:
    """Haar draw whose exact sign-fixing margins all exceed ``floor``."""
    cfg = LearnConfig(eta=1e-3, orthogonal_tiebreak=False)
    for _ in range(attempts):
        q = haar_orthogonal(n, rng)
        diagnostics = {}
        fix_signs(np.abs(q.q), exact_minors(q.q), cfg, diagnostics=diagnostics)
        alignment = min(diagnostics["alignment_margins"], default=np.inf)
        if diagnostics["min_sign_margin"] >= floor and alignment >= floor:
            return q
    raise RuntimeError(f"No well-conditioned draw for n = {n} in {attempts} attempts")
