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


import cmath

import numpy as np
import pytest
import scipy.linalg

from ..blackbox import UnitaryOracle
from ..dense_oracle import DenseUnitary, distance_D, distance_Dplus, gaussian_unitary, monomial_matrix
from ..errors import DegenerateEstimateError, DepthLimitError, InvalidArgumentError
from ..gaussian import OrthogonalMatrix, haar_orthogonal
from ..learner import (
    LearnConfig,
    hierarchy_query_budget,
    learn_hierarchy,
    membership_level2,
    membership_level_k,
    phase_align,
)
from .conftest import random_hermitian, random_unitary, swap_matrix

EXACT = LearnConfig(exact_statistics=True)


def test_membership_gaussian(rng):
    u = gaussian_unitary(haar_orthogonal(2, rng))
    assert membership_level2(u)
    assert membership_level_k(u, 3)


def test_membership_swap_and_cz(swap2, cz2):
    assert not membership_level2(swap2)
    assert not membership_level2(cz2)
    assert membership_level_k(swap2, 3)
    assert membership_level_k(cz2, 3)


@pytest.mark.parametrize("mask", range(16))
def test_membership_monomials(mask):
    u = DenseUnitary(2, monomial_matrix(mask, 2))
    assert membership_level2(u)


@pytest.mark.parametrize("k", [2, 3])
def test_membership_is_nested(k, rng, swap2, cz2):
    members = [gaussian_unitary(haar_orthogonal(2, rng)), DenseUnitary(2, monomial_matrix(0b101, 2))]
    if k == 3:
        members += [swap2, cz2, gaussian_unitary(haar_orthogonal(2, rng)) @ swap2]
    for u in members:
        assert membership_level_k(u, k)
        assert membership_level_k(u, k + 1)


def test_membership_random_unitary(rng):
    u = DenseUnitary(2, random_unitary(2, rng))
    assert not membership_level_k(u, 2)
    assert not membership_level_k(u, 3)


def test_membership_depth_limit(swap2):
    with pytest.raises(DepthLimitError):
        membership_level_k(swap2, 5)
    with pytest.raises(DepthLimitError):
        membership_level_k(swap2, 1)


def test_phase_align_monomial_is_ambiguous():
    hermitian = 1j * monomial_matrix(0b11, 2)
    aligned, ambiguous = phase_align(DenseUnitary(2, cmath.exp(0.4j) * hermitian), 1e-3)
    assert isinstance(aligned, DenseUnitary) and aligned.matrix.shape == (4, 4)
    assert ambiguous is True
    assert np.allclose(aligned.matrix, aligned.matrix.conj().T)
    assert distance_D(aligned, DenseUnitary(2, hermitian)) < 1e-6


@pytest.mark.parametrize("phase", [0.0, 0.3, 2.1, -1.2, np.pi])
def test_phase_align_cz(cz2, phase):
    aligned, ambiguous = phase_align(cmath.exp(1j * phase) * cz2, 1e-3)
    assert not ambiguous
    assert np.allclose(aligned.matrix, cz2.matrix)


def test_phase_align_perturbed(cz2, rng):
    h = random_hermitian(2, rng)
    h /= np.linalg.norm(h, 2)
    estimate = cmath.exp(0.9j) * (cz2 @ scipy.linalg.expm(0.01j * h))
    aligned, ambiguous = phase_align(estimate, 1e-3)
    assert not ambiguous
    assert distance_Dplus(aligned, cz2) <= 2 * distance_D(estimate, cz2) + 1e-6


def test_phase_align_degenerate(cz2):
    with pytest.raises(DegenerateEstimateError):
        phase_align(cz2, 1.5)


def test_hierarchy_budget_levels():
    cfg = LearnConfig(eta=0.05)
    n = 2
    level2 = hierarchy_query_budget(n, 2, cfg)
    assert level2["total"] == level2["closed_form"]
    level3 = hierarchy_query_budget(n, 3, cfg)
    assert level3["total"] == level3["closed_form"] + 1
    level4 = hierarchy_query_budget(n, 4, cfg)
    assert level4["total"] > 4 * n * level3["total"]
    assert level4["total"] == pytest.approx(level4["closed_form"], rel=1e-3)
    with pytest.raises(DepthLimitError):
        hierarchy_query_budget(n, 5, cfg)


def test_hierarchy_level2_on_analytic_oracle(rng):
    q = haar_orthogonal(2, rng)
    report = learn_hierarchy(UnitaryOracle.analytic(q), 2, EXACT)
    assert report.level == 2
    assert distance_D(gaussian_unitary(q), report.u_hat) < 1e-6


def test_hierarchy_level3_needs_dense_backend():
    with pytest.raises(InvalidArgumentError):
        learn_hierarchy(UnitaryOracle.analytic(OrthogonalMatrix.identity(2)), 3, EXACT)


@pytest.mark.parametrize("target", ["swap", "cz"])
def test_hierarchy_level3_exact(target, swap2, cz2):
    u = swap2 if target == "swap" else cz2
    oracle = UnitaryOracle.dense(u, seed=5)
    report = learn_hierarchy(oracle, 3, EXACT)
    assert report.level == 3
    assert distance_D(u, report.u_hat) < 1e-6
    assert report.queries["total"] == report.budget["total"]
    assert report.diagnostics["reconstruction_residual"] < 1e-6


def test_hierarchy_level3_gaussian_times_swap(rng):
    u = gaussian_unitary(haar_orthogonal(2, rng)) @ swap_matrix(2)
    report = learn_hierarchy(UnitaryOracle.dense(u, seed=2), 3, EXACT)
    assert distance_D(u, report.u_hat) < 1e-6


def test_hierarchy_level3_gaussian_times_swap_three_modes(rng):
    for seed in range(5):
        u = gaussian_unitary(haar_orthogonal(3, rng)) @ swap_matrix(3)
        report = learn_hierarchy(UnitaryOracle.dense(u, seed=seed), 3, EXACT)
        assert report.queries["total"] == report.budget["total"]
        assert report.diagnostics["reconstruction_residual"] < 1e-6
        assert all(flags == [] for flags in report.diagnostics["sub_flags"])
        assert distance_D(u, report.u_hat) < 1e-6


def test_hierarchy_level3_noisy_swap(swap2):
    cfg = LearnConfig(eta=0.01)
    successes = 0
    for seed in range(20):
        report = learn_hierarchy(UnitaryOracle.dense(swap2, seed=seed), 3, cfg)
        assert report.queries["total"] == report.budget["total"]
        if distance_D(swap2, report.u_hat) <= 0.1:
            successes += 1
    assert successes >= 18


def test_hierarchy_report_json(cz2):
    report = learn_hierarchy(UnitaryOracle.dense(cz2, seed=1), 3, EXACT)
    data = report.to_dict()
    assert data["level"] == 3
    assert len(data["diagnostics"]["ambiguous_phases"]) == 4
    assert len(data["u_hat"]) == 4
