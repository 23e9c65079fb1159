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


import itertools
import json

import numpy as np
import pytest

from ..dense_oracle import monomial_dense, pauli_dense
from ..errors import InvalidArgumentError
from ..majorana import (
    HermitianMonomial,
    MajoranaMonomial,
    PauliString,
    all_supports,
    conjugate_sign,
    hermitian_power,
    jordan_wigner,
    mask_to_support,
    monomial_trace_is_zero,
    phase_power,
    support_to_mask,
)


def monomials(n):
    return [MajoranaMonomial(n, support) for support in all_supports(n)]


def test_gamma_squares_to_identity():
    g = MajoranaMonomial.gamma(2, 3)
    assert g * g == MajoranaMonomial.identity(2)


def test_product_examples():
    g1, g2, g3 = (MajoranaMonomial.gamma(2, mu) for mu in (1, 2, 3))
    assert g2 * g1 == MajoranaMonomial.of(2, (1, 2), -1)
    assert g1 * g2 == MajoranaMonomial.of(2, (1, 2))
    assert MajoranaMonomial.of(2, (1, 2)) * MajoranaMonomial.of(2, (2, 3)) == MajoranaMonomial.of(2, (1, 3))
    assert (g1 * g2) * g3 == g1 * (g2 * g3)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_distinct_generators_anticommute(n):
    for mu, nu in itertools.combinations(range(1, 2 * n + 1), 2):
        a, b = MajoranaMonomial.gamma(n, mu), MajoranaMonomial.gamma(n, nu)
        ab, ba = a * b, b * a
        assert ab.support == ba.support
        assert (ab.phase_power - ba.phase_power) % 4 == 2


def test_adjoint_examples():
    assert MajoranaMonomial.of(2, (1, 2)).adjoint() == MajoranaMonomial.of(2, (1, 2), -1)
    assert MajoranaMonomial.of(2, (1, 2, 3)).adjoint() == MajoranaMonomial.of(2, (1, 2, 3), -1)
    assert MajoranaMonomial.of(2, (1, 2, 3, 4)).adjoint() == MajoranaMonomial.of(2, (1, 2, 3, 4))
    assert MajoranaMonomial.of(2, (2,), 1j).adjoint() == MajoranaMonomial.of(2, (2,), -1j)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_symbolic_products_match_dense(n):
    dense = {a.support: monomial_dense(a).matrix for a in monomials(n)}
    for a, b in itertools.product(monomials(n), repeat=2):
        product = a * b
        expected = dense[a.support] @ dense[b.support]
        assert np.allclose(product.phase * dense[product.support], expected)


@pytest.mark.parametrize("n", [4, 5])
def test_jordan_wigner_is_a_homomorphism(n, rng):
    supports = list(all_supports(n))
    for _ in range(10000):
        i, j = rng.integers(0, len(supports), size=2)
        a = MajoranaMonomial(n, supports[i], int(rng.integers(0, 4)))
        b = MajoranaMonomial(n, supports[j], int(rng.integers(0, 4)))
        assert jordan_wigner(a * b) == jordan_wigner(a) * jordan_wigner(b)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_hermitian_monomials_are_hermitian_involutions(n):
    for support in all_supports(n):
        h = monomial_dense(HermitianMonomial.of(n, support)).matrix
        assert np.allclose(h, h.conj().T)
        assert np.allclose(h @ h, np.eye(1 << n))


def test_hermitian_monomial_rejects_wrong_phase():
    with pytest.raises(InvalidArgumentError):
        HermitianMonomial(2, (1, 2), 0)
    assert hermitian_power(0) == 0
    assert hermitian_power(2) == 1
    assert hermitian_power(3) == 1
    assert hermitian_power(4) == 0


@pytest.mark.parametrize("n", [1, 2, 3])
def test_jordan_wigner_matches_dense(n):
    for a in monomials(n):
        assert np.allclose(pauli_dense(jordan_wigner(a)), monomial_dense(a).matrix)


def test_jordan_wigner_examples():
    assert jordan_wigner(MajoranaMonomial.gamma(1, 1)) == PauliString(1, "X")
    assert jordan_wigner(MajoranaMonomial.gamma(1, 2)) == PauliString(1, "Y")
    assert jordan_wigner(MajoranaMonomial.gamma(2, 3)) == PauliString(2, "ZX")
    assert jordan_wigner(MajoranaMonomial.of(1, (1, 2))) == PauliString(1, "Z", 1)
    assert str(jordan_wigner(MajoranaMonomial.of(1, (1, 2)))) == "+i·Z₁"


def test_pauli_products():
    x, y = PauliString(1, "X"), PauliString(1, "Y")
    assert x * y == PauliString(1, "Z", 1)
    assert y * x == PauliString(1, "Z", 3)
    assert x * x == PauliString.identity(1)
    assert str(PauliString.identity(2)) == "+I"


def test_trace_zero_iff_non_empty():
    assert not monomial_trace_is_zero(MajoranaMonomial.identity(3))
    assert monomial_trace_is_zero(MajoranaMonomial.gamma(3, 6))
    for a in monomials(2):
        assert monomial_trace_is_zero(a) == (abs(np.trace(monomial_dense(a).matrix)) > 1e-12)


def test_conjugate_sign_examples():
    assert conjugate_sign((1, 3), 1) == -1
    assert conjugate_sign((1, 3), 2) == 1
    assert conjugate_sign((1, 2, 3), 2) == 1
    assert conjugate_sign((1, 2, 3), 4) == -1
    assert conjugate_sign((), 5) == 1


@pytest.mark.parametrize("n", [1, 2, 3])
def test_conjugate_sign_matches_products(n):
    for r in monomials(n):
        for mu in range(1, 2 * n + 1):
            image = r * MajoranaMonomial.gamma(n, mu) * r.adjoint()
            assert image.support == (mu,)
            assert image.phase == conjugate_sign(r.support, mu)


def test_masks_round_trip():
    assert support_to_mask((1, 4, 5)) == 0b11001
    assert mask_to_support(0b11001) == (1, 4, 5)
    assert list(all_supports(1)) == [(), (1,), (2,), (1, 2)]
    assert len(list(all_supports(3, 2))) == 15


def test_phase_labels():
    assert phase_power("-i") == 3
    assert phase_power(1j) == 1
    with pytest.raises(InvalidArgumentError):
        phase_power(2)
    with pytest.raises(InvalidArgumentError):
        phase_power("+2")


def test_rendering():
    assert str(MajoranaMonomial.of(3, (1, 4, 5))) == "+γ{1,4,5}"
    assert str(MajoranaMonomial.of(2, (1, 2), 1j)) == "+i·γ{1,2}"
    assert str(MajoranaMonomial.of(2, (3,), -1)) == "-γ{3}"


def test_json_form():
    a = MajoranaMonomial.of(3, (1, 4, 5), -1j)
    data = json.loads(a.to_json())
    assert data == {"phase": "-i", "support": [1, 4, 5], "n_modes": 3}
    assert MajoranaMonomial.from_dict(data) == a


@pytest.mark.parametrize("support", [(2, 1), (0, 1), (1, 7), (3, 3)])
def test_invalid_supports(support):
    with pytest.raises(InvalidArgumentError):
        MajoranaMonomial(3, support)


def test_mismatched_modes():
    with pytest.raises(InvalidArgumentError):
        MajoranaMonomial.gamma(2, 1) * MajoranaMonomial.gamma(3, 1)
