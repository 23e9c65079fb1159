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

"""
Symbolic algebra of Majorana monomials and their Jordan-Wigner Pauli strings.

Indices are 1-based on the public surface: a system of ``n`` modes has the
Majorana operators gamma_1 ... gamma_2n. Phases are restricted to the four
units and are stored as powers of ``i``.
"""

from __future__ import annotations

import itertools
import json
from bisect import bisect_left
from dataclasses import dataclass
from typing import Iterable, Iterator, Tuple, Union

from .errors import InvalidArgumentError

PHASE_LABELS = ("+1", "+i", "-1", "-i")
PHASE_VALUES = (1, 1j, -1, -1j)
PAULI_LETTERS = "IXYZ"

_SUBSCRIPTS = str.maketrans("0123456789", "₀₁₂₃₄₅₆₇₈₉")

# (p, q) -> (power of i, letter) for p * q, p != q, neither identity
_LETTER_PRODUCTS = {
    ("X", "Y"): (1, "Z"),
    ("Y", "X"): (3, "Z"),
    ("Y", "Z"): (1, "X"),
    ("Z", "Y"): (3, "X"),
    ("Z", "X"): (1, "Y"),
    ("X", "Z"): (3, "Y"),
}


def phase_power(phase: Union[str, complex, int]) -> int:
    """Return ``k`` such that ``i**k == phase`` for a unit phase given as value or label."""
    if isinstance(phase, str):
        if phase not in PHASE_LABELS:
            raise InvalidArgumentError(f"Unknown phase label {phase!r}, expected one of {PHASE_LABELS}")
        return PHASE_LABELS.index(phase)
    for k, value in enumerate(PHASE_VALUES):
        if phase == value:
            return k
    raise InvalidArgumentError(f"Phase {phase!r} is not one of +1, -1, +i, -i")


def hermitian_power(m: int) -> int:
    """Power of i that makes a weight-m monomial Hermitian: (m(m-1)/2) mod 2."""
    return (m * (m - 1) // 2) % 2


def support_to_mask(support: Iterable[int]) -> int:
    mask = 0
    for mu in support:
        mask |= 1 << (mu - 1)
    return mask


def mask_to_support(mask: int) -> Tuple[int, ...]:
    support = []
    mu = 1
    while mask:
        if mask & 1:
            support.append(mu)
        mask >>= 1
        mu += 1
    return tuple(support)


def all_supports(n_modes: int, size: Union[int, None] = None) -> Iterator[Tuple[int, ...]]:
    """All index sets of [2n] (of one size if given), in increasing size then lexicographic order."""
    sizes = range(2 * n_modes + 1) if size is None else [size]
    for m in sizes:
        yield from itertools.combinations(range(1, 2 * n_modes + 1), m)


@dataclass(frozen=True)
class MajoranaMonomial:
    n_modes: int
    support: Tuple[int, ...] = ()
    phase_power: int = 0

    def __post_init__(self) -> None:
        if int(self.n_modes) < 1:
            raise InvalidArgumentError(f"Number of modes must be positive, got {self.n_modes}")
        support = tuple(int(mu) for mu in self.support)
        if any(b <= a for a, b in zip(support, support[1:])):
            raise InvalidArgumentError(f"Support must be strictly increasing, got {support}")
        if support and (support[0] < 1 or support[-1] > 2 * self.n_modes):
            raise InvalidArgumentError(f"Support {support} is not contained in [1, {2 * self.n_modes}]")
        object.__setattr__(self, "n_modes", int(self.n_modes))
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "phase_power", int(self.phase_power) % 4)

    @classmethod
    def identity(cls, n_modes: int) -> MajoranaMonomial:
        return cls(n_modes)

    @classmethod
    def gamma(cls, n_modes: int, mu: int) -> MajoranaMonomial:
        return cls(n_modes, (mu,))

    @classmethod
    def of(cls, n_modes: int, support: Iterable[int], phase: Union[str, complex, int] = 1) -> MajoranaMonomial:
        return cls(n_modes, tuple(sorted(support)), phase_power(phase))

    @classmethod
    def from_mask(cls, n_modes: int, mask: int, power: int = 0) -> MajoranaMonomial:
        return cls(n_modes, mask_to_support(mask), power)

    @property
    def phase(self) -> complex:
        return PHASE_VALUES[self.phase_power]

    @property
    def weight(self) -> int:
        return len(self.support)

    @property
    def mask(self) -> int:
        return support_to_mask(self.support)

    def __mul__(self, other: MajoranaMonomial) -> MajoranaMonomial:
        return monomial_mul(self, other)

    def adjoint(self) -> MajoranaMonomial:
        return monomial_adjoint(self)

    def __str__(self) -> str:
        label = PHASE_LABELS[self.phase_power]
        body = "γ{" + ",".join(str(mu) for mu in self.support) + "}"
        if label in ("+1", "-1"):
            return label[0] + body
        return label + "·" + body

    def to_dict(self) -> dict:
        return {"phase": PHASE_LABELS[self.phase_power], "support": list(self.support), "n_modes": self.n_modes}

    @classmethod
    def from_dict(cls, data: dict) -> MajoranaMonomial:
        try:
            return cls(int(data["n_modes"]), tuple(data.get("support") or []), phase_power(data.get("phase") or "+1"))
        except KeyError as e:
            raise InvalidArgumentError(f"Monomial JSON is missing field {e}") from e

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class HermitianMonomial(MajoranaMonomial):
    """Monomial with phase i^p(|S|), so that its matrix is Hermitian and squares to identity."""

    def __post_init__(self) -> None:
        super().__post_init__()
        expected = hermitian_power(len(self.support))
        if self.phase_power != expected:
            raise InvalidArgumentError(f"Hermitian monomial of weight {len(self.support)} needs phase {PHASE_LABELS[expected]}")

    @classmethod
    def of(cls, n_modes: int, support: Iterable[int]) -> HermitianMonomial:
        support = tuple(sorted(support))
        return cls(n_modes, support, hermitian_power(len(support)))


@dataclass(frozen=True)
class PauliString:
    n_qubits: int
    letters: str
    phase_power: int = 0

    def __post_init__(self) -> None:
        if len(self.letters) != self.n_qubits:
            raise InvalidArgumentError(f"Pauli string {self.letters!r} does not have {self.n_qubits} letters")
        if any(c not in PAULI_LETTERS for c in self.letters):
            raise InvalidArgumentError(f"Pauli string {self.letters!r} contains letters outside {PAULI_LETTERS}")
        object.__setattr__(self, "phase_power", int(self.phase_power) % 4)

    @classmethod
    def identity(cls, n_qubits: int) -> PauliString:
        return cls(n_qubits, "I" * n_qubits)

    @property
    def phase(self) -> complex:
        return PHASE_VALUES[self.phase_power]

    def __mul__(self, other: PauliString) -> PauliString:
        return pauli_mul(self, other)

    def __str__(self) -> str:
        label = PHASE_LABELS[self.phase_power]
        prefix = label[0] if label in ("+1", "-1") else label + "·"
        body = "".join(f"{c}{str(q + 1).translate(_SUBSCRIPTS)}" for q, c in enumerate(self.letters) if c != "I")
        return prefix + (body or "I")


def pauli_mul(p: PauliString, q: PauliString) -> PauliString:
    if p.n_qubits != q.n_qubits:
        raise InvalidArgumentError(f"Cannot multiply Pauli strings on {p.n_qubits} and {q.n_qubits} qubits")
    power = p.phase_power + q.phase_power
    letters = []
    for a, b in zip(p.letters, q.letters):
        if a == "I":
            letters.append(b)
        elif b == "I":
            letters.append(a)
        elif a == b:
            letters.append("I")
        else:
            k, c = _LETTER_PRODUCTS[(a, b)]
            power += k
            letters.append(c)
    return PauliString(p.n_qubits, "".join(letters), power)


def monomial_mul(a: MajoranaMonomial, b: MajoranaMonomial) -> MajoranaMonomial:
    """gamma_S gamma_S' = (+-) gamma_{S delta S'}, the sign counting transpositions of the sort."""
    if a.n_modes != b.n_modes:
        raise InvalidArgumentError(f"Cannot multiply monomials on {a.n_modes} and {b.n_modes} modes")
    inversions = sum(bisect_left(b.support, x) for x in a.support)
    support = tuple(sorted(set(a.support).symmetric_difference(b.support)))
    return MajoranaMonomial(a.n_modes, support, a.phase_power + b.phase_power + 2 * (inversions % 2))


def monomial_adjoint(a: MajoranaMonomial) -> MajoranaMonomial:
    # reversing m anticommuting factors costs m(m-1)/2 transpositions
    return MajoranaMonomial(a.n_modes, a.support, -a.phase_power + 2 * hermitian_power(a.weight))


def jordan_wigner(a: MajoranaMonomial) -> PauliString:
    n = a.n_modes
    result = PauliString(n, "I" * n, a.phase_power)
    for mu in a.support:
        l = (mu + 1) // 2
        letter = "X" if mu % 2 == 1 else "Y"
        result = pauli_mul(result, PauliString(n, "Z" * (l - 1) + letter + "I" * (n - l)))
    return result


def monomial_trace_is_zero(a: MajoranaMonomial) -> bool:
    return len(a.support) > 0


def conjugate_sign(R: Iterable[int], mu: int) -> int:
    """Sign s in gamma_R gamma_mu gamma_R^dagger = s gamma_mu."""
    R = set(R)
    return -1 if (len(R) - (mu in R)) % 2 else 1
