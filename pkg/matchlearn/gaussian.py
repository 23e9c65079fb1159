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
Orthogonal-matrix picture of fermionic Gaussian operations.

A Gaussian unitary M = exp(iH) with H = i sum h_{mu nu} gamma_mu gamma_nu acts on
the Majorana operators as M gamma_mu M^dagger = sum_nu Q_{mu nu} gamma_nu with
Q = exp(4h). Everything in this module works on the 2n x 2n real matrices and
never touches the 2^n-dimensional Hilbert space.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from .errors import BranchAmbiguityError, InvalidArgumentError, RankDeficiencyError
from .majorana import MajoranaMonomial, PHASE_VALUES

ANTISYMMETRY_TOLERANCE = 1e-12
ORTHOGONALITY_TOLERANCE = 1e-10
CORRELATION_TOLERANCE = 1e-10
BRANCH_TOLERANCE = 1e-6
RANK_TOLERANCE = 1e-8
GATE_ANGLE_TOLERANCE = 1e-15
# compile_to_givens emits at most n(2n-1) + 1 gates, which is below GATE_COUNT_CONSTANT * n^3
GATE_COUNT_CONSTANT = 2

J = np.array([[0.0, 1.0], [-1.0, 0.0]])


def antisymmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a - a.T)


def _modes_from_shape(a: np.ndarray) -> int:
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] % 2 or a.shape[0] == 0:
        raise InvalidArgumentError(f"Expected a nonempty square matrix of even size, got shape {a.shape}")
    return a.shape[0] // 2


@dataclass(eq=False)
class AntisymmetricGenerator:
    n_modes: int
    h: np.ndarray

    def __post_init__(self) -> None:
        h = np.array(self.h, dtype=float)
        if _modes_from_shape(h) != self.n_modes:
            raise InvalidArgumentError(f"Generator of shape {h.shape} does not describe {self.n_modes} modes")
        scale = max(1.0, float(np.max(np.abs(h))))
        if np.max(np.abs(h + h.T)) > ANTISYMMETRY_TOLERANCE * scale:
            raise InvalidArgumentError("Generator matrix is not antisymmetric")
        self.h = antisymmetrize(h)

    @classmethod
    def from_matrix(cls, h) -> AntisymmetricGenerator:
        h = np.asarray(h, dtype=float)
        return cls(_modes_from_shape(h), h)

    @classmethod
    def zeros(cls, n_modes: int) -> AntisymmetricGenerator:
        return cls(n_modes, np.zeros((2 * n_modes, 2 * n_modes)))

    @classmethod
    def random(cls, n_modes: int, rng: np.random.Generator, scale: float = 1.0) -> AntisymmetricGenerator:
        a = rng.standard_normal((2 * n_modes, 2 * n_modes))
        return cls(n_modes, scale * antisymmetrize(a))


@dataclass(eq=False)
class OrthogonalMatrix:
    n_modes: int
    q: np.ndarray

    def __post_init__(self) -> None:
        q = np.array(self.q, dtype=float)
        if _modes_from_shape(q) != self.n_modes:
            raise InvalidArgumentError(f"Matrix of shape {q.shape} does not describe {self.n_modes} modes")
        defect = np.max(np.abs(q @ q.T - np.eye(q.shape[0])))
        if defect > ORTHOGONALITY_TOLERANCE:
            raise InvalidArgumentError(f"Matrix is not orthogonal (max |QQ^T - I| = {defect:.3g})")
        self.q = q

    @classmethod
    def from_matrix(cls, q) -> OrthogonalMatrix:
        q = np.asarray(q, dtype=float)
        return cls(_modes_from_shape(q), q)

    @classmethod
    def identity(cls, n_modes: int) -> OrthogonalMatrix:
        return cls(n_modes, np.eye(2 * n_modes))

    @property
    def det(self) -> int:
        return 1 if np.linalg.det(self.q) > 0 else -1

    def __matmul__(self, other: OrthogonalMatrix) -> OrthogonalMatrix:
        return OrthogonalMatrix(self.n_modes, self.q @ other.q)


@dataclass(eq=False)
class CorrelationMatrix:
    n_modes: int
    gamma: np.ndarray

    def __post_init__(self) -> None:
        gamma = np.array(self.gamma, dtype=float)
        if _modes_from_shape(gamma) != self.n_modes:
            raise InvalidArgumentError(f"Matrix of shape {gamma.shape} does not describe {self.n_modes} modes")
        if np.max(np.abs(gamma + gamma.T)) > 1e-9:
            raise InvalidArgumentError("Correlation matrix is not antisymmetric")
        if np.linalg.norm(gamma, 2) > 1 + CORRELATION_TOLERANCE:
            raise InvalidArgumentError("Correlation matrix has a singular value above 1")
        self.gamma = antisymmetrize(gamma)


@dataclass(frozen=True)
class GivensGate:
    """Rotation exp((angle/2) gamma_mu gamma_{mu+1}); ``modes`` is the pair (mu, mu + 1)."""

    modes: Tuple[int, int]
    angle: float
    kind: str = "givens"

    def orthogonal_matrix(self, n_modes: int) -> np.ndarray:
        mu = self.modes[0] - 1
        q = np.eye(2 * n_modes)
        c, s = math.cos(self.angle), math.sin(self.angle)
        q[mu, mu], q[mu, mu + 1] = c, -s
        q[mu + 1, mu], q[mu + 1, mu + 1] = s, c
        return q

    def to_dict(self) -> dict:
        return {"kind": self.kind, "modes": list(self.modes), "angle": self.angle}


@dataclass(frozen=True)
class Reflection:
    """The monomial gamma_mode acting as a gate; only mode = 2n is emitted by the compiler."""

    mode: int
    kind: str = "reflection"

    def orthogonal_matrix(self, n_modes: int) -> np.ndarray:
        diagonal = -np.ones(2 * n_modes)
        diagonal[self.mode - 1] = 1.0
        return np.diag(diagonal)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "mode": self.mode}


Gate = Union[GivensGate, Reflection]


@dataclass
class MatchgateCircuit:
    n_modes: int
    gates: List[Gate] = field(default_factory=list)

    def __post_init__(self) -> None:
        for gate in self.gates:
            if isinstance(gate, GivensGate):
                mu, nu = gate.modes
                if nu != mu + 1 or mu < 1 or nu > 2 * self.n_modes:
                    raise InvalidArgumentError(f"Givens gate on {gate.modes} does not act on adjacent Majorana modes")
            elif not 1 <= gate.mode <= 2 * self.n_modes:
                raise InvalidArgumentError(f"Reflection on mode {gate.mode} is out of range")

    def __len__(self) -> int:
        return len(self.gates)

    def orthogonal_matrix(self) -> OrthogonalMatrix:
        """Orthogonal matrix of the circuit applied in list order (first gate acts first)."""
        q = np.eye(2 * self.n_modes)
        for gate in self.gates:
            q = q @ gate.orthogonal_matrix(self.n_modes)
        return OrthogonalMatrix(self.n_modes, q)

    def to_dict(self) -> dict:
        return {"n_modes": self.n_modes, "gates": [gate.to_dict() for gate in self.gates]}

    @classmethod
    def from_dict(cls, data: dict) -> MatchgateCircuit:
        gates: List[Gate] = []
        for entry in data.get("gates") or []:
            kind = entry.get("kind")
            if kind == "givens":
                gates.append(GivensGate(tuple(int(m) for m in entry["modes"]), float(entry["angle"])))
            elif kind == "reflection":
                gates.append(Reflection(int(entry["mode"])))
            else:
                raise InvalidArgumentError(f"Unknown gate kind {kind!r}")
        return cls(int(data["n_modes"]), gates)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def haar_orthogonal(n: int, rng: np.random.Generator) -> OrthogonalMatrix:
    if n < 1:
        raise InvalidArgumentError(f"Number of modes must be positive, got {n}")
    d = 2 * n
    while True:
        q, r = np.linalg.qr(rng.standard_normal((d, d)))
        diagonal = np.diag(r)
        if np.min(np.abs(diagonal)) > 1e-12:
            break
    return OrthogonalMatrix(n, q * np.sign(diagonal))


def haar_orthogonal_batch(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` Haar-distributed matrices from O(2n), stacked along the first axis."""
    d = 2 * n
    q, r = np.linalg.qr(rng.standard_normal((count, d, d)))
    signs = np.sign(np.diagonal(r, axis1=1, axis2=2))
    signs[signs == 0] = 1.0
    return q * signs[:, None, :]


def haar_special_orthogonal(n: int, rng: np.random.Generator) -> OrthogonalMatrix:
    """Haar draw from SO(2n): a draw with det -1 has its first column negated."""
    q = haar_orthogonal(n, rng).q
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return OrthogonalMatrix(n, q)


def _real_canonical_form(a: np.ndarray):
    t, z = scipy.linalg.schur(a, output="real")
    blocks = []
    i = 0
    while i < t.shape[0]:
        if i + 1 < t.shape[0] and t[i + 1, i] != 0.0:
            blocks.append((i, 2))
            i += 2
        else:
            blocks.append((i, 1))
            i += 1
    return t, z, blocks


def antisymmetric_function(a: np.ndarray, block_fn: Callable[[float], float]) -> np.ndarray:
    """
    Apply an odd scalar function to an antisymmetric matrix through its real canonical form.

    Each 2x2 block omega*J of the canonical form is mapped to block_fn(omega)*J; zero
    eigenvalues stay zero.
    """
    t, z, blocks = _real_canonical_form(np.asarray(a, dtype=float))
    out = np.zeros_like(t)
    for i, size in blocks:
        if size == 2:
            value = block_fn(0.5 * (t[i, i + 1] - t[i + 1, i]))
            out[i, i + 1] = value
            out[i + 1, i] = -value
    return antisymmetrize(z @ out @ z.T)


def q_from_h(g: AntisymmetricGenerator) -> OrthogonalMatrix:
    return OrthogonalMatrix(g.n_modes, scipy.linalg.expm(4.0 * g.h))


def h_from_q(Q: OrthogonalMatrix) -> AntisymmetricGenerator:
    """Principal logarithm of Q divided by 4."""
    if Q.det < 0:
        raise InvalidArgumentError("h_from_q needs det(Q) = +1; factor out a reflection first")
    t, z, blocks = _real_canonical_form(Q.q)
    log = np.zeros_like(t)
    for i, size in blocks:
        if size == 1:
            if t[i, i] < 0:
                raise BranchAmbiguityError("Q has an isolated eigenvalue -1, its logarithm is not principal")
            continue
        c = 0.5 * (t[i, i] + t[i + 1, i + 1])
        s = 0.5 * (t[i, i + 1] - t[i + 1, i])
        theta = math.atan2(s, c)
        if math.pi - abs(theta) < BRANCH_TOLERANCE:
            raise BranchAmbiguityError(f"Q has an eigenangle {theta:.9f} within {BRANCH_TOLERANCE} of pi")
        log[i, i + 1] = theta
        log[i + 1, i] = -theta
    return AntisymmetricGenerator(Q.n_modes, antisymmetrize(z @ log @ z.T) / 4.0)


def correlation_of_gibbs(g: AntisymmetricGenerator) -> CorrelationMatrix:
    """
    Correlation matrix (i/2) Tr([gamma_j, gamma_k] rho) of rho = exp(-H)/Tr exp(-H).

    As a matrix function this is -tan(2h) with the tangent of an antisymmetric
    argument, so a canonical block 2h = omega*J maps to -tanh(omega)*J.
    """
    return CorrelationMatrix(g.n_modes, antisymmetric_function(2.0 * g.h, lambda omega: -math.tanh(omega)))


def _check_index_set(S: Sequence[int], d: int) -> List[int]:
    indices = [int(s) for s in S]
    if any(s < 1 or s > d for s in indices):
        raise InvalidArgumentError(f"Index set {tuple(indices)} is not contained in [1, {d}]")
    return sorted(indices)


def conjugation_minor(Q: OrthogonalMatrix, S: Sequence[int], S_prime: Sequence[int]) -> float:
    d = 2 * Q.n_modes
    if len(S) != len(S_prime):
        raise InvalidArgumentError(f"Minor needs index sets of equal size, got {len(S)} and {len(S_prime)}")
    rows = [s - 1 for s in _check_index_set(S, d)]
    cols = [s - 1 for s in _check_index_set(S_prime, d)]
    if not rows:
        return 1.0
    if len(rows) == 1:
        return float(Q.q[rows[0], cols[0]])
    if len(rows) == 2:
        (a, b), (c, e) = Q.q[np.ix_(rows, cols)]
        return float(a * e - b * c)
    return float(np.linalg.det(Q.q[np.ix_(rows, cols)]))


def apply_conjugation(Q: OrthogonalMatrix, a: MajoranaMonomial) -> Dict[Tuple[int, ...], complex]:
    """
    Coefficients of M_Q a M_Q^dagger in the monomial basis of the same weight.

    The number of terms is binomial(2n, |S|).
    """
    if a.n_modes != Q.n_modes:
        raise InvalidArgumentError(f"Monomial on {a.n_modes} modes cannot be conjugated by Q on {Q.n_modes} modes")
    phase = PHASE_VALUES[a.phase_power]
    coefficients = {}
    for S_prime in itertools.combinations(range(1, 2 * Q.n_modes + 1), a.weight):
        coefficients[S_prime] = phase * conjugation_minor(Q, a.support, S_prime)
    return coefficients


def compile_to_givens(Q: OrthogonalMatrix) -> MatchgateCircuit:
    """
    Factor Q into adjacent-mode Givens rotations.

    Columns are cleared left to right, each from the bottom up, so Q equals the
    time-ordered product G_1 G_2 ... G_m of the emitted gates. For det(Q) = -1 a
    trailing gamma_2n reflection is appended.
    """
    n = Q.n_modes
    d = 2 * n
    a = Q.q.copy()
    reflect = Q.det < 0
    if reflect:
        a = a @ Reflection(d).orthogonal_matrix(n)
    gates: List[Gate] = []
    for col in range(d - 1):
        for row in range(d - 1, col, -1):
            x, y = a[row - 1, col], a[row, col]
            if abs(y) <= GATE_ANGLE_TOLERANCE and x >= 0:
                continue
            theta = math.atan2(y, x)
            c, s = math.cos(theta), math.sin(theta)
            upper, lower = a[row - 1].copy(), a[row].copy()
            a[row - 1] = c * upper + s * lower
            a[row] = -s * upper + c * lower
            gates.append(GivensGate((row, row + 1), theta))
    if reflect:
        gates.append(Reflection(d))
    return MatchgateCircuit(n, gates)


def project_orthogonal(q_tilde) -> OrthogonalMatrix:
    """Nearest orthogonal matrix in Frobenius norm (the polar factor)."""
    q_tilde = np.asarray(q_tilde, dtype=float)
    n = _modes_from_shape(q_tilde)
    smallest = np.linalg.svd(q_tilde, compute_uv=False)[-1]
    if smallest <= RANK_TOLERANCE:
        raise RankDeficiencyError(f"Cannot project a singular matrix (smallest singular value {smallest:.3g})")
    u, _ = scipy.linalg.polar(q_tilde)
    return OrthogonalMatrix(n, u)


def save_matrix_csv(path, matrix) -> None:
    np.savetxt(path, np.asarray(matrix, dtype=float), delimiter=",", fmt="%.17g")


def load_matrix_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)


def matrix_to_json(matrix) -> str:
    return json.dumps(np.asarray(matrix, dtype=float).tolist())


def matrix_from_json(text: str) -> np.ndarray:
    return np.array(json.loads(text), dtype=float)
