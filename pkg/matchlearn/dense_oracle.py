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
Exact 2^n-dimensional ground truth for small systems.

Qubit 1 is the most significant bit of a computational-basis index. Every
monomial gamma_S is handled as i^k X^x Z^z with bit masks x, z over the qubits,
which lets all 4^n normalized traces Tr(gamma_S^dagger A)/d be computed with one
Walsh-Hadamard transform instead of 4^n matrix products.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence, Tuple

import numpy as np
import scipy.linalg

from .errors import DenseLimitError, InconsistentActionError, InvalidArgumentError
from .gaussian import AntisymmetricGenerator, GivensGate, MatchgateCircuit, OrthogonalMatrix, compile_to_givens
from .majorana import PHASE_VALUES, MajoranaMonomial, PauliString, mask_to_support, support_to_mask

DEFAULT_DENSE_LIMIT = 6
DENSE_LIMIT_ENV = "MATCHLEARN_DENSE_LIMIT"
UNITARITY_TOLERANCE = 1e-9
ACTION_GAP_THRESHOLD = 0.5

_PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def dense_limit() -> int:
    value = os.environ.get(DENSE_LIMIT_ENV)
    if not value:
        return DEFAULT_DENSE_LIMIT
    try:
        return int(value)
    except ValueError as e:
        raise InvalidArgumentError(f"{DENSE_LIMIT_ENV} must be an integer, got {value!r}") from e


def check_dense_limit(n: int) -> None:
    limit = dense_limit()
    if n > limit:
        raise DenseLimitError(f"Dense objects on {n} qubits exceed the dense limit of {limit} (set {DENSE_LIMIT_ENV})")


def _as_matrix(u) -> np.ndarray:
    return u.matrix if isinstance(u, DenseUnitary) else np.asarray(u, dtype=complex)


@dataclass(eq=False)
class DenseUnitary:
    n_qubits: int
    matrix: np.ndarray

    def __post_init__(self) -> None:
        matrix = np.asarray(self.matrix, dtype=complex)
        d = 1 << self.n_qubits
        if matrix.shape != (d, d):
            raise InvalidArgumentError(f"Expected a {d}x{d} matrix for {self.n_qubits} qubits, got {matrix.shape}")
        defect = np.max(np.abs(matrix.conj().T @ matrix - np.eye(d)))
        if defect > UNITARITY_TOLERANCE:
            raise InvalidArgumentError(f"Matrix is not unitary (max |U^dagger U - I| = {defect:.3g})")
        self.matrix = matrix

    @classmethod
    def from_matrix(cls, matrix) -> DenseUnitary:
        matrix = np.asarray(matrix, dtype=complex)
        n = int(round(np.log2(matrix.shape[0])))
        return cls(n, matrix)

    @classmethod
    def identity(cls, n_qubits: int) -> DenseUnitary:
        return cls(n_qubits, np.eye(1 << n_qubits, dtype=complex))

    @property
    def dimension(self) -> int:
        return 1 << self.n_qubits

    def adjoint(self) -> DenseUnitary:
        return DenseUnitary(self.n_qubits, self.matrix.conj().T)

    def conjugate(self, a) -> np.ndarray:
        """U a U^dagger."""
        return self.matrix @ _as_matrix(a) @ self.matrix.conj().T

    def __matmul__(self, other) -> DenseUnitary:
        return DenseUnitary(self.n_qubits, self.matrix @ _as_matrix(other))

    def __mul__(self, scalar: complex) -> DenseUnitary:
        return DenseUnitary(self.n_qubits, scalar * self.matrix)

    __rmul__ = __mul__

    def __neg__(self) -> DenseUnitary:
        return DenseUnitary(self.n_qubits, -self.matrix)

    def to_json(self) -> list:
        return complex_matrix_to_json(self.matrix)


def complex_matrix_to_json(matrix) -> list:
    matrix = np.asarray(matrix, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in matrix]


def complex_matrix_from_json(data: list) -> np.ndarray:
    pairs = np.asarray(data, dtype=float)
    return pairs[..., 0] + 1j * pairs[..., 1]


def _popcount(values) -> np.ndarray:
    values = np.array(values, dtype=np.int64)
    count = np.zeros_like(values)
    while np.any(values):
        count += values & 1
        values >>= 1
    return count


@lru_cache(maxsize=None)
def _generator_masks(n: int) -> Tuple[Tuple[int, int, int], ...]:
    """(x, z, k) with gamma_mu = i^k X^x Z^z for mu = 1 .. 2n."""
    masks = []
    for l in range(1, n + 1):
        x = 1 << (n - l)
        z_before = sum(1 << (n - i) for i in range(1, l))
        masks.append((x, z_before, 0))
        masks.append((x, z_before | x, 1))
    return tuple(masks)


@lru_cache(maxsize=None)
def monomial_masks(n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Arrays (xs, zs, ks) indexed by the support mask of S (bit mu-1 for index mu)
    with gamma_S = i^ks X^xs Z^zs.
    """
    size = 1 << (2 * n)
    xs = np.zeros(size, dtype=np.int64)
    zs = np.zeros(size, dtype=np.int64)
    ks = np.zeros(size, dtype=np.int64)
    for bit, (x, z, k) in enumerate(_generator_masks(n)):
        low = 1 << bit
        previous, block = slice(0, low), slice(low, 2 * low)
        xs[block] = xs[previous] ^ x
        ks[block] = (ks[previous] + k + 2 * _popcount(zs[previous] & x)) % 4
        zs[block] = zs[previous] ^ z
    for array in (xs, zs, ks):
        array.setflags(write=False)
    return xs, zs, ks


@lru_cache(maxsize=None)
def _hermitian_phases(n: int) -> np.ndarray:
    """i^p(|S|) for every support mask."""
    weights = _popcount(np.arange(1 << (2 * n)))
    powers = (weights * (weights - 1) // 2) % 2
    phases = np.where(powers == 1, 1j, 1.0 + 0j)
    phases.setflags(write=False)
    return phases


def monomial_matrix(mask: int, n: int) -> np.ndarray:
    """Dense gamma_S (phase +1) for the support mask of S."""
    xs, zs, ks = monomial_masks(n)
    x, z, k = int(xs[mask]), int(zs[mask]), int(ks[mask])
    b = np.arange(1 << n)
    m = np.zeros((1 << n, 1 << n), dtype=complex)
    m[b ^ x, b] = PHASE_VALUES[k] * (1 - 2 * (_popcount(z & b) % 2))
    return m


def gamma_dense(mu: int, n: int) -> DenseUnitary:
    if not 1 <= mu <= 2 * n:
        raise InvalidArgumentError(f"Majorana index {mu} is out of range [1, {2 * n}]")
    check_dense_limit(n)
    return DenseUnitary(n, monomial_matrix(1 << (mu - 1), n))


def monomial_dense(a: MajoranaMonomial) -> DenseUnitary:
    check_dense_limit(a.n_modes)
    return DenseUnitary(a.n_modes, a.phase * monomial_matrix(a.mask, a.n_modes))


def pauli_dense(p: PauliString) -> np.ndarray:
    m = np.array([[p.phase]], dtype=complex)
    for letter in p.letters:
        m = np.kron(m, _PAULI_MATRICES[letter])
    return m


def _walsh_hadamard(v: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along the first axis."""
    d = v.shape[0]
    out = np.array(v, dtype=complex)
    h = 1
    while h < d:
        out = out.reshape(d // (2 * h), 2, h, -1)
        out = np.stack((out[:, 0] + out[:, 1], out[:, 0] - out[:, 1]), axis=1).reshape(d, -1)
        h *= 2
    return out


def monomial_overlaps(a, n: int) -> np.ndarray:
    """Tr(gamma_S^dagger A)/d for every support mask, gamma_S with phase +1."""
    a = _as_matrix(a)
    xs, zs, ks = monomial_masks(n)
    d = 1 << n
    b = np.arange(d)
    # v[b, x] = A[b ^ x, b]; the transform over b gives w[z, x] = sum_b (-1)^{|z & b|} A[b ^ x, b]
    w = _walsh_hadamard(a[b[:, None] ^ b[None, :], b[:, None]])
    conj_phases = np.array(PHASE_VALUES, dtype=complex).conj()
    return conj_phases[ks] * w[zs, xs] / d


@dataclass(eq=False)
class CoefficientVector:
    """Coefficients c_S of an operator in the Hermitian monomial basis, indexed by support mask."""

    n_modes: int
    values: np.ndarray

    def __getitem__(self, support: Sequence[int]) -> complex:
        return complex(self.values[support_to_mask(support)])

    def items(self, tol: float = 0.0) -> Iterator[Tuple[Tuple[int, ...], complex]]:
        for mask in np.nonzero(np.abs(self.values) > tol)[0]:
            yield mask_to_support(int(mask)), complex(self.values[mask])

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2)))

    def odd_weight_mass(self) -> float:
        odd = _popcount(np.arange(self.values.size)) % 2 == 1
        return float(np.sum(np.abs(self.values[odd]) ** 2))

    def to_dense(self) -> np.ndarray:
        out = np.zeros((1 << self.n_modes, 1 << self.n_modes), dtype=complex)
        phases = _hermitian_phases(self.n_modes)
        for mask in np.nonzero(self.values)[0]:
            out += self.values[mask] * phases[mask] * monomial_matrix(int(mask), self.n_modes)
        return out

    def to_dict(self, tol: float = 1e-12) -> dict:
        return {",".join(map(str, s)): [c.real, c.imag] for s, c in self.items(tol)}


def pauli_decompose(u) -> CoefficientVector:
    """c_S = Tr(hermitian_gamma_S^dagger U)/d over all 4^n sets S."""
    m = _as_matrix(u)
    n = int(round(np.log2(m.shape[0])))
    check_dense_limit(n)
    return CoefficientVector(n, monomial_overlaps(m, n) * _hermitian_phases(n).conj())


def bell_measurement_distribution(a) -> np.ndarray:
    """P(S) = |Tr(gamma_S^dagger A)/d|^2, indexed by support mask."""
    m = _as_matrix(a)
    n = int(round(np.log2(m.shape[0])))
    check_dense_limit(n)
    return np.abs(monomial_overlaps(m, n)) ** 2


def quadratic_hamiltonian(g: AntisymmetricGenerator) -> np.ndarray:
    """H = i sum h_{mu nu} gamma_mu gamma_nu."""
    n = g.n_modes
    check_dense_limit(n)
    gammas = [monomial_matrix(1 << mu, n) for mu in range(2 * n)]
    H = np.zeros((1 << n, 1 << n), dtype=complex)
    for mu in range(2 * n):
        for nu in range(2 * n):
            if g.h[mu, nu] != 0.0:
                H += g.h[mu, nu] * (gammas[mu] @ gammas[nu])
    return 1j * H


def unitary_from_h(g: AntisymmetricGenerator) -> DenseUnitary:
    return DenseUnitary(g.n_modes, scipy.linalg.expm(1j * quadratic_hamiltonian(g)))


def givens_dense(n: int, gate: GivensGate) -> np.ndarray:
    mu = gate.modes[0] - 1
    generator = monomial_matrix(1 << mu, n) @ monomial_matrix(1 << (mu + 1), n)
    return np.cos(gate.angle / 2) * np.eye(1 << n) + np.sin(gate.angle / 2) * generator


def unitary_from_circuit(c: MatchgateCircuit) -> DenseUnitary:
    n = c.n_modes
    check_dense_limit(n)
    u = np.eye(1 << n, dtype=complex)
    for gate in c.gates:
        if isinstance(gate, GivensGate):
            u = givens_dense(n, gate) @ u
        else:
            u = monomial_matrix(1 << (gate.mode - 1), n) @ u
    return DenseUnitary(n, u)


def gaussian_unitary(Q: OrthogonalMatrix) -> DenseUnitary:
    """A unitary M_Q with M_Q gamma_mu M_Q^dagger = sum_nu Q_{mu nu} gamma_nu, fixed up to global phase."""
    return unitary_from_circuit(compile_to_givens(Q))


def extract_q(u) -> np.ndarray:
    m = _as_matrix(u)
    n = int(round(np.log2(m.shape[0])))
    check_dense_limit(n)
    d = 1 << n
    gammas = [monomial_matrix(1 << mu, n) for mu in range(2 * n)]
    q = np.zeros((2 * n, 2 * n))
    for mu in range(2 * n):
        image = m @ gammas[mu] @ m.conj().T
        for nu in range(2 * n):
            q[mu, nu] = np.real(np.sum(gammas[nu].T * image)) / d
    return q


def _normalized_overlap(u1, u2) -> complex:
    m1, m2 = _as_matrix(u1), _as_matrix(u2)
    if m1.shape != m2.shape:
        raise InvalidArgumentError(f"Cannot compare unitaries of shapes {m1.shape} and {m2.shape}")
    return np.vdot(m1, m2) / m1.shape[0]


def distance_D(u1, u2) -> float:
    overlap = _normalized_overlap(u1, u2)
    return float(np.sqrt(np.clip(1.0 - abs(overlap) ** 2, 0.0, 1.0)))


def distance_Dplus(u1, u2) -> float:
    overlap = _normalized_overlap(u1, u2)
    return float(np.sqrt(np.clip(1.0 - overlap.real, 0.0, 2.0)))


def reconstruct_from_action(action: Sequence) -> Tuple[DenseUnitary, float]:
    """
    Find W with W gamma_mu W^dagger close to action[mu - 1] for every mu.

    The action is extended multiplicatively to all monomials and assembled into the
    Choi matrix (1/d^2) sum_S Phi(gamma_S) (x) conj(gamma_S) of the candidate channel;
    its dominant eigenvector is vec(W)/sqrt(d). Returns (W, 1 - top eigenvalue).
    """
    images = [_as_matrix(a) for a in action]
    d = images[0].shape[0]
    n = int(round(np.log2(d)))
    if len(images) != 2 * n:
        raise InvalidArgumentError(f"Expected {2 * n} images for {n} qubits, got {len(images)}")
    check_dense_limit(n)
    size = 1 << (2 * n)
    products = [np.eye(d, dtype=complex)] + [None] * (size - 1)
    choi = np.kron(products[0], np.eye(d))
    for mask in range(1, size):
        top = mask.bit_length() - 1
        products[mask] = products[mask ^ (1 << top)] @ images[top]
        choi += np.kron(products[mask], monomial_matrix(mask, n).conj())
    choi = choi / (d * d)
    choi = 0.5 * (choi + choi.conj().T)
    eigenvalues, eigenvectors = np.linalg.eigh(choi)
    gap = eigenvalues[-1] - eigenvalues[-2]
    if gap < ACTION_GAP_THRESHOLD:
        raise InconsistentActionError(f"Action is not close to a unitary conjugation (eigenvalue gap {gap:.3g})")
    w = np.sqrt(d) * eigenvectors[:, -1].reshape(d, d)
    u, _ = scipy.linalg.polar(w)
    return DenseUnitary(n, u), float(1.0 - eigenvalues[-1])


def gibbs_state(g: AntisymmetricGenerator) -> np.ndarray:
    """rho = exp(-H)/Tr exp(-H)."""
    rho = scipy.linalg.expm(-quadratic_hamiltonian(g))
    return rho / np.trace(rho)


def gibbs_correlation_dense(g: AntisymmetricGenerator) -> np.ndarray:
    """(i/2) Tr([gamma_j, gamma_k] rho) for the Gibbs state of h."""
    n = g.n_modes
    rho = gibbs_state(g)
    gammas = [monomial_matrix(1 << mu, n) for mu in range(2 * n)]
    gamma = np.zeros((2 * n, 2 * n))
    for j in range(2 * n):
        for k in range(j + 1, 2 * n):
            commutator = gammas[j] @ gammas[k] - gammas[k] @ gammas[j]
            gamma[j, k] = np.real(0.5j * np.trace(commutator @ rho))
            gamma[k, j] = -gamma[j, k]
    return gamma


def canonicalize_phase(u) -> DenseUnitary:
    """Rotate the global phase so that the largest-magnitude coefficient c_S is real positive."""
    m = _as_matrix(u)
    coefficients = pauli_decompose(m).values
    top = coefficients[np.argmax(np.abs(coefficients))]
    return DenseUnitary.from_matrix(m * (abs(top) / top))
