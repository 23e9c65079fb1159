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
Query-counted black-box access to an unknown operation M and its adjoint.

Cost convention: every state preparation through M charges one M-query and
every measurement in a basis rotated by M^dagger charges one M^dagger-query.
A sub-oracle for M_mu = M gamma_mu M^dagger charges its parent one query in
each direction per query of its own.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from .dense_oracle import (
    DenseUnitary,
    bell_measurement_distribution,
    check_dense_limit,
    dense_limit,
    gaussian_unitary,
    gibbs_correlation_dense,
    monomial_matrix,
    unitary_from_circuit,
    unitary_from_h,
)
from .errors import DenseLimitError, InternalConsistencyError, InvalidArgumentError, NotGaussianError
from .gaussian import AntisymmetricGenerator, MatchgateCircuit, OrthogonalMatrix, project_orthogonal, q_from_h
from .majorana import mask_to_support, support_to_mask

SINGLETON_MASS_TOLERANCE = 1e-6
MEAN_TOLERANCE = 1e-9

Outcome = Union[int, Tuple[int, ...]]


@dataclass(frozen=True)
class Shot:
    outcome: Outcome
    cost: Tuple[int, int]


def row_signs_from_outcome(outcome, d: int) -> np.ndarray:
    """t_mu = (-1)^{|S| - [mu in S]} for the measured set S."""
    S = set(outcome)
    return np.array([-1.0 if (len(S) - (mu in S)) % 2 else 1.0 for mu in range(1, d + 1)])


def outcome_from_row_signs(t) -> Tuple[int, ...]:
    """The set S whose conjugation gamma_S flips exactly the rows with t_mu = -1."""
    flipped = tuple(mu + 1 for mu, sign in enumerate(t) if sign < 0)
    if len(flipped) % 2:
        flipped = tuple(mu for mu in range(1, len(t) + 1) if mu not in flipped)
    return flipped


class UnitaryOracle:
    def __init__(self, n_modes: int, q_true: Optional[OrthogonalMatrix] = None, m_true: Optional[DenseUnitary] = None,
                 seed=None, rng: Optional[np.random.Generator] = None, parent: Optional["UnitaryOracle"] = None) -> None:
        if (q_true is None) == (m_true is None):
            raise InvalidArgumentError("An oracle needs exactly one of an orthogonal matrix or a dense unitary")
        self.n_modes = int(n_modes)
        self.backend = "analytic" if q_true is not None else "dense"
        if q_true is not None and q_true.n_modes != self.n_modes:
            raise InvalidArgumentError(f"Orthogonal matrix has {q_true.n_modes} modes, oracle has {self.n_modes}")
        if m_true is not None and m_true.n_qubits != self.n_modes:
            raise InvalidArgumentError(f"Unitary acts on {m_true.n_qubits} qubits, oracle has {self.n_modes} modes")
        self._q = q_true
        self._m = m_true
        self.rng = rng if rng is not None else np.random.default_rng(seed)
        self.parent = parent
        self.queries_M = 0
        self.queries_Mdag = 0
        self.last_shot: Optional[Shot] = None

    @classmethod
    def analytic(cls, q: OrthogonalMatrix, seed=None) -> UnitaryOracle:
        return cls(q.n_modes, q_true=q, seed=seed)

    @classmethod
    def dense(cls, m: DenseUnitary, seed=None) -> UnitaryOracle:
        return cls(m.n_qubits, m_true=m, seed=seed)

    @classmethod
    def dense_from_q(cls, q: OrthogonalMatrix, seed=None) -> UnitaryOracle:
        return cls.dense(gaussian_unitary(q), seed=seed)

    @classmethod
    def from_dict(cls, config: dict) -> UnitaryOracle:
        """Build from {backend: "analytic" | "dense", seed, Q | h | circuit}."""
        backend = config.get("backend") or "analytic"
        seed = config.get("seed")
        if "Q" in config:
            q = OrthogonalMatrix.from_matrix(config["Q"])
        elif "h" in config:
            generator = AntisymmetricGenerator.from_matrix(config["h"])
            if backend == "dense":
                return cls.dense(unitary_from_h(generator), seed=seed)
            q = q_from_h(generator)
        elif "circuit" in config:
            circuit = MatchgateCircuit.from_dict(config["circuit"])
            if backend == "dense":
                return cls.dense(unitary_from_circuit(circuit), seed=seed)
            q = circuit.orthogonal_matrix()
        else:
            raise InvalidArgumentError("Oracle config needs one of 'Q', 'h' or 'circuit'")
        if backend == "analytic":
            return cls.analytic(q, seed=seed)
        if backend == "dense":
            return cls.dense_from_q(q, seed=seed)
        raise InvalidArgumentError(f"Unknown backend {backend!r}")

    def counters(self) -> dict:
        return {"queries_M": self.queries_M, "queries_Mdag": self.queries_Mdag}

    def _charge(self, m: int, mdag: int) -> None:
        self.queries_M += m
        self.queries_Mdag += mdag
        total = m + mdag
        if self.parent is not None and total:
            self.parent._charge(total, total)

    def _record(self, outcome: Outcome, m: int, mdag: int) -> Outcome:
        self._charge(m, mdag)
        self.last_shot = Shot(outcome, (m, mdag))
        return outcome

    def _true_unitary(self) -> np.ndarray:
        if self._m is None:
            check_dense_limit(self.n_modes)
            self._m = gaussian_unitary(self._q)
        return self._m.matrix

    def _check_index(self, mu: int) -> None:
        if not 1 <= mu <= 2 * self.n_modes:
            raise InvalidArgumentError(f"Majorana index {mu} is out of range [1, {2 * self.n_modes}]")

    def _conjugated_generator(self, mu: int) -> np.ndarray:
        m = self._true_unitary()
        return m @ monomial_matrix(1 << (mu - 1), self.n_modes) @ m.conj().T

    def _sample_index(self, probabilities: np.ndarray) -> int:
        return int(self.rng.choice(probabilities.size, p=probabilities / probabilities.sum()))

    # step 1: Bell measurement of the conjugated generator

    def step1_distribution(self, mu: int) -> np.ndarray:
        """P(nu) = Q_{mu nu}^2 over nu = 1 .. 2n."""
        self._check_index(mu)
        if self.backend == "analytic":
            return self._q.q[mu - 1] ** 2
        probabilities = bell_measurement_distribution(self._conjugated_generator(mu))
        singles = probabilities[[1 << nu for nu in range(2 * self.n_modes)]]
        outside = probabilities.sum() - singles.sum()
        if outside > SINGLETON_MASS_TOLERANCE:
            raise NotGaussianError(f"Conjugated generator {mu} puts mass {outside:.3g} outside single Majoranas")
        return singles

    def step1_sample(self, mu: int) -> int:
        nu = self._sample_index(self.step1_distribution(mu)) + 1
        return self._record(nu, 1, 1)

    def step1_counts(self, mu: int, shots: int) -> np.ndarray:
        p = self.step1_distribution(mu)
        counts = self.rng.multinomial(shots, p / p.sum())
        self._charge(shots, shots)
        return counts

    # step 2: two-point correlations of M|0> and M X_l|0>

    def correlation_mean(self, k: int, prep: int = 0, j: int = 1) -> float:
        """Expectation of i gamma_j gamma_k on M|0> (prep = 0) or M X_prep|0>."""
        self._check_index(j)
        self._check_index(k)
        if j == k:
            raise InvalidArgumentError(f"Correlation needs two different indices, got j = k = {j}")
        if not 0 <= prep <= self.n_modes:
            raise InvalidArgumentError(f"Preparation {prep} is out of range [0, {self.n_modes}]")
        if self.backend == "analytic":
            q = self._q.q
            minors = np.array([q[2 * l, j - 1] * q[2 * l + 1, k - 1] - q[2 * l, k - 1] * q[2 * l + 1, j - 1]
                               for l in range(self.n_modes)])
            mean = -minors.sum() if prep == 0 else 2.0 * minors[prep - 1] - minors.sum()
        else:
            m = self._true_unitary()
            index = 0 if prep == 0 else 1 << (self.n_modes - prep)
            psi = m[:, index]
            observable = 1j * monomial_matrix(1 << (j - 1), self.n_modes) @ monomial_matrix(1 << (k - 1), self.n_modes)
            mean = float(np.real(np.vdot(psi, observable @ psi)))
        if abs(mean) > 1 + MEAN_TOLERANCE:
            raise InternalConsistencyError(f"Correlation mean {mean} is outside [-1, 1]")
        return float(np.clip(mean, -1.0, 1.0))

    def correlation_shot(self, k: int, prep: int = 0, j: int = 1) -> int:
        mean = self.correlation_mean(k, prep, j)
        value = 1 if self.rng.random() < 0.5 * (1.0 + mean) else -1
        return self._record(value, 1, 0)

    def correlation_average(self, k: int, prep: int, shots: int, j: int = 1) -> float:
        mean = self.correlation_mean(k, prep, j)
        plus = int(self.rng.binomial(shots, 0.5 * (1.0 + mean)))
        self._charge(shots, 0)
        return (2 * plus - shots) / shots

    # step 3: single-shot row-sign measurement

    def step3_point_mass(self, q_bar) -> Tuple[int, ...]:
        """Outcome for Q_bar equal to diag(t) Q up to entrywise error below 1/(4n)."""
        if self._q is None:
            raise InvalidArgumentError("The signed-permutation shortcut needs the analytic backend")
        q_bar = np.asarray(q_bar, dtype=float)
        q = self._q.q
        t = np.where(np.sum(q_bar * q, axis=1) >= 0, 1.0, -1.0)
        error = np.max(np.abs(q_bar - t[:, None] * q))
        if error >= 1.0 / (4 * self.n_modes):
            raise DenseLimitError(f"Q_bar is {error:.3g} away from any row-sign flip of Q and n = {self.n_modes} "
                                  f"exceeds the dense limit {dense_limit()}")
        return outcome_from_row_signs(t)

    def step3_distribution(self, q_bar) -> Tuple[np.ndarray, np.ndarray]:
        """(support masks, probabilities) of |Tr(gamma_S^dagger M_Qbar^dagger M)/d|^2."""
        q_bar = np.asarray(q_bar, dtype=float)
        if q_bar.shape != (2 * self.n_modes, 2 * self.n_modes):
            raise InvalidArgumentError(f"Q_bar has shape {q_bar.shape}, expected {(2 * self.n_modes,) * 2}")
        if self.n_modes <= dense_limit():
            m_bar = gaussian_unitary(project_orthogonal(q_bar)).matrix
            probabilities = bell_measurement_distribution(m_bar.conj().T @ self._true_unitary())
            return np.arange(probabilities.size), probabilities
        if self.backend == "analytic":
            return np.array([support_to_mask(self.step3_point_mass(q_bar))]), np.array([1.0])
        raise DenseLimitError(f"Step-3 distribution on {self.n_modes} modes exceeds the dense limit {dense_limit()}")

    def step3_measure(self, q_bar) -> Tuple[int, ...]:
        masks, probabilities = self.step3_distribution(q_bar)
        outcome = mask_to_support(int(masks[self._sample_index(probabilities)]))
        return self._record(outcome, 1, 1)

    # hierarchy: final monomial correction

    def hierarchy_phase_distribution(self, w) -> np.ndarray:
        if self.backend != "dense":
            raise InvalidArgumentError("Hierarchy measurements need the dense backend")
        w = w.matrix if isinstance(w, DenseUnitary) else np.asarray(w, dtype=complex)
        return bell_measurement_distribution(self._true_unitary().conj().T @ w)

    def hierarchy_phase_measure(self, w) -> Tuple[int, ...]:
        outcome = mask_to_support(self._sample_index(self.hierarchy_phase_distribution(w)))
        return self._record(outcome, 0, 1)

    def sub_oracle(self, mu: int) -> UnitaryOracle:
        """Oracle for M_mu = M gamma_mu M^dagger, billed to this oracle."""
        self._check_index(mu)
        child = DenseUnitary(self.n_modes, self._conjugated_generator(mu))
        child_rng = np.random.default_rng(int(self.rng.integers(0, 2 ** 63 - 1)))
        return UnitaryOracle(self.n_modes, m_true=child, rng=child_rng, parent=self)


class GibbsStateSource:
    """Samples of i gamma_j gamma_k on copies of the Gibbs state of h (dense-backed)."""

    def __init__(self, g: AntisymmetricGenerator, seed=None) -> None:
        self.n_modes = g.n_modes
        self._gamma = gibbs_correlation_dense(g)
        self.rng = np.random.default_rng(seed)
        self.samples_used = 0

    def mean(self, j: int, k: int) -> float:
        return float(self._gamma[j - 1, k - 1])

    def average(self, j: int, k: int, shots: int) -> float:
        plus = int(self.rng.binomial(shots, 0.5 * (1.0 + np.clip(self.mean(j, k), -1.0, 1.0))))
        self.samples_used += shots
        return (2 * plus - shots) / shots
