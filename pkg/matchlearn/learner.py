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
Learning algorithms: the three-step Gaussian protocol, Gibbs-state learning,
Matchgate Hierarchy membership and the recursive level-k learner.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .blackbox import GibbsStateSource, UnitaryOracle, row_signs_from_outcome
from .dense_oracle import (
    DenseUnitary,
    canonicalize_phase,
    dense_limit,
    extract_q,
    gaussian_unitary,
    monomial_matrix,
    pauli_decompose,
    reconstruct_from_action,
)
from .diagnostics import log
from .errors import (
    ClippedCorrelationWarning,
    DegenerateEstimateError,
    DepthLimitError,
    InconsistentActionError,
    InconsistentRecursionError,
    InvalidArgumentError,
)
from .gaussian import AntisymmetricGenerator, OrthogonalMatrix, antisymmetric_function, project_orthogonal
from .majorana import support_to_mask

MAX_HIERARCHY_LEVEL = 4
MEMBERSHIP_TOLERANCE = 1e-7
RECONSTRUCTION_RESIDUAL_LIMIT = 0.1
CORRELATION_CLIP = 1.0 - 1e-9
SIGN_TIE_TOLERANCE = 1e-12
MAX_TIEBREAK_ROUNDS = 10
EXACT_MARGIN_FLOOR = 1e-9


@dataclass
class LearnConfig:
    eta: float = 0.05
    epsilon: Optional[float] = None
    fail_prob: float = 0.05
    hoeffding_constant: float = 0.5
    reference_column: int = 1
    margin_threshold: float = 1e-4
    adaptive_reference: bool = False
    exact_statistics: bool = False
    orthogonal_tiebreak: bool = True
    tie_window: float = 1.0
    phase_tolerance: float = 1e-3

    def __post_init__(self) -> None:
        if self.epsilon is None:
            self.epsilon = self.eta
        for name in ("eta", "epsilon", "fail_prob", "hoeffding_constant", "margin_threshold", "tie_window", "phase_tolerance"):
            if not getattr(self, name) > 0:
                raise InvalidArgumentError(f"{name} must be positive, got {getattr(self, name)}")
        if self.eta > 1 or self.epsilon > 1:
            raise InvalidArgumentError(f"eta and epsilon must not exceed 1, got {self.eta} and {self.epsilon}")
        if self.fail_prob >= 1:
            raise InvalidArgumentError(f"fail_prob must lie in (0, 1), got {self.fail_prob}")
        if self.reference_column < 1:
            raise InvalidArgumentError(f"reference_column is 1-based, got {self.reference_column}")

    def tightened(self, factor: float) -> LearnConfig:
        return dataclasses.replace(self, eta=self.eta / factor, epsilon=self.epsilon / factor)

    @classmethod
    def from_dict(cls, config: dict) -> LearnConfig:
        """Accepts camelCase (config files) or snake_case keys."""
        values = {}
        for f in dataclasses.fields(cls):
            camel = f.name.split("_")[0] + "".join(part.capitalize() for part in f.name.split("_")[1:])
            for key in (f.name, camel):
                if config.get(key) is not None:
                    values[f.name] = config[key]
        return cls(**values)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(eq=False)
class SignTable:
    s: np.ndarray
    t: np.ndarray
    reference_column: int = 1


@dataclass(eq=False)
class LearnReport:
    n_modes: int
    level: int = 2
    q_hat: Optional[np.ndarray] = None
    q_ortho: Optional[OrthogonalMatrix] = None
    u_hat: Optional[DenseUnitary] = None
    queries: dict = field(default_factory=dict)
    budget: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    distance_to_truth: Optional[float] = None

    @property
    def flags(self) -> List[str]:
        return self.diagnostics.setdefault("flags", [])

    def to_dict(self) -> dict:
        data = {
            "n_modes": self.n_modes,
            "level": self.level,
            "queries": self.queries,
            "budget": self.budget,
            "diagnostics": _jsonable(self.diagnostics),
            "distance_to_truth": self.distance_to_truth,
        }
        if self.q_hat is not None:
            data["q_hat"] = _jsonable(self.q_hat)
        if self.q_ortho is not None:
            data["q_ortho"] = _jsonable(self.q_ortho.q)
        if self.u_hat is not None:
            data["u_hat"] = self.u_hat.to_json()
        return data


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


def margin_floor(cfg: LearnConfig) -> float:
    """Sign margins below this are flagged; with exact statistics only numerical ties are."""
    return EXACT_MARGIN_FLOOR if cfg.exact_statistics else cfg.margin_threshold


def residual_limit(cfg: LearnConfig) -> float:
    """Largest gap between measured and refitted minors that still counts as consistent."""
    if cfg.exact_statistics:
        return EXACT_MARGIN_FLOOR
    return 2 * cfg.tie_window * (4 * cfg.eta + cfg.epsilon)


# query accounting

def step1_shots(n: int, cfg: LearnConfig) -> int:
    return math.ceil(cfg.hoeffding_constant * math.log(4 * n * n / cfg.fail_prob) / cfg.eta ** 2)


def step2_shots(n: int, cfg: LearnConfig) -> int:
    return math.ceil(cfg.hoeffding_constant * math.log(8 * n * n / cfg.fail_prob) / cfg.epsilon ** 2)


def gaussian_query_budget(n: int, cfg: LearnConfig) -> dict:
    """Closed-form query counts of learn_gaussian."""
    estimators = (n + 1) * (2 * n - 1)
    cross = 2 * n * (2 * n - 1) if n >= 2 else 0
    if cfg.exact_statistics:
        k1 = k2 = 0
    else:
        k1, k2 = step1_shots(n, cfg), step2_shots(n, cfg)
    queries_M = 2 * n * k1 + (estimators + cross) * k2 + 1
    queries_Mdag = 2 * n * k1 + 1
    return {
        "step1_shots_per_row": k1,
        "step2_shots_per_estimator": k2,
        "step2_estimators": estimators,
        "cross_estimators": cross,
        "step1_queries": 4 * n * k1,
        "step2_queries": estimators * k2,
        "cross_queries": cross * k2,
        "step3_queries": 2,
        "queries_M": queries_M,
        "queries_Mdag": queries_Mdag,
        "total": queries_M + queries_Mdag,
    }


def _hierarchy_total(n: int, k: int, cfg: LearnConfig) -> int:
    if k == 2:
        return gaussian_query_budget(n, cfg)["total"]
    return 4 * n * _hierarchy_total(n, k - 1, cfg.tightened(4 * n)) + 1


def hierarchy_query_budget(n: int, k: int, cfg: LearnConfig) -> dict:
    """
    Exact total of learn_hierarchy, T(k) = 4n T(k-1) + 1 with the precision divided
    by 4n per level, next to the closed form (4n)^(k-2) T_2(eta / (4n)^(k-2)).
    """
    if not 2 <= k <= MAX_HIERARCHY_LEVEL:
        raise DepthLimitError(f"Hierarchy level must lie in [2, {MAX_HIERARCHY_LEVEL}], got {k}")
    scale = (4 * n) ** (k - 2)
    budget = {
        "total": _hierarchy_total(n, k, cfg),
        "closed_form": scale * gaussian_query_budget(n, cfg.tightened(scale))["total"],
    }
    if k == 2:
        budget.update(gaussian_query_budget(n, cfg))
    return budget


# step 1

def learn_unsigned(oracle: UnitaryOracle, cfg: LearnConfig) -> np.ndarray:
    """Q_tilde_{mu nu} = sqrt of the empirical frequency of nu when measuring row mu."""
    d = 2 * oracle.n_modes
    q_tilde = np.zeros((d, d))
    shots = step1_shots(oracle.n_modes, cfg)
    for mu in range(1, d + 1):
        if cfg.exact_statistics:
            q_tilde[mu - 1] = np.sqrt(oracle.step1_distribution(mu))
        else:
            q_tilde[mu - 1] = np.sqrt(oracle.step1_counts(mu, shots) / shots)
    return q_tilde


def choose_reference_column(q_tilde: np.ndarray, cfg: LearnConfig) -> int:
    if not cfg.adaptive_reference:
        return cfg.reference_column
    pair_minimum = np.minimum(q_tilde[0::2], q_tilde[1::2]).min(axis=0)
    return int(np.argmax(pair_minimum)) + 1


# step 2

def _correlation_estimator(oracle: UnitaryOracle, cfg: LearnConfig):
    shots = step2_shots(oracle.n_modes, cfg)

    def estimate(k: int, prep: int, j: int) -> float:
        if cfg.exact_statistics:
            return oracle.correlation_mean(k, prep, j)
        return oracle.correlation_average(k, prep, shots, j)

    return estimate


def estimate_c(oracle: UnitaryOracle, cfg: LearnConfig, reference_column: Optional[int] = None) -> np.ndarray:
    """
    C_tilde[l - 1, k - 1] estimates det(Q|{2l-1, 2l},{j, k}) for the reference column j.

    Only the n x (2n - 1) minors with k != j are measured. They are returned in an
    n x 2n array indexed by the actual column k, with column j left at zero.
    """
    n = oracle.n_modes
    j = reference_column or cfg.reference_column
    estimate = _correlation_estimator(oracle, cfg)

    c_tilde = np.zeros((n, 2 * n))
    for k in range(1, 2 * n + 1):
        if k == j:
            continue
        vacuum = estimate(k, 0, j)
        for l in range(1, n + 1):
            c_tilde[l - 1, k - 1] = 0.5 * (estimate(k, l, j) - vacuum)
    return c_tilde


def choose_cross_references(q_tilde: np.ndarray, c_tilde: np.ndarray, cfg: LearnConfig,
                            reference_column: Optional[int] = None) -> List[int]:
    """
    A second reference column c_l for every pair, 1-based.

    c_l is the column with the largest |C_tilde[l, k]|, the one least parallel to the
    reference column within the pair. A pair whose minors all sit at noise level
    falls back to its heaviest column.
    """
    ref = (reference_column or cfg.reference_column) - 1
    d = q_tilde.shape[0]
    floor = SIGN_TIE_TOLERANCE if cfg.exact_statistics else cfg.tie_window * (4 * cfg.eta + cfg.epsilon)
    columns = []
    for l in range(d // 2):
        if np.abs(c_tilde[l]).max() > floor:
            score = np.abs(c_tilde[l]).copy()
        else:
            score = q_tilde[2 * l] ** 2 + q_tilde[2 * l + 1] ** 2
        score[ref] = -np.inf
        columns.append(int(np.argmax(score)) + 1)
    return columns


def estimate_cross_minors(oracle: UnitaryOracle, cfg: LearnConfig, cross_references: List[int]) -> np.ndarray:
    """
    E_tilde[l - 1, k - 1] estimates det(Q|{2l-1, 2l},{c_l, k}) for the cross column c_l
    of pair l; column c_l is left at zero. Each pair uses its own vacuum estimate, so
    the cost is 2 (2n - 1) estimators per pair whatever the columns are.
    """
    n = oracle.n_modes
    estimate = _correlation_estimator(oracle, cfg)
    e_tilde = np.zeros((n, 2 * n))
    for l, c in enumerate(cross_references, start=1):
        for k in range(1, 2 * n + 1):
            if k != c:
                e_tilde[l - 1, k - 1] = 0.5 * (estimate(k, l, c) - estimate(k, 0, c))
    return e_tilde


# sign fixing

# (s_{2l, k}, s_{2l-1, k}) candidates, (+, +) first so that exact ties resolve to it
_SIGN_CANDIDATES = ((1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0))


def _orthogonality_defect(q: np.ndarray) -> float:
    return float(np.sum((q @ q.T - np.eye(q.shape[0])) ** 2))


def _pair_flip(q: np.ndarray, l: int, ref: int) -> np.ndarray:
    flipped = q.copy()
    columns = np.arange(q.shape[1]) != ref
    flipped[2 * l: 2 * l + 2, columns] *= -1
    return flipped


def _align_pairs(q_bar: np.ndarray, ref: int) -> Tuple[np.ndarray, List[float], List[int]]:
    """
    Orient every pair of rows against the pairs before it.

    Flipping a pair negates all its entries outside the reference column; the
    orientation with the smaller cross inner products with earlier rows wins.
    """
    margins = []
    flipped_pairs = []
    for l in range(1, q_bar.shape[0] // 2):
        earlier = q_bar[: 2 * l]
        kept = np.sum((q_bar[2 * l: 2 * l + 2] @ earlier.T) ** 2)
        flipped_rows = _pair_flip(q_bar, l, ref)[2 * l: 2 * l + 2]
        flipped = np.sum((flipped_rows @ earlier.T) ** 2)
        if flipped < kept - SIGN_TIE_TOLERANCE:
            q_bar = _pair_flip(q_bar, l, ref)
            flipped_pairs.append(l)
        margins.append(abs(kept - flipped))
    return q_bar, margins, flipped_pairs


def fix_signs(q_tilde: np.ndarray, c_tilde: np.ndarray, cfg: LearnConfig, reference_column: Optional[int] = None,
              diagnostics: Optional[dict] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Choose the sign of every entry of Q_tilde from the estimated minors C_tilde.

    For each pair l and column k the four candidates
    s_{2l,k} a - s_{2l-1,k} b with a = Q_tilde_{2l-1,j} Q_tilde_{2l,k} and
    b = Q_tilde_{2l,j} Q_tilde_{2l-1,k} are compared with C_tilde[l, k]. Returns
    Q_bar and the n x 2n margins (gap to the nearest candidate predicting a different minor,
    infinite in the reference column). Pairs are then aligned with each other and
    near-tied candidates are settled by the orthogonality of Q_bar.
    """
    q_tilde = np.asarray(q_tilde, dtype=float)
    d = q_tilde.shape[0]
    n = d // 2
    ref = (reference_column or cfg.reference_column) - 1
    window = cfg.tie_window * (4 * cfg.eta + cfg.epsilon)

    s = np.ones((d, d))
    margins = np.full((n, d), np.inf)
    tied = {}
    for l in range(n):
        odd, even = 2 * l, 2 * l + 1
        for k in range(d):
            if k == ref:
                continue
            a = q_tilde[odd, ref] * q_tilde[even, k]
            b = q_tilde[even, ref] * q_tilde[odd, k]
            values = np.array([s_even * a - s_odd * b for s_even, s_odd in _SIGN_CANDIDATES])
            distances = np.abs(values - c_tilde[l, k])
            best = int(np.flatnonzero(distances <= distances.min() + SIGN_TIE_TOLERANCE)[0])
            s[even, k], s[odd, k] = _SIGN_CANDIDATES[best]
            # candidates predicting the same minor are not competitors
            rivals = distances[np.abs(values - values[best]) > SIGN_TIE_TOLERANCE]
            if rivals.size:
                margins[l, k] = rivals.min() - distances[best]
            close = [c for c in np.argsort(distances, kind="stable") if distances[c] <= distances[best] + window]
            if len(close) > 1:
                tied[(l, k)] = [_SIGN_CANDIDATES[c] for c in close]

    q_bar = s * q_tilde
    # orientation[l] = -1 once pair l has been flipped relative to the candidate list
    orientation = np.ones(n)
    q_bar, alignment_margins, flipped = _align_pairs(q_bar, ref)
    orientation[flipped] *= -1
    switched = 0
    if cfg.orthogonal_tiebreak and tied:
        for _ in range(MAX_TIEBREAK_ROUNDS):
            changed = False
            current = _orthogonality_defect(q_bar)
            for (l, k), candidates in tied.items():
                odd, even = 2 * l, 2 * l + 1
                for (s_even, s_odd), flip in itertools.product(candidates, (False, True)):
                    trial = q_bar.copy()
                    trial[even, k] = orientation[l] * s_even * q_tilde[even, k]
                    trial[odd, k] = orientation[l] * s_odd * q_tilde[odd, k]
                    if flip:
                        trial = _pair_flip(trial, l, ref)
                    value = _orthogonality_defect(trial)
                    if value < current - SIGN_TIE_TOLERANCE:
                        q_bar, current, changed = trial, value, True
                        switched += 1
                        if flip:
                            orientation[l] *= -1
            q_bar, alignment_margins, flipped = _align_pairs(q_bar, ref)
            orientation[flipped] *= -1
            if not (changed or flipped):
                break

    if diagnostics is not None:
        finite = margins[np.isfinite(margins)]
        diagnostics["sign_margins"] = margins
        diagnostics["min_sign_margin"] = float(finite.min()) if finite.size else math.inf
        diagnostics["alignment_margins"] = alignment_margins
        diagnostics["tied_entries"] = len(tied)
        diagnostics["tiebreak_switches"] = switched
        diagnostics["orthogonality_defect"] = _orthogonality_defect(q_bar)
    return q_bar, margins


def sign_table(q_bar: np.ndarray, q_tilde: np.ndarray, t=None) -> SignTable:
    s = np.where(q_bar * np.sign(q_tilde) < 0, -1.0, 1.0)
    return SignTable(s, np.ones(q_bar.shape[0]) if t is None else np.asarray(t, dtype=float))


@dataclass(eq=False)
class _PairFit:
    rows: np.ndarray
    total: float
    worst: float
    column_margin: float


def _ordered_candidates(current: Tuple[float, float]) -> List[Tuple[float, float]]:
    return [current] + [c for c in _SIGN_CANDIDATES if c != current]


def _fit_pair(magnitudes: np.ndarray, signs: np.ndarray, c_row: np.ndarray, e_row: np.ndarray, ref: int,
              cross: int, cross_signs: Tuple[float, float], tau: float) -> _PairFit:
    """
    Best column-by-column fit of one pair to both stars, for fixed signs in the
    cross column and a fixed sign tau of the cross star.
    """
    d = magnitudes.shape[1]
    top, bottom = magnitudes
    chosen = np.ones((2, d))
    chosen[1, cross], chosen[0, cross] = cross_signs
    top_cross, bottom_cross = chosen[0, cross] * top[cross], chosen[1, cross] * bottom[cross]
    minor = top[ref] * bottom_cross - top_cross * bottom[ref]
    residuals = [minor - c_row[cross], -minor - e_row[ref]]
    margin = math.inf
    for k in range(d):
        if k in (ref, cross):
            continue
        candidates = _ordered_candidates((signs[1, k], signs[0, k]))
        predictions = np.array([(top[ref] * s_even * bottom[k] - s_odd * top[k] * bottom[ref],
                                 top_cross * s_even * bottom[k] - s_odd * top[k] * bottom_cross)
                                for s_even, s_odd in candidates])
        distances = np.linalg.norm(predictions - (c_row[k], tau * e_row[k]), axis=1)
        best = int(np.flatnonzero(distances <= distances.min() + SIGN_TIE_TOLERANCE)[0])
        chosen[1, k], chosen[0, k] = candidates[best]
        residuals.extend(predictions[best] - (c_row[k], tau * e_row[k]))
        rivals = distances[np.linalg.norm(predictions - predictions[best], axis=1) > SIGN_TIE_TOLERANCE]
        if rivals.size:
            margin = min(margin, float(rivals.min() - distances[best]))
    rows = chosen * magnitudes
    if tau < 0:
        rows[:, np.arange(d) != ref] *= -1
    residuals = np.array(residuals)
    return _PairFit(rows, float(residuals @ residuals), float(np.abs(residuals).max()), margin)


def _row_sign_equivalent(a: np.ndarray, b: np.ndarray) -> bool:
    return all(min(np.abs(x - y).max(), np.abs(x + y).max()) <= SIGN_TIE_TOLERANCE for x, y in zip(a, b))


def resolve_pairs(q_bar: np.ndarray, c_tilde: np.ndarray, e_tilde: np.ndarray, cross_references: List[int],
                  cfg: LearnConfig, reference_column: Optional[int] = None,
                  diagnostics: Optional[dict] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Settle the signs of every pair of rows against two stars of minors.

    Pair l is fitted jointly to C_tilde[l] (reference column j) and E_tilde[l] (its cross
    column c_l), trying all signs of column c_l. Relative to a Q_bar whose reference
    column is nonnegative, the cross star is only known up to tau_l = t_{2l-1} t_{2l}, so
    both values are tried and a pair fitted with tau_l = -1 is flipped in every
    non-reference column. Every pair then equals its rows of Q up to row signs, so
    no alignment between pairs is needed. Exact ties keep the signs of Q_bar.

    Returns the new Q_bar and per-pair margins: the smaller of the gap to the best
    fit giving a pair that is not a row-sign flip of the chosen one, and the gap to
    the nearest rival candidate in any single column.
    """
    q_bar = np.asarray(q_bar, dtype=float)
    n = q_bar.shape[0] // 2
    ref = (reference_column or cfg.reference_column) - 1
    magnitudes = np.abs(q_bar)
    signs = np.where(q_bar < 0, -1.0, 1.0)
    resolved = q_bar.copy()
    margins = np.full(n, np.inf)
    worst = np.zeros(n)
    orientations = np.ones(n)
    for l in range(n):
        pair = slice(2 * l, 2 * l + 2)
        cross = cross_references[l] - 1
        current = (signs[2 * l + 1, cross], signs[2 * l, cross])
        fits = [(tau, _fit_pair(magnitudes[pair], signs[pair], c_tilde[l], e_tilde[l], ref, cross, cross_signs, tau))
                for tau, cross_signs in itertools.product((1.0, -1.0), _ordered_candidates(current))]
        lowest = min(fit.total for _, fit in fits)
        tau, best = next((tau, fit) for tau, fit in fits if fit.total <= lowest + SIGN_TIE_TOLERANCE)
        rivals = [math.sqrt(fit.total) for _, fit in fits if not _row_sign_equivalent(fit.rows, best.rows)]
        margins[l] = min([best.column_margin] + [r - math.sqrt(best.total) for r in rivals])
        worst[l] = best.worst
        orientations[l] = tau
        resolved[pair] = best.rows

    if diagnostics is not None:
        diagnostics["cross_references"] = list(cross_references)
        diagnostics["pair_margins"] = margins
        diagnostics["pair_orientations"] = orientations
        diagnostics["minor_residual"] = float(worst.max()) if n else 0.0
    return resolved, margins


def fix_row_signs(oracle: UnitaryOracle, q_bar: np.ndarray) -> np.ndarray:
    """One step-3 measurement S; rows are multiplied by t_mu = (-1)^{|S| - [mu in S]}."""
    outcome = oracle.step3_measure(q_bar)
    return row_signs_from_outcome(outcome, q_bar.shape[0])[:, None] * q_bar


def learn_gaussian(oracle: UnitaryOracle, cfg: LearnConfig) -> LearnReport:
    n = oracle.n_modes
    start = oracle.counters()
    log(f"* Learning Gaussian operation on {n} modes (eta={cfg.eta:g}, epsilon={cfg.epsilon:g})")

    q_tilde = learn_unsigned(oracle, cfg)
    j = choose_reference_column(q_tilde, cfg)
    log(f"        > Step 1 done, reference column {j}")
    c_tilde = estimate_c(oracle, cfg, j)
    diagnostics = {"reference_column": j, "flags": []}
    q_bar, _ = fix_signs(q_tilde, c_tilde, cfg, j, diagnostics=diagnostics)
    if n >= 2:
        cross = choose_cross_references(q_tilde, c_tilde, cfg, j)
        e_tilde = estimate_cross_minors(oracle, cfg, cross)
        q_bar, pair_margins = resolve_pairs(q_bar, c_tilde, e_tilde, cross, cfg, j, diagnostics=diagnostics)
        decisive_margin = float(pair_margins.min())
    else:
        decisive_margin = diagnostics["min_sign_margin"]
    log("        > Step 2 done")
    q_hat = fix_row_signs(oracle, q_bar)
    outcome = oracle.last_shot.outcome
    diagnostics["row_sign_outcome"] = list(outcome)
    table = sign_table(q_bar, q_tilde, row_signs_from_outcome(outcome, 2 * n))
    diagnostics["sign_table"] = {"s": table.s, "t": table.t}
    q_ortho = project_orthogonal(q_hat)
    log("        > Step 3 done")

    diagnostics["decisive_margin"] = decisive_margin
    if decisive_margin < margin_floor(cfg):
        diagnostics["flags"].append("low_sign_margin")
    if diagnostics.get("minor_residual", 0.0) > residual_limit(cfg):
        diagnostics["flags"].append("inconsistent_minors")
    if n == 1:
        diagnostics["flags"].append("orientation_ambiguous")

    end = oracle.counters()
    queries = {key: end[key] - start[key] for key in end}
    queries["total"] = queries["queries_M"] + queries["queries_Mdag"]
    return LearnReport(n, 2, q_hat=q_hat, q_ortho=q_ortho, queries=queries,
                       budget=gaussian_query_budget(n, cfg), diagnostics=diagnostics)


def learn_from_gibbs(source: GibbsStateSource, cfg: LearnConfig) -> AntisymmetricGenerator:
    """
    Estimate the n(2n-1) independent correlations of the Gibbs state and invert
    Gamma = -tan(2h) blockwise: a block g*J of Gamma gives h block -arctanh(g)/2 * J.
    """
    n = source.n_modes
    d = 2 * n
    shots = math.ceil(cfg.hoeffding_constant * math.log(2 * n * (2 * n - 1) / cfg.fail_prob) / cfg.epsilon ** 2)
    gamma = np.zeros((d, d))
    for j in range(1, d + 1):
        for k in range(j + 1, d + 1):
            value = source.mean(j, k) if cfg.exact_statistics else source.average(j, k, shots)
            gamma[j - 1, k - 1] = value
            gamma[k - 1, j - 1] = -value
    if np.linalg.norm(gamma, 2) >= 1.0:
        warnings.warn("Correlation estimate has singular values >= 1, clipping before inversion",
                      ClippedCorrelationWarning)

    def inverse(g: float) -> float:
        g = float(np.clip(g, -CORRELATION_CLIP, CORRELATION_CLIP))
        return -0.5 * math.atanh(g)

    return AntisymmetricGenerator(n, antisymmetric_function(gamma, inverse))


# hierarchy

def membership_level2(u: DenseUnitary) -> bool:
    """True iff U maps every gamma_mu into the span of the gamma_nu by an orthogonal matrix."""
    n = u.n_qubits
    q = extract_q(u)
    if np.max(np.abs(q @ q.T - np.eye(2 * n))) > MEMBERSHIP_TOLERANCE:
        return False
    gammas = [monomial_matrix(1 << mu, n) for mu in range(2 * n)]
    for mu in range(2 * n):
        image = u.conjugate(gammas[mu])
        expected = np.tensordot(q[mu], np.array(gammas), axes=1)
        if np.max(np.abs(image - expected)) > MEMBERSHIP_TOLERANCE:
            return False
    return True


def membership_level_k(u: DenseUnitary, k: int) -> bool:
    if not 2 <= k <= MAX_HIERARCHY_LEVEL:
        raise DepthLimitError(f"Membership tests are limited to levels 2 .. {MAX_HIERARCHY_LEVEL}, got {k}")
    if k == 2:
        return membership_level2(u)
    n = u.n_qubits
    return all(membership_level_k(DenseUnitary(n, u.conjugate(monomial_matrix(1 << mu, n))), k - 1)
               for mu in range(2 * n))


def phase_align(w_est: DenseUnitary, tol: float) -> Tuple[DenseUnitary, bool]:
    """
    Remove the global phase of an estimate of a Hermitian unitary.

    The largest coefficient c_S* is rotated onto the real axis; the remaining sign
    is fixed by c_empty >= 0 when |c_empty| > tol. Returns (aligned, ambiguous),
    where ambiguous means the sign could not be fixed.
    """
    coefficients = pauli_decompose(w_est).values
    magnitudes = np.abs(coefficients)
    if magnitudes.max() < tol:
        raise DegenerateEstimateError(f"All coefficients of the estimate are below {tol}")
    star = int(np.argmax(magnitudes))
    rotation = np.exp(-1j * np.angle(coefficients[star]))
    aligned = rotation * w_est.matrix
    identity_coefficient = rotation * coefficients[0]
    if abs(identity_coefficient) > tol:
        if identity_coefficient.real < 0:
            aligned = -aligned
        return DenseUnitary(w_est.n_qubits, aligned), False
    return DenseUnitary(w_est.n_qubits, aligned), True


def learn_hierarchy(oracle: UnitaryOracle, k: int, cfg: LearnConfig) -> LearnReport:
    """
    Learn M in the level-k Matchgate Hierarchy.

    Each M_mu = M gamma_mu M^dagger is a level-(k-1) element and is learned through
    its sub-oracle at precision divided by 4n. The phase-aligned estimates fix
    M up to a monomial gamma_S, which one final measurement removes.
    """
    if not 2 <= k <= MAX_HIERARCHY_LEVEL:
        raise DepthLimitError(f"Hierarchy level must lie in [2, {MAX_HIERARCHY_LEVEL}], got {k}")
    n = oracle.n_modes
    if k == 2:
        report = learn_gaussian(oracle, cfg)
        if n <= dense_limit():
            report.u_hat = canonicalize_phase(gaussian_unitary(report.q_ortho))
        return report
    if oracle.backend != "dense":
        raise InvalidArgumentError("Hierarchy learning above level 2 needs a dense-backend oracle")

    start = oracle.counters()
    log(f"* Learning level-{k} operation on {n} modes")
    sub_cfg = cfg.tightened(4 * n)
    action = []
    ambiguous = []
    sub_flags = []
    for mu in range(1, 2 * n + 1):
        sub_report = learn_hierarchy(oracle.sub_oracle(mu), k - 1, sub_cfg)
        aligned, is_ambiguous = phase_align(sub_report.u_hat, cfg.phase_tolerance)
        action.append(aligned)
        ambiguous.append(is_ambiguous)
        sub_flags.append(sub_report.flags)
        log(f"        > Level {k - 1} image of gamma_{mu} learned")

    diagnostics = {"ambiguous_phases": ambiguous, "sub_flags": sub_flags, "flags": []}
    try:
        w, residual = reconstruct_from_action(action)
    except InconsistentActionError as e:
        raise InconsistentRecursionError(str(e), diagnostics) from e
    diagnostics["reconstruction_residual"] = residual
    if residual > RECONSTRUCTION_RESIDUAL_LIMIT:
        raise InconsistentRecursionError(f"Reconstruction residual {residual:.3g} exceeds "
                                         f"{RECONSTRUCTION_RESIDUAL_LIMIT}", diagnostics)

    outcome = oracle.hierarchy_phase_measure(w)
    diagnostics["phase_outcome"] = list(outcome)
    u_hat = canonicalize_phase(w.matrix @ monomial_matrix(support_to_mask(outcome), n))
    if any(ambiguous):
        diagnostics["flags"].append("ambiguous_phase_alignment")

    end = oracle.counters()
    queries = {key: end[key] - start[key] for key in end}
    queries["total"] = queries["queries_M"] + queries["queries_Mdag"]
    return LearnReport(n, k, u_hat=u_hat, queries=queries, budget=hierarchy_query_budget(n, k, cfg),
                       diagnostics=diagnostics)
