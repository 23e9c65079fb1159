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
Seeded Monte-Carlo experiments.

Trials are cut into fixed-size chunks. Every chunk draws from its own child of
a SeedSequence keyed by the experiment seed and the grid cell, so results do
not depend on the number of worker processes.
"""

from __future__ import annotations

import dataclasses
import itertools
import json
import math
import multiprocessing
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import bottleneck as bn
import numpy as np
import xarray as xr

from ._version import __version__
from .blackbox import UnitaryOracle
from .dense_oracle import dense_limit, distance_D, gaussian_unitary, unitary_from_h
from .diagnostics import PerformanceTimer, current_memory_usage_mb, log
from .errors import BranchAmbiguityError, InvalidArgumentError
from .gaussian import (
    GATE_COUNT_CONSTANT,
    OrthogonalMatrix,
    compile_to_givens,
    h_from_q,
    haar_orthogonal,
    haar_orthogonal_batch,
    haar_special_orthogonal,
    project_orthogonal,
)
from .learner import LearnConfig, gaussian_query_budget, learn_gaussian, step1_shots, step2_shots
from .majorana import support_to_mask

EXPERIMENT_KINDS = ("sign_bound_mc", "logm_error_mc", "learn_benchmark", "oracle_check", "compile_check")
DEFAULT_KAPPA_GRID = tuple(float(k) for k in np.logspace(-6, -2, 9))
DEFAULT_ETA_GRID = (1e-4, 3e-4, 1e-3, 3e-3, 1e-2)
DEFAULT_CHUNK_SIZE = 1000
MIN_DECADE_HITS = 30
# slopes of log CDF against log kappa that are compatible with the sqrt(kappa) and kappa^(1/3) bounds
SIGN_SLOPE_FLOORS = {"F1": 0.45, "F2": 0.45, "F3": 0.30}
ORACLE_TV_LIMIT = 1e-6
LOGM_EXPONENT_RANGE = (0.85, 1.15)
LOGM_HEADROOM = 3.0


@dataclass
class ExperimentSpec:
    kind: str
    n_list: List[int] = field(default_factory=lambda: [2])
    trial_count: int = 1000
    kappa_grid: List[float] = field(default_factory=lambda: list(DEFAULT_KAPPA_GRID))
    eta_grid: List[float] = field(default_factory=lambda: list(DEFAULT_ETA_GRID))
    seed: int = 0
    output_path: Optional[str] = None
    format: str = "jsonl"
    threads: int = 1
    chunk_size: int = DEFAULT_CHUNK_SIZE
    epsilon: Optional[float] = None
    fail_prob: float = 0.05
    hoeffding_constant: float = 0.5
    success_multiple: float = 5.0

    def __post_init__(self) -> None:
        if self.kind not in EXPERIMENT_KINDS:
            raise InvalidArgumentError(f"Unknown experiment kind {self.kind!r}, expected one of {EXPERIMENT_KINDS}")
        if self.trial_count < 1:
            raise InvalidArgumentError(f"trial_count must be at least 1, got {self.trial_count}")
        if not self.n_list or min(self.n_list) < 1:
            raise InvalidArgumentError(f"n_list must contain positive mode counts, got {self.n_list}")
        for name in ("kappa_grid", "eta_grid"):
            grid = list(getattr(self, name))
            if not grid or min(grid) <= 0 or grid != sorted(grid):
                raise InvalidArgumentError(f"{name} must be strictly positive and sorted, got {grid}")
        if self.format not in ("jsonl", "csv"):
            raise InvalidArgumentError(f"Unknown output format {self.format!r}")
        if self.threads < 1 or self.chunk_size < 1:
            raise InvalidArgumentError("threads and chunk_size must be positive")

    def learn_config(self, eta: float) -> LearnConfig:
        return LearnConfig(eta=eta, epsilon=self.epsilon, fail_prob=self.fail_prob,
                           hoeffding_constant=self.hoeffding_constant)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentSpec:
        names = {f.name for f in dataclasses.fields(cls)}
        return cls(**{key: value for key, value in data.items() if key in names})


@dataclass
class ExperimentRecord:
    spec: ExperimentSpec
    table: xr.Dataset
    summary: dict
    passed: bool
    wall_clock_seconds: float = 0.0
    memory_mb: float = 0.0
    version: str = __version__

    def rows(self) -> List[dict]:
        """Table rows in the fixed column order of the dataset variables."""
        frame = self.table.to_dataframe().reset_index()
        return [{key: _plain(value) for key, value in row.items()} for row in frame.to_dict("records")]

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "table": self.rows(),
            "summary": _plain(self.summary),
            "passed": self.passed,
            "stamp": {"version": self.version, "wall_clock_seconds": self.wall_clock_seconds,
                      "memory_mb": self.memory_mb},
        }


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def write_record(record: ExperimentRecord, path: str, fmt: str = "jsonl") -> None:
    if fmt == "jsonl":
        with open(path, "a") as output_file:
            output_file.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")
    elif fmt == "csv":
        record.table.to_dataframe().reset_index().to_csv(path, index=False)
    else:
        raise InvalidArgumentError(f"Unknown output format {fmt!r}")


def read_records(path: str) -> List[dict]:
    with open(path, "r") as input_file:
        return [json.loads(line) for line in input_file if line.strip()]


# chunked, seeded execution

def _chunks(spec: ExperimentSpec, *cell) -> List[tuple]:
    """(count, seed sequence) per chunk of one grid cell."""
    root = np.random.SeedSequence(spec.seed, spawn_key=tuple(int(c) for c in cell))
    sizes = [spec.chunk_size] * (spec.trial_count // spec.chunk_size)
    if spec.trial_count % spec.chunk_size:
        sizes.append(spec.trial_count % spec.chunk_size)
    return list(zip(sizes, root.spawn(len(sizes))))


def _run_tasks(worker, tasks: Sequence[tuple], threads: int) -> list:
    if threads > 1 and len(tasks) > 1:
        with multiprocessing.Pool(threads) as pool:
            return pool.starmap(worker, tasks)
    return list(itertools.starmap(worker, tasks))


def fit_loglog_slope(kappa_grid, hits, total: int) -> float:
    """
    Least-squares slope of log CDF against log kappa.

    The smallest decade of kappa is dropped while the hit count at its largest
    kappa is below MIN_DECADE_HITS.
    """
    kappa = np.asarray(kappa_grid, dtype=float)
    hits = np.asarray(hits, dtype=float)
    decades = np.floor(np.log10(kappa) + 1e-9)
    keep = np.ones(kappa.size, dtype=bool)
    for decade in np.unique(decades):
        members = decades == decade
        if hits[members].max() >= MIN_DECADE_HITS:
            break
        keep &= ~members
    keep &= hits > 0
    if keep.sum() < 2:
        return math.nan
    slope, _ = np.polyfit(np.log(kappa[keep]), np.log(hits[keep] / total), 1)
    return float(slope)


# sign margins

def sign_statistics(q: np.ndarray) -> np.ndarray:
    """F1 = |Q11 Q22|, F2 = |Q21 Q12|, F3 = |Q11 Q22 - Q21 Q12| for a stack of matrices."""
    a = q[:, 0, 0] * q[:, 1, 1]
    b = q[:, 1, 0] * q[:, 0, 1]
    return np.stack((np.abs(a), np.abs(b), np.abs(a - b)), axis=1)


def _sign_bound_chunk(n: int, count: int, seed: np.random.SeedSequence) -> np.ndarray:
    return sign_statistics(haar_orthogonal_batch(n, count, np.random.default_rng(seed)))


def run_sign_bound_mc(spec: ExperimentSpec) -> ExperimentRecord:
    timer = PerformanceTimer()
    kappa = np.asarray(spec.kappa_grid, dtype=float)
    hits = np.zeros((len(spec.n_list), 3, kappa.size), dtype=np.int64)
    for i, n in enumerate(spec.n_list):
        log(f"* Sign statistics for n = {n}, {spec.trial_count} trials")
        tasks = [(n, count, seed) for count, seed in _chunks(spec, n)]
        values = np.concatenate(_run_tasks(_sign_bound_chunk, tasks, spec.threads))
        hits[i] = (values[:, :, None] < kappa[None, None, :]).sum(axis=0)
    cdf = hits / spec.trial_count
    statistic = list(SIGN_SLOPE_FLOORS)
    table = xr.Dataset(
        {"cdf": (("n", "statistic", "kappa"), cdf), "hits": (("n", "statistic", "kappa"), hits)},
        coords={"n": spec.n_list, "statistic": statistic, "kappa": kappa},
    )
    slopes = {f"n={n}": {name: fit_loglog_slope(kappa, hits[i, s], spec.trial_count) for s, name in enumerate(statistic)}
              for i, n in enumerate(spec.n_list)}
    monotone = bool(np.all(np.diff(cdf, axis=2) >= 0))
    # undetermined slopes (too few hits) do not fail the run
    slopes_ok = all(math.isnan(value) or value >= SIGN_SLOPE_FLOORS[name]
                    for per_n in slopes.values() for name, value in per_n.items())
    summary = {"slopes": slopes, "slope_floors": SIGN_SLOPE_FLOORS, "monotone": monotone}
    return ExperimentRecord(spec, table, summary, monotone and slopes_ok, timer.seconds_since_start(),
                            current_memory_usage_mb())


# matrix-logarithm error propagation

def logm_error_trial(q: np.ndarray, eta: float, rng: np.random.Generator) -> tuple:
    """
    (D(M_Q, M_Q'), ||log Q' - log Q||_F / 4) for Q' the polar projection of Q plus
    uniform entrywise noise in [-eta, eta].
    """
    n = q.shape[0] // 2
    noisy = q + rng.uniform(-eta, eta, size=q.shape)
    q_prime = project_orthogonal(noisy)
    h = h_from_q(OrthogonalMatrix(n, q))
    h_prime = h_from_q(q_prime)
    distance = distance_D(unitary_from_h(h), unitary_from_h(h_prime))
    return distance, float(np.linalg.norm(4 * (h_prime.h - h.h)) / 4)


def _logm_error_chunk(n: int, eta: float, count: int, seed: np.random.SeedSequence) -> tuple:
    rng = np.random.default_rng(seed)
    distances, bounds = np.zeros(count), np.zeros(count)
    redraws = 0
    for trial in range(count):
        while True:
            q = haar_special_orthogonal(n, rng).q
            try:
                distances[trial], bounds[trial] = logm_error_trial(q, eta, rng)
                break
            except BranchAmbiguityError:
                redraws += 1
    return distances, bounds, redraws


def _fit_power_law(n_values, eta_values, medians) -> dict:
    n_values, eta_values, medians = (np.asarray(v, dtype=float) for v in (n_values, eta_values, medians))
    usable = medians > 0
    if usable.sum() < 3:
        return {"C": math.nan, "a": math.nan, "b": math.nan}
    design = np.stack((np.ones(usable.sum()), np.log(n_values[usable]), np.log(eta_values[usable])), axis=1)
    (log_c, a, b), *_ = np.linalg.lstsq(design, np.log(medians[usable]), rcond=None)
    return {"C": float(math.exp(log_c)), "a": float(a), "b": float(b)}


def run_logm_error_mc(spec: ExperimentSpec) -> ExperimentRecord:
    timer = PerformanceTimer()
    for n in spec.n_list:
        if n > dense_limit():
            raise InvalidArgumentError(f"n = {n} exceeds the dense limit {dense_limit()}")
    shape = (len(spec.n_list), len(spec.eta_grid))
    median, p95, maximum, bound_median, redraws = (np.zeros(shape) for _ in range(5))
    for (i, n), (e, eta) in itertools.product(enumerate(spec.n_list), enumerate(spec.eta_grid)):
        log(f"* Matrix-log error for n = {n}, eta = {eta:g}")
        tasks = [(n, eta, count, seed) for count, seed in _chunks(spec, n, e)]
        results = _run_tasks(_logm_error_chunk, tasks, spec.threads)
        distances = np.concatenate([r[0] for r in results])
        bounds = np.concatenate([r[1] for r in results])
        median[i, e] = bn.nanmedian(distances)
        p95[i, e] = np.percentile(distances, 95)
        maximum[i, e] = bn.nanmax(distances)
        bound_median[i, e] = bn.nanmedian(bounds)
        redraws[i, e] = sum(r[2] for r in results)
    dims = ("n", "eta")
    table = xr.Dataset(
        {"median_D": (dims, median), "p95_D": (dims, p95), "max_D": (dims, maximum),
         "median_first_order_bound": (dims, bound_median), "redraws": (dims, redraws)},
        coords={"n": spec.n_list, "eta": spec.eta_grid},
    )
    n_grid, eta_grid = np.meshgrid(spec.n_list, spec.eta_grid, indexing="ij")
    summary = {"fit": _fit_power_law(n_grid.ravel(), eta_grid.ravel(), median.ravel())}
    exponents = {}
    for i, n in enumerate(spec.n_list):
        if len(spec.eta_grid) >= 2 and np.all(median[i] > 0):
            exponents[f"n={n}"] = float(np.polyfit(np.log(spec.eta_grid), np.log(median[i]), 1)[0])
    summary["eta_exponents"] = exponents
    passed = all(LOGM_EXPONENT_RANGE[0] <= b <= LOGM_EXPONENT_RANGE[1] for b in exponents.values())
    if 2 in spec.n_list:
        row = spec.n_list.index(2)
        c2 = float(np.max(p95[row] / (8 * np.asarray(spec.eta_grid))))
        envelope = LOGM_HEADROOM * c2 * (n_grid ** 3) * eta_grid
        summary["C2"] = c2
        summary["envelope_ok"] = bool(np.all(p95 <= envelope))
        passed = passed and summary["envelope_ok"]
    return ExperimentRecord(spec, table, summary, passed, timer.seconds_since_start(), current_memory_usage_mb())


# learning benchmark

def _learn_trial(n: int, eta: float, cfg: dict, count: int, seed: np.random.SeedSequence) -> np.ndarray:
    """Columns: max entry error, success, accounting match, min sign margin, D (nan above the dense limit)."""
    rng = np.random.default_rng(seed)
    config = LearnConfig.from_dict(cfg)
    out = np.zeros((count, 5))
    for trial in range(count):
        q = haar_orthogonal(n, rng)
        oracle = UnitaryOracle.analytic(q, seed=int(rng.integers(0, 2 ** 63 - 1)))
        report = learn_gaussian(oracle, config)
        error = float(np.max(np.abs(report.q_hat - q.q)))
        accounting = (report.queries["queries_M"] == report.budget["queries_M"]
                      and report.queries["queries_Mdag"] == report.budget["queries_Mdag"])
        distance = math.nan
        if n <= dense_limit():
            distance = distance_D(gaussian_unitary(q), gaussian_unitary(report.q_ortho))
        out[trial] = (error, error <= cfg["success_multiple"] * eta, accounting,
                      report.diagnostics["min_sign_margin"], distance)
    return out


def run_learn_benchmark(spec: ExperimentSpec) -> ExperimentRecord:
    timer = PerformanceTimer()
    shape = (len(spec.n_list), len(spec.eta_grid))
    columns = ("success_rate", "median_error", "queries_total", "step1_shots", "step2_shots",
               "median_min_margin", "median_D", "accounting_ok")
    data = {name: np.zeros(shape) for name in columns}
    for (i, n), (e, eta) in itertools.product(enumerate(spec.n_list), enumerate(spec.eta_grid)):
        log(f"* Learning benchmark for n = {n}, eta = {eta:g}")
        cfg = spec.learn_config(eta)
        cfg_dict = dict(cfg.to_dict(), success_multiple=spec.success_multiple)
        tasks = [(n, eta, cfg_dict, count, seed) for count, seed in _chunks(spec, n, e)]
        results = np.concatenate(_run_tasks(_learn_trial, tasks, spec.threads))
        budget = gaussian_query_budget(n, cfg)
        data["success_rate"][i, e] = results[:, 1].mean()
        data["median_error"][i, e] = bn.nanmedian(results[:, 0])
        data["queries_total"][i, e] = budget["total"]
        data["step1_shots"][i, e] = step1_shots(n, cfg)
        data["step2_shots"][i, e] = step2_shots(n, cfg)
        data["median_min_margin"][i, e] = bn.nanmedian(results[:, 3])
        data["median_D"][i, e] = bn.nanmedian(results[:, 4]) if n <= dense_limit() else math.nan
        data["accounting_ok"][i, e] = results[:, 2].all()
    table = xr.Dataset({name: (("n", "eta"), values) for name, values in data.items()},
                       coords={"n": spec.n_list, "eta": spec.eta_grid})
    summary = {
        "accounting_ok": bool(data["accounting_ok"].all()),
        "success_rates": {f"n={n}": dict(zip(map(str, spec.eta_grid), data["success_rate"][i].tolist()))
                          for i, n in enumerate(spec.n_list)},
    }
    return ExperimentRecord(spec, table, summary, summary["accounting_ok"], timer.seconds_since_start(),
                            current_memory_usage_mb())


# backend equivalence

def _total_variation(p, q) -> float:
    return 0.5 * float(np.sum(np.abs(np.asarray(p) - np.asarray(q))))


def oracle_check_trial(q: OrthogonalMatrix, rng: np.random.Generator) -> tuple:
    """Largest TV distances between the analytic and dense backends for (step 1, step 2, step 3)."""
    n = q.n_modes
    analytic = UnitaryOracle.analytic(q)
    dense = UnitaryOracle.dense_from_q(q)
    step1 = max(_total_variation(analytic.step1_distribution(mu), dense.step1_distribution(mu))
                for mu in range(1, 2 * n + 1))
    # TV between two +-1 variables is half the difference of their means
    step2 = max(0.5 * abs(analytic.correlation_mean(k, prep) - dense.correlation_mean(k, prep))
                for k in range(2, 2 * n + 1) for prep in range(n + 1))
    t = rng.choice([-1.0, 1.0], size=2 * n)
    q_bar = t[:, None] * q.q
    masks, probabilities = dense.step3_distribution(q_bar)
    point_mass = np.zeros(probabilities.size)
    point_mass[support_to_mask(analytic.step3_point_mass(q_bar))] = 1.0
    step3 = _total_variation(point_mass, probabilities[np.argsort(masks)])
    return step1, step2, step3


def _oracle_check_chunk(n: int, count: int, seed: np.random.SeedSequence) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return np.array([oracle_check_trial(haar_orthogonal(n, rng), rng) for _ in range(count)])


def run_oracle_check(spec: ExperimentSpec) -> ExperimentRecord:
    timer = PerformanceTimer()
    worst = np.zeros((len(spec.n_list), 3))
    for i, n in enumerate(spec.n_list):
        if n > dense_limit():
            raise InvalidArgumentError(f"n = {n} exceeds the dense limit {dense_limit()}")
        log(f"* Backend equivalence for n = {n}")
        identity = np.array([oracle_check_trial(OrthogonalMatrix.identity(n), np.random.default_rng(spec.seed))])
        tasks = [(n, count, seed) for count, seed in _chunks(spec, n)]
        results = np.concatenate([identity] + _run_tasks(_oracle_check_chunk, tasks, spec.threads))
        worst[i] = results.max(axis=0)
    table = xr.Dataset({"max_tv": (("n", "primitive"), worst)},
                       coords={"n": spec.n_list, "primitive": ["step1", "correlation", "step3"]})
    max_tv = float(worst.max())
    return ExperimentRecord(spec, table, {"max_tv": max_tv, "tv_limit": ORACLE_TV_LIMIT}, max_tv <= ORACLE_TV_LIMIT,
                            timer.seconds_since_start(), current_memory_usage_mb())


# compiler round trips

def _compile_chunk(n: int, count: int, seed: np.random.SeedSequence) -> np.ndarray:
    rng = np.random.default_rng(seed)
    out = np.zeros((count, 2))
    for trial in range(count):
        q = haar_orthogonal(n, rng)
        circuit = compile_to_givens(q)
        out[trial] = (np.max(np.abs(circuit.orthogonal_matrix().q - q.q)), len(circuit))
    return out


def run_compile_check(spec: ExperimentSpec) -> ExperimentRecord:
    timer = PerformanceTimer()
    worst = np.zeros((len(spec.n_list), 2))
    for i, n in enumerate(spec.n_list):
        tasks = [(n, count, seed) for count, seed in _chunks(spec, n)]
        worst[i] = np.concatenate(_run_tasks(_compile_chunk, tasks, spec.threads)).max(axis=0)
    n_values = np.asarray(spec.n_list, dtype=float)
    table = xr.Dataset({"max_recomposition_error": ("n", worst[:, 0]), "max_gate_count": ("n", worst[:, 1]),
                        "gate_bound": ("n", GATE_COUNT_CONSTANT * n_values ** 3)},
                       coords={"n": spec.n_list})
    passed = bool(np.all(worst[:, 0] <= 1e-8) and np.all(worst[:, 1] <= GATE_COUNT_CONSTANT * n_values ** 3))
    summary = {"gate_count_constant": GATE_COUNT_CONSTANT, "max_recomposition_error": float(worst[:, 0].max())}
    return ExperimentRecord(spec, table, summary, passed, timer.seconds_since_start(), current_memory_usage_mb())


_RUNNERS = {
    "sign_bound_mc": run_sign_bound_mc,
    "logm_error_mc": run_logm_error_mc,
    "learn_benchmark": run_learn_benchmark,
    "oracle_check": run_oracle_check,
    "compile_check": run_compile_check,
}


def run_experiment(spec: ExperimentSpec) -> ExperimentRecord:
    record = _RUNNERS[spec.kind](spec)
    if spec.output_path:
        write_record(record, spec.output_path, spec.format)
    return record
