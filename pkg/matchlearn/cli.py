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

import argparse
import json
import sys

import numpy as np

from .blackbox import UnitaryOracle
from .config import check_setting_types, merge_settings, read_config_file
from .dense_oracle import DenseUnitary, dense_limit, distance_D, gaussian_unitary
from .diagnostics import PerformanceTimer, log, print_current_memory_usage, set_verbose
from .errors import ConfigError, InvalidArgumentError, MatchlearnError
from .experiments import ExperimentSpec, run_experiment
from .gaussian import OrthogonalMatrix, compile_to_givens, haar_orthogonal, load_matrix_csv
from .learner import LearnConfig, learn_gaussian, learn_hierarchy

EXIT_OK = 0
EXIT_EXPERIMENT_FAILED = 1
EXIT_USAGE = 2
DEFAULT_ETA = 0.05

EXPERIMENT_COMMANDS = {
    "bounds-sign": "sign_bound_mc",
    "bounds-error": "logm_error_mc",
    "bench-queries": "learn_benchmark",
    "oracle-check": "oracle_check",
    "compile-check": "compile_check",
}

DEFAULTS = {
    "n": [2],
    "eta": None,
    "epsilon": None,
    "seed": 0,
    "trials": 1000,
    "backend": "analytic",
    "out": None,
    "format": "jsonl",
    "fail_prob": 0.05,
    "hoeffding_constant": 0.5,
    "reference_column": 1,
    "margin_threshold": 1e-4,
    "adaptive_reference": False,
    "orthogonal_tiebreak": True,
    "tie_window": 1.0,
    "phase_tolerance": 1e-3,
    "exact": False,
    "kappa": None,
    "threads": 1,
    "chunk_size": 1000,
    "k": 3,
    "target": "swap",
    "matrix": None,
    "verbose": False,
}


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON or key=value config file; flags override its values")
    common.add_argument("--n", type=int, nargs="+", help="number of modes (several for experiments)")
    common.add_argument("--eta", type=float, nargs="+", help="entry precision (several for experiments)")
    common.add_argument("--epsilon", type=float, help="correlation precision, defaults to eta")
    common.add_argument("--seed", type=int)
    common.add_argument("--trials", type=int)
    common.add_argument("--backend", choices=["analytic", "dense"])
    common.add_argument("--out", help="output file")
    common.add_argument("--format", choices=["jsonl", "csv"])
    common.add_argument("--fail-prob", type=float)
    common.add_argument("--hoeffding-constant", type=float)
    common.add_argument("--reference-column", type=int)
    common.add_argument("--margin-threshold", type=float)
    common.add_argument("--adaptive-reference", action="store_true", default=None)
    common.add_argument("--no-orthogonal-tiebreak", dest="orthogonal_tiebreak", action="store_false", default=None,
                        help="settle near-tied signs by the minors alone")
    common.add_argument("--tie-window", type=float, help="tie window in units of 4 eta + epsilon")
    common.add_argument("--phase-tolerance", type=float, help="identity coefficient below which a phase is ambiguous")
    common.add_argument("--exact", action="store_true", default=None, help="use exact outcome statistics")
    common.add_argument("--threads", type=int)
    common.add_argument("--chunk-size", type=int)
    common.add_argument("--verbose", action="store_true", default=None)
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(prog="matchlearn", description="Learn matchgate operations from black-box access.")
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("learn-gaussian", parents=[common], help="learn a random Gaussian operation")
    hierarchy = commands.add_parser("learn-hierarchy", parents=[common], help="learn a Matchgate Hierarchy element")
    hierarchy.add_argument("--k", type=int, help="hierarchy level (2 .. 4)")
    hierarchy.add_argument("--target", choices=["swap", "cz", "gaussian", "gaussian-swap"])
    compile_command = commands.add_parser("compile", parents=[common], help="compile Q into Givens rotations")
    compile_command.add_argument("--matrix", help="CSV file holding Q (random Haar Q otherwise)")
    for command in EXPERIMENT_COMMANDS:
        experiment = commands.add_parser(command, parents=[common])
        if command == "bounds-sign":
            experiment.add_argument("--kappa", type=float, nargs="+")
    return parser


def _settings(args: argparse.Namespace) -> dict:
    file_settings = read_config_file(args.config) if args.config else {}
    flags = {key: value for key, value in vars(args).items() if key not in ("command", "config")}
    settings = merge_settings(DEFAULTS, file_settings, flags, strict=True)
    check_setting_types(settings, DEFAULTS)
    for key in ("n", "eta", "kappa"):
        if settings[key] is not None and not isinstance(settings[key], list):
            settings[key] = [settings[key]]
    return settings


def _learn_config(settings: dict, eta: float) -> LearnConfig:
    try:
        return LearnConfig(
            eta=eta,
            epsilon=settings["epsilon"],
            fail_prob=settings["fail_prob"],
            hoeffding_constant=settings["hoeffding_constant"],
            reference_column=settings["reference_column"],
            margin_threshold=settings["margin_threshold"],
            adaptive_reference=bool(settings["adaptive_reference"]),
            exact_statistics=bool(settings["exact"]),
            orthogonal_tiebreak=bool(settings["orthogonal_tiebreak"]),
            tie_window=settings["tie_window"],
            phase_tolerance=settings["phase_tolerance"],
        )
    except InvalidArgumentError as e:
        raise ConfigError(f"Invalid learning settings: {e}") from e


def _emit(data: dict, settings: dict) -> None:
    text = json.dumps(data, indent=2, sort_keys=True)
    print(text)
    if settings["out"]:
        with open(settings["out"], "w") as output_file:
            output_file.write(text + "\n")


def swap_unitary(n: int) -> DenseUnitary:
    """SWAP of qubits 1 and 2, identity on the rest."""
    d = 1 << n
    matrix = np.zeros((d, d), dtype=complex)
    for b in range(d):
        q1, q2 = (b >> (n - 1)) & 1, (b >> (n - 2)) & 1
        swapped = b & ~((1 << (n - 1)) | (1 << (n - 2))) | (q2 << (n - 1)) | (q1 << (n - 2))
        matrix[swapped, b] = 1.0
    return DenseUnitary(n, matrix)


def cz_unitary(n: int) -> DenseUnitary:
    """Controlled-Z on qubits 1 and 2."""
    b = np.arange(1 << n)
    both = ((b >> (n - 1)) & 1) & ((b >> (n - 2)) & 1)
    return DenseUnitary(n, np.diag(np.where(both == 1, -1.0, 1.0)).astype(complex))


def hierarchy_target(name: str, n: int, rng: np.random.Generator) -> DenseUnitary:
    if name in ("swap", "cz", "gaussian-swap") and n < 2:
        raise ConfigError(f"Target {name!r} needs at least 2 modes")
    if name == "swap":
        return swap_unitary(n)
    if name == "cz":
        return cz_unitary(n)
    gaussian = gaussian_unitary(haar_orthogonal(n, rng))
    if name == "gaussian":
        return gaussian
    return gaussian @ swap_unitary(n)


def learn_gaussian_command(settings: dict) -> int:
    n, eta = settings["n"][0], (settings["eta"] or [DEFAULT_ETA])[0]
    rng = np.random.default_rng(settings["seed"])
    q = haar_orthogonal(n, rng)
    oracle_seed = int(rng.integers(0, 2 ** 63 - 1))
    if settings["backend"] == "dense":
        oracle = UnitaryOracle.dense_from_q(q, seed=oracle_seed)
    else:
        oracle = UnitaryOracle.analytic(q, seed=oracle_seed)
    report = learn_gaussian(oracle, _learn_config(settings, eta))
    if n <= dense_limit():
        report.distance_to_truth = distance_D(gaussian_unitary(q), gaussian_unitary(report.q_ortho))
    _emit(report.to_dict(), settings)
    return EXIT_OK


def learn_hierarchy_command(settings: dict) -> int:
    n, eta = settings["n"][0], (settings["eta"] or [DEFAULT_ETA])[0]
    rng = np.random.default_rng(settings["seed"])
    target = hierarchy_target(settings["target"], n, rng)
    oracle = UnitaryOracle.dense(target, seed=int(rng.integers(0, 2 ** 63 - 1)))
    report = learn_hierarchy(oracle, int(settings["k"]), _learn_config(settings, eta))
    report.distance_to_truth = distance_D(target, report.u_hat)
    _emit(report.to_dict(), settings)
    return EXIT_OK


def compile_command(settings: dict) -> int:
    if settings["matrix"]:
        q = OrthogonalMatrix.from_matrix(load_matrix_csv(settings["matrix"]))
    else:
        q = haar_orthogonal(settings["n"][0], np.random.default_rng(settings["seed"]))
    circuit = compile_to_givens(q)
    data = circuit.to_dict()
    data["recomposition_error"] = float(np.max(np.abs(circuit.orthogonal_matrix().q - q.q)))
    _emit(data, settings)
    return EXIT_OK


def experiment_command(command: str, settings: dict) -> int:
    options = dict(
        kind=EXPERIMENT_COMMANDS[command],
        n_list=list(settings["n"]),
        trial_count=int(settings["trials"]),
        seed=int(settings["seed"]),
        output_path=settings["out"],
        format=settings["format"],
        threads=int(settings["threads"]),
        chunk_size=int(settings["chunk_size"]),
        epsilon=settings["epsilon"],
        fail_prob=settings["fail_prob"],
        hoeffding_constant=settings["hoeffding_constant"],
    )
    if settings["eta"]:
        options["eta_grid"] = sorted(settings["eta"])
    if settings["kappa"]:
        options["kappa_grid"] = sorted(settings["kappa"])
    spec = ExperimentSpec(**options)
    record = run_experiment(spec)
    print(json.dumps({"kind": spec.kind, "passed": record.passed, "summary": record.to_dict()["summary"]},
                     indent=2, sort_keys=True))
    return EXIT_OK if record.passed else EXIT_EXPERIMENT_FAILED


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        settings = _settings(args)
    except ConfigError as e:
        print(f"Error: {e}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        set_verbose(settings["verbose"])
        timer = PerformanceTimer()
        log(f"* Running {args.command}")
        if args.command == "learn-gaussian":
            code = learn_gaussian_command(settings)
        elif args.command == "learn-hierarchy":
            code = learn_hierarchy_command(settings)
        elif args.command == "compile":
            code = compile_command(settings)
        else:
            code = experiment_command(args.command, settings)
        timer.print_time_elapsed_since_last_call(args.command)
        print_current_memory_usage(args.command)
        return code
    except ConfigError as e:
        print(f"Error: {e}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    except MatchlearnError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_EXPERIMENT_FAILED


if __name__ == "__main__":
    sys.exit(main())
