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


import json

import numpy as np

from ..cli import (
    EXIT_EXPERIMENT_FAILED,
    EXIT_OK,
    EXIT_USAGE,
    _learn_config,
    _settings,
    build_parser,
    cz_unitary,
    main,
    swap_unitary,
)
from ..gaussian import haar_orthogonal, save_matrix_csv
from .conftest import swap_matrix


def run(capsys, argv):
    code = main(argv)
    return code, capsys.readouterr()


def test_learn_gaussian(capsys):
    code, output = run(capsys, ["learn-gaussian", "--n", "2", "--eta", "0.05", "--seed", "1"])
    assert code == EXIT_OK
    report = json.loads(output.out)
    assert report["n_modes"] == 2
    assert report["queries"]["total"] == report["budget"]["total"]
    assert report["distance_to_truth"] is not None


def test_learn_gaussian_exact_dense_backend(capsys):
    code, output = run(capsys, ["learn-gaussian", "--n", "3", "--exact", "--backend", "dense", "--seed", "2"])
    assert code == EXIT_OK
    report = json.loads(output.out)
    assert report["distance_to_truth"] < 1e-6
    assert report["diagnostics"]["flags"] == []


def test_learn_hierarchy_swap(capsys, tmp_path):
    out = tmp_path / "report.json"
    code, output = run(capsys, ["learn-hierarchy", "--n", "2", "--k", "3", "--target", "swap", "--exact",
                                "--out", str(out)])
    assert code == EXIT_OK
    report = json.loads(output.out)
    assert report["level"] == 3
    assert report["distance_to_truth"] < 1e-6
    assert json.loads(out.read_text()) == report


def test_learn_hierarchy_depth_limit(capsys):
    code, output = run(capsys, ["learn-hierarchy", "--n", "2", "--k", "5", "--exact"])
    assert code == EXIT_EXPERIMENT_FAILED
    assert "Error" in output.err


def test_hierarchy_target_needs_two_modes(capsys):
    code, _ = run(capsys, ["learn-hierarchy", "--n", "1", "--target", "cz"])
    assert code == EXIT_USAGE


def test_compile_from_csv(capsys, tmp_path):
    q = haar_orthogonal(2, np.random.default_rng(3))
    path = tmp_path / "q.csv"
    save_matrix_csv(str(path), q.q)
    code, output = run(capsys, ["compile", "--matrix", str(path)])
    assert code == EXIT_OK
    data = json.loads(output.out)
    assert data["recomposition_error"] < 1e-8


def test_compile_non_orthogonal_csv_fails_at_run_time(capsys, tmp_path):
    path = tmp_path / "bad.csv"
    save_matrix_csv(str(path), 2.0 * np.eye(4))
    code, output = run(capsys, ["compile", "--matrix", str(path)])
    assert code == EXIT_EXPERIMENT_FAILED
    assert "not orthogonal" in output.err
    assert "usage" not in output.err


def test_learn_config_flags_are_wired():
    args = build_parser().parse_args(["learn-gaussian", "--no-orthogonal-tiebreak", "--tie-window", "0.5",
                                      "--phase-tolerance", "0.01", "--margin-threshold", "0.001"])
    cfg = _learn_config(_settings(args), 0.1)
    assert not cfg.orthogonal_tiebreak
    assert (cfg.tie_window, cfg.phase_tolerance, cfg.margin_threshold) == (0.5, 0.01, 0.001)
    defaults = _learn_config(_settings(build_parser().parse_args(["learn-gaussian"])), 0.1)
    assert defaults.orthogonal_tiebreak and defaults.tie_window == 1.0


def test_config_file_sets_learn_fields(tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"orthogonalTiebreak": False, "tieWindow": 2.0, "phaseTolerance": 0.1}))
    cfg = _learn_config(_settings(build_parser().parse_args(["learn-gaussian", "--config", str(config)])), 0.1)
    assert (cfg.orthogonal_tiebreak, cfg.tie_window, cfg.phase_tolerance) == (False, 2.0, 0.1)


def test_malformed_config_is_a_usage_error(capsys, tmp_path):
    unknown = tmp_path / "unknown.json"
    unknown.write_text(json.dumps({"n": [2], "tieWindoww": 2.0}))
    code, output = run(capsys, ["learn-gaussian", "--config", str(unknown)])
    assert code == EXIT_USAGE
    assert "tie_windoww" in output.err
    wrong_type = tmp_path / "wrong.txt"
    wrong_type.write_text("trials = many\n")
    assert run(capsys, ["bench-queries", "--config", str(wrong_type)])[0] == EXIT_USAGE
    assert run(capsys, ["learn-gaussian", "--tie-window", "-1"])[0] == EXIT_USAGE


def test_config_file_and_flag_override(capsys, tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"n": [2], "trials": 2, "chunkSize": 1, "seed": 9}))
    code, output = run(capsys, ["compile-check", "--config", str(config), "--n", "1", "2"])
    assert code == EXIT_OK
    summary = json.loads(output.out)
    assert summary["kind"] == "compile_check"
    assert summary["passed"]


def test_usage_errors(capsys, tmp_path):
    assert run(capsys, [])[0] == EXIT_USAGE
    assert run(capsys, ["learn-gaussian", "--n", "two"])[0] == EXIT_USAGE
    assert run(capsys, ["learn-gaussian", "--config", str(tmp_path / "missing.json")])[0] == EXIT_USAGE
    assert run(capsys, ["--help"])[0] == EXIT_OK


def test_verbose_logs_to_stderr(capsys):
    code, output = run(capsys, ["compile", "--n", "1", "--verbose"])
    assert code == EXIT_OK
    assert "Running compile" in output.err
    json.loads(output.out)
    main(["compile", "--n", "1"])
    assert capsys.readouterr().err == ""


def test_target_unitaries():
    assert np.array_equal(swap_unitary(3).matrix, swap_matrix(3))
    assert np.array_equal(np.diag(cz_unitary(2).matrix), [1, 1, 1, -1])
