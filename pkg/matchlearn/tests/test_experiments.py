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


import math

import numpy as np
import pytest

from ..errors import InvalidArgumentError
from ..experiments import (
    ExperimentSpec,
    fit_loglog_slope,
    read_records,
    run_experiment,
    sign_statistics,
    write_record,
)


def test_experiment_spec_validation():
    with pytest.raises(InvalidArgumentError):
        ExperimentSpec(kind="unknown")
    with pytest.raises(InvalidArgumentError):
        ExperimentSpec(kind="compile_check", trial_count=0)
    with pytest.raises(InvalidArgumentError):
        ExperimentSpec(kind="compile_check", n_list=[])
    with pytest.raises(InvalidArgumentError):
        ExperimentSpec(kind="sign_bound_mc", kappa_grid=[1e-2, 1e-3])
    with pytest.raises(InvalidArgumentError):
        ExperimentSpec(kind="compile_check", format="xml")
    with pytest.raises(InvalidArgumentError):
        ExperimentSpec(kind="compile_check", threads=0)


def test_experiment_spec_from_dict_ignores_unknown_keys():
    spec = ExperimentSpec.from_dict({"kind": "oracle_check", "n_list": [1, 2], "trial_count": 3, "colour": "red"})
    assert spec.n_list == [1, 2]
    assert ExperimentSpec.from_dict(spec.to_dict()) == spec


def test_sign_statistics_identity():
    values = sign_statistics(np.stack([np.eye(4)] * 3))
    assert values.shape == (3, 3)
    assert np.allclose(values, [[1.0, 0.0, 1.0]] * 3)


def test_fit_loglog_slope_power_law():
    kappa = np.logspace(-4, -1, 7)
    total = 10 ** 6
    hits = np.round(total * kappa ** 0.5)
    assert fit_loglog_slope(kappa, hits, total) == pytest.approx(0.5, abs=0.01)


def test_fit_loglog_slope_drops_sparse_decades():
    kappa = np.array([1e-5, 3e-5, 1e-4, 3e-4, 1e-3])
    hits = np.array([1, 2, 40, 120, 400])
    expected = np.polyfit(np.log(kappa[2:]), np.log(hits[2:] / 1000), 1)[0]
    assert fit_loglog_slope(kappa, hits, 1000) == pytest.approx(expected)
    assert math.isnan(fit_loglog_slope(kappa, np.zeros(5), 1000))


def test_compile_check():
    record = run_experiment(ExperimentSpec(kind="compile_check", n_list=[1, 2, 3], trial_count=5, chunk_size=2))
    assert record.passed
    assert record.summary["max_recomposition_error"] < 1e-8
    assert len(record.rows()) == 3


def test_compile_check_is_reproducible_across_threads():
    spec = dict(kind="compile_check", n_list=[2], trial_count=6, chunk_size=2, seed=4)
    serial = run_experiment(ExperimentSpec(**spec))
    parallel = run_experiment(ExperimentSpec(threads=2, **spec))
    assert serial.rows() == parallel.rows()


def test_oracle_check():
    record = run_experiment(ExperimentSpec(kind="oracle_check", n_list=[1, 2], trial_count=3))
    assert record.passed
    assert record.summary["max_tv"] <= 1e-6
    assert record.table["max_tv"].shape == (2, 3)


def test_oracle_check_dense_limit(monkeypatch):
    monkeypatch.setenv("MATCHLEARN_DENSE_LIMIT", "2")
    with pytest.raises(InvalidArgumentError):
        run_experiment(ExperimentSpec(kind="oracle_check", n_list=[3], trial_count=1))


def test_sign_bound_small():
    record = run_experiment(ExperimentSpec(kind="sign_bound_mc", n_list=[2, 3], trial_count=500, chunk_size=200))
    assert record.summary["monotone"]
    assert record.table["cdf"].shape == (2, 3, 9)
    assert int(record.table["hits"].max()) <= 500


def test_logm_error_small():
    spec = ExperimentSpec(kind="logm_error_mc", n_list=[2], eta_grid=[1e-3, 1e-2], trial_count=20)
    record = run_experiment(spec)
    median = record.table["median_D"].values
    assert np.all(median > 0)
    assert median[0, 0] < median[0, 1]
    assert 0.5 < record.summary["eta_exponents"]["n=2"] < 1.5


def test_learn_benchmark_accounting():
    spec = ExperimentSpec(kind="learn_benchmark", n_list=[2], eta_grid=[0.05], trial_count=3)
    record = run_experiment(spec)
    assert record.passed
    assert record.summary["accounting_ok"]
    assert record.table["queries_total"].values[0, 0] > 0


def test_records_jsonl_and_csv(tmp_path):
    spec = ExperimentSpec(kind="compile_check", n_list=[1, 2], trial_count=2)
    record = run_experiment(spec)
    jsonl = tmp_path / "records.jsonl"
    write_record(record, str(jsonl))
    write_record(record, str(jsonl))
    records = read_records(str(jsonl))
    assert len(records) == 2
    assert records[0]["spec"]["kind"] == "compile_check"
    assert records[0]["passed"] is True
    assert "version" in records[0]["stamp"]
    csv = tmp_path / "records.csv"
    write_record(record, str(csv), "csv")
    header = csv.read_text().splitlines()[0].split(",")
    assert header[0] == "n"
    assert "max_recomposition_error" in header
    with pytest.raises(InvalidArgumentError):
        write_record(record, str(tmp_path / "x"), "xml")


def test_run_experiment_writes_output(tmp_path):
    path = tmp_path / "out.jsonl"
    run_experiment(ExperimentSpec(kind="compile_check", n_list=[1], trial_count=1, output_path=str(path)))
    assert len(read_records(str(path))) == 1
