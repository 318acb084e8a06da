"""Desk-scale Monte-Carlo checks of the published trends; minutes per study."""

import os
import tomllib
from pathlib import Path

import numpy as np
import pytest

from faultsbl.study import ResultTable, emit_outputs, parse_study, render_preset, run_study

pytestmark = pytest.mark.slow

SLACK = 0.05


def run_preset(name: str) -> ResultTable:
    text = render_preset(name, trials=100, jobs=os.cpu_count() or 1)
    return run_study(parse_study(tomllib.loads(text), name=name, base_dir=Path(".")))


def failure_rates(table: ResultTable, variant: str) -> list[float]:
    return [table.row(label, variant).summary.failure_rate for label in table.sweep_labels()]


@pytest.fixture(scope="module")
def correlation_sweep() -> ResultTable:
    return run_preset("sec4_1")


def test_correlation_helps_the_full_model(correlation_sweep):
    rates = failure_rates(correlation_sweep, "full")
    assert all(later <= earlier + SLACK for earlier, later in zip(rates, rates[1:]))
    assert rates[-1] <= rates[0] - 0.05


def test_correlation_hurts_the_uncorrelated_baseline(correlation_sweep):
    rates = failure_rates(correlation_sweep, "msbl-like")
    assert rates[-1] >= rates[0] + 0.1


def test_strongly_correlated_point_values(correlation_sweep):
    summary = correlation_sweep.row("0.99", "full").summary
    assert summary.failure_rate == pytest.approx(0.16, abs=0.12)
    assert summary.mean_nmse == pytest.approx(0.22, abs=0.15)


@pytest.mark.parametrize("label", ["0.9", "0.99"])
def test_partial_knowledge_beats_none(correlation_sweep, label):
    summary = correlation_sweep.row(label, "full").summary
    no_knowledge = summary.no_knowledge
    assert no_knowledge is not None
    informed = [case for case in summary.cases if case.case != no_knowledge.case]
    assert len(informed) == 13
    assert np.mean([c.failure_rate for c in informed]) < no_knowledge.failure_rate
    assert np.mean([c.mean_nmse for c in informed]) < no_knowledge.mean_nmse


def test_more_samples_help():
    rates = failure_rates(run_preset("sec4_2"), "full")
    assert all(later <= earlier + SLACK for earlier, later in zip(rates, rates[1:]))
    assert rates[-1] < rates[0]


def test_underdetermined_sweep():
    table = run_preset("sec4_3")
    assert table.sweep_labels() == ["3", "5", "7", "9"]
    assert table.row("9", "full").summary.failure_rate <= table.row("9", "msbl-like").summary.failure_rate - 0.1


@pytest.mark.parametrize("name", ["sec5_1", "sec5_2"])
def test_assembly_studies_complete(name, tmp_path, caplog):
    with caplog.at_level("WARNING", logger="faultsbl"):
        table = run_preset(name)
    written = emit_outputs(table, tmp_path)
    assert (tmp_path / "results.csv") in written
    assert "mutual coherence" in caplog.text
