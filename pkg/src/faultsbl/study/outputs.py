"""Result files of a study run.

``results.csv``, ``cases_*.csv``, ``boxplot_*.csv`` and ``manifest.json`` are
pure functions of the configuration and seed. Wall-clock data goes to
``timing.json`` only.
"""

from __future__ import annotations

import csv
import hashlib
import json
import typing as t
from pathlib import Path

import faultsbl
from faultsbl.errors import AggregationError
from faultsbl.metrics import MethodSummary, is_outlier
from .runner import ResultTable

MEASURES = ("failure_rate", "mean_nmse")


def fmt(value: float | None) -> str:
    if value is None:
        return ""
    return format(value, ".10g")


def _write_csv(path: Path, header: list[str], rows: t.Iterable[list[str]]) -> Path:
    with path.open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _results_rows(table: ResultTable) -> t.Iterator[list[str]]:
    for row in table.rows:
        summary = row.summary
        no_knowledge = summary.no_knowledge
        yield [
            table.study.sweep.parameter,
            row.sweep_label,
            row.variant,
            fmt(summary.failure_rate),
            fmt(summary.mean_nmse),
            fmt(no_knowledge.failure_rate if no_knowledge else None),
            fmt(no_knowledge.mean_nmse if no_knowledge else None),
            str(len(summary.cases)),
            str(row.trials),
        ]


def _box_rows(variant: str, summary: MethodSummary) -> t.Iterator[list[str]]:
    for measure in MEASURES:
        stats = summary.box_stats(measure)  # type: ignore[arg-type]
        reference = getattr(summary.no_knowledge, measure) if summary.no_knowledge else None
        yield [
            variant,
            measure,
            fmt(stats.whisker_low),
            fmt(stats.q1),
            fmt(stats.median),
            fmt(stats.q3),
            fmt(stats.whisker_high),
            fmt(stats.mean),
            fmt(reference),
            "" if reference is None else str(is_outlier(reference, stats)).lower(),
            str(len(stats.outliers)),
        ]


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def emit_outputs(table: ResultTable, out_dir: Path | str) -> list[Path]:
    study = table.study
    if not table.rows:
        raise AggregationError("Result table is empty.")
    for row in table.rows:
        if not row.summary.cases:
            raise AggregationError(f"No knowledge cases for {row.sweep_label}/{row.variant}.")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    written = [
        _write_csv(
            out_dir / "results.csv",
            [
                "parameter",
                "value",
                "variant",
                "failure_rate",
                "nmse",
                "no_knowledge_failure_rate",
                "no_knowledge_nmse",
                "cases",
                "trials",
            ],
            _results_rows(table),
        )
    ]

    for label in table.sweep_labels():
        rows = [row for row in table.rows if row.sweep_label == label]
        written.append(
            _write_csv(
                out_dir / f"cases_{label}.csv",
                ["variant", "n_correct", "n_erroneous", "failure_rate", "nmse", "trials"],
                (
                    [
                        row.variant,
                        str(case.case.n_correct),
                        str(case.case.n_erroneous),
                        fmt(case.failure_rate),
                        fmt(case.mean_nmse),
                        str(case.trials),
                    ]
                    for row in rows
                    for case in row.summary.cases
                ),
            )
        )
        written.append(
            _write_csv(
                out_dir / f"boxplot_{label}.csv",
                [
                    "variant",
                    "measure",
                    "whisker_low",
                    "q1",
                    "median",
                    "q3",
                    "whisker_high",
                    "mean",
                    "no_knowledge",
                    "no_knowledge_outlier",
                    "outliers",
                ],
                (box_row for row in rows for box_row in _box_rows(row.variant, row.summary)),
            )
        )

    manifest = {
        "study": study.name,
        "version": faultsbl.__version__,
        "seed": study.scenario.seed,
        "sweep": {
            "parameter": study.sweep.parameter,
            "values": [study.sweep.label(v) for v in study.sweep.values],
        },
        "variants": {v.name: dict(v.overrides) for v in study.variants},
        "substreams": {
            "generator": "numpy PCG64 via SeedSequence(seed, spawn_key)",
            "instance_spawn_key": "(sweep_index, trial, 0)",
            "knowledge_spawn_key": "(sweep_index, trial, 1, n_correct, n_erroneous)",
        },
        "config": study.source,
        "files": {path.name: _sha256(path) for path in written},
    }
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")
    written.append(manifest_path)

    timing = {
        "total_seconds": sum(row.wall_time for row in table.rows),
        "rows": [
            {"value": row.sweep_label, "variant": row.variant, "wall_time": row.wall_time}
            for row in table.rows
        ],
    }
    timing_path = out_dir / "timing.json"
    timing_path.write_text(json.dumps(timing, indent=2) + "\n")
    written.append(timing_path)

    return written
