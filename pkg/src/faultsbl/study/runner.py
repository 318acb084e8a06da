from __future__ import annotations

import logging
import time
import typing as t
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass

import numpy as np

from faultsbl.datagen import (
    DictionarySource,
    GeneratedInstance,
    KnowledgeCase,
    generate_instance,
    instance_rng,
    knowledge_rng,
    sample_knowledge,
)
from faultsbl.errors import MatrixFileError, NumericalError
from faultsbl.metrics import MethodSummary, TrialScore, aggregate, score_failure, score_nmse
from faultsbl.model import PriorKnowledgeSet
from faultsbl.solver import SolverConfig, solve
from faultsbl.wire.events import OpsTracking
from .config import FULL, StudyConfig
from .matrix_io import load_dictionary, resolve_matrix_path

logger = logging.getLogger(__name__)

ScoreKey = tuple[str, KnowledgeCase]


@dataclass(frozen=True)
class UnitResult:
    """Scores of every variant and case for one (sweep value, trial) instance."""

    sweep_index: int
    trial: int
    scores: dict[ScoreKey, TrialScore]
    solve_seconds: dict[str, float]


@dataclass(frozen=True)
class ResultRow:
    sweep_value: float | None
    sweep_label: str
    variant: str
    summary: MethodSummary
    trials: int
    wall_time: float


@dataclass(frozen=True)
class ResultTable:
    study: StudyConfig
    rows: tuple[ResultRow, ...]

    def row(self, sweep_label: str, variant: str) -> ResultRow:
        for row in self.rows:
            if row.sweep_label == sweep_label and row.variant == variant:
                return row
        raise KeyError((sweep_label, variant))

    def sweep_labels(self) -> list[str]:
        return list(dict.fromkeys(row.sweep_label for row in self.rows))


def load_study_dictionary(study: StudyConfig) -> np.ndarray | None:
    if study.scenario.dictionary_source is not DictionarySource.FILE:
        return None
    assert study.scenario.dictionary_path is not None
    path = resolve_matrix_path(study.scenario.dictionary_path, study.base_dir)
    phi = load_dictionary(path)
    for value in study.sweep.values:
        scenario = study.scenario_for(value)
        if phi.shape != (scenario.m, scenario.n):
            raise MatrixFileError(
                path,
                f"matrix is {phi.shape[0]}x{phi.shape[1]}, scenario at "
                f"{study.sweep.parameter}={study.sweep.label(value)} expects "
                f"{scenario.m}x{scenario.n}",
            )
    return phi


def solve_and_score(
    instance: GeneratedInstance, prior: PriorKnowledgeSet, config: SolverConfig
) -> TrialScore:
    try:
        result = solve(instance.problem, prior, config)
    except NumericalError as e:
        logger.warning("Trial aborted: %s", e)
        return TrialScore.aborted(str(e))
    return TrialScore(
        failed=score_failure(result.mean_deviations, instance.support_true, instance.k),
        nmse=score_nmse(result.mean_deviations, instance.x_bar_true),
        converged=result.converged,
        iterations=result.iterations_run,
    )


def run_unit(
    study: StudyConfig,
    sweep_index: int,
    trial: int,
    dictionary: np.ndarray | None = None,
    cases: t.Sequence[KnowledgeCase] | None = None,
) -> UnitResult:
    seed = study.scenario.seed
    scenario = study.scenario_for(study.sweep.values[sweep_index])
    instance = generate_instance(scenario, instance_rng(seed, sweep_index, trial), dictionary)
    cases = list(cases) if cases is not None else study.cases_for(scenario)

    # every variant sees the same knowledge draw, so comparisons are paired
    priors = {
        case: sample_knowledge(instance, case, knowledge_rng(seed, sweep_index, trial, case))
        for case in cases
    }

    scores: dict[ScoreKey, TrialScore] = {}
    solve_seconds: dict[str, float] = {}
    for variant in study.variants:
        config = variant.apply(study.solver)
        started = time.perf_counter()
        if config.use_prior_knowledge:
            for case in cases:
                scores[variant.name, case] = solve_and_score(instance, priors[case], config)
        else:
            # the prior set is ignored, one solve serves every case
            score = solve_and_score(instance, PriorKnowledgeSet(), config)
            for case in cases:
                scores[variant.name, case] = score
        solve_seconds[variant.name] = time.perf_counter() - started

    return UnitResult(sweep_index, trial, scores, solve_seconds)


def run_trial(
    study: StudyConfig,
    sweep_index: int,
    case: KnowledgeCase,
    trial: int,
    dictionary: np.ndarray | None = None,
) -> dict[str, TrialScore]:
    """Replays a single trial of a study from its seed."""
    if dictionary is None:
        dictionary = load_study_dictionary(study)
    unit = run_unit(study, sweep_index, trial, dictionary, cases=[case])
    return {variant: score for (variant, _), score in unit.scores.items()}


def _init_pool_worker():
    # forked pool processes must not write to the parent's event pipe or terminal;
    # aborted trials reach the parent through their scores
    for logger_ in (logging.getLogger(), logging.getLogger("faultsbl")):
        logger_.handlers.clear()
    logging.getLogger("faultsbl").addHandler(logging.NullHandler())
    logging.getLogger("faultsbl").propagate = False


def _iter_units(
    study: StudyConfig,
    sweep_index: int,
    dictionary: np.ndarray | None,
    pool: ProcessPoolExecutor | None,
) -> t.Iterator[UnitResult]:
    trials = range(study.scenario.trials)
    if pool is None:
        for trial in trials:
            yield run_unit(study, sweep_index, trial, dictionary)
        return

    futures = [pool.submit(run_unit, study, sweep_index, trial, dictionary) for trial in trials]
    for future in as_completed(futures):
        yield future.result()


def _summarize_sweep(
    study: StudyConfig, sweep_index: int, units: list[UnitResult]
) -> list[ResultRow]:
    value = study.sweep.values[sweep_index]
    by_variant: dict[str, dict[KnowledgeCase, list[TrialScore]]] = defaultdict(
        lambda: defaultdict(list)
    )
    wall_time: dict[str, float] = defaultdict(float)
    # trial order keeps the per-case score lists independent of completion order
    for unit in sorted(units, key=lambda u: u.trial):
        for (variant, case), score in unit.scores.items():
            by_variant[variant][case].append(score)
        for variant, seconds in unit.solve_seconds.items():
            wall_time[variant] += seconds

    return [
        ResultRow(
            sweep_value=value,
            sweep_label=study.sweep.label(value),
            variant=variant.name,
            summary=aggregate(by_variant[variant.name]),
            trials=study.scenario.trials,
            wall_time=wall_time[variant.name],
        )
        for variant in study.variants
    ]


def run_study(
    study: StudyConfig,
    tracking: OpsTracking | None = None,
    dictionary: np.ndarray | None = None,
) -> ResultTable:
    """Runs every sweep value, knowledge case, trial and variant of a study."""
    tracking = tracking or OpsTracking()
    if dictionary is None:
        dictionary = load_study_dictionary(study)

    rows: list[ResultRow] = []
    pool = (
        ProcessPoolExecutor(max_workers=study.jobs, initializer=_init_pool_worker)
        if study.jobs > 1
        else None
    )
    try:
        with tracking.op(
            "study/run",
            name=study.name,
            seed=study.scenario.seed,
            parameter=study.sweep.parameter,
            variants=[v.name for v in study.variants],
        ) as run_op:
            for sweep_index, value in enumerate(study.sweep.values):
                scenario = study.scenario_for(value)
                cases = study.cases_for(scenario)
                with tracking.op(
                    "study/sweep",
                    parameter=study.sweep.parameter,
                    value=study.sweep.label(value),
                    trials=scenario.trials,
                    cases=len(cases),
                ) as op:
                    units: list[UnitResult] = []
                    failed = solved = 0
                    for unit in _iter_units(study, sweep_index, dictionary, pool):
                        units.append(unit)
                        for (variant, case), score in unit.scores.items():
                            if score.error:
                                op.log(
                                    f"trial {unit.trial} {variant} ({case.label}): {score.error}"
                                )
                            if variant == FULL.name:
                                solved += 1
                                failed += score.failed
                        op.progress(
                            done=len(units),
                            failure_rate=failed / solved if solved else None,
                        )
                    rows.extend(_summarize_sweep(study, sweep_index, units))
                if op.error:
                    raise op.error
        if run_op.error:
            raise run_op.error
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)

    return ResultTable(study=study, rows=tuple(rows))
