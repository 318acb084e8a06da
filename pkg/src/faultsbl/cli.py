import argparse
import asyncio
import csv
import logging
import os
import signal
import sys
from pathlib import Path

from rich.console import Console
from rich.live import Live
from rich.logging import RichHandler
from rich.table import Table

from faultsbl import __version__
from faultsbl.datagen import KnowledgeCase
from faultsbl.errors import ConfigError, FaultSblError, MatrixFileError
from faultsbl.study import (
    StudyConfig,
    emit_outputs,
    load_study_config,
    preset_names,
    render_preset,
    run_study,
    run_trial,
)
from faultsbl.study.runner import load_study_dictionary
from faultsbl.ui import StudyView
from faultsbl.wire.channel import create_channel
from faultsbl.worker import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, run_worker

JOBS_ENV = "FAULTSBL_JOBS"

console = Console()
err_console = Console(stderr=True)


def setup_logging(verbose: bool):
    logger = logging.getLogger("faultsbl")
    logger.handlers = [RichHandler(console=err_console, show_path=False)]
    logger.setLevel(logging.DEBUG if verbose else logging.WARNING)


def default_jobs() -> int | None:
    raw = os.getenv(JOBS_ENV)
    if raw is None or not raw.strip():
        return None
    try:
        jobs = int(raw)
    except ValueError:
        raise ConfigError(JOBS_ENV, f"expected an integer, got {raw!r}") from None
    if jobs < 1:
        raise ConfigError(JOBS_ENV, "must be >= 1")
    return jobs


def load_study(args: argparse.Namespace) -> StudyConfig:
    study = load_study_config(args.config)
    if getattr(args, "seed", None) is not None:
        study = study.with_seed(args.seed)
    if getattr(args, "out", None) is not None:
        study = study.replace(output_dir=Path(args.out))
    jobs = getattr(args, "jobs", None) or default_jobs()
    if jobs is not None:
        if jobs < 1:
            raise ConfigError("--jobs", "must be >= 1")
        study = study.replace(jobs=jobs)
    return study


def results_table(results_csv: Path) -> Table:
    with results_csv.open(newline="") as f:
        rows = list(csv.DictReader(f))

    table = Table(title=f"Results ({results_csv})", title_justify="left")
    for column in ("parameter", "value", "variant", "failure_rate", "nmse", "no_knowledge_failure_rate"):
        table.add_column(column, justify="left" if column in ("parameter", "variant") else "right")
    for row in rows:
        table.add_row(
            row["parameter"],
            row["value"],
            row["variant"],
            _short(row["failure_rate"]),
            _short(row["nmse"]),
            _short(row["no_knowledge_failure_rate"]),
        )
    return table


def _short(value: str) -> str:
    return f"{float(value):.4g}" if value else "-"


async def tui_app(study: StudyConfig, verbose: bool) -> int:
    ui_channel_end, worker_channel_end = create_channel()

    ui = StudyView(show_debug=verbose)

    worker = run_worker(
        study,
        events_channel=worker_channel_end,
        log_level=logging.DEBUG if verbose else logging.INFO,
    )

    try:
        with Live(ui, refresh_per_second=10, vertical_overflow="crop", transient=True) as live:

            def _sig_handler():
                worker.stop()
                live.stop()
                sys.exit(EXIT_RUNTIME)

            loop = asyncio.get_running_loop()
            loop.add_signal_handler(signal.SIGINT, _sig_handler)
            loop.add_signal_handler(signal.SIGTERM, _sig_handler)

            await ui.listen_to_channel(ui_channel_end)

        return await asyncio.to_thread(worker.join)

    finally:
        worker.stop()
        # Print final state
        console.print(ui)


def cmd_run(args: argparse.Namespace) -> int:
    study = load_study(args)
    # fail fast on a bad matrix file before any worker starts
    load_study_dictionary(study)

    if args.plain:
        table = run_study(study)
        emit_outputs(table, study.output_dir)
        code = EXIT_OK
    else:
        code = asyncio.run(tui_app(study, args.verbose))

    if code == EXIT_OK:
        console.print(results_table(study.output_dir / "results.csv"))
    return code


def cmd_validate(args: argparse.Namespace) -> int:
    study = load_study(args)
    dictionary = load_study_dictionary(study)

    table = Table(title=f"Study {study.name}", show_header=False, title_justify="left")
    table.add_column(style="grey50")
    table.add_column()
    scenario = study.scenario
    table.add_row("scenario", f"M={scenario.m} N={scenario.n} K={scenario.k} L={scenario.l} beta={scenario.beta:g}")
    table.add_row("snr", "noiseless" if scenario.snr_db is None else f"{scenario.snr_db:g} dB")
    table.add_row("dictionary", "random hypersphere" if dictionary is None else str(scenario.dictionary_path))
    table.add_row("sweep", f"{study.sweep.parameter} = {', '.join(map(study.sweep.label, study.sweep.values))}")
    table.add_row("cases", ", ".join(c.label for c in study.cases_for(scenario)))
    table.add_row("variants", ", ".join(v.name for v in study.variants))
    table.add_row("trials", f"{scenario.trials} (seed {scenario.seed})")
    table.add_row("output", f"{study.output_dir} ({study.jobs} job(s))")
    console.print(table)
    console.print("[green]✅ config is valid[/]")
    return EXIT_OK


def cmd_gen_config(args: argparse.Namespace) -> int:
    text = render_preset(
        args.template,
        seed=args.seed,
        trials=args.trials,
        jobs=args.jobs,
    )
    if args.output:
        Path(args.output).write_text(text)
        err_console.print(f"📝 wrote {args.output}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_trial(args: argparse.Namespace) -> int:
    study = load_study(args)
    if not 0 <= args.sweep_index < len(study.sweep.values):
        raise ConfigError("--sweep-index", f"must be in 0..{len(study.sweep.values) - 1}")
    if not 0 <= args.trial < study.scenario.trials:
        raise ConfigError("--trial", f"must be in 0..{study.scenario.trials - 1}")
    scenario = study.scenario_for(study.sweep.values[args.sweep_index])
    try:
        case = KnowledgeCase.parse(args.case)
        case.check(scenario.k)
    except FaultSblError as e:
        raise ConfigError("--case", str(e)) from None

    if args.variant:
        variants = [v for v in study.variants if v.name == args.variant]
        if not variants:
            names = ", ".join(v.name for v in study.variants)
            raise ConfigError("--variant", f"unknown variant {args.variant!r}; study has {names}")
        study = study.replace(variants=tuple(variants))

    scores = run_trial(study, args.sweep_index, case, args.trial)

    table = Table(
        title=(
            f"{study.name}: {study.sweep.parameter}={study.sweep.label(study.sweep.values[args.sweep_index])}"
            f" case {case.label} trial {args.trial}"
        ),
        title_justify="left",
    )
    for column in ("variant", "failed", "nmse", "converged", "iterations", "error"):
        table.add_column(column)
    for variant, score in scores.items():
        table.add_row(
            variant,
            "[red]yes[/]" if score.failed else "[green]no[/]",
            f"{score.nmse:.6g}",
            str(score.converged).lower(),
            str(score.iterations),
            score.error or "",
        )
    console.print(table)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="faultsbl",
        description="Fault source diagnosis with structure-aware temporal sparse Bayesian learning.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a Monte-Carlo study and write its result files")
    run.add_argument("config", type=Path)
    run.add_argument("--seed", type=int, help="override scenario.seed")
    run.add_argument("--out", type=Path, help="override output.dir")
    run.add_argument("--jobs", type=int, help=f"worker processes (default: ${JOBS_ENV} or output.jobs)")
    run.add_argument("--plain", action="store_true", help="no live view, run in this process")
    run.set_defaults(handler=cmd_run)

    validate = sub.add_parser("validate", help="check a study config and its dictionary file")
    validate.add_argument("config", type=Path)
    validate.set_defaults(handler=cmd_validate)

    gen = sub.add_parser("gen-config", help="print a ready-made study config")
    gen.add_argument("template", choices=preset_names())
    gen.add_argument("--seed", type=int, default=2024)
    gen.add_argument("--trials", type=int, default=100)
    gen.add_argument("--jobs", type=int, default=1)
    gen.add_argument("-o", "--output", type=Path, help="write to a file instead of stdout")
    gen.set_defaults(handler=cmd_gen_config)

    trial = sub.add_parser("trial", help="replay one trial of a study and print its scores")
    trial.add_argument("config", type=Path)
    trial.add_argument("--sweep-index", type=int, required=True, help="0-based index into sweep.values")
    trial.add_argument("--case", required=True, help="knowledge case as 'C,E'")
    trial.add_argument("--trial", type=int, required=True, help="0-based trial number")
    trial.add_argument("--variant", help="only this variant")
    trial.add_argument("--seed", type=int, help="override scenario.seed")
    trial.set_defaults(handler=cmd_trial)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    try:
        code = args.handler(args)
    except (ConfigError, MatrixFileError) as e:
        err_console.print(f"[red]error:[/] {e}")
        code = EXIT_CONFIG
    except (FaultSblError, OSError) as e:
        err_console.print(f"[red]failed:[/] {e}")
        code = EXIT_RUNTIME
    except KeyboardInterrupt:
        code = EXIT_RUNTIME
    return code
