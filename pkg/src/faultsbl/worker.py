from __future__ import annotations

import logging
import sys
from dataclasses import dataclass
from multiprocessing import Process
from multiprocessing.connection import Connection

from faultsbl.errors import ConfigError, MatrixFileError
from faultsbl.study import StudyConfig, emit_outputs, run_study
from faultsbl.wire.channel import Channel
from faultsbl.wire.events import OpsLogHandler, OpsTracking

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def exit_code_for(error: BaseException | None) -> int:
    if error is None:
        return EXIT_OK
    if isinstance(error, (ConfigError, MatrixFileError)):
        return EXIT_CONFIG
    return EXIT_RUNTIME


def run_study_job(study: StudyConfig, events_channel: Channel, log_level: int = logging.INFO) -> int:
    """Runs a study and writes its result files, reporting progress as events."""
    ops_tracking = OpsTracking(events_channel)

    package_logger = logging.getLogger("faultsbl")
    package_logger.handlers = [OpsLogHandler(ops_tracking)]
    package_logger.setLevel(log_level)
    package_logger.propagate = False

    with ops_tracking.op("study/job", name=study.name, out=str(study.output_dir)) as op:
        op.debug(f"Running {study.name} with {study.jobs} job(s)")
        table = run_study(study, ops_tracking)
        with ops_tracking.op("study/outputs", dir=str(study.output_dir)) as out_op:
            paths = emit_outputs(table, study.output_dir)
            out_op.progress(files=len(paths))
        if out_op.error:
            raise out_op.error
        op.debug("Finished.")

    return exit_code_for(op.error)


def _job_process(study: StudyConfig, events_channel: Connection, log_level: int):
    try:
        code = run_study_job(study, events_channel, log_level)
    finally:
        events_channel.close()
    sys.exit(code)


@dataclass
class WorkerHandle:
    proc: Process

    def stop(self):
        if self.proc.is_alive():
            self.proc.terminate()

    def join(self, timeout: float | None = None) -> int:
        self.proc.join(timeout)
        code = self.proc.exitcode
        if code in (EXIT_OK, EXIT_CONFIG):
            return code
        return EXIT_RUNTIME


def run_worker(
    study: StudyConfig, events_channel: Connection, log_level: int = logging.INFO
) -> WorkerHandle:
    # not a daemon: the study may start its own process pool
    proc = Process(
        target=_job_process,
        kwargs={
            "study": study,
            "events_channel": events_channel,
            "log_level": log_level,
        },
        daemon=False,
    )
    proc.start()
    # the child holds its own copy; closing ours lets the view see EOF when it exits
    events_channel.close()
    return WorkerHandle(proc)
