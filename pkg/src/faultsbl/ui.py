from __future__ import annotations

import time
import typing as t
from collections import defaultdict, deque
from dataclasses import dataclass, field
from inspect import isclass

from rich import tree
from rich.columns import Columns
from rich.console import ConsoleRenderable
from rich.panel import Panel
from rich.status import Status

from faultsbl.wire import events
from faultsbl.wire.channel import AsyncChannel

ROOT_OP = "study/job"
# per op, oldest dropped first
MAX_LOG_ENTRIES = 500


class OpData(defaultdict):
    def __getattr__(self, name):
        return self.get(name, "<unset>")


def render_elapsed(seconds: float) -> str:
    seconds = round(seconds, 1)
    if seconds < 0.1:
        return ""
    if seconds >= 60:
        return f"[i grey70 not bold]({int(seconds // 60)}m{int(seconds % 60):02d}s)[/]"
    return f"[i grey70 not bold]({seconds:.1f}s)[/]"


@dataclass
class OpBase(ConsoleRenderable):
    op_name: str
    ops: list[OpBase] = field(default_factory=list)
    started_at: float | None = None
    finished_at: float | None = None
    elapsed_time: float = 0
    render_node: tree.Tree | None = None
    render_logs: tree.Tree | None = None
    error: str | None = None
    logs: deque[str] = field(default_factory=lambda: deque(maxlen=MAX_LOG_ENTRIES))
    dropped_logs: int = 0
    show_content: bool = True
    show_logs: bool = False
    show_logs_lines: int = 5
    data: OpData = field(default_factory=OpData)

    def __post_init__(self):
        data = OpData()
        if self.data:
            data.update(self.data)
        self.data = data

    @property
    def elapsed(self):
        if self.started_at is not None:
            finished_at = self.finished_at or time.time()
            new_elapsed = finished_at - self.started_at
            # Make sure we get increasing time
            if new_elapsed >= self.elapsed_time:
                self.elapsed_time = new_elapsed
            return self.elapsed_time
        return 0

    @property
    def state(self):
        if self.started_at is None:
            return "init"
        if self.finished_at is None:
            return "in-progress"
        if self.error is not None:
            return "failed"
        return "succeeded"

    @property
    def is_finished(self):
        return self.state in {"failed", "succeeded"}

    def _state_label(self, name: str, extra: str = ""):
        elapsed = render_elapsed(self.elapsed)
        match self.state:
            case "init":
                return f"⏳ [sky_blue3 i]{name}"
            case "in-progress":
                return Columns([f"🚀 {name}", Status(""), extra, elapsed])
            case "succeeded":
                return f"✅ [green]{name}[/] {extra} {elapsed}"
            case "failed":
                return f"💢 [red]{name}[/] {extra} {elapsed}"
        return f"? {name}"

    def _build_header(self):
        return f"{self.op_name}: {dict(self.data)}"

    def _build_content(self):
        if not self.render_node:
            return

        for op in self.ops:
            op.build_ui(self.render_node)

        if self.show_logs and self.logs:
            if not self.render_logs:
                self.render_logs = self.render_node.add(UIOpLogs(self))
            else:
                # make sure logs are at the end
                self.render_node.children.remove(self.render_logs)
                self.render_node.children.append(self.render_logs)

    def build_ui(self, parent_node: tree.Tree):
        if self.render_node is None:
            self.render_node = parent_node.add(self._build_header())
        else:
            self.render_node.label = self._build_header()

        if self.error:
            self.show_content = True
            self.show_logs = True

        if self.show_content:
            self._build_content()

    def handle_log(self, log: str):
        if not log.endswith("\n"):
            log = f"{log}\n"
        self._keep_log(log)

    def _keep_log(self, log: str):
        if len(self.logs) == self.logs.maxlen:
            self.dropped_logs += 1
        self.logs.append(log)

    def handle_start(self, op_time: float):
        self.started_at = op_time

    def handle_progress(self, **data):
        self.data.update(data)

    def handle_error(self, error, tb):
        """Tracks an exception caught during op execution."""
        self.error = error
        if tb:
            self._keep_log(tb)

    def handle_finish(self, op_time: float):
        """Called after the operation is finished, even after an error."""
        self.finished_at = op_time

    def __rich_console__(self, *args):
        if self.render_node:
            yield self.render_node


class UIOpLogs(ConsoleRenderable):
    op: OpBase

    def __init__(self, op: OpBase):
        self.op = op

    def render_logs(self, logs: t.Iterable[str], max_output=5, dropped=0):
        logs_text = "".join(logs)
        nl_count = logs_text.count("\n") + dropped
        lines = logs_text.rstrip("\n").split("\n")

        log_lines = (
            f"... truncated {nl_count - max_output} line(s) ...\n"
            if nl_count > max_output
            else ""
        ) + "\n".join(lines[-max_output:])
        return Panel(log_lines.strip(), title="Logs", title_align="left")

    def __rich_console__(self, *args):
        if self.op.logs:
            yield self.render_logs(
                self.op.logs, max_output=self.op.show_logs_lines, dropped=self.op.dropped_logs
            )


@dataclass
class OpSweep(OpBase):
    op_name: str = "study/sweep"

    def _build_header(self):
        name = f"[grey50]{self.data.parameter}=[/][b]{self.data.value}[/]"
        done = self.data.get("done", 0)
        parts = [f"[grey70]{done}/{self.data.trials} trials x {self.data.cases} cases[/]"]
        rate = self.data.get("failure_rate")
        if rate is not None:
            parts.append(f"failure rate [b]{rate:.1%}[/]")
        return self._state_label(name, "  ".join(parts))

    def handle_log(self, log: str):
        # aborted trials are listed, not folded away
        super().handle_log(log)
        self.show_logs = True


@dataclass
class OpOutputs(OpBase):
    op_name: str = "study/outputs"
    show_content: bool = False

    def _build_header(self):
        files = self.data.get("files")
        extra = f"[grey70]{files} files[/]" if files is not None else ""
        return self._state_label(f"📝 [grey50]{self.data.dir}[/]", extra)


@dataclass
class OpStudyRun(OpBase):
    op_name: str = "study/run"

    def _build_header(self):
        variants = ", ".join(self.data.get("variants") or [])
        return self._state_label(
            f"[b]{self.data.name}[/] [grey50]sweep over {self.data.parameter}[/]",
            f"[grey70]seed {self.data.seed}; {variants}[/]",
        )


@dataclass
class OpStudyJob(OpBase):
    op_name: str = ROOT_OP

    def build_ui(self):
        if self.render_node is None:
            self.render_node = tree.Tree(
                "🚀 [b green]Running study...",
                highlight=False,
                guide_style="grey70",
            )
        self._build_content()

    def __rich_console__(self, *args):
        self.show_logs = self.show_logs or bool(self.error)
        self.build_ui()
        yield self.render_node


OPS_UI = [cls for cls in globals().values() if isclass(cls) and issubclass(cls, OpBase)]
OPS_UI_MAP: dict[str, type[OpBase]] = {
    op_name: cls for cls in OPS_UI if (op_name := getattr(cls, "op_name", None))
}


class StudyView(ConsoleRenderable):
    root_op: OpStudyJob | None = None

    def __init__(self, show_debug: bool = False) -> None:
        self.ops_map: dict[tuple[str, ...], OpBase] = {}
        self.show_debug = show_debug

    def get_parent_node(self, op_path: tuple[str, ...]):
        for l in range(len(op_path) - 1, 0, -1):
            node = self.ops_map.get(tuple(op_path[:l]))
            if node is not None:
                return node
        return None

    def build_op(self, op_name: str, op_data) -> OpBase:
        if cls := OPS_UI_MAP.get(op_name):
            return cls(op_name=op_name, data=op_data)
        return OpBase(op_name=op_name, data=op_data)

    def handle_event(self, event: events.Event) -> bool:
        """Applies one event; returns True once the study job has finished."""
        match event:
            case events.EvOpStart() as ev:
                op = self.build_op(op_name=ev.op, op_data=ev.data)

                if self.root_op is None and isinstance(op, OpStudyJob):
                    self.root_op = op
                elif parent := self.get_parent_node(ev.op_path):
                    parent.ops.append(op)

                self.ops_map[ev.op_path] = op
                op.handle_start(ev.ts)

            case events.EvOpLog(op_path=op_path, log=log):
                self.ops_map[op_path].handle_log(log)
            case events.EvOpProgress(op_path=op_path, data=data):
                self.ops_map[op_path].handle_progress(**data)
            case events.EvOpError(op_path=op_path, error=error, tb=tb):
                self.ops_map[op_path].handle_error(error, tb)
            case events.EvOpFinish(op_path=op_path, op=op_name, ts=ts):
                self.ops_map[op_path].handle_finish(ts)
                if op_name == ROOT_OP:
                    return True
            case events.EvDebug(op_path=op_path, log=log):
                op = self.root_op if self.root_op else self.ops_map.get(op_path)
                if op is not None:
                    op.handle_log(f"DEBUG: {log}\n")
                    if self.show_debug:
                        op.show_logs = True
        return False

    async def listen_to_channel(self, channel: AsyncChannel):
        async for event in channel.recv():
            if self.handle_event(event):
                return

    def __rich_console__(self, *args):
        yield self.root_op if self.root_op else "Loading..."
