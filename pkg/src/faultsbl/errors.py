from __future__ import annotations

from pathlib import Path


class FaultSblError(Exception):
    pass


class DimensionError(FaultSblError, ValueError):
    pass


class BlockIndexError(FaultSblError, IndexError):
    pass


class NumericalError(FaultSblError, ArithmeticError):
    """An SPD system could not be factorized even after jitter escalation."""


class ScenarioError(FaultSblError, ValueError):
    pass


class ConfigError(FaultSblError):
    field_path: str

    def __init__(self, field_path: str, reason: str):
        self.field_path = field_path
        self.reason = reason
        super().__init__(f"{field_path}: {reason}" if field_path else reason)


class MatrixFileError(FaultSblError):
    path: Path
    line: int | None

    def __init__(self, path: Path | str, reason: str, line: int | None = None):
        self.path = Path(path)
        self.line = line
        where = f"{self.path}:{line}" if line is not None else str(self.path)
        super().__init__(f"{where}: {reason}")


class AggregationError(FaultSblError, ValueError):
    pass
