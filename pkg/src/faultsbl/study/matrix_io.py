import csv
import logging
from importlib import resources
from pathlib import Path

import numpy as np

from faultsbl.errors import MatrixFileError
from faultsbl.model import mutual_coherence

logger = logging.getLogger(__name__)

BUILTIN_PREFIX = "builtin:"
HIGH_COHERENCE = 0.99


def resolve_matrix_path(raw: str | Path, base_dir: Path | None = None) -> Path:
    """``builtin:<name>`` points into the packaged data directory; other
    relative paths are taken relative to ``base_dir``."""
    raw = str(raw)
    if raw.startswith(BUILTIN_PREFIX):
        name = raw.removeprefix(BUILTIN_PREFIX)
        return Path(str(resources.files("faultsbl.study").joinpath("data", name)))
    path = Path(raw).expanduser()
    if not path.is_absolute() and base_dir is not None:
        path = base_dir / path
    return path


def load_matrix_csv(
    path: Path | str, expected_shape: tuple[int, int] | None = None
) -> np.ndarray:
    """Reads a headerless comma-separated matrix, one row per sensor.

    Blank lines and lines starting with ``#`` are skipped.
    """
    path = Path(path)
    rows: list[list[float]] = []
    width: int | None = None
    try:
        with path.open(newline="") as f:
            for line_no, cells in enumerate(csv.reader(f), start=1):
                if not cells or not "".join(cells).strip():
                    continue
                if cells[0].lstrip().startswith("#"):
                    continue
                try:
                    row = [float(c) for c in cells]
                except ValueError:
                    raise MatrixFileError(path, f"non-numeric cell in {cells!r}", line=line_no) from None
                if width is None:
                    width = len(row)
                elif len(row) != width:
                    raise MatrixFileError(
                        path, f"expected {width} columns, found {len(row)}", line=line_no
                    )
                rows.append(row)
    except OSError as e:
        raise MatrixFileError(path, f"cannot read file: {e.strerror or e}") from None

    if not rows:
        raise MatrixFileError(path, "no matrix rows found")

    matrix = np.array(rows, dtype=float)
    if not np.all(np.isfinite(matrix)):
        raise MatrixFileError(path, "matrix has non-finite values")
    if expected_shape is not None and matrix.shape != tuple(expected_shape):
        raise MatrixFileError(
            path,
            f"matrix is {matrix.shape[0]}x{matrix.shape[1]}, "
            f"scenario expects {expected_shape[0]}x{expected_shape[1]}",
        )
    return matrix


def load_dictionary(
    path: Path | str, expected_shape: tuple[int, int] | None = None
) -> np.ndarray:
    """Loads a fault pattern matrix and warns when its columns are nearly collinear."""
    phi = load_matrix_csv(path, expected_shape)
    if not np.all(phi.any(axis=0)):
        raise MatrixFileError(path, "fault pattern matrix has an all-zero column")
    coherence = mutual_coherence(phi)
    if coherence >= HIGH_COHERENCE:
        logger.warning(
            "Fault pattern matrix %s has mutual coherence %.4f; "
            "fault locations sharing a column pattern cannot be told apart.",
            path,
            coherence,
        )
    return phi
