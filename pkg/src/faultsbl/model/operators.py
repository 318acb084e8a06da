"""Structured operators for the block single-measurement-vector model.

The design matrix ``D = kron(phi, I_L)`` is never built. With ``x`` stacked
block-contiguously, ``D @ x`` equals ``(phi @ X).ravel()`` where ``X`` is ``x``
reshaped to ``N x L``.
"""

import numpy as np

from faultsbl.errors import DimensionError
from .layout import BlockLayout


def _check_phi(phi: np.ndarray, layout: BlockLayout) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    if phi.ndim != 2 or phi.shape[1] != layout.num_blocks:
        raise DimensionError(
            f"phi must have N={layout.num_blocks} columns, got shape {phi.shape}."
        )
    return phi


def stack_measurements(Y: np.ndarray, layout: BlockLayout | None = None) -> np.ndarray:
    """``y = Vec(Y^T)``: row ``i`` of ``Y`` becomes block ``i`` of ``y``."""
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2:
        raise DimensionError(f"Measurements must be a matrix, got shape {Y.shape}.")
    if layout is not None and Y.shape != (layout.num_blocks, layout.block_len):
        raise DimensionError(
            f"Measurements must be {layout.num_blocks}x{layout.block_len}, got {Y.shape}."
        )
    return Y.reshape(-1).copy()


def unstack(v: np.ndarray, layout: BlockLayout) -> np.ndarray:
    """Inverse of :func:`stack_measurements`; returns an ``N x L`` matrix."""
    v = layout.check_vector(v)
    return v.reshape(layout.num_blocks, layout.block_len).copy()


def apply_design(phi: np.ndarray, x: np.ndarray, layout: BlockLayout) -> np.ndarray:
    phi = _check_phi(phi, layout)
    X = layout.check_vector(x, "x").reshape(layout.num_blocks, layout.block_len)
    return (phi @ X).reshape(-1)


def apply_design_transpose(
    phi: np.ndarray, r: np.ndarray, layout: BlockLayout
) -> np.ndarray:
    phi = _check_phi(phi, layout)
    r = np.asarray(r, dtype=float)
    m = phi.shape[0]
    if r.ndim != 1 or r.shape[0] != m * layout.block_len:
        raise DimensionError(
            f"r must have length M*L={m * layout.block_len}, got shape {r.shape}."
        )
    return (phi.T @ r.reshape(m, layout.block_len)).reshape(-1)


def design_gram(phi: np.ndarray, layout: BlockLayout) -> np.ndarray:
    """``D^T D = kron(phi^T phi, I_L)``, dense ``NL x NL``."""
    phi = _check_phi(phi, layout)
    return np.kron(phi.T @ phi, np.eye(layout.block_len))


def extract_block(v: np.ndarray, i: int, layout: BlockLayout) -> np.ndarray:
    v = layout.check_vector(v)
    return v[layout.block_slice(i)].copy()


def row_means(mu_x: np.ndarray, layout: BlockLayout) -> np.ndarray:
    """Per-block sample mean: the mean-deviation estimate of each process error."""
    mu_x = layout.check_vector(mu_x, "mu_x")
    return mu_x.reshape(layout.num_blocks, layout.block_len).mean(axis=1)


def mutual_coherence(phi: np.ndarray) -> float:
    """Largest absolute normalized inner product between two distinct columns."""
    phi = np.asarray(phi, dtype=float)
    if phi.ndim != 2 or phi.shape[1] < 2:
        return 0.0
    norms = np.linalg.norm(phi, axis=0)
    if np.any(norms == 0):
        raise DimensionError("phi has an all-zero column.")
    normalized = phi / norms
    gram = np.abs(normalized.T @ normalized)
    np.fill_diagonal(gram, 0.0)
    return float(min(gram.max(), 1.0))
