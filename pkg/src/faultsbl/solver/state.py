from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from faultsbl.model import BlockLayout
from .linalg import is_spd


@dataclass(frozen=True, eq=False)
class PosteriorState:
    """Variational moments and hyperparameters after one VBEM iteration."""

    mu_x: np.ndarray
    sigma_x: np.ndarray
    alpha_mean: np.ndarray
    b_mean: np.ndarray
    B: np.ndarray
    lambda_: float
    iteration: int = 0

    def replace(self, **changes) -> PosteriorState:
        return dataclasses.replace(self, **changes)

    def diagonal_blocks(self, layout: BlockLayout) -> np.ndarray:
        """``Sigma_{x_i}`` for every block, shape ``N x L x L``."""
        n, l = layout.num_blocks, layout.block_len
        return np.einsum("iaib->iab", self.sigma_x.reshape(n, l, n, l))

    def second_moments(self, layout: BlockLayout) -> np.ndarray:
        """``Sigma_{x_i} + mu_i mu_i^T`` for every block, shape ``N x L x L``."""
        mu = self.mu_x.reshape(layout.num_blocks, layout.block_len)
        return self.diagonal_blocks(layout) + np.einsum("ia,ib->iab", mu, mu)

    def violations(self, sym_tol: float = 1e-10) -> list[str]:
        found = []
        scale = max(1.0, float(np.abs(self.sigma_x).max()))
        if np.abs(self.sigma_x - self.sigma_x.T).max() > sym_tol * scale:
            found.append("sigma_x is not symmetric")
        if not is_spd(self.sigma_x):
            found.append("sigma_x is not positive definite")
        if not is_spd(self.B) or np.abs(self.B - self.B.T).max() > sym_tol * max(
            1.0, float(np.abs(self.B).max())
        ):
            found.append("B is not symmetric positive definite")
        if not np.all(self.alpha_mean > 0):
            found.append("alpha_mean has nonpositive entries")
        if not np.all(self.b_mean > 0):
            found.append("b_mean has nonpositive entries")
        if not self.lambda_ > 0:
            found.append("lambda is not positive")
        return found


@dataclass(frozen=True)
class IterationTrace:
    delta_mu: tuple[float, ...] = ()
    lambdas: tuple[float, ...] = ()


@dataclass(frozen=True, eq=False)
class SolveResult:
    mean_deviations: np.ndarray
    block_means: np.ndarray
    # 1-based block indices, largest |mean deviation| first
    ranking: tuple[int, ...]
    converged: bool
    iterations_run: int
    final_state: PosteriorState
    trace: IterationTrace = field(default_factory=IterationTrace)
