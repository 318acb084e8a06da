"""E-step and M-step updates of the variational Bayes EM loop.

Each update is a pure function of the current moments. ``b_mean`` already holds
``b_small`` for blocks outside the prior knowledge set, so the alpha update
reads its Gamma rate directly from it.
"""

import logging

import numpy as np

from faultsbl.errors import NumericalError
from faultsbl.model import BlockLayout, BlockSparseProblem, PriorKnowledgeSet
from faultsbl.model import apply_design
from .config import SolverConfig
from .linalg import spd_inverse, symmetrize
from .state import PosteriorState

logger = logging.getLogger(__name__)


def prior_precision(alpha_mean: np.ndarray, B: np.ndarray) -> np.ndarray:
    """``<AB> = blockdiag(alpha_1 B, ..., alpha_N B)``."""
    return np.kron(np.diag(alpha_mean), B)


def estep_x(
    problem: BlockSparseProblem, state: PosteriorState, config: SolverConfig
) -> tuple[np.ndarray, np.ndarray]:
    precision = problem.gram / state.lambda_ + prior_precision(state.alpha_mean, state.B)
    sigma_x, _ = spd_inverse(
        precision, jitter=config.spd_jitter, max_jitter=config.max_jitter
    )
    mu_x = sigma_x @ problem.dty / state.lambda_
    return mu_x, sigma_x


def estep_alpha(
    state: PosteriorState, layout: BlockLayout, config: SolverConfig
) -> np.ndarray:
    moments = state.second_moments(layout)
    quad = np.einsum("iab,ba->i", moments, state.B)
    rate = quad / 2 + state.b_mean
    if not np.all(rate > 0):
        raise NumericalError("Nonpositive Gamma rate in the alpha update.")
    alpha = (config.a + layout.block_len / 2) / rate
    return np.minimum(alpha, config.alpha_cap)


def estep_b(
    state: PosteriorState, prior_set: PriorKnowledgeSet, config: SolverConfig
) -> np.ndarray:
    n = state.alpha_mean.shape[0]
    b_mean = np.full(n, config.b_small)
    if config.use_prior_knowledge and len(prior_set):
        known = prior_set.mask(n)
        b_mean[known] = (config.p_shape + config.a) / (
            config.q_rate + state.alpha_mean[known]
        )
    return b_mean


def mstep_B(
    state: PosteriorState, layout: BlockLayout, config: SolverConfig
) -> np.ndarray:
    if not config.learn_B:
        return np.eye(layout.block_len)
    moments = state.second_moments(layout)
    weighted = np.einsum("i,iab->ab", state.alpha_mean, moments) / layout.num_blocks
    B, _ = spd_inverse(
        symmetrize(weighted), jitter=config.spd_jitter, max_jitter=config.max_jitter
    )
    if config.normalize_B:
        # only alpha_i B is identified; pin the scale of B
        B *= layout.block_len / np.trace(B)
    return B


def mstep_lambda(
    problem: BlockSparseProblem, state: PosteriorState, config: SolverConfig
) -> float:
    """Noise variance update.

    ``state.alpha_mean`` and ``state.B`` must be the ones ``state.sigma_x`` was
    computed with; ``state.lambda_`` is the previous estimate.
    """
    layout = problem.layout
    residual = problem.y_stacked - apply_design(problem.phi, state.mu_x, layout)
    # Tr(Sigma_x blockdiag(alpha_i B)) only touches the diagonal blocks
    trace = float(
        np.einsum(
            "i,iab,ba->", state.alpha_mean, state.diagonal_blocks(layout), state.B
        )
    )
    lam = (
        float(residual @ residual) + state.lambda_ * (layout.size - trace)
    ) / problem.measurement_layout.size
    if not lam >= config.lambda_floor:
        logger.debug("lambda=%g floored to %g", lam, config.lambda_floor)
        return config.lambda_floor
    return lam
