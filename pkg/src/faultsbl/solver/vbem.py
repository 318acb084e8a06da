from __future__ import annotations

import logging
import typing as t

import numpy as np

from faultsbl.errors import BlockIndexError
from faultsbl.model import BlockSparseProblem, PriorKnowledgeSet, row_means, unstack
from .config import SolverConfig
from .state import IterationTrace, PosteriorState, SolveResult
from .steps import estep_alpha, estep_b, estep_x, mstep_B, mstep_lambda

logger = logging.getLogger(__name__)

IterationCallback = t.Callable[[PosteriorState], None]


def rank_blocks(values: np.ndarray) -> tuple[int, ...]:
    """1-based indices by descending magnitude; ties go to the lower index."""
    order = np.argsort(-np.abs(np.asarray(values, dtype=float)), kind="stable")
    return tuple(int(i) + 1 for i in order)


def top_k(values: np.ndarray, k: int) -> frozenset[int]:
    n = len(values)
    if not 1 <= k <= n:
        raise BlockIndexError(f"k={k} is out of range 1..{n}.")
    return frozenset(rank_blocks(values)[:k])


def ranking_for_k(result: SolveResult, k: int) -> frozenset[int]:
    return top_k(result.mean_deviations, k)


def as_prior_set(
    prior_set: PriorKnowledgeSet | t.Iterable[int] | None, num_blocks: int
) -> PriorKnowledgeSet:
    if prior_set is None:
        return PriorKnowledgeSet()
    if not isinstance(prior_set, PriorKnowledgeSet):
        prior_set = PriorKnowledgeSet.of(prior_set)
    prior_set.check(num_blocks)
    return prior_set


def initial_state(
    problem: BlockSparseProblem, prior_set: PriorKnowledgeSet, config: SolverConfig
) -> PosteriorState:
    layout = problem.layout
    b_mean = np.full(layout.num_blocks, config.b_small)
    if config.use_prior_knowledge and len(prior_set):
        b_mean[prior_set.mask(layout.num_blocks)] = config.b_init_known
    return PosteriorState(
        mu_x=np.zeros(layout.size),
        sigma_x=np.eye(layout.size),
        # not initialized by the algorithm itself; 1 makes the first x-update a ridge fit
        alpha_mean=np.ones(layout.num_blocks),
        b_mean=b_mean,
        B=np.eye(layout.block_len),
        lambda_=1.0,
        iteration=0,
    )


def solve(
    problem: BlockSparseProblem,
    prior_set: PriorKnowledgeSet | t.Iterable[int] | None = None,
    config: SolverConfig | None = None,
    *,
    history: bool = False,
    on_iteration: IterationCallback | None = None,
) -> SolveResult:
    """Runs VBEM until ``max|mu_x^{t-1} - mu_x^t| < gamma_tol`` or ``max_iters``.

    Update order per iteration: x, alpha, b (E-step), then B, lambda (M-step).
    Non-convergence is reported through ``SolveResult.converged``.
    """
    config = config or SolverConfig()
    layout = problem.layout
    prior_set = as_prior_set(prior_set, layout.num_blocks)
    if not config.use_prior_knowledge:
        prior_set = PriorKnowledgeSet()

    state = initial_state(problem, prior_set, config)
    mu_prev = state.mu_x
    deltas: list[float] = []
    lambdas: list[float] = []
    converged = False

    for iteration in range(1, config.max_iters + 1):
        mu_x, sigma_x = estep_x(problem, state, config)
        # alpha and B that produced sigma_x, as the lambda update expects
        moments = state.replace(mu_x=mu_x, sigma_x=sigma_x)

        alpha_mean = estep_alpha(moments, layout, config)
        current = moments.replace(alpha_mean=alpha_mean)
        current = current.replace(b_mean=estep_b(current, prior_set, config))

        state = current.replace(
            B=mstep_B(current, layout, config),
            lambda_=mstep_lambda(problem, moments, config),
            iteration=iteration,
        )
        if on_iteration is not None:
            on_iteration(state)

        delta = float(np.max(np.abs(mu_prev - mu_x)))
        if history:
            deltas.append(delta)
            lambdas.append(state.lambda_)
        if delta < config.gamma_tol:
            converged = True
            break
        mu_prev = mu_x

    if not converged:
        logger.info(
            "VBEM stopped after %d iterations without reaching gamma_tol=%g",
            state.iteration,
            config.gamma_tol,
        )

    mean_deviations = row_means(state.mu_x, layout)
    return SolveResult(
        mean_deviations=mean_deviations,
        block_means=unstack(state.mu_x, layout),
        ranking=rank_blocks(mean_deviations),
        converged=converged,
        iterations_run=state.iteration,
        final_state=state,
        trace=IterationTrace(delta_mu=tuple(deltas), lambdas=tuple(lambdas)),
    )
