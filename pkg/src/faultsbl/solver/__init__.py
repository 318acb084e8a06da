from .config import SolverConfig
from .state import IterationTrace, PosteriorState, SolveResult
from .steps import estep_alpha, estep_b, estep_x, mstep_B, mstep_lambda, prior_precision
from .vbem import initial_state, rank_blocks, ranking_for_k, solve, top_k

__all__ = [
    "IterationTrace",
    "PosteriorState",
    "SolveResult",
    "SolverConfig",
    "estep_alpha",
    "estep_b",
    "estep_x",
    "initial_state",
    "mstep_B",
    "mstep_lambda",
    "prior_precision",
    "rank_blocks",
    "ranking_for_k",
    "solve",
    "top_k",
]
