"""Shared builders for tests; imported as a plain module."""

import numpy as np

from faultsbl.model import BlockSparseProblem


def random_problem(
    rng: np.random.Generator, m: int, n: int, l: int, k: int | None = None, noise: float = 0.0
) -> BlockSparseProblem:
    """Gaussian dictionary, ``k`` active blocks (all when None) and optional white noise."""
    phi = rng.standard_normal((m, n))
    X = np.zeros((n, l))
    active = rng.choice(n, size=k or n, replace=False)
    X[active] = rng.standard_normal((len(active), l))
    Y = phi @ X + noise * rng.standard_normal((m, l))
    return BlockSparseProblem.from_measurements(phi, Y)


def random_spd(rng: np.random.Generator, size: int, scale: float = 1.0) -> np.ndarray:
    a = rng.standard_normal((size, size))
    return scale * (a @ a.T / size + np.eye(size))


def dense_design(problem: BlockSparseProblem) -> np.ndarray:
    return np.kron(problem.phi, np.eye(problem.num_samples))
