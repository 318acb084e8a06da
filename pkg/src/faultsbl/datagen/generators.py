import numpy as np

from faultsbl.errors import DimensionError, ScenarioError
from faultsbl.model import BlockSparseProblem, stack_measurements
from .scenario import DictionarySource, GeneratedInstance, ScenarioSpec


def sample_dictionary(m: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Columns drawn uniformly from the unit sphere in R^m."""
    if m < 1 or n < 1:
        raise ScenarioError(f"Dictionary needs m, n >= 1, got {m}x{n}.")
    phi = rng.standard_normal((m, n))
    return phi / np.linalg.norm(phi, axis=0)


def ar1_rows(k: int, l: int, beta: float, rng: np.random.Generator) -> np.ndarray:
    """Stationary AR(1) rows with unit marginal variance and lag-1 correlation beta."""
    if not 0 <= beta < 1:
        raise ScenarioError(f"AR(1) coefficient must be in [0, 1), got {beta}.")
    rows = np.empty((k, l))
    rows[:, 0] = rng.standard_normal(k)
    innovation_scale = np.sqrt(1 - beta**2)
    for j in range(1, l):
        rows[:, j] = beta * rows[:, j - 1] + innovation_scale * rng.standard_normal(k)
    return rows


def apply_snr_noise(
    clean: np.ndarray, snr_db: float | None, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Adds Gaussian noise scaled so that ``20 log10(|clean|_F / |V|_F) == snr_db``."""
    clean = np.asarray(clean, dtype=float)
    if snr_db is None:
        v = np.zeros_like(clean)
        return clean.copy(), v

    clean_norm = np.linalg.norm(clean)
    if clean_norm == 0:
        raise ScenarioError("Cannot calibrate noise to a finite SNR on an all-zero signal.")
    v = rng.standard_normal(clean.shape)
    v *= clean_norm / (np.linalg.norm(v) * 10 ** (snr_db / 20))
    return clean + v, v


def generate_instance(
    spec: ScenarioSpec,
    rng: np.random.Generator,
    dictionary: np.ndarray | None = None,
) -> GeneratedInstance:
    if spec.dictionary_source is DictionarySource.RANDOM_HYPERSPHERE:
        phi = sample_dictionary(spec.m, spec.n, rng)
    else:
        if dictionary is None:
            raise ScenarioError("A file dictionary must be loaded and passed in.")
        phi = np.asarray(dictionary, dtype=float)
        if phi.shape != (spec.m, spec.n):
            raise DimensionError(
                f"Dictionary is {phi.shape[0]}x{phi.shape[1]}, scenario expects {spec.m}x{spec.n}."
            )

    support = np.sort(rng.choice(spec.n, size=spec.k, replace=False))
    x_true = np.zeros((spec.n, spec.l))
    x_true[support] = ar1_rows(spec.k, spec.l, spec.beta, rng)

    Y, v = apply_snr_noise(phi @ x_true, spec.snr_db, rng)
    problem = BlockSparseProblem(
        phi=phi,
        y_stacked=stack_measurements(Y),
        num_sensors=spec.m,
        num_errors=spec.n,
        num_samples=spec.l,
    )
    return GeneratedInstance(
        problem=problem,
        x_true=x_true,
        support_true=frozenset(int(i) + 1 for i in support),
        x_bar_true=x_true.mean(axis=1),
        noise=v,
    )
