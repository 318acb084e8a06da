import logging

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from faultsbl.errors import NumericalError

logger = logging.getLogger(__name__)


def symmetrize(a: np.ndarray) -> np.ndarray:
    return (a + a.T) / 2


def spd_inverse(
    a: np.ndarray, *, jitter: float, max_jitter: float
) -> tuple[np.ndarray, float]:
    """Inverts an SPD matrix through a Cholesky factorization.

    The matrix is first equilibrated to unit diagonal, so ``jitter`` is relative
    to the diagonal. On a failed factorization the jitter grows 10x per attempt
    up to ``max_jitter``. Returns the symmetric inverse and the jitter used.
    """
    n = a.shape[0]
    diag = np.diag(a)
    if not np.all(np.isfinite(a)) or np.any(diag <= 0):
        raise NumericalError("Matrix is not finite or has a nonpositive diagonal.")

    scale = 1.0 / np.sqrt(diag)
    scaled = symmetrize(a * np.outer(scale, scale))
    eye = np.eye(n)

    current = jitter
    while True:
        try:
            factor = cho_factor(scaled + current * eye, lower=True, check_finite=False)
            break
        except LinAlgError:
            if current >= max_jitter:
                raise NumericalError(
                    f"Cholesky factorization failed with jitter {current:g}."
                ) from None
            current = min(max(current * 10, 1e-12), max_jitter)
            logger.debug("Escalating SPD jitter to %g", current)

    inverse = cho_solve(factor, eye, check_finite=False) * np.outer(scale, scale)
    return symmetrize(inverse), current


def is_spd(a: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        return False
    return True
