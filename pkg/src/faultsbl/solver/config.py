from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from faultsbl.errors import ConfigError


@dataclass(frozen=True)
class SolverConfig:
    # Gamma shape of the alpha layer
    a: float = 1e-4
    # fixed rate b_i outside the prior knowledge set
    b_small: float = 1e-4
    # initial <b_i> inside the prior knowledge set
    b_init_known: float = 1.0
    # Gamma(b_i | p, q) hyperprior
    p_shape: float = 1.0
    q_rate: float = 0.1

    gamma_tol: float = 1e-6
    max_iters: int = 2000

    learn_B: bool = True
    # rescale each B update to trace L; alpha absorbs the scale
    normalize_B: bool = True
    use_prior_knowledge: bool = True

    spd_jitter: float = 1e-10
    max_jitter: float = 1e-6
    alpha_cap: float = 1e12
    lambda_floor: float = 1e-12

    def __post_init__(self):
        for name in ("a", "b_small", "b_init_known", "p_shape", "q_rate", "gamma_tol"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"solver.{name}", "must be > 0")
        for name in ("alpha_cap", "lambda_floor", "max_jitter"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"solver.{name}", "must be > 0")
        if not self.gamma_tol < 1:
            raise ConfigError("solver.gamma_tol", "must be < 1")
        if self.max_iters < 1:
            raise ConfigError("solver.max_iters", "must be a positive integer")
        if self.spd_jitter < 0:
            raise ConfigError("solver.spd_jitter", "must be >= 0")
        if self.spd_jitter > self.max_jitter:
            raise ConfigError("solver.spd_jitter", "must not exceed max_jitter")

    def replace(self, **changes) -> SolverConfig:
        return dataclasses.replace(self, **changes)

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in dataclasses.fields(cls))
