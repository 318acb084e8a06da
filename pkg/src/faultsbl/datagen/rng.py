"""Independent, re-derivable random substreams for every trial.

The instance of trial ``t`` at sweep position ``s`` uses spawn key
``(s, t, 0)``; the prior knowledge drawn for case ``(c, e)`` of that trial uses
``(s, t, 1, c, e)``. Adding sweep values or cases never perturbs other streams,
and every knowledge case of a trial sees the same instance.
"""

import numpy as np

from .scenario import KnowledgeCase

_INSTANCE_STREAM = 0
_KNOWLEDGE_STREAM = 1


def instance_rng(seed: int, sweep_index: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(seed, spawn_key=(sweep_index, trial, _INSTANCE_STREAM))
    )


def knowledge_rng(
    seed: int, sweep_index: int, trial: int, case: KnowledgeCase
) -> np.random.Generator:
    key = (sweep_index, trial, _KNOWLEDGE_STREAM, case.n_correct, case.n_erroneous)
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))
