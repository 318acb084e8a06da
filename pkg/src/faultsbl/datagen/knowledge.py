import numpy as np

from faultsbl.errors import ScenarioError
from faultsbl.model import PriorKnowledgeSet
from .scenario import GeneratedInstance, KnowledgeCase


def enumerate_cases(k: int) -> list[KnowledgeCase]:
    """All partial-knowledge cases for ``k`` faults, lexicographically ordered.

    At most 75% of the faults may be known correctly and at most 50% of ``k``
    wrong indices may be added, never more wrong than correct ones.
    """
    if k < 1:
        raise ScenarioError(f"k must be >= 1, got {k}.")
    max_correct, max_erroneous = (3 * k) // 4, k // 2
    return [
        KnowledgeCase(n_correct, n_erroneous)
        for n_correct in range(max_correct + 1)
        for n_erroneous in range(min(n_correct, max_erroneous) + 1)
    ]


def sample_knowledge(
    instance: GeneratedInstance, case: KnowledgeCase, rng: np.random.Generator
) -> PriorKnowledgeSet:
    case.check(instance.k)
    n = instance.problem.num_errors
    support = sorted(instance.support_true)
    complement = sorted(set(range(1, n + 1)) - instance.support_true)
    if case.n_erroneous > len(complement):
        raise ScenarioError(
            f"Case ({case.label}) needs {case.n_erroneous} wrong indices, "
            f"only {len(complement)} inactive blocks exist."
        )

    correct = rng.choice(support, size=case.n_correct, replace=False)
    erroneous = rng.choice(complement, size=case.n_erroneous, replace=False)
    return PriorKnowledgeSet.of([*correct.tolist(), *erroneous.tolist()], num_blocks=n)
