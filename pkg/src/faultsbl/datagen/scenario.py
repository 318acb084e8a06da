from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from faultsbl.errors import ScenarioError
from faultsbl.model import BlockSparseProblem


class DictionarySource(enum.StrEnum):
    RANDOM_HYPERSPHERE = "random_hypersphere"
    FILE = "file"


@dataclass(frozen=True)
class ScenarioSpec:
    m: int
    n: int
    k: int
    l: int
    beta: float
    # None means noiseless
    snr_db: float | None = None
    trials: int = 100
    seed: int = 0
    dictionary_source: DictionarySource = DictionarySource.RANDOM_HYPERSPHERE
    dictionary_path: Path | None = None

    def __post_init__(self):
        if min(self.m, self.n, self.l) < 1:
            raise ScenarioError(f"m, n, l must be >= 1 (m={self.m}, n={self.n}, l={self.l}).")
        if not 1 <= self.k <= self.n:
            raise ScenarioError(f"k must be in 1..n={self.n}, got {self.k}.")
        if self.trials < 1:
            raise ScenarioError(f"trials must be >= 1, got {self.trials}.")
        if not 0 <= self.beta < 1:
            raise ScenarioError(f"beta must be in [0, 1), got {self.beta}.")
        if self.dictionary_source is DictionarySource.FILE and self.dictionary_path is None:
            raise ScenarioError("dictionary_source=file requires dictionary_path.")

    @property
    def noiseless(self) -> bool:
        return self.snr_db is None

    def replace(self, **changes) -> ScenarioSpec:
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True, order=True)
class KnowledgeCase:
    """Sizes of the correct (P_C) and erroneous (P_E) parts of the prior set."""

    n_correct: int
    n_erroneous: int

    @property
    def is_empty(self) -> bool:
        return self.n_correct == 0 and self.n_erroneous == 0

    @property
    def label(self) -> str:
        return f"{self.n_correct},{self.n_erroneous}"

    @classmethod
    def parse(cls, raw: str) -> KnowledgeCase:
        try:
            n_correct, n_erroneous = (int(p) for p in raw.split(","))
        except ValueError:
            raise ScenarioError(f"Knowledge case must look like 'C,E', got {raw!r}.") from None
        return cls(n_correct, n_erroneous)

    def check(self, k: int) -> None:
        if not (
            0 <= self.n_erroneous <= self.n_correct <= (3 * k) // 4
            and self.n_erroneous <= k // 2
        ):
            raise ScenarioError(
                f"Knowledge case ({self.label}) violates the partial-knowledge caps for K={k}."
            )


@dataclass(frozen=True, eq=False)
class GeneratedInstance:
    problem: BlockSparseProblem
    x_true: np.ndarray
    # 1-based
    support_true: frozenset[int]
    x_bar_true: np.ndarray
    noise: np.ndarray

    @property
    def k(self) -> int:
        return len(self.support_true)
