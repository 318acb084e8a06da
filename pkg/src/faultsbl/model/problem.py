from __future__ import annotations

import typing as t
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from faultsbl.errors import BlockIndexError, DimensionError
from .layout import BlockLayout
from .operators import apply_design_transpose, design_gram, stack_measurements


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class BlockSparseProblem:
    """One recovery instance: ``y = (phi ⊗ I_L) x + v``."""

    phi: np.ndarray
    y_stacked: np.ndarray
    num_sensors: int
    num_errors: int
    num_samples: int

    def __post_init__(self):
        if min(self.num_sensors, self.num_errors, self.num_samples) < 1:
            raise DimensionError(
                "M, N and L must all be >= 1, got "
                f"M={self.num_sensors}, N={self.num_errors}, L={self.num_samples}."
            )

        phi = np.asarray(self.phi, dtype=float)
        if phi.shape != (self.num_sensors, self.num_errors):
            raise DimensionError(
                f"phi must be {self.num_sensors}x{self.num_errors}, got {phi.shape}."
            )
        zero_columns = np.flatnonzero(~phi.any(axis=0))
        if zero_columns.size:
            raise DimensionError(
                f"phi column(s) {[int(c) + 1 for c in zero_columns]} are all zero; "
                "the corresponding blocks are unidentifiable."
            )

        y = np.asarray(self.y_stacked, dtype=float)
        if y.ndim != 1 or y.shape[0] != self.num_sensors * self.num_samples:
            raise DimensionError(
                f"y_stacked must have length M*L={self.num_sensors * self.num_samples}, "
                f"got shape {y.shape}."
            )

        object.__setattr__(self, "phi", _frozen(phi))
        object.__setattr__(self, "y_stacked", _frozen(y))

    @classmethod
    def from_measurements(cls, phi: np.ndarray, Y: np.ndarray) -> BlockSparseProblem:
        """Builds a problem from the ``M x L`` sample matrix ``Y``."""
        phi = np.asarray(phi, dtype=float)
        Y = np.asarray(Y, dtype=float)
        if phi.ndim != 2 or Y.ndim != 2 or phi.shape[0] != Y.shape[0]:
            raise DimensionError(
                f"phi {phi.shape} and Y {Y.shape} disagree on the number of sensors."
            )
        return cls(
            phi=phi,
            y_stacked=stack_measurements(Y),
            num_sensors=phi.shape[0],
            num_errors=phi.shape[1],
            num_samples=Y.shape[1],
        )

    @property
    def layout(self) -> BlockLayout:
        return BlockLayout(num_blocks=self.num_errors, block_len=self.num_samples)

    @property
    def measurement_layout(self) -> BlockLayout:
        return BlockLayout(num_blocks=self.num_sensors, block_len=self.num_samples)

    @cached_property
    def gram(self) -> np.ndarray:
        # D^T D
        return design_gram(self.phi, self.layout)

    @cached_property
    def dty(self) -> np.ndarray:
        # D^T y
        return apply_design_transpose(self.phi, self.y_stacked, self.layout)


@dataclass(frozen=True)
class PriorKnowledgeSet:
    """Block indices (1-based) suspected to be faulty; may be empty."""

    indices: frozenset[int] = frozenset()

    @classmethod
    def of(
        cls, indices: t.Iterable[int] = (), num_blocks: int | None = None
    ) -> PriorKnowledgeSet:
        items = [int(i) for i in indices]
        if len(set(items)) != len(items):
            raise BlockIndexError(f"Prior knowledge indices must be distinct: {items}.")
        prior = cls(frozenset(items))
        if num_blocks is not None:
            prior.check(num_blocks)
        return prior

    def check(self, num_blocks: int) -> None:
        bad = sorted(i for i in self.indices if not 1 <= i <= num_blocks)
        if bad:
            raise BlockIndexError(
                f"Prior knowledge indices {bad} are out of range 1..{num_blocks}."
            )

    def mask(self, num_blocks: int) -> np.ndarray:
        self.check(num_blocks)
        mask = np.zeros(num_blocks, dtype=bool)
        if self.indices:
            mask[[i - 1 for i in self.indices]] = True
        return mask

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self) -> t.Iterator[int]:
        return iter(sorted(self.indices))

    def __contains__(self, i: object) -> bool:
        return i in self.indices
