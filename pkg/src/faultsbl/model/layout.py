from dataclasses import dataclass

import numpy as np

from faultsbl.errors import BlockIndexError, DimensionError


@dataclass(frozen=True)
class BlockLayout:
    """Contiguous block layout of a length ``num_blocks * block_len`` vector.

    Block ``i`` (1-based) occupies ``(i-1)*L+1 ... i*L``; internally that is the
    half-open range ``[(i-1)*L, i*L)``.
    """

    num_blocks: int
    block_len: int

    def __post_init__(self):
        if self.num_blocks < 1 or self.block_len < 1:
            raise DimensionError(
                f"Block layout needs positive sizes, got N={self.num_blocks}, L={self.block_len}."
            )

    @property
    def size(self) -> int:
        return self.num_blocks * self.block_len

    def block_slice(self, i: int) -> slice:
        if not 1 <= i <= self.num_blocks:
            raise BlockIndexError(
                f"Block index {i} is out of range 1..{self.num_blocks}."
            )
        start = (i - 1) * self.block_len
        return slice(start, start + self.block_len)

    def check_vector(self, v: np.ndarray, name: str = "vector") -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.ndim != 1 or v.shape[0] != self.size:
            raise DimensionError(
                f"{name} must have length N*L={self.size}, got shape {v.shape}."
            )
        return v
