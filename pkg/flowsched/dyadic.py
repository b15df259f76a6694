"""
Heap-indexed dyadic interval tree over [0, T).

Node 1 is the root [0, T); node k has children 2k (left half) and 2k+1
(right half). Leaves have length 1.
"""
import logging
from typing import Iterator, Optional, Tuple

logger = logging.getLogger(__name__)


class DyadicTree:
    def __init__(self, horizon: int):
        if horizon < 1 or horizon & (horizon - 1):
            raise ValueError(f"horizon must be a power of two, got {horizon}")
        self.horizon = horizon
        self.depth = horizon.bit_length() - 1

    def __len__(self) -> int:
        return 2 * self.horizon - 1

    @staticmethod
    def level(index: int) -> int:
        return index.bit_length() - 1

    def length(self, index: int) -> int:
        return self.horizon >> self.level(index)

    def interval(self, index: int) -> Tuple[int, int]:
        level = self.level(index)
        if not 1 <= index < 2 * self.horizon:
            raise IndexError(f"node {index} is outside a tree with horizon {self.horizon}")
        size = self.horizon >> level
        start = (index - (1 << level)) * size
        return start, start + size

    def index_of(self, s: int, t: int) -> int:
        size = t - s
        if size < 1 or size & (size - 1) or s % size or t > self.horizon or s < 0:
            raise ValueError(f"[{s}, {t}) is not a dyadic interval of [0, {self.horizon})")
        level = self.depth - (size.bit_length() - 1)
        return (1 << level) + s // size

    def is_leaf(self, index: int) -> bool:
        return self.length(index) == 1

    def children(self, index: int) -> Optional[Tuple[int, int]]:
        if self.is_leaf(index):
            return None
        return 2 * index, 2 * index + 1

    def parent(self, index: int) -> Optional[int]:
        return index // 2 if index > 1 else None

    def is_left(self, index: int) -> bool:
        return index > 1 and index % 2 == 0

    def earliest_start(self, index: int) -> int:
        """b0: 0 at the root, s - 2(t-s) for left and s - 3(t-s) for right children, floored at 0"""
        if index == 1:
            return 0
        s, t = self.interval(index)
        reach = 2 if self.is_left(index) else 3
        return max(0, s - reach * (t - s))

    def bottom_up(self) -> Iterator[int]:
        """Node indices by increasing interval length"""
        for level in range(self.depth, -1, -1):
            yield from range(1 << level, 2 << level)
