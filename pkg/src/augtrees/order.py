"""Injective vertex order (simulation of simplicity) for scalar fields."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class FieldError(ValueError):
    pass


@dataclass
class ScalarField:
    values: np.ndarray
    offsets: np.ndarray | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.offsets is not None:
            self.offsets = np.asarray(self.offsets, dtype=np.int64)
            if self.offsets.shape != self.values.shape:
                raise FieldError("offsets and values differ in length")

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class SortedOrder:
    """``rank[v]`` is the position of ``v`` in ascending order, ``sorted_vertices`` its inverse."""

    rank: np.ndarray
    sorted_vertices: np.ndarray

    def __len__(self):
        return len(self.rank)

    def reversed(self) -> SortedOrder:
        n = len(self.rank)
        return SortedOrder(n - 1 - self.rank, self.sorted_vertices[::-1].copy())


def build_order(field: ScalarField, vertex_count: int) -> SortedOrder:
    """Sort vertices lexicographically by (value, offset, index).

    All later comparisons use the integer ranks only.
    """
    values = field.values
    if values.ndim != 1 or len(values) != vertex_count:
        raise FieldError(f"field has {values.size} values for {vertex_count} vertices")
    if not np.all(np.isfinite(values)):
        bad = int(np.argmax(~np.isfinite(values)))
        raise FieldError(f"non-finite scalar value at vertex {bad}")
    index = np.arange(vertex_count, dtype=np.int64)
    if field.offsets is None:
        perm = np.lexsort((index, values))
    else:
        perm = np.lexsort((index, field.offsets, values))
    rank = np.empty(vertex_count, dtype=np.int64)
    rank[perm] = index
    return SortedOrder(rank, perm.astype(np.int64))
