"""Persistence pairs and persistence-driven simplification of augmented trees.

Both work by the same pruning loop: repeatedly cut the leaf arc of smallest
persistence ``|f(saddle) - f(extremum)|`` (ties: lower extremum rank
first), as long as the saddle it hangs from keeps another branch on the
same side.  A saddle left with one arc below and one above is erased by
concatenating the two arcs.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .trees import AugmentedTree, assemble_tree

LOWER = "lower"
UPPER = "upper"


@dataclass(frozen=True)
class PersistencePair:
    extremum: int
    saddle: int
    persistence: float


class _Pruner:
    def __init__(self, tree: AugmentedTree, values: np.ndarray, rank: np.ndarray, sides):
        self.kind = tree.kind
        self.values = values
        self.rank = rank
        self.sides = sides
        self.arcs: dict[int, list] = {}
        self.down: dict[int, set] = {int(v): set() for v in tree.node_vertices}
        self.up: dict[int, set] = {int(v): set() for v in tree.node_vertices}
        for i in range(tree.arc_count):
            a, b = tree.arc_vertices(i)
            lo, hi = (a, b) if rank[a] < rank[b] else (b, a)
            self.arcs[i] = [lo, hi, [tree.segmentations[i]]]
            self.up[lo].add(i)
            self.down[hi].add(i)
        self.heap: list = []
        for v in self.down:
            self._push_leaf(v)

    def _push_leaf(self, m: int) -> None:
        if not self.down[m] and len(self.up[m]) == 1 and LOWER in self.sides:
            (a,) = self.up[m]
            s = self.arcs[a][1]
        elif not self.up[m] and len(self.down[m]) == 1 and UPPER in self.sides:
            (a,) = self.down[m]
            s = self.arcs[a][0]
        else:
            return
        pers = abs(float(self.values[s]) - float(self.values[m]))
        heapq.heappush(self.heap, (pers, int(self.rank[m]), m, s, a))

    def _valid(self, m, s, a) -> str | None:
        arc = self.arcs.get(a)
        if arc is None or m not in self.down:
            return None
        if arc[0] == m and arc[1] == s and not self.down[m] and len(self.down[s]) >= 2:
            return LOWER
        if arc[1] == m and arc[0] == s and not self.up[m] and len(self.up[s]) >= 2:
            return UPPER
        return None

    def run(self, threshold: float = np.inf) -> list[PersistencePair]:
        pairs = []
        while self.heap:
            pers, _, m, s, a = self.heap[0]
            if pers >= threshold:
                break
            heapq.heappop(self.heap)
            side = self._valid(m, s, a)
            if side is None:
                continue
            pairs.append(PersistencePair(m, s, pers))
            _, _, members = self.arcs.pop(a)
            members = members + [np.array([m], dtype=np.int64)]
            del self.down[m], self.up[m]
            (self.down if side == LOWER else self.up)[s].discard(a)
            target = self._erase_if_regular(s)
            if target is None:
                keep = self.up[s] if side == LOWER else self.down[s]
                target = min(keep) if keep else min(self.down[s] | self.up[s])
                self._push_leaf(s)
            self.arcs[target][2].extend(members)
        return pairs

    def _erase_if_regular(self, s: int) -> int | None:
        if len(self.down[s]) != 1 or len(self.up[s]) != 1:
            return None
        (c,), (d,) = self.down.pop(s), self.up.pop(s)
        low, high = self.arcs[c], self.arcs.pop(d)
        self.arcs[c] = [low[0], high[1], low[2] + [np.array([s], dtype=np.int64)] + high[2]]
        self.down[high[1]].discard(d)
        self.down[high[1]].add(c)
        for end in (low[0], high[1]):
            self._push_leaf(end)
        return c

    def final_pair(self) -> PersistencePair | None:
        """The branch left when no arc can be cut any more (one arc remaining)."""
        if len(self.arcs) != 1:
            return None
        ((lo, hi, _),) = self.arcs.values()
        pers = abs(float(self.values[hi]) - float(self.values[lo]))
        return PersistencePair(lo, hi, pers) if LOWER in self.sides else PersistencePair(hi, lo, pers)

    def to_tree(self) -> AugmentedTree:
        rank = self.rank
        records = []
        for lo, hi, members in self.arcs.values():
            seg = np.concatenate(members) if members else np.empty(0, dtype=np.int64)
            seg = seg[np.argsort(rank[seg], kind="stable")]
            if self.kind == "split":
                records.append((hi, lo, seg[::-1]))
            else:
                records.append((lo, hi, seg))
        return assemble_tree(self.kind, records, rank)


def _sides(tree: AugmentedTree, side: str | None):
    if side is None:
        side = {"join": "join", "split": "split", "contour": "both"}[tree.kind]
    return {"join": (LOWER,), "split": (UPPER,), "both": (LOWER, UPPER)}[side]


def _rank_of(values: np.ndarray) -> np.ndarray:
    # same tie-break as build_order without offsets
    order = np.lexsort((np.arange(len(values)), values))
    rank = np.empty(len(values), dtype=np.int64)
    rank[order] = np.arange(len(values))
    return rank


def _node_merge_tree(tree: AugmentedTree, rank: np.ndarray, kind: str) -> AugmentedTree:
    """Join or split tree of the graph formed by the nodes and arcs of ``tree``."""
    nodes = [int(v) for v in tree.node_vertices]
    adj: dict[int, list[int]] = {v: [] for v in nodes}
    for a, b in tree.arcs():
        adj[a].append(b)
        adj[b].append(a)
    key = (lambda v: rank[v]) if kind == "join" else (lambda v: -rank[v])
    parent: dict[int, int] = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    head: dict[int, int] = {}  # component root -> node its open arc starts from
    records = []
    seq = sorted(nodes, key=key)
    for v in seq:
        roots = {find(u) for u in adj[v] if u in parent}
        parent[v] = v
        if len(roots) == 1:
            (r,) = roots
            parent[r] = v
            head[v] = head.pop(r)
            continue
        for r in roots:
            records.append((head.pop(r), v, np.empty(0, dtype=np.int64)))
            parent[r] = v
        head[v] = v
    top = seq[-1]
    if head[top] != top:
        records.append((head[top], top, np.empty(0, dtype=np.int64)))
    return assemble_tree(kind, records, rank)


def persistence_pairs(tree: AugmentedTree, values, side: str | None = None,
                      rank: np.ndarray | None = None) -> list[PersistencePair]:
    """Extremum/saddle pairs in pruning order.

    ``side`` selects minima (``"join"``) or maxima (``"split"``); it
    defaults to the tree's own polarity.  For a contour tree the pairs are
    those of the join (or split) tree of its node graph.  The surviving
    extremum is paired with the root.
    """
    values = np.asarray(values, dtype=np.float64)
    rank = _rank_of(values) if rank is None else np.asarray(rank)
    if tree.kind == "contour":
        tree = _node_merge_tree(tree, rank, side or "join")
    elif side is not None and side != tree.kind:
        raise ValueError(f"a {tree.kind} tree has no {side} pairs")
    p = _Pruner(tree, values, rank, _sides(tree, None))
    pairs = p.run()
    last = p.final_pair()
    if last is not None:
        pairs.append(last)
    return pairs


def simplify(tree: AugmentedTree, values, threshold: float, relative: bool = False,
             rank: np.ndarray | None = None) -> AugmentedTree:
    """Remove every branch whose persistence is below ``threshold``.

    With ``relative`` the threshold is a fraction of the scalar range.
    Vertices of a removed branch (its extremum included) join the arc that
    absorbs it, so the vertex partition is preserved.
    """
    if threshold < 0:
        raise ValueError(f"threshold must be non-negative, got {threshold}")
    values = np.asarray(values, dtype=np.float64)
    if relative:
        threshold = threshold * float(values.max() - values.min())
    rank = _rank_of(values) if rank is None else np.asarray(rank)
    p = _Pruner(tree, values, rank, _sides(tree, None))
    p.run(threshold)
    out = p.to_tree()
    out.stats = {"simplified_from": tree.arc_count, "threshold": threshold}
    return out
