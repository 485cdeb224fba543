"""Augmented contour trees from a join tree and a split tree.

Both merge trees are grown concurrently in one task pool, each is augmented
with the other's nodes, and their arcs are then moved leaf by leaf into the
contour tree.  The parallel combination works in rounds: every node that is
currently a removable leaf is handled by its own task, node deletions are
serialized by one lock, and a barrier separates rounds.  When what is left
of both trees is the same monotone path, the remaining vertices are
projected onto it by rank.
"""
from __future__ import annotations

import threading
import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .mergetree import leaf_search, start_merge_tree
from .mesh import Triangulation, validate_connected
from .order import ScalarField, SortedOrder, build_order
from .tasks import TaskGroup, TaskPool
from .trees import AugmentedMergeTree, AugmentedTree, ContourTree, assemble_tree

MARK_CHUNK = 10_000
TRUNK_CHUNK = 65_536

FROM_JOIN = "fromJoin"
FROM_SPLIT = "fromSplit"
TRUNK = "trunk"


class CombinationError(RuntimeError):
    pass


# ------------------------------------------------------------ cross augmentation

def _insert_nodes(tree: AugmentedMergeTree, extra, rank: np.ndarray) -> AugmentedMergeTree:
    """Split the arcs of ``tree`` at the regular vertices ``extra``."""
    key = rank if tree.kind == "join" else -rank
    by_arc: dict[int, list[int]] = {}
    for v in extra:
        a = int(tree.vertex_to_arc[v])
        if a < 0 or tree.vertex_to_node[v] >= 0:
            raise CombinationError(f"vertex {v} is not a regular vertex of the {tree.kind} tree")
        by_arc.setdefault(a, []).append(int(v))
    records = []
    for i in range(tree.arc_count):
        down, up = tree.arc_vertices(i)
        seg = tree.segmentations[i]
        cuts = by_arc.get(i)
        if not cuts:
            records.append((down, up, seg))
            continue
        cuts.sort(key=lambda v: key[v])
        pos = np.searchsorted(key[seg], [key[v] for v in cuts])
        prev_v, prev_p = down, 0
        for v, p in zip(cuts, pos.tolist()):
            records.append((prev_v, v, seg[prev_p:p]))
            prev_v, prev_p = v, p + 1
        records.append((prev_v, up, seg[prev_p:]))
    out = assemble_tree(tree.kind, records, rank)
    out.stats = dict(tree.stats)
    return out


def cross_augment(jt: AugmentedMergeTree, st: AugmentedMergeTree, rank: np.ndarray,
                  pool: TaskPool | None = None) -> tuple[AugmentedMergeTree, AugmentedMergeTree]:
    """Give each tree the node vertices of the other (as degree-2 nodes)."""
    rank = np.asarray(rank)
    jn = set(jt.node_vertices.tolist())
    sn = set(st.node_vertices.tolist())
    jobs = [(jt, sorted(sn - jn)), (st, sorted(jn - sn))]
    out: list = [None, None]

    def run(k):
        tree, extra = jobs[k]
        out[k] = _insert_nodes(tree, extra, rank) if extra else tree

    if pool is None:
        run(0)
        run(1)
    else:
        group = TaskGroup("cross-augment")
        pool.spawn(group, run, 0)
        pool.spawn(group, run, 1)
        group.wait()
    return out[0], out[1]


# ------------------------------------------------------------------- levels

def compute_levels(tree: AugmentedTree) -> np.ndarray:
    """Distance (in arcs) from each node to its nearest leaf."""
    n = tree.node_count
    adj: list[list[int]] = [[] for _ in range(n)]
    for a, b in zip(tree.arc_down.tolist(), tree.arc_up.tolist()):
        adj[a].append(b)
        adj[b].append(a)
    level = np.full(n, -1, dtype=np.int64)
    frontier = deque(i for i in range(n) if len(adj[i]) <= 1)
    for i in frontier:
        level[i] = 0
    while frontier:
        i = frontier.popleft()
        for j in adj[i]:
            if level[j] < 0:
                level[j] = level[i] + 1
                frontier.append(j)
    return level


# --------------------------------------------------------------- combination

@dataclass
class CombineStats:
    rounds: list[int] = field(default_factory=list)
    transferred: int = 0
    trunk_arcs: int = 0
    trunk_vertices: int = 0
    redundant: int = 0
    times: dict = field(default_factory=dict)


class _Pair:
    """The join and split trees being consumed, both stored bottom-up.

    Tree 0 is the join tree, tree 1 the split tree.  An arc is
    ``[low vertex, high vertex, chunks]`` where ``chunks`` is a list of
    vertex arrays in ascending rank order.
    """

    def __init__(self, jt: AugmentedMergeTree, st: AugmentedMergeTree, rank: np.ndarray):
        self.rank = rank
        self.arcs: tuple[dict, dict] = ({}, {})
        self.below: tuple[dict, dict] = ({}, {})
        self.above: tuple[dict, dict] = ({}, {})
        self.alive = set(jt.node_vertices.tolist())
        self.is_node = np.zeros(len(rank), dtype=bool)
        self.is_node[jt.node_vertices] = True
        for k, tree in enumerate((jt, st)):
            for v in tree.node_vertices.tolist():
                self.below[k][v] = set()
                self.above[k][v] = set()
            for i in range(tree.arc_count):
                down, up = tree.arc_vertices(i)
                seg = tree.segmentations[i]
                lo, hi, seg = (down, up, seg) if k == 0 else (up, down, seg[::-1])
                self.arcs[k][i] = [lo, hi, [seg]]
                self.above[k][lo].add(i)
                self.below[k][hi].add(i)
        if set(st.node_vertices.tolist()) != self.alive:
            raise CombinationError("trees must be cross augmented before combination")

    def eligibility(self, x: int) -> str | None:
        if x not in self.alive:
            return None
        jb = len(self.below[0][x])
        sa = len(self.above[1][x])
        if jb == 0 and sa == 1:
            return "lower"
        if sa == 0 and jb == 1:
            return "upper"
        return None

    def leaves(self) -> list[int]:
        return [x for x in self.alive if not self.below[0][x] or not self.above[1][x]]

    def _drop(self, k: int, x: int) -> None:
        """Remove ``x`` from tree ``k``: concatenate through it or drop its only arc."""
        arcs, below, above = self.arcs[k], self.below[k], self.above[k]
        bs, us = below.pop(x), above.pop(x)
        if bs and us:
            (c,), (d,) = bs, us
            low, high = arcs[c], arcs.pop(d)
            arcs[c] = [low[0], high[1], low[2] + high[2]]
            below[high[1]].discard(d)
            below[high[1]].add(c)
        elif bs:
            (c,) = bs
            above[arcs.pop(c)[0]].discard(c)
        elif us:
            (d,) = us
            below[arcs.pop(d)[1]].discard(d)
        else:
            raise CombinationError(f"node {x} is isolated")

    def transfer(self, x: int, side: str):
        """Move the arc of leaf ``x`` out of the trees.

        Returns ``(low, high, chunks, provenance, touched node)``.
        """
        if side == "lower":
            (a,) = self.above[0][x]
            lo, hi, chunks = self.arcs[0].pop(a)
            self.below[0][hi].discard(a)
            del self.above[0][x], self.below[0][x]
            self._drop(1, x)
            touched, prov = hi, FROM_JOIN
        else:
            (b,) = self.below[1][x]
            lo, hi, chunks = self.arcs[1].pop(b)
            self.above[1][lo].discard(b)
            del self.above[1][x], self.below[1][x]
            self._drop(0, x)
            touched, prov = lo, FROM_SPLIT
        self.alive.discard(x)
        return lo, hi, chunks, prov, touched

    def is_monotone_path(self) -> bool:
        return (all(len(self.below[0][x]) <= 1 for x in self.alive)
                and all(len(self.above[1][x]) <= 1 for x in self.alive))

    def final_arc(self):
        if len(self.arcs[0]) != 1 or len(self.arcs[1]) != 1:
            raise CombinationError("combination ran out of leaves")
        (j,) = self.arcs[0].values()
        (s,) = self.arcs[1].values()
        if (j[0], j[1]) != (s[0], s[1]):
            raise CombinationError("join and split trees disagree on the last arc")
        return j[0], j[1], j[2] + s[2]


def _mark(mark: np.ndarray, chunks, arc: int) -> list[np.ndarray]:
    out = []
    for c in chunks:
        if len(c):
            free = c[mark[c] < 0]
            mark[free] = arc
            out.append(free)
    return out


def _build(records, provenance, rank) -> ContourTree:
    fixed = []
    for lo, hi, pieces in records:
        seg = np.concatenate(pieces) if pieces else np.empty(0, dtype=np.int64)
        if len(seg) > 1 and not np.all(np.diff(rank[seg]) > 0):
            raise CombinationError(f"segmentation of arc {lo}-{hi} is not sorted")
        fixed.append((lo, hi, seg))
    return assemble_tree("contour", fixed, rank, provenance)


def combine_sequential(jt: AugmentedMergeTree, st: AugmentedMergeTree,
                       rank: np.ndarray) -> ContourTree:
    """Reference combination: a queue of leaves, one transfer at a time."""
    t0 = time.perf_counter()
    rank = np.asarray(rank)
    pair = _Pair(jt, st, rank)
    mark = np.full(len(rank), -1, dtype=np.int64)
    records, provenance = [], []
    queue = deque(sorted(pair.leaves(), key=rank.__getitem__))
    while len(pair.arcs[0]) > 1:
        if not queue:
            raise CombinationError("leaf queue exhausted before the trees")
        x = queue.popleft()
        side = pair.eligibility(x)
        if side is None:
            continue
        lo, hi, chunks, prov, touched = pair.transfer(x, side)
        records.append((lo, hi, _mark(mark, chunks, len(records))))
        provenance.append(prov)
        queue.append(touched)
    lo, hi, chunks = pair.final_arc()
    records.append((lo, hi, _mark(mark, chunks, len(records))))
    provenance.append(FROM_JOIN)
    tree = _build(records, provenance, rank)
    stats = CombineStats(transferred=len(records))
    stats.times["combine"] = time.perf_counter() - t0
    tree.stats = {"combine": stats}
    return tree


def combine_trunk(pair: _Pair, mark: np.ndarray, records: list, provenance: list,
                  pool: TaskPool, stats: CombineStats, chunk: int = TRUNK_CHUNK) -> None:
    """Finish a combination whose remaining trees are one monotone path."""
    rank = pair.rank
    nodes = np.array(sorted(pair.alive, key=rank.__getitem__), dtype=np.int64)
    bounds = rank[nodes]
    first = len(records)
    for a, b in zip(nodes[:-1].tolist(), nodes[1:].tolist()):
        records.append((a, b, []))
        provenance.append(TRUNK)
    order = np.argsort(rank)
    lo, hi = int(bounds[0]), int(bounds[-1])
    is_node = pair.is_node
    outside = np.concatenate([order[:lo], order[hi + 1:]])
    if np.any((mark[outside] < 0) & ~is_node[outside]):
        raise CombinationError("unmarked vertices outside the remaining path")
    pieces: dict[int, list] = {}
    lock = threading.Lock()

    def project(a, b):
        verts = order[a:b]
        free = verts[(mark[verts] < 0) & ~is_node[verts]]
        idx = np.searchsorted(bounds, rank[free], side="right") - 1
        mark[free] = first + idx
        with lock:
            pieces[a] = (free, idx)
            stats.redundant += int(np.count_nonzero(mark[verts] >= 0))
            stats.trunk_vertices += len(free)

    group = TaskGroup("ct-trunk")
    pool.parallel_for(group, lo + 1, hi, chunk, project)
    group.wait()
    per_arc: list[list] = [[] for _ in range(len(nodes) - 1)]
    for a in sorted(pieces):
        free, idx = pieces[a]
        cuts = np.searchsorted(idx, np.arange(len(nodes)))
        for i in np.nonzero(np.diff(cuts))[0].tolist():
            per_arc[i].append(free[cuts[i]:cuts[i + 1]])
    for i, p in enumerate(per_arc):
        lo_v, hi_v, _ = records[first + i]
        records[first + i] = (lo_v, hi_v, p)
    stats.trunk_arcs = len(nodes) - 1
    pair.alive.clear()


def combine_parallel(jt: AugmentedMergeTree, st: AugmentedMergeTree, rank: np.ndarray,
                     pool: TaskPool, use_trunk: bool = True,
                     chunk: int = MARK_CHUNK) -> ContourTree:
    """Round-based combination; gives the same tree as :func:`combine_sequential`."""
    t0 = time.perf_counter()
    rank = np.asarray(rank)
    pair = _Pair(jt, st, rank)
    mark = np.full(len(rank), -1, dtype=np.int64)
    records: list = []
    provenance: list = []
    stats = CombineStats()
    lock = threading.Lock()
    candidates = set(pair.leaves())
    trunk_done = False

    def mark_piece(c, slot):
        free = c[mark[c] < 0]
        mark[free] = slot[0]
        slot[1] = free

    def handle(x, group, touched):
        with lock:
            side = pair.eligibility(x)
            if side is None or len(pair.arcs[0]) <= 1:
                return
            lo, hi, chunks, prov, t = pair.transfer(x, side)
            i = len(records)
            slots = []
            records.append((lo, hi, slots))
            provenance.append(prov)
            touched.append(t)
        for c in chunks:
            for a in range(0, len(c), chunk):
                slot = [i, None]
                slots.append(slot)
                pool.spawn(group, mark_piece, c[a:a + chunk], slot)

    while True:
        if use_trunk and pair.is_monotone_path():
            combine_trunk(pair, mark, records, provenance, pool, stats)
            trunk_done = True
            break
        if len(pair.arcs[0]) <= 1:
            break
        ready = sorted((x for x in candidates if pair.eligibility(x)), key=rank.__getitem__)
        if not ready:
            raise CombinationError("no removable leaf left")
        candidates.difference_update(ready)
        touched: list[int] = []
        group = TaskGroup("ct-round")
        for x in ready:
            pool.spawn(group, handle, x, group, touched)
        group.wait()
        stats.rounds.append(len(ready))
        candidates.update(touched)
    if not trunk_done:
        lo, hi, chunks = pair.final_arc()
        records.append((lo, hi, _mark(mark, chunks, len(records))))
        provenance.append(FROM_JOIN)
    flat = []
    for lo, hi, pieces in records:
        if pieces and isinstance(pieces[0], list):
            pieces = [p[1] for p in pieces if len(p[1])]
        flat.append((lo, hi, pieces))
    tree = _build(flat, provenance, rank)
    stats.transferred = len(records)
    stats.times["combine"] = time.perf_counter() - t0
    tree.stats = {"combine": stats}
    return tree


# ------------------------------------------------------------- orchestration

def compute_contour_tree(t: Triangulation, field, threads: int = 1, use_trunk: bool = True,
                         priority: str = "split", combine: str | None = None) -> ContourTree:
    """Augmented contour tree of a scalar field on ``t``.

    ``field`` is a :class:`ScalarField`, an array of values or an already
    built :class:`SortedOrder`.  ``priority`` names the merge tree whose
    tasks are scheduled first.  ``combine`` forces ``"sequential"`` or
    ``"parallel"``; the default is the round-based combination at every
    thread count, so provenance labels do not depend on ``threads``.
    """
    if priority not in ("join", "split"):
        raise ValueError(f"priority must be 'join' or 'split', got {priority!r}")
    validate_connected(t)
    t_start = time.perf_counter()
    if isinstance(field, SortedOrder):
        order = field
    else:
        if not isinstance(field, ScalarField):
            field = ScalarField(np.asarray(field))
        order = build_order(field, t.vertex_count)
    times = {"sort": time.perf_counter() - t_start}
    if combine is None:
        combine = "parallel"
    with TaskPool(threads) as pool:
        t0 = time.perf_counter()
        minima, maxima = leaf_search(t, order, pool)
        t1 = time.perf_counter()
        split_first = priority == "split"
        st_job = start_merge_tree(t, order, "split", pool, maxima[::-1],
                                  priority=0 if split_first else 1, use_trunk=use_trunk)
        jt_job = start_merge_tree(t, order, "join", pool, minima,
                                  priority=1 if split_first else 0, use_trunk=use_trunk)
        jt_job.group.wait()
        st_job.group.wait()
        jt, st = jt_job.finish(), st_job.finish()
        t2 = time.perf_counter()
        ja, sa = cross_augment(jt, st, order.rank, pool)
        if combine == "sequential":
            tree = combine_sequential(ja, sa, order.rank)
        elif combine == "parallel":
            tree = combine_parallel(ja, sa, order.rank, pool, use_trunk=use_trunk)
        else:
            raise ValueError(f"combine must be 'sequential' or 'parallel', got {combine!r}")
        t3 = time.perf_counter()
    times.update(leafSearch=t1 - t0, mergeTrees=t2 - t1, combine=t3 - t2,
                 ctOverall=time.perf_counter() - t_start)
    tree.stats.update(join=jt.stats["merge"], split=st.stats["merge"], times=times,
                      join_tree=jt, split_tree=st)
    return tree
