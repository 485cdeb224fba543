"""Augmented join and split trees by concurrent local arc growths.

Each extremum seeds a growth: an ordered breadth-first sweep driven by a
Fibonacci heap of candidate ranks.  A growth stops at the first merge
saddle it meets; the last growth to reach a saddle melds the heaps of all
growths that stopped there and carries on.  Once a single growth is left,
the rest of the tree is a monotone chain through the pending saddles and
the remaining vertices are projected onto it by rank.

Everything below works on *sweep ranks*: the global order for the join
tree, the reversed order for the split tree.
"""
from __future__ import annotations

import bisect
import itertools
import threading
import time
from dataclasses import dataclass, field

import numpy as np

from .heap import FibonacciHeap
from .mesh import Triangulation, validate_connected
from .order import SortedOrder
from .tasks import AtomicCounter, TaskGroup, TaskPool
from .trees import AugmentedMergeTree, assemble_tree
from .unionfind import UnionFindNode, uf_union

LEAF_SEARCH_CHUNK = 400_000
TRUNK_CHECK_PERIOD = 10_000
TRUNK_CHUNK = 4_096

STOPPED_AT_SADDLE = "stoppedAtSaddle"
BECAME_TRUNK = "becameTrunk"
REACHED_ROOT = "reachedRoot"


class InconsistentGrowth(RuntimeError):
    pass


# ---------------------------------------------------------------- leaf search

def leaf_search(t: Triangulation, order: SortedOrder, pool: TaskPool | None = None,
                chunk: int = LEAF_SEARCH_CHUNK) -> tuple[list[int], list[int]]:
    """Minima and maxima of the field in one pass, each sorted by ascending rank."""
    n = t.vertex_count
    rank = order.rank
    is_min = np.zeros(n, dtype=bool)
    is_max = np.zeros(n, dtype=bool)

    def scan(lo, hi):
        src, dst = t.neighbor_arrays(lo, hi)
        lower = rank[dst] < rank[src]
        has_lower = np.bincount(src[lower] - lo, minlength=hi - lo) > 0
        has_upper = np.bincount(src[~lower] - lo, minlength=hi - lo) > 0
        is_min[lo:hi] = ~has_lower
        is_max[lo:hi] = ~has_upper

    if pool is None:
        for lo in range(0, n, chunk):
            scan(lo, min(lo + chunk, n))
    else:
        group = TaskGroup("leaf-search")
        pool.parallel_for(group, 0, n, chunk, scan)
        group.wait()
    minima = np.nonzero(is_min)[0]
    maxima = np.nonzero(is_max)[0]
    minima = minima[np.argsort(rank[minima])]
    maxima = maxima[np.argsort(rank[maxima])]
    return minima.tolist(), maxima.tolist()


# ------------------------------------------------------- saddle arrival protocol

@dataclass(frozen=True)
class ArrivalOutcome:
    first: bool
    last: bool

    @property
    def label(self) -> str:
        if self.first and self.last:
            return "first+last"
        return "first" if self.first else "last" if self.last else "neither"


class SaddleArrivalCounter:
    """Per-saddle signed counters, lazily initialized to -1.

    A saddle is *pending* from its first arrival until its last one.
    """

    def __init__(self):
        self._values: dict[int, int] = {}
        self._lock = threading.Lock()
        self.pending: set[int] = set()

    def value(self, s: int) -> int:
        return self._values.get(s, -1)

    def fetch_add(self, s: int, delta: int) -> int:
        with self._lock:
            old = self._values.get(s, -1)
            new = old + delta
            self._values[s] = new
            if old == -1:
                self.pending.add(s)
            if new == 0:
                self.pending.discard(s)
            return old

    def arrival_steps(self, s: int, visited_lower: int, lower_link_size):
        """Generator form of one arrival; yields after each indivisible step.

        Driving it to completion returns an :class:`ArrivalOutcome`.  The
        stepwise form lets tests enumerate interleavings of concurrent
        arrivals.
        """
        old = self.fetch_add(s, -visited_lower)
        first = old == -1
        new = old - visited_lower
        yield
        if first:
            size = lower_link_size()
            new = self.fetch_add(s, size + 1) + size + 1
            yield
        return ArrivalOutcome(first, new == 0)


def register_saddle_arrival(s: int, visited_lower_count: int, counters: SaddleArrivalCounter,
                            lower_link_size) -> ArrivalOutcome:
    """Record that a growth reached ``s`` having visited ``visited_lower_count``
    of its lower-link vertices.

    ``lower_link_size`` is a callable (or an int) giving ``|Lk-(s)|``; it is
    evaluated only by the first arrival.
    """
    if not callable(lower_link_size):
        size = lower_link_size
        lower_link_size = lambda: size  # noqa: E731
    steps = counters.arrival_steps(s, visited_lower_count, lower_link_size)
    try:
        while True:
            next(steps)
    except StopIteration as stop:
        return stop.value


# ---------------------------------------------------------------- growth state

@dataclass
class GrowthState:
    heap: FibonacciHeap
    uf: UnionFindNode
    arc: int
    last_rank: int
    local_counter: int = 0
    processed: int = 0


@dataclass
class _Arc:
    down: int
    up: int = -1
    source: str = "growth"


@dataclass
class MergeTreeStats:
    leaf_count: int = 0
    times: dict = field(default_factory=dict)
    remaining_samples: list = field(default_factory=list)
    trunk_vertices: int = 0
    trunk_redundant: int = 0
    trunk_start_rank: int = -1


class _Sweep:
    """Shared bookkeeping of one merge tree computation."""

    def __init__(self, t: Triangulation, sweep: SortedOrder, polarity: str, pool: TaskPool,
                 priority: int = 0, use_trunk: bool = True,
                 trunk_check_period: int = TRUNK_CHECK_PERIOD):
        self.t = t
        self.polarity = polarity
        self.n = t.vertex_count
        self.sweep = sweep
        self.rank = sweep.rank.tolist()
        self.verts = sweep.sorted_vertices.tolist()
        self.neighbors = t.neighbors
        self.pool = pool
        self.priority = priority
        self.use_trunk = use_trunk
        self.period = max(1, trunk_check_period)
        self.group = TaskGroup(polarity)

        # per-vertex words, each written by the single growth that claims the vertex
        self.owner: dict[int, UnionFindNode] = {}
        self.arc_of = [-1] * self.n
        self.counter = [-1] * self.n

        self.arcs: dict[int, _Arc] = {}
        self._arc_ids = itertools.count()
        self.saddles = SaddleArrivalCounter()
        self.arrivals: dict[int, list[GrowthState]] = {}
        self.remaining: AtomicCounter | None = None
        self.bundles: list[tuple[int, dict[int, list[int]]]] = []
        self.stats = MergeTreeStats()
        self._stats_lock = threading.Lock()
        self._t_growth = None
        self._t_trunk = None
        self._t_trunk_end = None

    # ---- arcs

    def open_arc(self, down: int, source: str = "growth") -> int:
        i = next(self._arc_ids)
        self.arcs[i] = _Arc(down, source=source)
        return i

    def close_arc(self, state: GrowthState, v: int) -> None:
        self.arcs[state.arc].up = v
        if self.arc_of[v] == state.arc:
            # v becomes a node: drop it from the segmentation
            self.arc_of[v] = -1
            self.counter[v] = -1

    # ---- tasks

    def launch(self, leaves: list[int]) -> None:
        self.stats.leaf_count = len(leaves)
        self.remaining = AtomicCounter(len(leaves), record=True)
        self._t_growth = time.perf_counter()
        for m in leaves:
            self.pool.spawn(self.group, self.start_leaf, m, priority=self.priority)

    def start_leaf(self, m: int) -> None:
        uf = UnionFindNode(m)
        self.owner[m] = uf
        arc = self.open_arc(m)
        heap = FibonacciHeap()
        rank = self.rank
        for u in self.neighbors(m):
            heap.insert(rank[u])
        state = GrowthState(heap, uf, arc, rank[m])
        self.run(state)

    def run(self, state: GrowthState) -> None:
        """Grow arcs until this task terminates at a saddle or the tree is done."""
        while True:
            if self.use_trunk and self.remaining.value == 1:
                self.trunk_growth(state)
                return
            outcome, s = self.grow_arc(state)
            if outcome == REACHED_ROOT:
                self.close_arc(state, s)
                self._t_trunk = self._t_trunk_end = time.perf_counter()
                return
            if outcome == BECAME_TRUNK:
                self.trunk_growth(state)
                return
            self.close_arc(state, s)
            rep = state.uf.find()
            owner, rank, rs = self.owner, self.rank, self.rank[s]
            visited = 0
            for u in self.neighbors(s):
                if rank[u] < rs:
                    o = owner.get(u)
                    if o is not None and o.find() is rep:
                        visited += 1
            self.arrivals.setdefault(s, []).append(state)
            result = register_saddle_arrival(
                s, visited, self.saddles,
                lambda: sum(1 for u in self.neighbors(s) if rank[u] < rs))
            if not result.last:
                self.remaining.fetch_add(-1)
                return
            state = self.merge_at_saddle(s, state)
            if state is None:
                self._t_trunk = self._t_trunk_end = time.perf_counter()
                return

    def grow_arc(self, state: GrowthState) -> tuple[str, int]:
        heap = state.heap
        rank, verts, owner = self.rank, self.verts, self.owner
        neighbors, arc_of, counter = self.neighbors, self.arc_of, self.counter
        me = state.uf
        my_rep = me.find()
        arc = state.arc
        last = state.last_rank
        top = self.n - 1
        check = self.use_trunk
        period = self.period
        due = False
        while True:
            r = heap.peek_min()
            if r is None:
                if last == top:
                    return REACHED_ROOT, verts[last]
                raise InconsistentGrowth(
                    f"{self.polarity} growth ran dry at rank {last} of {top}")
            w = verts[r]
            o = owner.get(w)
            if o is not None and o.find() is my_rep:
                heap.pop_min()  # lazy duplicate
                continue
            if r < last:
                return STOPPED_AT_SADDLE, verts[last]
            if due:
                # the last vertex is now known to be regular
                due = False
                if self.remaining.value == 1:
                    return BECAME_TRUNK, verts[last]
            heap.pop_min()
            if o is not None or owner.setdefault(w, me) is not me:
                # claimed by another growth: a merge saddle it reached first
                state.last_rank = r
                return STOPPED_AT_SADDLE, w
            arc_of[w] = arc
            counter[w] = state.local_counter
            state.local_counter += 1
            for u in neighbors(w):
                ou = owner.get(u)
                if ou is None or ou.find() is not my_rep:
                    heap.insert(rank[u])
            last = state.last_rank = r
            state.processed += 1
            if check and state.processed % period == 0:
                due = True

    def merge_at_saddle(self, s: int, state: GrowthState) -> GrowthState | None:
        """Continue as the saddle growth at ``s``; the caller is its last arrival."""
        arrivals = self.arrivals.pop(s)
        assert self.saddles.value(s) == 0, "merge_at_saddle called by a non-last arrival"
        heap = state.heap
        rep = state.uf.find()
        for other in arrivals:
            if other is state:
                continue
            heap.meld(other.heap)
            rep = uf_union(rep, other.uf.find())
        if self.rank[s] == self.n - 1:
            return None  # the root itself is a merge saddle
        arc = self.open_arc(s)
        return GrowthState(heap, rep, arc, self.rank[s], state.local_counter, state.processed)

    # ---- trunk

    def trunk_growth(self, state: GrowthState) -> None:
        self._t_trunk = time.perf_counter()
        rank, verts = self.rank, self.verts
        start = state.last_rank
        pending = sorted(self.saddles.pending, key=rank.__getitem__)
        bounds = [rank[p] for p in pending]
        assert all(b > start for b in bounds), "pending saddle below the trunk start"
        if not bounds or bounds[-1] != self.n - 1:
            bounds.append(self.n - 1)
        chain = [state.arc]
        self.arcs[state.arc].up = verts[bounds[0]]
        for a, b in zip(bounds, bounds[1:]):
            i = self.open_arc(verts[a], source="trunk")
            self.arcs[i].up = verts[b]
            chain.append(i)
        self.stats.trunk_start_rank = start
        self._trunk_bounds = bounds
        self._trunk_chain = chain
        self.pool.parallel_for(self.group, start + 1, self.n, TRUNK_CHUNK,
                               self._project_chunk, priority=self.priority)

    def _project_chunk(self, lo: int, hi: int) -> None:
        bounds, chain = self._trunk_bounds, self._trunk_chain
        verts, owner = self.verts, self.owner
        idx = bisect.bisect_left(bounds, lo)
        bundles: dict[int, list[int]] = {}
        redundant = 0
        projected = 0
        for r in range(lo, hi):
            while bounds[idx] < r:
                idx += 1
            if bounds[idx] == r:
                continue
            w = verts[r]
            if w in owner:
                redundant += 1
                continue
            arc = chain[idx]
            b = bundles.get(arc)
            if b is None:
                b = bundles[arc] = []
            b.append(w)
            projected += 1
        self.bundles.append((lo, bundles))
        with self._stats_lock:
            self.stats.trunk_vertices += projected
            self.stats.trunk_redundant += redundant
        self._t_trunk_end = time.perf_counter()

    # ---- output

    def finish(self) -> AugmentedMergeTree:
        t0 = time.perf_counter()
        arc_count = len(self.arcs)
        segs = finalize_segmentation(arc_count, self.arc_of, self.counter, self.bundles,
                                     self.sweep.rank)
        records = [(a.down, a.up, segs[i]) for i, a in sorted(self.arcs.items())]
        global_rank = self.sweep.rank if self.polarity == "join" else (self.n - 1 - self.sweep.rank)
        tree = assemble_tree(self.polarity, records, global_rank)
        t1 = time.perf_counter()
        st = self.stats
        trunk_start = self._t_trunk if self._t_trunk is not None else t0
        st.times["arcGrowth"] = trunk_start - self._t_growth
        st.times["trunk"] = ((self._t_trunk_end or trunk_start) - trunk_start)
        st.times["finalize"] = t1 - t0
        st.remaining_samples = list(self.remaining.samples or [])
        tree.stats = {"merge": st}
        return tree


def finalize_segmentation(arc_count: int, growth_arc, growth_counter, bundles, sweep_rank):
    """Ordered regular vertices of every arc.

    Growth-visited vertices are placed by (arc, local visit counter); trunk
    vertices arrive as per-task bundles which are sorted by their first
    vertex and concatenated after them.
    """
    growth_arc = np.asarray(growth_arc, dtype=np.int64)
    growth_counter = np.asarray(growth_counter, dtype=np.int64)
    visited = np.nonzero(growth_arc >= 0)[0]
    perm = np.lexsort((growth_counter[visited], growth_arc[visited]))
    placed = visited[perm]
    cuts = np.searchsorted(growth_arc[placed], np.arange(arc_count + 1))
    per_arc: list[list[np.ndarray]] = [[placed[cuts[i]:cuts[i + 1]]] for i in range(arc_count)]
    trunk: dict[int, list[tuple[int, list[int]]]] = {}
    for _, chunk in bundles:
        for arc, verts in chunk.items():
            trunk.setdefault(arc, []).append((int(sweep_rank[verts[0]]), verts))
    for arc, parts in trunk.items():
        parts.sort(key=lambda p: p[0])
        per_arc[arc].extend(np.asarray(v, dtype=np.int64) for _, v in parts)
    out = []
    for i, parts in enumerate(per_arc):
        seg = np.concatenate(parts) if len(parts) > 1 else parts[0]
        if len(seg) > 1 and not np.all(np.diff(sweep_rank[seg]) > 0):
            raise InconsistentGrowth(f"segmentation of arc {i} is not sorted along the sweep")
        out.append(seg.astype(np.int64))
    return out


# ------------------------------------------------------------------ orchestration

def _sweep_order(order: SortedOrder, polarity: str) -> SortedOrder:
    if polarity == "join":
        return order
    if polarity == "split":
        return order.reversed()
    raise ValueError(f"polarity must be 'join' or 'split', got {polarity!r}")


def start_merge_tree(t: Triangulation, order: SortedOrder, polarity: str, pool: TaskPool,
                     leaves: list[int], priority: int = 0, use_trunk: bool = True,
                     trunk_check_period: int = TRUNK_CHECK_PERIOD) -> _Sweep:
    """Spawn the leaf growths of one merge tree into ``pool``.

    ``leaves`` must be in sweep order.  Wait on ``job.group`` and then call
    ``job.finish()`` to obtain the tree.
    """
    job = _Sweep(t, _sweep_order(order, polarity), polarity, pool, priority=priority,
                 use_trunk=use_trunk, trunk_check_period=trunk_check_period)
    job.launch(leaves)
    return job


def compute_merge_tree(t: Triangulation, order: SortedOrder, polarity: str = "join",
                       threads: int = 1, use_trunk: bool = True,
                       trunk_check_period: int = TRUNK_CHECK_PERIOD) -> AugmentedMergeTree:
    """Augmented join (or split) tree of the field whose vertex order is ``order``."""
    validate_connected(t)
    _sweep_order(order, polarity)
    with TaskPool(threads) as pool:
        t0 = time.perf_counter()
        minima, maxima = leaf_search(t, order, pool)
        t1 = time.perf_counter()
        leaves = minima if polarity == "join" else maxima[::-1]
        job = start_merge_tree(t, order, polarity, pool, leaves, use_trunk=use_trunk,
                               trunk_check_period=trunk_check_period)
        job.group.wait()
    tree = job.finish()
    tree.stats["merge"].times["leafSearch"] = t1 - t0
    tree.stats["merge"].times["mtOverall"] = time.perf_counter() - t0
    return tree
