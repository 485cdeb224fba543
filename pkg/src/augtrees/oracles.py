"""Independent reference computations used to check the task-based engines.

* :func:`sweep_merge_tree` is the classic global sweep: vertices are taken
  in sweep order and a union-find over the sub-level set tells which
  components meet at each vertex.
* :func:`levelset_component_counts` counts connected components of the
  level set at every midpoint isovalue by brute force over crossing cells.

Neither shares code with the growth or combination machinery.
"""
from __future__ import annotations

import numba
import numpy as np

from .mesh import Triangulation


def sweep_merge_tree(t: Triangulation, order, polarity: str = "join") -> dict:
    """Augmented merge tree by a sequential global sweep.

    Returns ``{"nodes": set, "arcs": set of (down, up), "segmentation": {(down, up): frozenset}}``.
    """
    rank = order.rank if polarity == "join" else len(order.rank) - 1 - order.rank
    rank = rank.tolist()
    sequence = sorted(range(t.vertex_count), key=rank.__getitem__)
    parent: dict[int, int] = {}

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    open_arc: dict[int, list] = {}  # component root -> [down, up, members]
    arcs: list[list] = []
    last_kind = None
    for v in sequence:
        roots = {find(u) for u in t.neighbors(v) if rank[u] < rank[v]}
        parent[v] = v
        if not roots:
            arc = [v, None, []]
            arcs.append(arc)
            open_arc[v] = arc
            last_kind = "leaf"
        elif len(roots) == 1:
            (r,) = roots
            parent[v] = r
            open_arc[r][2].append(v)
            last_kind = "regular"
        else:
            for r in roots:
                open_arc.pop(r)[1] = v
                parent[r] = v
            arc = [v, None, []]
            arcs.append(arc)
            open_arc[v] = arc
            last_kind = "saddle"
    top = sequence[-1]
    (arc,) = open_arc.values()
    if last_kind == "saddle":
        arcs.remove(arc)
    else:
        arc[2].remove(top)
        arc[1] = top
    nodes = {a[0] for a in arcs} | {a[1] for a in arcs}
    return {
        "nodes": nodes,
        "arcs": {(a[0], a[1]) for a in arcs},
        "segmentation": {(a[0], a[1]): frozenset(a[2]) for a in arcs},
    }


def _cell_face_pairs(cells: np.ndarray, rank: np.ndarray):
    """Pairs of cells sharing a face, with the rank extent of that face."""
    c, k = cells.shape
    faces = []
    owners = []
    for j in range(k):
        keep = [i for i in range(k) if i != j]
        faces.append(np.sort(cells[:, keep], axis=1))
        owners.append(np.arange(c))
    faces = np.concatenate(faces)
    owners = np.concatenate(owners)
    keys = np.lexsort(faces.T[::-1])
    faces, owners = faces[keys], owners[keys]
    same = np.all(faces[1:] == faces[:-1], axis=1)
    idx = np.nonzero(same)[0]
    fr = rank[faces[idx]]
    return owners[idx], owners[idx + 1], fr.min(axis=1), fr.max(axis=1)


@numba.njit(cache=True)
def _count_levelset(n, cmin, cmax, pa, pb, fmin, fmax):  # pragma: no cover - compiled
    out = np.zeros(n - 1, dtype=np.int64)
    parent = np.arange(len(cmin))
    for r in range(n - 1):
        crossing = 0
        for c in range(len(cmin)):
            if cmin[c] <= r and r < cmax[c]:
                crossing += 1
                parent[c] = c
        merges = 0
        for p in range(len(pa)):
            if fmin[p] <= r and r < fmax[p]:
                a = pa[p]
                while parent[a] != a:
                    parent[a] = parent[parent[a]]
                    a = parent[a]
                b = pb[p]
                while parent[b] != b:
                    parent[b] = parent[parent[b]]
                    b = parent[b]
                if a != b:
                    parent[a] = b
                    merges += 1
        out[r] = crossing - merges
    return out


def levelset_component_counts(cells: np.ndarray, rank: np.ndarray) -> np.ndarray:
    """Number of level-set components at isovalue ``r + 1/2`` (in rank units), for every ``r``.

    A cell crosses the isovalue when it has vertices on both sides; two
    crossing cells belong to the same component when they share a face that
    also crosses it.
    """
    cells = np.asarray(cells, dtype=np.int64)
    rank = np.asarray(rank, dtype=np.int64)
    cr = rank[cells]
    pa, pb, fmin, fmax = _cell_face_pairs(cells, rank)
    return _count_levelset(len(rank), cr.min(axis=1), cr.max(axis=1), pa, pb, fmin, fmax)


def arcs_spanning_counts(tree, rank: np.ndarray) -> np.ndarray:
    """Number of tree arcs whose rank interval contains ``r + 1/2``, for every ``r``."""
    n = len(rank)
    lo = np.empty(tree.arc_count, dtype=np.int64)
    hi = np.empty(tree.arc_count, dtype=np.int64)
    for i in range(tree.arc_count):
        a, b = tree.arc_vertices(i)
        lo[i], hi[i] = sorted((rank[a], rank[b]))
    delta = np.zeros(n + 1, dtype=np.int64)
    np.add.at(delta, lo, 1)
    np.add.at(delta, hi, -1)
    return np.cumsum(delta)[: n - 1]


def merge_tree_matches(tree, reference: dict) -> bool:
    """True when ``tree`` has the reference's nodes, arcs and segmentation sets."""
    nodes = {int(v) for v in tree.node_vertices}
    return (nodes == reference["nodes"]
            and set(tree.arcs()) == reference["arcs"]
            and tree.segmentation_sets() == reference["segmentation"])
