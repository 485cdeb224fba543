"""Vertex neighborhoods and links on simplicial meshes.

Two triangulation flavours are supported: explicit simplicial complexes
(dimension 1 to 3, given as a cell list) and regular grids triangulated
implicitly with the Freudenthal (Kuhn) scheme.  Grid adjacency is derived
from index arithmetic only, nothing is tabulated.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components


class MeshError(ValueError):
    pass


class DisconnectedDomain(MeshError):
    """Raised when the 1-skeleton of a mesh has several connected components."""

    def __init__(self, components: int):
        self.components = components
        super().__init__(f"domain has {components} connected components, expected 1")


MINIMUM, MAXIMUM, REGULAR, SADDLE = "minimum", "maximum", "regular", "saddle"


@dataclass(frozen=True)
class LinkClassification:
    lower_components: int
    upper_components: int
    category: str


class Triangulation:
    """Common interface of explicit and implicit triangulations.

    Instances are immutable once built, so queries may be issued from any
    number of threads.
    """

    kind: str
    vertex_count: int
    dimension: int

    def neighbors(self, v: int) -> list[int]:
        raise NotImplementedError

    def neighbor_arrays(self, lo: int, hi: int) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(src, dst)`` for every edge leaving a vertex of ``[lo, hi)``."""
        raise NotImplementedError

    def link_edges(self, v: int) -> list[tuple[int, int]]:
        raise NotImplementedError

    def cells(self) -> np.ndarray:
        raise NotImplementedError

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        src, dst = self.neighbor_arrays(0, self.vertex_count)
        keep = src < dst
        return src[keep], dst[keep]

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < self.vertex_count:
            raise IndexError(f"vertex {v} out of range [0, {self.vertex_count})")


class ExplicitTriangulation(Triangulation):
    kind = "explicit"

    def __init__(self, dimension: int, vertex_count: int, cells: np.ndarray):
        self.dimension = dimension
        self.vertex_count = vertex_count
        self._cells = cells
        n = vertex_count
        k = dimension + 1

        # vertex -> incident cells
        flat = cells.ravel()
        owner = np.repeat(np.arange(len(cells)), k)
        order = np.argsort(flat, kind="stable")
        self._star_ptr = np.concatenate(([0], np.cumsum(np.bincount(flat, minlength=n))))
        self._star = owner[order]

        # vertex -> neighbors, deduplicated and ascending
        pairs = np.array([(a, b) for a in range(k) for b in range(k) if a != b])
        src = cells[:, pairs[:, 0]].ravel()
        dst = cells[:, pairs[:, 1]].ravel()
        key = np.unique(src.astype(np.int64) * n + dst)
        src, dst = key // n, key % n
        self._nbr_ptr = np.concatenate(([0], np.cumsum(np.bincount(src, minlength=n))))
        self._nbr = dst
        self._nbr_lists: list[list[int]] = [
            dst[self._nbr_ptr[v]:self._nbr_ptr[v + 1]].tolist() for v in range(n)
        ]

    def neighbors(self, v: int) -> list[int]:
        return self._nbr_lists[v]

    def neighbor_arrays(self, lo, hi):
        a, b = self._nbr_ptr[lo], self._nbr_ptr[hi]
        counts = np.diff(self._nbr_ptr[lo:hi + 1])
        return np.repeat(np.arange(lo, hi), counts), self._nbr[a:b]

    def star(self, v: int) -> np.ndarray:
        return self._cells[self._star[self._star_ptr[v]:self._star_ptr[v + 1]]]

    def link_edges(self, v):
        if self.dimension < 2:
            return []
        found = set()
        for cell in self.star(v):
            others = sorted(int(u) for u in cell if u != v)
            found.update(itertools.combinations(others, 2))
        return sorted(found)

    def cells(self):
        return self._cells


# Freudenthal stencil: unit steps whose components are all 0 or all 1 along
# the main diagonal direction, plus their negatives.
_POSITIVE_STEPS = [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 0), (1, 0, 1), (0, 1, 1), (1, 1, 1)]


class GridTriangulation(Triangulation):
    """Regular grid with x-fastest vertex indexing and an implicit Freudenthal split.

    Every cube is cut into 6 tetrahedra sharing the diagonal ``(i,j,k)-(i+1,j+1,k+1)``;
    in 2D each quad is cut along ``(i,j)-(i+1,j+1)``.
    """

    kind = "implicit-grid"

    def __init__(self, dims: Sequence[int]):
        nx, ny, nz = (int(d) for d in dims)
        self.dims = (nx, ny, nz)
        self.vertex_count = nx * ny * nz
        self.dimension = sum(d > 1 for d in self.dims)
        active = [d > 1 for d in self.dims]
        steps = []
        for step in _POSITIVE_STEPS:
            if all(active[a] or step[a] == 0 for a in range(3)):
                steps.append(step)
                steps.append(tuple(-c for c in step))
        stencil = [(di, dj, dk, di + nx * (dj + ny * dk)) for di, dj, dk in steps]
        stencil.sort(key=lambda s: s[3])
        self._stencil = stencil
        self._offsets = [s[3] for s in stencil]
        self._active = active

    def coords(self, v: int) -> tuple[int, int, int]:
        nx, ny, _ = self.dims
        q, i = divmod(v, nx)
        k, j = divmod(q, ny)
        return i, j, k

    def neighbors(self, v):
        nx, ny, nz = self.dims
        q, i = divmod(v, nx)
        k, j = divmod(q, ny)
        if (0 < i < nx - 1 and (ny == 1 or 0 < j < ny - 1) and (nz == 1 or 0 < k < nz - 1)):
            return [v + o for o in self._offsets]
        out = []
        for di, dj, dk, o in self._stencil:
            if 0 <= i + di < nx and 0 <= j + dj < ny and 0 <= k + dk < nz:
                out.append(v + o)
        return out

    def neighbor_arrays(self, lo, hi):
        nx, ny, nz = self.dims
        v = np.arange(lo, hi, dtype=np.int64)
        i = v % nx
        j = (v // nx) % ny
        k = v // (nx * ny)
        src, dst = [], []
        for di, dj, dk, o in self._stencil:
            ok = ((i + di >= 0) & (i + di < nx) & (j + dj >= 0) & (j + dj < ny)
                  & (k + dk >= 0) & (k + dk < nz))
            src.append(v[ok])
            dst.append(v[ok] + o)
        return np.concatenate(src), np.concatenate(dst)

    def link_edges(self, v):
        # The Freudenthal triangulation is a flag complex: three pairwise
        # adjacent vertices always span a triangle.
        nbrs = self.neighbors(v)
        found = []
        for a in nbrs:
            adj = set(self.neighbors(a))
            found.extend((a, b) for b in nbrs if b > a and b in adj)
        return found

    def cells(self):
        nx, ny, nz = self.dims
        axes = [a for a in range(3) if self._active[a]]
        unit = {0: 1, 1: nx, 2: nx * ny}
        ranges = [np.arange(d - 1) if d > 1 else np.arange(1) for d in self.dims]
        k, j, i = np.meshgrid(ranges[2], ranges[1], ranges[0], indexing="ij")
        base = (i + nx * (j + ny * k)).ravel()
        out = []
        for perm in itertools.permutations(axes):
            path = [0]
            for a in perm:
                path.append(path[-1] + unit[a])
            out.append(base[:, None] + np.array(path)[None, :])
        return np.concatenate(out).astype(np.int64)


def build_explicit(dimension: int, vertex_count: int, cells) -> ExplicitTriangulation:
    if dimension not in (1, 2, 3):
        raise MeshError(f"dimension must be 1, 2 or 3, got {dimension}")
    arr = np.asarray(cells, dtype=np.int64)
    if arr.size == 0:
        raise MeshError("empty cell list")
    if arr.ndim != 2 or arr.shape[1] != dimension + 1:
        raise MeshError(f"cells of a {dimension}-complex need {dimension + 1} vertices each")
    if arr.min() < 0 or arr.max() >= vertex_count:
        bad = int(np.argmax((arr < 0).any(axis=1) | (arr >= vertex_count).any(axis=1)))
        raise MeshError(f"cell {bad} has a vertex index out of range [0, {vertex_count})")
    srt = np.sort(arr, axis=1)
    dup = (srt[:, 1:] == srt[:, :-1]).any(axis=1)
    if dup.any():
        raise MeshError(f"cell {int(np.argmax(dup))} repeats a vertex")
    return ExplicitTriangulation(dimension, int(vertex_count), arr)


def build_implicit_grid(dims: Sequence[int]) -> GridTriangulation:
    dims = list(dims) + [1] * (3 - len(dims))
    if len(dims) != 3 or any(int(d) < 1 for d in dims):
        raise MeshError(f"grid dimensions must be three positive integers, got {dims}")
    if int(dims[0]) < 2:
        raise MeshError("grid needs nx >= 2")
    return GridTriangulation(dims)


def vertex_neighbors(t: Triangulation, v: int) -> list[int]:
    t._check_vertex(v)
    return sorted(t.neighbors(v))


def _count_components(vertices: list[int], edges) -> int:
    if not vertices:
        return 0
    parent = {u: u for u in vertices}

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    count = len(vertices)
    for a, b in edges:
        if a in parent and b in parent:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
                count -= 1
    return count


def link_components(t: Triangulation, v: int, order) -> LinkClassification:
    """Count connected components of the lower and upper link of ``v``."""
    t._check_vertex(v)
    rank = order.rank
    rv = rank[v]
    nbrs = t.neighbors(v)
    lower = [u for u in nbrs if rank[u] < rv]
    upper = [u for u in nbrs if rank[u] > rv]
    edges = t.link_edges(v)
    lo = _count_components(lower, edges)
    up = _count_components(upper, edges)
    if lo == 0:
        category = MINIMUM
    elif up == 0:
        category = MAXIMUM
    elif lo == 1 and up == 1:
        category = REGULAR
    else:
        category = SADDLE
    return LinkClassification(lo, up, category)


def classify_vertices(t: Triangulation, order) -> list[str]:
    return [link_components(t, v, order).category for v in range(t.vertex_count)]


def validate_connected(t: Triangulation) -> None:
    n = t.vertex_count
    a, b = t.edges()
    graph = coo_matrix((np.ones(len(a), dtype=np.int8), (a, b)), shape=(n, n))
    count, _ = connected_components(graph, directed=False)
    if count != 1:
        raise DisconnectedDomain(count)
