"""Output tree containers shared by merge trees and contour trees."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mesh import MAXIMUM, MINIMUM, REGULAR, SADDLE


@dataclass
class AugmentedTree:
    """A tree whose arcs carry their regular vertices.

    Nodes are stored in ascending global rank.  Arc ``i`` runs from node
    ``arc_down[i]`` (the leaf side) to node ``arc_up[i]`` (the root side);
    for join and contour trees this is ascending scalar order, for split
    trees it is descending.  Arcs are sorted by the global ranks of their
    (down, up) vertices, so two computations of the same tree compare equal
    element by element.

    ``segmentations[i]`` lists the regular vertices of arc ``i`` in sweep
    order.  Node vertices never appear in a segmentation; ``vertex_to_node``
    maps them to their node and ``vertex_to_arc`` to the arc leaving them
    (the arc reaching them when none leaves, i.e. for the root).
    """

    kind: str
    node_vertices: np.ndarray
    node_categories: list[str]
    arc_down: np.ndarray
    arc_up: np.ndarray
    segmentations: list[np.ndarray]
    vertex_to_arc: np.ndarray
    vertex_to_node: np.ndarray
    stats: dict = field(default_factory=dict, compare=False, repr=False)
    node_ranks: np.ndarray | None = field(default=None, compare=False, repr=False)

    @property
    def node_count(self) -> int:
        return len(self.node_vertices)

    @property
    def arc_count(self) -> int:
        return len(self.arc_down)

    @property
    def vertex_count(self) -> int:
        return len(self.vertex_to_arc)

    def arc_vertices(self, i: int) -> tuple[int, int]:
        return int(self.node_vertices[self.arc_down[i]]), int(self.node_vertices[self.arc_up[i]])

    def arcs(self) -> list[tuple[int, int]]:
        """Arcs as (down vertex, up vertex) pairs."""
        return [self.arc_vertices(i) for i in range(self.arc_count)]

    def segmentation_sets(self) -> dict[tuple[int, int], frozenset]:
        return {self.arc_vertices(i): frozenset(self.segmentations[i].tolist())
                for i in range(self.arc_count)}

    def leaves(self) -> list[int]:
        has_in = np.zeros(self.node_count, dtype=bool)
        has_in[self.arc_up] = True
        return [int(v) for v, h in zip(self.node_vertices, has_in) if not h]

    def same_as(self, other: AugmentedTree) -> bool:
        if (self.kind != other.kind or self.node_count != other.node_count
                or self.arc_count != other.arc_count):
            return False
        return (np.array_equal(self.node_vertices, other.node_vertices)
                and self.node_categories == other.node_categories
                and np.array_equal(self.arc_down, other.arc_down)
                and np.array_equal(self.arc_up, other.arc_up)
                and all(np.array_equal(a, b) for a, b in zip(self.segmentations, other.segmentations))
                and np.array_equal(self.vertex_to_arc, other.vertex_to_arc))


@dataclass
class AugmentedMergeTree(AugmentedTree):
    @property
    def polarity(self) -> str:
        return self.kind


@dataclass
class ContourTree(AugmentedTree):
    provenance: list[str] = field(default_factory=list)


def _categories(kind, n_nodes, down, up):
    n_in = np.bincount(up, minlength=n_nodes)
    n_out = np.bincount(down, minlength=n_nodes)
    cats = []
    for a, b in zip(n_in.tolist(), n_out.tolist()):
        if kind == "contour":
            # in: arcs from below, out: arcs going up
            if a == 0:
                cats.append(MINIMUM)
            elif b == 0:
                cats.append(MAXIMUM)
            elif a == 1 and b == 1:
                cats.append(REGULAR)
            else:
                cats.append(SADDLE)
        else:
            leaf, root = (MINIMUM, MAXIMUM) if kind == "join" else (MAXIMUM, MINIMUM)
            if a == 0:
                cats.append(leaf)
            elif b == 0:
                cats.append(root)
            elif a == 1:
                cats.append(REGULAR)  # degree-2 node, e.g. after cross augmentation
            else:
                cats.append(SADDLE)
    return cats


def assemble_tree(kind: str, records, rank: np.ndarray, provenance=None) -> AugmentedTree:
    """Build a canonical tree from ``(down_vertex, up_vertex, segmentation)`` records.

    ``rank`` is the global ascending rank.  An optional parallel list of arc
    provenance labels is carried along (contour trees only).
    """
    n = len(rank)
    ends = {v for d, u, _ in records for v in (d, u)}
    node_vertices = np.array(sorted(ends, key=lambda v: rank[v]), dtype=np.int64)
    node_index = {int(v): i for i, v in enumerate(node_vertices)}
    order = sorted(range(len(records)), key=lambda i: (rank[records[i][0]], rank[records[i][1]]))
    down = np.array([node_index[records[i][0]] for i in order], dtype=np.int64)
    up = np.array([node_index[records[i][1]] for i in order], dtype=np.int64)
    segs = [np.asarray(records[i][2], dtype=np.int64) for i in order]

    vertex_to_arc = np.full(n, -1, dtype=np.int64)
    for i, seg in enumerate(segs):
        vertex_to_arc[seg] = i
    vertex_to_node = np.full(n, -1, dtype=np.int64)
    vertex_to_node[node_vertices] = np.arange(len(node_vertices))
    # nodes take the first arc leaving them, else the first arc reaching them
    for arr in (up, down):
        for i in range(len(arr) - 1, -1, -1):
            vertex_to_arc[node_vertices[arr[i]]] = i

    cats = _categories(kind, len(node_vertices), down, up)
    node_ranks = np.asarray(rank)[node_vertices] if len(node_vertices) else node_vertices
    if kind == "contour":
        prov = [provenance[i] for i in order] if provenance is not None else []
        return ContourTree(kind, node_vertices, cats, down, up, segs, vertex_to_arc,
                           vertex_to_node, node_ranks=node_ranks, provenance=prov)
    return AugmentedMergeTree(kind, node_vertices, cats, down, up, segs, vertex_to_arc,
                              vertex_to_node, node_ranks=node_ranks)
