"""Contour tree of a small random terrain, its merge trees and a simplification."""
import numpy as np

from augtrees.contourtree import compute_contour_tree
from augtrees.io import generate_field
from augtrees.mesh import build_implicit_grid
from augtrees.simplify import persistence_pairs, simplify

# A 32x32 grid of seeded noise has many extrema, so its trees are bushy
dims = [32, 32, 1]
t = build_implicit_grid(dims)
field = generate_field("random", dims, seed=7)
ct = compute_contour_tree(t, field, threads=2)
print(f"contour tree: {ct.node_count} nodes, {ct.arc_count} arcs")

# The join and split trees computed on the way are kept in the stats
jt, st = ct.stats["join_tree"], ct.stats["split_tree"]
print(f"join tree: {jt.arc_count} arcs, split tree: {st.arc_count} arcs")

# Every vertex is a node or belongs to exactly one arc
sizes = np.array([len(s) for s in ct.segmentations])
assert sizes.sum() + ct.node_count == t.vertex_count
print(f"largest arc holds {sizes.max()} vertices")

# Per-vertex arc ids, e.g. for coloring the domain
seg = ct.vertex_to_arc.reshape(dims[1], dims[0])
print("arc ids of the first row:", seg[0, :8])

# Minimum/saddle pairs, lowest persistence first
pairs = persistence_pairs(ct, field.values, "join")
print("three least persistent minima:", pairs[:3])

# Remove every branch below 10% of the scalar range
small = simplify(ct, field.values, 0.10, relative=True)
print(f"simplified: {small.arc_count} arcs left of {ct.arc_count}")
