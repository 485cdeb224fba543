import numpy as np
import pytest

from augtrees.contourtree import compute_contour_tree
from augtrees.mergetree import compute_merge_tree
from augtrees.mesh import build_implicit_grid
from augtrees.order import ScalarField
from augtrees.simplify import PersistencePair, persistence_pairs, simplify

from conftest import _connected, _subtree_vertices, order_of, path_mesh


def partition_ok(tree, n):
    count = np.zeros(n, dtype=int)
    np.add.at(count, tree.node_vertices, 1)
    for s in tree.segmentations:
        np.add.at(count, s, 1)
    return (count == 1).all()


def test_path_pairs(path0314):
    t, f = path0314
    jt = compute_merge_tree(t, order_of(t, f), "join")
    assert persistence_pairs(jt, f.values) == [PersistencePair(2, 1, 2.0),
                                                PersistencePair(0, 3, 4.0)]


def test_single_arc_one_pair():
    t, f = path_mesh([0, 1, 2, 3])
    jt = compute_merge_tree(t, order_of(t, f), "join")
    assert persistence_pairs(jt, f.values) == [PersistencePair(0, 3, 3.0)]


def test_tie_lower_rank_pairs_first():
    # symmetric minima at 0 around a saddle at 2
    t, f = path_mesh([0, 2, 0, 5])
    jt = compute_merge_tree(t, order_of(t, f), "join")
    pairs = persistence_pairs(jt, f.values)
    assert pairs[0] == PersistencePair(0, 1, 2.0)
    assert pairs[1].extremum == 2


def test_contour_tree_pairs_follow_merge_trees(path0314):
    t, f = path0314
    o = order_of(t, f)
    ct = compute_contour_tree(t, f)
    for side in ("join", "split"):
        mt = compute_merge_tree(t, o, side)
        assert persistence_pairs(ct, f.values, side) == persistence_pairs(mt, f.values)


def test_wrong_side_rejected(path0314):
    t, f = path0314
    jt = compute_merge_tree(t, order_of(t, f), "join")
    with pytest.raises(ValueError):
        persistence_pairs(jt, f.values, "split")


def test_simplify_path(path0314):
    t, f = path0314
    jt = compute_merge_tree(t, order_of(t, f), "join")
    out = simplify(jt, f.values, 2.5)
    assert out.arcs() == [(0, 3)]
    assert sorted(out.segmentations[0].tolist()) == [1, 2]
    assert len(out.leaves()) == 1


def test_threshold_zero_is_identity(path0314):
    t, f = path0314
    jt = compute_merge_tree(t, order_of(t, f), "join")
    assert simplify(jt, f.values, 0).same_as(jt)


def test_total_collapse():
    t = build_implicit_grid([7, 6, 1])
    f = ScalarField(np.random.default_rng(3).random(42))
    o = order_of(t, f)
    for pol in ("join", "split"):
        mt = compute_merge_tree(t, o, pol)
        out = simplify(mt, f.values, 10.0)
        assert out.arc_count == 1
        assert partition_ok(out, 42)
    ct = compute_contour_tree(t, o)
    out = simplify(ct, f.values, 10.0)
    assert out.arc_count == 1 and partition_ok(out, 42)


def test_negative_threshold():
    t, f = path_mesh([0, 3, 1, 4])
    jt = compute_merge_tree(t, order_of(t, f), "join")
    with pytest.raises(ValueError):
        simplify(jt, f.values, -1)


def test_relative_threshold():
    t, f = path_mesh([0, 3, 1, 4])
    jt = compute_merge_tree(t, order_of(t, f), "join")
    assert simplify(jt, f.values, 0.6, relative=True).same_as(simplify(jt, f.values, 2.4))


@pytest.mark.parametrize("kind", ["join", "split", "contour"])
def test_partition_and_connectivity_preserved(kind):
    t = build_implicit_grid([9, 8, 1])
    f = ScalarField(np.random.default_rng(8).random(72))
    o = order_of(t, f)
    tree = compute_contour_tree(t, o) if kind == "contour" else compute_merge_tree(t, o, kind)
    last = tree.arc_count
    for th in (0.0, 0.05, 0.1, 0.3, 0.6, 2.0):
        out = simplify(tree, f.values, th, rank=o.rank)
        assert partition_ok(out, 72)
        assert out.node_count == out.arc_count + 1
        assert out.arc_count <= last
        last = out.arc_count
        if kind != "contour":
            # every arc, together with what hangs below it, is a connected region
            below = _subtree_vertices(out)
            assert all(_connected(t, below[i]) for i in range(out.arc_count))


def test_pruned_pairs_below_threshold_only():
    t = build_implicit_grid([9, 8, 1])
    f = ScalarField(np.random.default_rng(9).random(72))
    o = order_of(t, f)
    jt = compute_merge_tree(t, o, "join")
    pairs = persistence_pairs(jt, f.values, rank=o.rank)
    th = float(np.median([p.persistence for p in pairs]))
    out = simplify(jt, f.values, th, rank=o.rank)
    kept = [p for p in pairs if p.persistence >= th]
    assert len(out.leaves()) == len(kept)
