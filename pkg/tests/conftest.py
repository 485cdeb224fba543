import numpy as np
import pytest
from scipy.spatial import Delaunay

from augtrees.mesh import build_explicit
from augtrees.order import ScalarField, build_order

CRITERIA = {
    1: "merge trees match the global-sweep oracle",
    2: "contour tree arcs match level-set component counts",
    3: "elevation contour tree is one arc, two nodes",
    4: "output identical across thread counts and repeats",
    5: "no-trunk output identical to default output",
    6: "parallel combination identical to sequential",
    7: "saddle-arrival protocol: one first, one last in every interleaving",
    8: "persistence pairs and partition-preserving simplification",
    9: "scaling sanity on a 128^3 random grid",
    10: "worst-case ramp speedups and time-vs-p CSV",
}

_results: dict[int, list[str]] = {}


def path_mesh(values):
    n = len(values)
    t = build_explicit(1, n, [(i, i + 1) for i in range(n - 1)])
    return t, ScalarField(np.asarray(values, dtype=float))


def random_tet_mesh(rng, n=200):
    pts = rng.random((n, 3))
    return build_explicit(3, n, Delaunay(pts).simplices)


def order_of(t, field):
    return build_order(field, t.vertex_count)


@pytest.fixture
def path0314():
    return path_mesh([0, 3, 1, 4])


@pytest.fixture
def wpath():
    return path_mesh([0, 3, 1, 4, 2, 5])


def pytest_runtest_logreport(report):
    crit = getattr(report, "_criterion", None)
    if crit is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _results.setdefault(crit, []).append(report.outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        report._criterion = m.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for k, title in CRITERIA.items():
        outs = _results.get(k)
        if not outs:
            continue
        if "failed" in outs:
            status = "FAIL"
        elif all(o == "skipped" for o in outs):
            status = "SKIP"
        elif "skipped" in outs:
            status = "PARTIAL (some checks skipped)"
        else:
            status = "PASS"
        terminalreporter.write_line(f"criterion {k:>2}: {status:<8} {title}")


def check_tree_invariants(t, tree, rank):
    """Partition, tree shape, sweep-sorted segmentations and per-arc connectivity."""
    n = t.vertex_count
    assert tree.node_count == tree.arc_count + 1
    seen = np.zeros(n, dtype=np.int64)
    np.add.at(seen, tree.node_vertices, 1)
    for seg in tree.segmentations:
        np.add.at(seen, seg, 1)
    assert (seen == 1).all(), "segmentations and nodes must partition the vertices"
    descending = tree.kind == "split"
    for i in range(tree.arc_count):
        a, b = tree.arc_vertices(i)
        seg = tree.segmentations[i]
        r = rank[seg]
        if len(seg) > 1:
            assert (np.diff(r) < 0).all() if descending else (np.diff(r) > 0).all()
        if descending:
            assert rank[a] > rank[b]
        else:
            assert rank[a] < rank[b]
        lo, hi = sorted((rank[a], rank[b]))
        assert ((r > lo) & (r < hi)).all()
    # leaf arcs are connected on their own; any arc is connected once the
    # part of the tree hanging below it is added
    below = _subtree_vertices(tree)
    leaves = set(tree.leaves())
    for i in range(tree.arc_count):
        a, b = tree.arc_vertices(i)
        members = set(tree.segmentations[i].tolist()) | {a, b}
        if a in leaves:
            assert _connected(t, members), f"leaf arc {i} is not connected"
        assert _connected(t, members | below[i]), f"arc {i} with its subtree is not connected"
    assert (tree.vertex_to_arc >= 0).all()


def _connected(t, members):
    start = next(iter(members))
    stack, reached = [start], {start}
    while stack:
        v = stack.pop()
        for u in t.neighbors(v):
            if u in members and u not in reached:
                reached.add(u)
                stack.append(u)
    return reached == members


def _subtree_vertices(tree):
    """For each arc, the vertices of every arc and node below it (leaf side)."""
    into = {}
    for i in range(tree.arc_count):
        into.setdefault(int(tree.arc_up[i]), []).append(i)
    memo = {}

    def collect(i):
        if i not in memo:
            out = set(tree.segmentations[i].tolist()) | set(tree.arc_vertices(i))
            for j in into.get(int(tree.arc_down[i]), []):
                out |= collect(j)
            memo[i] = out
        return memo[i]

    return {i: collect(i) for i in range(tree.arc_count)}
