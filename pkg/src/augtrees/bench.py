"""Per-step timing of the contour tree pipeline.

Every run records the wall time of each step for the join tree, the split
tree and the combination; :func:`summarize` reduces repeats to
min/max/avg/std and adds the speedup against the single-thread average.
"""
from __future__ import annotations

import csv
import statistics
from dataclasses import dataclass

from .contourtree import compute_contour_tree
from .io import generate_field
from .mesh import build_implicit_grid

STEPS = ("sort", "leafSearch", "arcGrowth", "trunk", "mtOverall", "combine", "ctOverall")


@dataclass
class BenchRecord:
    dataset: str
    tree: str  # join, split or contour
    step: str
    threads: int
    repeat: int
    seconds: float


def time_contour_tree(t, field, threads: int, repeat: int = 0, dataset: str = "",
                      use_trunk: bool = True, priority: str = "split"):
    """One contour tree run; returns ``(records, remaining-task samples, tree)``."""
    tree = compute_contour_tree(t, field, threads=threads, use_trunk=use_trunk, priority=priority)
    times = tree.stats["times"]
    recs = [BenchRecord(dataset, "contour", s, threads, repeat, times[k])
            for s, k in (("sort", "sort"), ("leafSearch", "leafSearch"),
                         ("mtOverall", "mergeTrees"), ("combine", "combine"),
                         ("ctOverall", "ctOverall"))]
    samples = []
    for name in ("join", "split"):
        st = tree.stats[name]
        for step in ("arcGrowth", "trunk"):
            recs.append(BenchRecord(dataset, name, step, threads, repeat, max(st.times[step], 0.0)))
        samples += [(dataset, name, threads, repeat, t_, v) for t_, v in st.remaining_samples]
    return recs, samples, tree


def run_benchmark(t, field, threads_list=(1,), repeats: int = 1, dataset: str = "",
                  use_trunk: bool = True, priority: str = "split"):
    """Time every thread count ``repeats`` times; returns ``(records, samples)``."""
    records, samples = [], []
    for k in threads_list:
        for r in range(repeats):
            recs, smp, _ = time_contour_tree(t, field, k, r, dataset, use_trunk, priority)
            records += recs
            samples += smp
    return records, samples


def summarize(records) -> list[dict]:
    groups: dict[tuple, list[float]] = {}
    for r in records:
        groups.setdefault((r.dataset, r.tree, r.step, r.threads), []).append(r.seconds)
    rows = []
    for (ds, tree, step, k), xs in sorted(groups.items(), key=lambda kv: (
            kv[0][0], kv[0][1], STEPS.index(kv[0][2]), kv[0][3])):
        avg = statistics.fmean(xs)
        base = groups.get((ds, tree, step, 1))
        speedup = statistics.fmean(base) / avg if base and avg > 0 else float("nan")
        rows.append({"dataset": ds, "tree": tree, "step": step, "threads": k, "repeats": len(xs),
                     "min": min(xs), "max": max(xs), "avg": avg,
                     "std": statistics.pstdev(xs), "speedup": speedup})
    return rows


def worst_case_sweep(dims, ps=(0.0, 0.25, 0.5, 0.75, 1.0), threads_list=(1,), repeats: int = 1,
                     seed: int = 0):
    """Time the ramp-random field for increasing randomized fractions ``p``."""
    t = build_implicit_grid(dims)
    records = []
    for p in ps:
        field = generate_field("ramp-random", dims, seed=seed, p=p)
        recs, _ = run_benchmark(t, field, threads_list, repeats, dataset=f"p={p:g}")
        records += recs
    return records


def write_csv(rows, path) -> None:
    rows = list(rows)
    if rows and not isinstance(rows[0], dict):
        rows = [vars(r) for r in rows]
    with open(path, "w", newline="") as fh:
        if not rows:
            return
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        for r in rows:
            w.writerow({k: (f"{v:.6g}" if isinstance(v, float) else v) for k, v in r.items()})


def write_samples(samples, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["dataset", "tree", "threads", "repeat", "time", "remaining"])
        for ds, tree, k, r, t_, v in samples:
            w.writerow([ds, tree, k, r, f"{t_:.6g}", v])


def speedup_of(rows, tree: str, step: str, threads: int, dataset: str | None = None) -> float:
    for r in rows:
        if (r["tree"], r["step"], r["threads"]) == (tree, step, threads) and (
                dataset is None or r["dataset"] == dataset):
            return r["speedup"]
    return float("nan")


def field_for(kind: str, dims, seed: int = 0, p: float = 0.0):
    return build_implicit_grid(dims), generate_field(kind, dims, seed, p)

