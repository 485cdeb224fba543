"""Command line front end: ``augtrees <verb> [options]``."""
from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import bench, io
from .contourtree import compute_contour_tree
from .mergetree import compute_merge_tree
from .mesh import build_implicit_grid, validate_connected
from .order import build_order
from .simplify import simplify


def _dims(text: str) -> list[int]:
    parts = [int(x) for x in text.replace("x", ",").split(",") if x]
    if not 1 <= len(parts) <= 3:
        raise argparse.ArgumentTypeError("dims must be 1 to 3 integers, e.g. 64,64,4")
    return parts + [1] * (3 - len(parts))


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def _load(args):
    if args.input is None:
        raise SystemExit("--input is required")
    return io.read_input(args.input, args.dims, args.dtype)


def _meta(args, t, tree, extra=None) -> dict:
    meta = {"threads": args.threads}
    dims = io.grid_dims(t)
    if dims is not None:
        meta["dims"] = dims
    if getattr(args, "timings", False):
        meta["timings"] = {k: round(v, 6) for k, v in tree.stats.get("times", {}).items()}
    meta.update(extra or {})
    return meta


def _emit(args, t, tree, extra=None):
    if args.output:
        io.write_tree(tree, args.output, args.full, _meta(args, t, tree, extra))
    if args.seg:
        io.write_segmentation(tree, args.seg)
    print(f"{tree.kind} tree: {tree.node_count} nodes, {tree.arc_count} arcs, "
          f"{tree.vertex_count} vertices")


def cmd_gen(args):
    dims = args.dims or [32, 32, 32]
    field = io.generate_field(args.kind, dims, args.seed, args.p)
    io.write_scalar_grid(args.output, field.values, dims, args.dtype or "f32")
    print(f"wrote {args.kind} field {dims} to {args.output}")


def cmd_mt(args):
    t, field = _load(args)
    validate_connected(t)
    order = build_order(field, t.vertex_count)
    t0 = time.perf_counter()
    tree = compute_merge_tree(t, order, args.tree, threads=args.threads,
                              use_trunk=not args.no_trunk)
    tree.stats["times"] = dict(tree.stats["merge"].times, total=time.perf_counter() - t0)
    _emit(args, t, tree)


def cmd_ct(args):
    t, field = _load(args)
    tree = compute_contour_tree(t, field, threads=args.threads, use_trunk=not args.no_trunk,
                                priority=args.priority)
    _emit(args, t, tree)


def cmd_simplify(args):
    t, field = _load(args)
    if args.tree == "contour":
        tree = compute_contour_tree(t, field, threads=args.threads, use_trunk=not args.no_trunk,
                                    priority=args.priority)
    else:
        order = build_order(field, t.vertex_count)
        tree = compute_merge_tree(t, order, args.tree, threads=args.threads,
                                  use_trunk=not args.no_trunk)
    rank = build_order(field, t.vertex_count).rank
    out = simplify(tree, field.values, args.threshold, relative=not args.absolute, rank=rank)
    print(f"simplified {tree.arc_count} arcs to {out.arc_count}")
    _emit(args, t, out, {"threshold": args.threshold, "relative": not args.absolute})


def cmd_bench(args):
    threads = args.threads_list or [1]
    if args.worst_case:
        dims = args.dims or [64, 64, 4]
        records = bench.worst_case_sweep(dims, threads_list=threads, repeats=args.repeat,
                                         seed=args.seed)
        samples = []
    else:
        if args.input:
            t, field = _load(args)
            name = args.input
        else:
            dims = args.dims or [32, 32, 32]
            t, field = build_implicit_grid(dims), io.generate_field(args.kind, dims, args.seed)
            name = f"{args.kind}-{'x'.join(map(str, dims))}"
        records, samples = bench.run_benchmark(t, field, threads, args.repeat, name,
                                               use_trunk=not args.no_trunk,
                                               priority=args.priority)
    rows = bench.summarize(records)
    if args.output:
        bench.write_csv(rows, args.output)
    if args.raw:
        bench.write_csv(records, args.raw)
    if args.samples and samples:
        bench.write_samples(samples, args.samples)
    for r in rows:
        print(f"{r['dataset']:>16} {r['tree']:>7} {r['step']:>10} t={r['threads']:<3} "
              f"avg={r['avg']:.4f}s std={r['std']:.4f} speedup={r['speedup']:.2f}")


def cmd_check(args):
    from .oracles import (arcs_spanning_counts, levelset_component_counts,
                          merge_tree_matches, sweep_merge_tree)

    rng = np.random.default_rng(args.seed)
    failures = 0
    for i in range(args.count):
        dims = [12, 12, 1] if i % 2 == 0 else [6, 6, 6]
        t = build_implicit_grid(dims)
        field = io.generate_field("random", dims, int(rng.integers(1 << 31)))
        order = build_order(field, t.vertex_count)
        for pol in ("join", "split"):
            tree = compute_merge_tree(t, order, pol, threads=args.threads)
            if not merge_tree_matches(tree, sweep_merge_tree(t, order, pol)):
                failures += 1
                print(f"instance {i}: {pol} tree differs from the sweep oracle")
        ct = compute_contour_tree(t, order, threads=args.threads)
        if not np.array_equal(arcs_spanning_counts(ct, order.rank),
                              levelset_component_counts(t.cells(), order.rank)):
            failures += 1
            print(f"instance {i}: contour tree disagrees with level-set component counts")
    print(f"{args.count} instances checked, {failures} failures")
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="raw grid (with --dims or a .hdr sidecar) or ASCII mesh")
    common.add_argument("--dims", type=_dims, help="grid size nx,ny,nz")
    common.add_argument("--dtype", choices=sorted(io.DTYPES))
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--output", help="output path")
    common.add_argument("--seg", help="write per-vertex arc ids (uint32) here")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--no-trunk", action="store_true", help="grow every arc (testing)")
    common.add_argument("--priority", choices=("join", "split"), default="split",
                        help="merge tree whose tasks run first")
    common.add_argument("--full", action="store_true", help="include arc vertex lists in JSON")
    common.add_argument("--timings", action="store_true", help="store timings in the JSON")

    p = argparse.ArgumentParser(prog="augtrees", description=__doc__)
    sub = p.add_subparsers(dest="verb", required=True)

    g = sub.add_parser("gen", parents=[common], help="write a synthetic grid field")
    g.add_argument("--kind", choices=io.FIELD_KINDS, default="random")
    g.add_argument("--p", type=float, default=0.0, help="randomized fraction for ramp-random")
    g.set_defaults(func=cmd_gen)

    m = sub.add_parser("mt", parents=[common], help="augmented merge tree")
    m.add_argument("--tree", choices=("join", "split"), default="join")
    m.set_defaults(func=cmd_mt)

    c = sub.add_parser("ct", parents=[common], help="augmented contour tree")
    c.set_defaults(func=cmd_ct)

    s = sub.add_parser("simplify", parents=[common], help="persistence simplification")
    s.add_argument("--tree", choices=("join", "split", "contour"), default="contour")
    s.add_argument("--threshold", type=float, default=0.0,
                   help="fraction of the scalar range (absolute with --absolute)")
    s.add_argument("--absolute", action="store_true")
    s.set_defaults(func=cmd_simplify)

    b = sub.add_parser("bench", parents=[common], help="per-step timings as CSV")
    b.add_argument("--threads-list", type=_int_list, help="e.g. 1,2,4,8")
    b.add_argument("--repeat", type=int, default=1)
    b.add_argument("--kind", choices=io.FIELD_KINDS, default="random")
    b.add_argument("--worst-case", action="store_true", help="time-vs-p sweep of ramp-random")
    b.add_argument("--raw", help="also write one row per run")
    b.add_argument("--samples", help="remaining-task samples CSV")
    b.set_defaults(func=cmd_bench)

    k = sub.add_parser("check", parents=[common], help="run the oracle suites")
    k.add_argument("--oracle", action="store_true", default=True)
    k.add_argument("--count", type=int, default=10)
    k.set_defaults(func=cmd_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.verb == "bench" and args.threads_list is None:
        args.threads_list = [args.threads]
    if args.verb == "gen" and not args.output:
        raise SystemExit("--output is required")
    return args.func(args) or 0


if __name__ == "__main__":
    sys.exit(main())
