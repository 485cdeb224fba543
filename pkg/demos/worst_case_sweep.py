"""Time the contour tree of a ramp field as it is progressively randomized.

With p = 0 each merge tree is two long arcs, so arc growth has almost no
parallelism; raising p adds extrema and therefore independent tasks.
"""
import os
import tempfile

from augtrees import bench

dims = [64, 64, 4]
records = bench.worst_case_sweep(dims, ps=(0.0, 0.5, 1.0), threads_list=(1, 4), repeats=1)
rows = bench.summarize(records)

for r in rows:
    if r["step"] in ("arcGrowth", "ctOverall"):
        print(f"{r['dataset']:>6} {r['tree']:>7} {r['step']:>10} threads={r['threads']} "
              f"avg={r['avg']:.3f}s speedup={r['speedup']:.2f}")

out = os.path.join(tempfile.gettempdir(), "worst_case.csv")
bench.write_csv(rows, out)
print("wrote", out)
