import csv
import json

import numpy as np
import pytest

from augtrees import bench, io
from augtrees.cli import main


def test_one_row_per_step():
    t, f = bench.field_for("elevation", [8, 8, 8])
    records, samples = bench.run_benchmark(t, f, [1], 1, "elev")
    steps = {(r.tree, r.step) for r in records}
    assert {s for _, s in steps} == set(bench.STEPS)
    assert all(r.seconds >= 0 for r in records)
    assert samples and samples[0][-1] == 1


def test_repeats_stats_and_speedup():
    t, f = bench.field_for("random", [8, 8, 4], seed=1)
    records, _ = bench.run_benchmark(t, f, [1, 2], 4, "r")
    rows = bench.summarize(records)
    for r in rows:
        assert r["min"] <= r["avg"] <= r["max"] and r["repeats"] == 4
    base = {(r["tree"], r["step"]): r["avg"] for r in rows if r["threads"] == 1}
    for r in rows:
        if r["threads"] == 2:
            assert r["speedup"] == pytest.approx(base[(r["tree"], r["step"])] / r["avg"])


def test_worst_case_csv(tmp_path):
    records = bench.worst_case_sweep([8, 6, 2], ps=(0.0, 0.5, 1.0))
    out = tmp_path / "wc.csv"
    bench.write_csv(bench.summarize(records), out)
    rows = list(csv.DictReader(out.open()))
    assert {r["dataset"] for r in rows} == {"p=0", "p=0.5", "p=1"}


def test_cli_pipeline(tmp_path, capsys):
    raw = tmp_path / "f.raw"
    assert main(["gen", "--kind", "random", "--dims", "6,5,4", "--seed", "3",
                 "--output", str(raw)]) == 0
    jt1, jt2 = tmp_path / "j1.json", tmp_path / "j2.json"
    main(["mt", "--input", str(raw), "--tree", "join", "--output", str(jt1), "--full"])
    main(["mt", "--input", str(raw), "--tree", "join", "--threads", "3", "--no-trunk",
          "--output", str(jt2), "--full"])
    a = json.loads(jt1.read_text())
    b = json.loads(jt2.read_text())
    assert a["nodes"] == b["nodes"] and a["arcs"] == b["arcs"]
    ct, seg = tmp_path / "ct.json", tmp_path / "ct.seg"
    main(["ct", "--input", str(raw), "--threads", "2", "--priority", "join",
          "--output", str(ct), "--seg", str(seg)])
    assert seg.stat().st_size == 4 * 120
    assert io.read_tree(ct)["metadata"]["kind"] == "contour"
    simp = tmp_path / "s.json"
    main(["simplify", "--input", str(raw), "--threshold", "2", "--output", str(simp)])
    assert len(io.read_tree(simp)["arcs"]) == 1
    out = capsys.readouterr().out
    assert "contour tree" in out


def test_cli_mesh_input_and_bench(tmp_path):
    mesh = tmp_path / "path.txt"
    mesh.write_text("simplicial 1 4 3\n0\n3\n1\n4\n0 1\n1 2\n2 3\n")
    out = tmp_path / "ct.json"
    main(["ct", "--input", str(mesh), "--output", str(out)])
    assert len(io.read_tree(out)["arcs"]) == 3
    csv_out, smp = tmp_path / "b.csv", tmp_path / "s.csv"
    main(["bench", "--kind", "elevation", "--dims", "6,6,6", "--threads-list", "1,2",
          "--repeat", "2", "--output", str(csv_out), "--samples", str(smp)])
    rows = list(csv.DictReader(csv_out.open()))
    assert {r["step"] for r in rows} == set(bench.STEPS)
    assert smp.exists()


def test_cli_check_runs_oracles(capsys):
    assert main(["check", "--oracle", "--count", "2"]) == 0
    assert "0 failures" in capsys.readouterr().out


def test_cli_requires_input():
    with pytest.raises(SystemExit):
        main(["ct"])
