"""Write a grid to disk, run the command line tool on it and read the results back."""
import os
import subprocess
import sys
import tempfile

import numpy as np

from augtrees import io

work = tempfile.mkdtemp()
raw = os.path.join(work, "bumps.raw")

# Two Gaussian bumps on a 24x24x8 grid, written as f32 with a .hdr sidecar
x, y, z = np.meshgrid(np.linspace(-1, 1, 24), np.linspace(-1, 1, 24), np.linspace(-1, 1, 8),
                      indexing="ij")
f = np.exp(-((x - 0.4) ** 2 + y**2 + z**2) * 8) + 0.7 * np.exp(-((x + 0.4) ** 2 + y**2 + z**2) * 8)
io.write_scalar_grid(raw, f.transpose(2, 1, 0).ravel(), [24, 24, 8], "f32")

tree_json = os.path.join(work, "ct.json")
seg = os.path.join(work, "ct.seg")
cmd = [sys.executable, "-m", "augtrees", "ct", "--input", raw, "--threads", "2",
       "--output", tree_json, "--seg", seg]
print(subprocess.run(cmd, capture_output=True, text=True, check=True).stdout.strip())

doc = io.read_tree(tree_json)
for node in doc["nodes"]:
    print(f"node {node['id']}: vertex {node['vertex']} ({node['category']})")
arc_ids = io.read_segmentation(seg)
print("vertices per arc:", np.bincount(arc_ids))
