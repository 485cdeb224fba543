"""File formats and synthetic fields.

* Scalar grids are headerless little-endian ``f32``/``f64`` arrays, x
  fastest.  Dimensions and type come from the caller or from a one-line
  ``<file>.hdr`` sidecar: ``nx ny nz dtype``.
* ASCII meshes: ``simplicial <d> <nv> <nc>``, then one ``<scalar> [offset]``
  line per vertex, then one line of ``d + 1`` zero-based indices per cell.
* Trees are written as canonical JSON (fixed key order, nodes by rank, arcs
  by their (down, up) ranks), segmentations as one ``uint32`` arc id per
  vertex.
"""
from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .mesh import GridTriangulation, build_explicit, build_implicit_grid
from .order import FieldError, ScalarField
from .trees import AugmentedTree

DTYPES = {"f32": np.dtype("<f4"), "f64": np.dtype("<f8")}
FIELD_KINDS = ("elevation", "random", "ramp-random")


class FormatError(ValueError):
    pass


# ------------------------------------------------------------------ grids

def _header_path(path) -> Path:
    return Path(str(path) + ".hdr")


def read_header(path) -> tuple[list[int], str]:
    text = _header_path(path).read_text().split()
    if len(text) != 4 or text[3] not in DTYPES:
        raise FormatError(f"{_header_path(path)}: expected 'nx ny nz f32|f64'")
    return [int(x) for x in text[:3]], text[3]


def read_scalar_grid(path, dims=None, dtype: str | None = None):
    """Load a raw grid file as ``(GridTriangulation, ScalarField)``."""
    if dims is None or dtype is None:
        if not _header_path(path).exists():
            raise FormatError(f"no dims given and no sidecar {_header_path(path)}")
        hdims, hdtype = read_header(path)
        dims = hdims if dims is None else dims
        dtype = hdtype if dtype is None else dtype
    if dtype not in DTYPES:
        raise FormatError(f"dtype must be one of {sorted(DTYPES)}, got {dtype!r}")
    dims = list(dims) + [1] * (3 - len(dims))
    expected = int(np.prod(dims)) * DTYPES[dtype].itemsize
    size = os.path.getsize(path)
    if size != expected:
        raise FormatError(f"{path}: {size} bytes, expected {expected} for dims {dims} {dtype}")
    values = np.fromfile(path, dtype=DTYPES[dtype]).astype(np.float64)
    if not np.all(np.isfinite(values)):
        raise FieldError(f"{path}: non-finite value at vertex {int(np.argmax(~np.isfinite(values)))}")
    return build_implicit_grid(dims), ScalarField(values)


def write_scalar_grid(path, values, dims, dtype: str = "f32", header: bool = True) -> None:
    values = np.asarray(values)
    if values.size != int(np.prod(dims)):
        raise FormatError(f"{values.size} values for dims {list(dims)}")
    values.astype(DTYPES[dtype]).tofile(path)
    if header:
        dims = list(dims) + [1] * (3 - len(dims))
        _header_path(path).write_text(f"{dims[0]} {dims[1]} {dims[2]} {dtype}\n")


# ------------------------------------------------------------------ meshes

def read_mesh_ascii(path):
    """Load an ASCII simplicial mesh as ``(ExplicitTriangulation, ScalarField)``."""
    with open(path) as fh:
        lines = [(i + 1, ln.split()) for i, ln in enumerate(fh)]
    lines = [(i, parts) for i, parts in lines if parts and not parts[0].startswith("#")]
    if not lines:
        raise FormatError(f"{path}: empty file")
    lineno, head = lines[0]
    if len(head) != 4 or head[0] != "simplicial":
        raise FormatError(f"{path}:{lineno}: expected 'simplicial <d> <nv> <nc>'")
    try:
        d, nv, nc = (int(x) for x in head[1:])
    except ValueError:
        raise FormatError(f"{path}:{lineno}: non-integer header field") from None
    if len(lines) < 1 + nv + nc:
        raise FormatError(f"{path}: expected {nv} vertex and {nc} cell lines, file is short")
    values = np.empty(nv)
    offsets = np.zeros(nv, dtype=np.int64)
    has_offsets = False
    for k in range(nv):
        lineno, parts = lines[1 + k]
        try:
            if len(parts) not in (1, 2):
                raise ValueError
            values[k] = float(parts[0])
            if len(parts) == 2:
                offsets[k] = int(parts[1])
                has_offsets = True
        except ValueError:
            raise FormatError(f"{path}:{lineno}: expected '<scalar> [offset]'") from None
    cells = np.empty((nc, d + 1), dtype=np.int64)
    for k in range(nc):
        lineno, parts = lines[1 + nv + k]
        if len(parts) != d + 1:
            raise FormatError(f"{path}:{lineno}: expected {d + 1} indices, got {len(parts)}")
        try:
            cells[k] = [int(x) for x in parts]
        except ValueError:
            raise FormatError(f"{path}:{lineno}: non-integer index") from None
        if cells[k].min() < 0 or cells[k].max() >= nv:
            raise FormatError(f"{path}:{lineno}: index out of range [0, {nv})")
    if not np.all(np.isfinite(values)):
        raise FieldError(f"{path}: non-finite scalar value")
    t = build_explicit(d, nv, cells)
    return t, ScalarField(values, offsets if has_offsets else None)


def write_mesh_ascii(path, dimension: int, values, cells, offsets=None) -> None:
    cells = np.asarray(cells)
    with open(path, "w") as fh:
        fh.write(f"simplicial {dimension} {len(values)} {len(cells)}\n")
        for k, v in enumerate(values):
            fh.write(f"{float(v)!r}" + (f" {int(offsets[k])}" if offsets is not None else "") + "\n")
        for c in cells:
            fh.write(" ".join(str(int(i)) for i in c) + "\n")


def read_input(path, dims=None, dtype=None):
    """Grid when dims or a sidecar are available, ASCII mesh otherwise."""
    if dims is not None or _header_path(path).exists():
        return read_scalar_grid(path, dims, dtype)
    return read_mesh_ascii(path)


# ------------------------------------------------------------------- trees

def tree_document(tree: AugmentedTree, include_segmentation: bool = False,
                  metadata: dict | None = None) -> dict:
    ranks = tree.node_ranks if tree.node_ranks is not None else np.arange(tree.node_count)
    nodes = [{"id": i, "vertex": int(v), "rank": int(r), "category": c}
             for i, (v, r, c) in enumerate(zip(tree.node_vertices, ranks, tree.node_categories))]
    arcs = []
    prov = getattr(tree, "provenance", None) or []
    for i in range(tree.arc_count):
        arc = {"id": i, "down": int(tree.arc_down[i]), "up": int(tree.arc_up[i]),
               "segmentationSize": int(len(tree.segmentations[i]))}
        if prov:
            arc["provenance"] = prov[i]
        if include_segmentation:
            arc["vertices"] = tree.segmentations[i].tolist()
        arcs.append(arc)
    meta = {"kind": tree.kind, "vertexCount": tree.vertex_count}
    meta.update(metadata or {})
    return {"metadata": meta, "nodes": nodes, "arcs": arcs}


def write_tree(tree: AugmentedTree, path, include_segmentation: bool = False,
               metadata: dict | None = None) -> None:
    doc = tree_document(tree, include_segmentation, metadata)
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def read_tree(path) -> dict:
    doc = json.loads(Path(path).read_text())
    n = len(doc["nodes"])
    for k, node in enumerate(doc["nodes"]):
        if node["id"] != k:
            raise FormatError(f"{path}: node ids are not dense")
    for k, arc in enumerate(doc["arcs"]):
        if arc["id"] != k or not (0 <= arc["down"] < n and 0 <= arc["up"] < n):
            raise FormatError(f"{path}: arc {k} is malformed")
    return doc


def write_segmentation(tree: AugmentedTree, path) -> None:
    """One little-endian uint32 arc id per vertex.

    Node vertices get the arc leaving them (the root gets the arc reaching it).
    """
    if tree.arc_count > 2**32 - 2:
        raise FormatError("too many arcs for 32-bit ids")
    tree.vertex_to_arc.astype("<u4").tofile(path)


def read_segmentation(path) -> np.ndarray:
    return np.fromfile(path, dtype="<u4").astype(np.int64)


# --------------------------------------------------------- synthetic fields

def generate_field(kind: str, dims, seed: int = 0, p: float = 0.0) -> ScalarField:
    """Synthetic scalar field on a ``dims`` grid.

    * ``elevation``: the x coordinate in 1D, y in 2D, z in 3D: one arc.
    * ``random``: seeded uniform noise.
    * ``ramp-random``: a ridge ``min(x, nx - 1 - x)`` whose join and split
      trees are two long arcs each; the fraction ``p`` of lowest vertices is
      replaced by seeded noise below the same level (``p = 1``: pure noise).
    """
    if kind not in FIELD_KINDS:
        raise ValueError(f"kind must be one of {FIELD_KINDS}, got {kind!r}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    dims = list(dims) + [1] * (3 - len(dims))
    nx, ny, nz = dims
    n = nx * ny * nz
    rng = np.random.default_rng(seed)
    z, y, x = np.meshgrid(np.arange(nz), np.arange(ny), np.arange(nx), indexing="ij")
    x, y, z = x.ravel(), y.ravel(), z.ravel()
    if kind == "elevation":
        axis = z if nz > 1 else y if ny > 1 else x
        return ScalarField(axis.astype(np.float64))
    if kind == "random":
        return ScalarField(rng.random(n))
    ridge = np.minimum(x, nx - 1 - x).astype(np.float64)
    # a small tilt along y and z keeps every x-plane free of ties
    ridge += (y + ny * z) / (2.0 * ny * nz)
    if p > 0:
        k = int(round(p * n))
        low = np.argsort(ridge, kind="stable")[:k]
        level = ridge.max() + 1.0 if k == n else ridge[np.argsort(ridge, kind="stable")[k]]
        ridge[low] = rng.random(k) * (level - ridge.min()) + ridge.min()
    return ScalarField(ridge)


def grid_dims(t) -> list[int] | None:
    return list(t.dims) if isinstance(t, GridTriangulation) else None
