"""Legacy ASCII VTK and CSV writers."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from ..errors import EmptyMesh
from ..fem.mesh import Mesh

__all__ = ["write_vtk", "read_vtk", "write_csv", "format_float"]

VTK_TRIANGLE = 5


def format_float(x: float) -> str:
    """Shortest round-tripping representation, stable across runs."""
    x = float(x)
    if x == 0.0:
        return "0"
    return repr(x)


def _vector3(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim == 2 and a.shape[1] == 2:
        a = np.column_stack([a, np.zeros(len(a))])
    return a


def write_vtk(mesh: Mesh | None, fields: dict[str, np.ndarray], path, title: str = "fracture-qr") -> None:
    """Write an UNSTRUCTURED_GRID with point-data arrays.

    Arrays of shape (N,) become SCALARS and (N, 2) or (N, 3) become
    VECTORS (2-vectors get a zero third component).
    """
    if mesh is None or mesh.n_nodes == 0 or mesh.n_elements == 0:
        raise EmptyMesh("cannot write a VTK file for an empty mesh")
    n, m = mesh.n_nodes, mesh.n_elements
    lines = ["# vtk DataFile Version 2.0", title.replace("\n", " ")[:255], "ASCII",
             "DATASET UNSTRUCTURED_GRID", f"POINTS {n} double"]
    lines += [f"{format_float(x)} {format_float(y)} 0" for x, y in mesh.nodes]
    lines.append(f"CELLS {m} {4 * m}")
    lines += [f"3 {i} {j} {k}" for i, j, k in mesh.triangles.tolist()]
    lines.append(f"CELL_TYPES {m}")
    lines += [str(VTK_TRIANGLE)] * m
    if fields:
        lines.append(f"POINT_DATA {n}")
    for name, values in fields.items():
        values = np.asarray(values, dtype=float)
        if len(values) != n:
            raise ValueError(f"field {name!r} has {len(values)} values for {n} points")
        key = name.replace(" ", "_")
        if values.ndim == 1:
            lines += [f"SCALARS {key} double 1", "LOOKUP_TABLE default"]
            lines += [format_float(v) for v in values]
        else:
            lines.append(f"VECTORS {key} double")
            lines += [" ".join(format_float(c) for c in row) for row in _vector3(values)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_vtk(path) -> tuple[np.ndarray, np.ndarray, dict[str, np.ndarray]]:
    """Read files produced by :func:`write_vtk` (points, triangles, point data)."""
    tokens = Path(path).read_text().split("\n")
    if not tokens[0].startswith("# vtk DataFile Version"):
        raise ValueError("not a legacy VTK file")
    if tokens[2].strip() != "ASCII" or tokens[3].split() != ["DATASET", "UNSTRUCTURED_GRID"]:
        raise ValueError("only ASCII unstructured grids are supported")
    words = " ".join(tokens[4:]).split()
    pos = 0

    def take(k):
        nonlocal pos
        out = words[pos:pos + k]
        pos += k
        return out

    _, n, _ = take(3)
    n = int(n)
    points = np.array(take(3 * n), dtype=float).reshape(n, 3)
    _, m, size = take(3)
    m = int(m)
    cells = np.array(take(int(size)), dtype=np.int64).reshape(m, 4)
    if np.any(cells[:, 0] != 3):
        raise ValueError("only triangles are supported")
    take(2)
    types = np.array(take(m), dtype=int)
    if np.any(types != VTK_TRIANGLE):
        raise ValueError("unexpected cell type")
    data: dict[str, np.ndarray] = {}
    if pos < len(words):
        take(2)  # POINT_DATA n
        while pos < len(words):
            kind, name, _ = take(3)
            if kind == "SCALARS":
                if words[pos] == "1":
                    take(1)
                take(2)  # LOOKUP_TABLE default
                data[name] = np.array(take(n), dtype=float)
            elif kind == "VECTORS":
                data[name] = np.array(take(3 * n), dtype=float).reshape(n, 3)
            else:
                raise ValueError(f"unsupported data section {kind}")
    return points, cells[:, 1:], data


def write_csv(path, header: list[str], rows) -> None:
    """RFC 4180 CSV (CRLF line ends, minimal quoting) with stable float text."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
