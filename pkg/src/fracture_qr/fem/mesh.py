"""Triangular meshes: container, ASCII I/O and structured generators."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import EmptyMesh

__all__ = [
    "Mesh",
    "read_mesh",
    "write_mesh",
    "rectangle_mesh",
    "square_with_hole_mesh",
]

DUPLICATE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Mesh:
    """P1 triangle mesh in nondimensional coordinates.

    ``boundary`` holds edges as rows (i, j) with a parallel list of tags.
    Element gradient operators and areas are precomputed.
    """

    nodes: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), dtype=np.int64))
    boundary_tags: tuple[str, ...] = ()
    area: np.ndarray = field(init=False, repr=False)
    grad: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        X = np.ascontiguousarray(self.nodes, dtype=float)
        T = np.ascontiguousarray(self.triangles, dtype=np.int64)
        E = np.asarray(self.boundary_edges, dtype=np.int64).reshape(-1, 2)
        tags = tuple(self.boundary_tags)
        if X.size == 0 or T.size == 0:
            raise EmptyMesh("mesh has no nodes or no triangles")
        if X.ndim != 2 or X.shape[1] != 2:
            raise ValueError("nodes must be an (N, 2) array")
        if T.ndim != 2 or T.shape[1] != 3:
            raise ValueError("triangles must be an (M, 3) array")
        if T.min() < 0 or T.max() >= len(X):
            raise ValueError("triangle index out of range")
        if len(E) != len(tags):
            raise ValueError("one tag per boundary edge required")
        if len(E) and (E.min() < 0 or E.max() >= len(X)):
            raise ValueError("boundary edge index out of range")
        x0, x1, x2 = X[T[:, 0]], X[T[:, 1]], X[T[:, 2]]
        d1, d2 = x1 - x0, x2 - x0
        twice = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        if np.any(twice <= 0.0):
            bad = int(np.flatnonzero(twice <= 0.0)[0])
            raise ValueError(f"triangle {bad} is not positively oriented")
        _check_duplicates(X)
        area = 0.5 * twice
        # grad N_a for a = 0, 1, 2 (rows), shape (M, 3, 2)
        G = np.empty((len(T), 3, 2))
        G[:, 1, 0] = d2[:, 1]
        G[:, 1, 1] = -d2[:, 0]
        G[:, 2, 0] = -d1[:, 1]
        G[:, 2, 1] = d1[:, 0]
        G[:, 1:] /= twice[:, None, None]
        G[:, 0] = -G[:, 1] - G[:, 2]
        for arr in (X, T, E, area, G):
            arr.setflags(write=False)
        object.__setattr__(self, "nodes", X)
        object.__setattr__(self, "triangles", T)
        object.__setattr__(self, "boundary_edges", E)
        object.__setattr__(self, "boundary_tags", tags)
        object.__setattr__(self, "area", area)
        object.__setattr__(self, "grad", G)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_elements(self) -> int:
        return len(self.triangles)

    @property
    def tags(self) -> set[str]:
        return set(self.boundary_tags)

    def boundary_nodes(self, tag: str) -> np.ndarray:
        mask = np.array([t == tag for t in self.boundary_tags], dtype=bool)
        if not mask.any():
            raise KeyError(f"no boundary edges tagged {tag!r}")
        return np.unique(self.boundary_edges[mask])

    def centroids(self) -> np.ndarray:
        return self.nodes[self.triangles].mean(axis=1)

    def edge_lengths(self) -> np.ndarray:
        X = self.nodes[self.triangles]
        return np.linalg.norm(X - np.roll(X, -1, axis=1), axis=2)

    def element_size(self) -> np.ndarray:
        """Longest edge per element."""
        return self.edge_lengths().max(axis=1)

    def nodal_average(self, values: np.ndarray) -> np.ndarray:
        """Area-weighted average of element values onto nodes."""
        values = np.asarray(values, dtype=float)
        w = np.repeat(self.area / 3.0, 3)
        idx = self.triangles.ravel()
        num = np.bincount(idx, weights=np.repeat(values, 3) * w, minlength=self.n_nodes)
        den = np.bincount(idx, weights=w, minlength=self.n_nodes)
        return num / np.where(den > 0, den, 1.0)

    def lumped_mass(self) -> np.ndarray:
        return np.bincount(self.triangles.ravel(), weights=np.repeat(self.area / 3.0, 3),
                           minlength=self.n_nodes)


def _check_duplicates(X: np.ndarray) -> None:
    order = np.lexsort((X[:, 1], X[:, 0]))
    S = X[order]
    close = np.all(np.abs(np.diff(S, axis=0)) <= DUPLICATE_TOL, axis=1)
    if close.any():
        raise ValueError("duplicate nodes in mesh")


# ---------------------------------------------------------------------------
# ASCII format
# ---------------------------------------------------------------------------

def write_mesh(mesh: Mesh, path) -> None:
    """Write ``nodes N`` / ``triangles M`` / ``boundary B`` sections."""
    lines = [f"nodes {mesh.n_nodes}"]
    lines += [f"{x!r} {y!r}" for x, y in mesh.nodes.tolist()]
    lines.append(f"triangles {mesh.n_elements}")
    lines += [f"{i} {j} {k}" for i, j, k in mesh.triangles.tolist()]
    lines.append(f"boundary {len(mesh.boundary_tags)}")
    lines += [f"{i} {j} {t}" for (i, j), t in zip(mesh.boundary_edges.tolist(), mesh.boundary_tags)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_mesh(path) -> Mesh:
    tokens = Path(path).read_text().split("\n")
    lines = [ln.strip() for ln in tokens if ln.strip() and not ln.lstrip().startswith("#")]
    pos = 0

    def header(name):
        nonlocal pos
        parts = lines[pos].split()
        if len(parts) != 2 or parts[0] != name:
            raise ValueError(f"expected '{name} <count>' at line {pos + 1}, got {lines[pos]!r}")
        pos += 1
        return int(parts[1])

    n = header("nodes")
    nodes = np.array([[float(v) for v in lines[pos + i].split()] for i in range(n)]).reshape(n, 2)
    pos += n
    m = header("triangles")
    tris = np.array([[int(v) for v in lines[pos + i].split()] for i in range(m)], dtype=np.int64).reshape(m, 3)
    pos += m
    edges, tags = [], []
    if pos < len(lines):
        b = header("boundary")
        for i in range(b):
            parts = lines[pos + i].split()
            edges.append((int(parts[0]), int(parts[1])))
            tags.append(parts[2])
        pos += b
    return Mesh(nodes, tris, np.array(edges, dtype=np.int64).reshape(-1, 2), tuple(tags))


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

def rectangle_mesh(nx: int, ny: int, width: float = 1.0, height: float = 1.0,
                   origin: tuple[float, float] = (0.0, 0.0), pattern: str = "crossed") -> Mesh:
    """Structured triangulation of a rectangle.

    ``pattern`` is ``"right"`` (all diagonals one way), ``"alternate"``
    (alternating diagonals) or ``"crossed"`` (alternating in both
    directions, the union-jack pattern).  Boundary tags: bottom, right,
    top, left.
    """
    xs = origin[0] + np.linspace(0.0, width, nx + 1)
    ys = origin[1] + np.linspace(0.0, height, ny + 1)
    X, Y = np.meshgrid(xs, ys)
    nodes = np.column_stack([X.ravel(), Y.ravel()])

    def nid(i, j):
        return j * (nx + 1) + i

    tris = []
    for j in range(ny):
        for i in range(nx):
            a, b, c, d = nid(i, j), nid(i + 1, j), nid(i + 1, j + 1), nid(i, j + 1)
            if pattern == "right":
                flip = False
            elif pattern == "alternate":
                flip = i % 2 == 1
            elif pattern == "crossed":
                flip = (i + j) % 2 == 1
            else:
                raise ValueError(f"unknown pattern {pattern!r}")
            if flip:
                tris += [(a, b, d), (b, c, d)]
            else:
                tris += [(a, b, c), (a, c, d)]
    edges, tags = [], []
    for i in range(nx):
        edges.append((nid(i, 0), nid(i + 1, 0)))
        tags.append("bottom")
    for j in range(ny):
        edges.append((nid(nx, j), nid(nx, j + 1)))
        tags.append("right")
    for i in range(nx):
        edges.append((nid(i + 1, ny), nid(i, ny)))
        tags.append("top")
    for j in range(ny):
        edges.append((nid(0, j + 1), nid(0, j)))
        tags.append("left")
    return Mesh(nodes, np.array(tris), np.array(edges), tuple(tags))


def square_with_hole_mesh(size: float = 1.0, radius: float = 0.1, n_theta: int = 128,
                          n_radial: int = 20, grading: float = 1.08) -> Mesh:
    """O-grid mesh of a square centered at the origin with a circular hole.

    Rays at ``n_theta`` angles (a multiple of 8, so corners and axes are
    nodes) join the hole to the square boundary; radial spacing grows
    geometrically by ``grading``.  Boundary tags: cavity, outer.
    """
    if n_theta % 8:
        raise ValueError("n_theta must be a multiple of 8")
    half = 0.5 * size
    if not 0.0 < radius < half:
        raise ValueError("radius must lie inside the square")
    th = 2.0 * np.pi * np.arange(n_theta) / n_theta
    dirs = np.column_stack([np.cos(th), np.sin(th)])
    inner = radius * dirs
    outer = dirs * (half / np.max(np.abs(dirs), axis=1))[:, None]
    w = grading ** np.arange(n_radial)
    s = np.r_[0.0, np.cumsum(w)] / np.sum(w)
    nodes = (inner[None, :, :] + s[:, None, None] * (outer - inner)[None, :, :]).reshape(-1, 2)

    def nid(r, k):
        return r * n_theta + (k % n_theta)

    tris = []
    for r in range(n_radial):
        for k in range(n_theta):
            a, b = nid(r, k), nid(r, k + 1)
            c, d = nid(r + 1, k + 1), nid(r + 1, k)
            # choose the diagonal symmetric about the axes/diagonals
            if (k // (n_theta // 8)) % 2 == 0:
                tris += [(a, c, b), (a, d, c)]
            else:
                tris += [(a, d, b), (b, d, c)]
    edges, tags = [], []
    for k in range(n_theta):
        edges.append((nid(0, k + 1), nid(0, k)))
        tags.append("cavity")
    for k in range(n_theta):
        edges.append((nid(n_radial, k), nid(n_radial, k + 1)))
        tags.append("outer")
    return Mesh(nodes, np.array(tris), np.array(edges), tuple(tags))
