"""QR decomposition of deformation gradients in a crack-aligned frame.

A deformation gradient F with det F > 0 factors uniquely as F = R A with
R a rotation and A upper triangular, with positive diagonal, in the ordered
basis (t1, [t2,] n).  The last basis vector is the crack normal, so A_nn
measures the stretch normal to the crack and the A_tn entries the shear of
the crack faces.

Frames are stored as a matrix Q whose rows are the basis vectors, so that
Q n = e_last.  Frame components of a tensor T are Q T Q^T.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateFrame, DimensionMismatch, NonPositiveDeterminant, NotUnit

__all__ = [
    "CrackFrame",
    "TriangularFactor",
    "as_deformation_gradient",
    "frame_from_normal",
    "qr_in_frame",
    "a_nn",
    "rotation_2d",
]

ORTHO_TOL = 1e-12
UNIT_TOL = 1e-8
DEGENERATE_S = 1e-8


def as_deformation_gradient(F, dim: int | None = None) -> np.ndarray:
    """Validate and return F as a float array with positive determinant."""
    F = np.asarray(F, dtype=float)
    if F.ndim != 2 or F.shape[0] != F.shape[1] or F.shape[0] not in (2, 3):
        raise DimensionMismatch(f"expected a 2x2 or 3x3 matrix, got shape {F.shape}")
    if dim is not None and F.shape[0] != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {F.shape[0]}")
    if not np.all(np.isfinite(F)):
        raise NonPositiveDeterminant("deformation gradient has non-finite entries")
    det = np.linalg.det(F)
    if not det > 0.0:
        raise NonPositiveDeterminant(f"det F = {det:.6g} <= 0")
    return F


def rotation_2d(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class CrackFrame:
    """Orthonormal crack frame; ``basis`` rows are (t1, [t2,] n)."""

    basis: np.ndarray
    tol: float = field(default=ORTHO_TOL, compare=False)

    def __post_init__(self):
        Q = np.array(self.basis, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or Q.shape[0] not in (2, 3):
            raise DegenerateFrame(f"frame basis must be 2x2 or 3x3, got {Q.shape}")
        err = np.max(np.abs(Q @ Q.T - np.eye(Q.shape[0])))
        if err > self.tol:
            raise DegenerateFrame(f"frame not orthonormal (deviation {err:.3e})")
        if np.linalg.det(Q) < 0.0:
            raise DegenerateFrame("frame is not right-handed")
        Q.setflags(write=False)
        object.__setattr__(self, "basis", Q)

    @classmethod
    def from_vectors(cls, *vectors, tol: float = ORTHO_TOL) -> "CrackFrame":
        """Build from (t, n) in 2D or (t1, t2, n) in 3D."""
        return cls(np.vstack([np.asarray(v, dtype=float) for v in vectors]), tol=tol)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def n(self) -> np.ndarray:
        return self.basis[-1]

    @property
    def t1(self) -> np.ndarray:
        return self.basis[0]

    @property
    def t2(self) -> np.ndarray | None:
        return self.basis[1] if self.dim == 3 else None

    @property
    def tangents(self) -> np.ndarray:
        return self.basis[:-1]

    def to_frame(self, T: np.ndarray) -> np.ndarray:
        """Frame components Q T Q^T of a second-order tensor."""
        return self.basis @ T @ self.basis.T

    def from_frame(self, Tf: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`to_frame`."""
        return self.basis.T @ Tf @ self.basis


def frame_from_normal(n, dim: int | None = None, tol: float = UNIT_TOL) -> CrackFrame:
    """Canonical right-handed frame with last vector ``n``.

    2D: t = (n2, -n1).  3D: t1 = (n1 n3, n2 n3, -(n1^2 + n2^2))/s and
    t2 = n x t1 = (-n2, n1, 0)/s with s = sqrt(n1^2 + n2^2).  For
    s <= 1e-8 the tangent t1 is e1 orthogonalized against n.
    """
    n = np.asarray(n, dtype=float).ravel()
    if dim is not None and n.size != dim:
        raise DimensionMismatch(f"normal has {n.size} components, expected {dim}")
    if n.size not in (2, 3):
        raise DimensionMismatch(f"normal must have 2 or 3 components, got {n.size}")
    norm = np.linalg.norm(n)
    if abs(norm - 1.0) > tol:
        raise NotUnit(f"|n| = {norm:.12g}")
    n = n / norm
    if n.size == 2:
        return CrackFrame(np.array([[n[1], -n[0]], [n[0], n[1]]]))
    s = np.hypot(n[0], n[1])
    if s > DEGENERATE_S:
        t1 = np.array([n[0] * n[2], n[1] * n[2], -s * s]) / s
    else:
        t1 = np.array([1.0, 0.0, 0.0]) - n[0] * n
        t1 /= np.linalg.norm(t1)
    t2 = np.cross(n, t1)
    return CrackFrame(np.vstack([t1, t2, n]))


@dataclass(frozen=True)
class TriangularFactor:
    """Upper-triangular factor A of F = R A, stored as frame components.

    ``coeffs[i, j]`` is A_ij in the ordered basis (t1, [t2,] n), so the
    last diagonal entry is A_nn.
    """

    coeffs: np.ndarray
    frame: CrackFrame

    def __post_init__(self):
        A = np.array(self.coeffs, dtype=float)
        if A.shape != (self.frame.dim, self.frame.dim):
            raise DimensionMismatch("coefficient matrix does not match frame dimension")
        if np.any(np.tril(A, -1) != 0.0):
            raise ValueError("coefficients must be upper triangular")
        if np.any(np.diag(A) <= 0.0):
            raise NonPositiveDeterminant("triangular factor needs a positive diagonal")
        A.setflags(write=False)
        object.__setattr__(self, "coeffs", A)

    @classmethod
    def from_entries(cls, frame: CrackFrame, a_nn: float, a_t1t1: float, a_t1n: float = 0.0,
                     a_t2t2: float | None = None, a_t2n: float = 0.0,
                     a_t1t2: float = 0.0) -> "TriangularFactor":
        if frame.dim == 2:
            A = np.array([[a_t1t1, a_t1n], [0.0, a_nn]])
        else:
            if a_t2t2 is None:
                raise DimensionMismatch("3D factor needs a_t2t2")
            A = np.array([[a_t1t1, a_t1t2, a_t1n], [0.0, a_t2t2, a_t2n], [0.0, 0.0, a_nn]])
        return cls(A, frame)

    @property
    def dim(self) -> int:
        return self.frame.dim

    @property
    def a_nn(self) -> float:
        return float(self.coeffs[-1, -1])

    @property
    def a_t1t1(self) -> float:
        return float(self.coeffs[0, 0])

    @property
    def a_t1n(self) -> float:
        return float(self.coeffs[0, -1])

    @property
    def a_t2t2(self) -> float | None:
        return float(self.coeffs[1, 1]) if self.dim == 3 else None

    @property
    def a_t2n(self) -> float | None:
        return float(self.coeffs[1, 2]) if self.dim == 3 else None

    @property
    def a_t1t2(self) -> float | None:
        return float(self.coeffs[0, 1]) if self.dim == 3 else None

    def tensor(self) -> np.ndarray:
        """A = sum_ij A_ij t_i (x) t_j in the standard basis."""
        return self.frame.from_frame(self.coeffs)


def _upper_triangular_qr(G: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Modified Gram-Schmidt with one re-orthogonalization pass."""
    d = G.shape[0]
    Q = np.zeros_like(G)
    A = np.zeros_like(G)
    for j in range(d):
        v = G[:, j].copy()
        for _ in range(2):
            for i in range(j):
                c = Q[:, i] @ v
                A[i, j] += c
                v -= c * Q[:, i]
        A[j, j] = np.linalg.norm(v)
        Q[:, j] = v / A[j, j]
    return Q, A


def qr_in_frame(F, frame: CrackFrame) -> tuple[np.ndarray, TriangularFactor]:
    """Factor F = R A with R in SO(d) and A upper triangular in ``frame``.

    Returns
    -------
    R : ndarray
        Rotation matrix.
    A : TriangularFactor
        Frame coefficients of the triangular factor.
    """
    F = as_deformation_gradient(F, frame.dim)
    Qf = frame.basis
    G = F @ Qf.T
    Rg, A = _upper_triangular_qr(G)
    # F = Rg A Qf = (Rg Qf) (Qf^T A Qf)
    R = Rg @ Qf
    return R, TriangularFactor(np.triu(A), frame)


def a_nn(F, n) -> float:
    """Normal stretch A_nn = 1 / |F^{-T} n|."""
    F = as_deformation_gradient(F)
    n = np.asarray(n, dtype=float)
    if n.size != F.shape[0]:
        raise DimensionMismatch("normal and F dimensions differ")
    return 1.0 / np.linalg.norm(np.linalg.solve(F.T, n))
