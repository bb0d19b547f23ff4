"""Linearized effective crack energy and elasticity-tensor utilities.

In the small-strain limit the crack energy relaxes the strain components
that involve the crack normal: the shears eps_tn always, and the normal
strain eps_nn when the crack opens.  What remains is a quadratic form in
the crack-parallel strain.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NotPositiveDefinite, SingularSystem
from .kinematics import frame_from_normal

__all__ = [
    "ElasticityTensor",
    "PositiveDefiniteReport",
    "check_positive_definite",
    "rotate_elasticity_tensor",
    "wdlin_isotropic_2d",
    "wdlin_anisotropic_2d",
    "wdlin_isotropic_3d",
    "wdlin_3d",
    "wdlin_stress",
    "relaxed_strain",
]

# Voigt ordering of index pairs
_PAIRS = {
    2: [(0, 0), (1, 1), (0, 1)],
    3: [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)],
}
SYM_TOL = 1e-10


def _as_strain(eps, dim: int | None = None) -> np.ndarray:
    eps = np.asarray(eps, dtype=float)
    if eps.ndim != 2 or eps.shape[0] != eps.shape[1] or eps.shape[0] not in (2, 3):
        raise DimensionMismatch(f"strain must be 2x2 or 3x3, got {eps.shape}")
    if dim is not None and eps.shape[0] != dim:
        raise DimensionMismatch(f"expected {dim}D strain")
    if np.max(np.abs(eps - eps.T)) > 1e-14 * max(1.0, np.max(np.abs(eps))):
        raise ValueError("strain tensor must be symmetric")
    return 0.5 * (eps + eps.T)


@dataclass(frozen=True)
class ElasticityTensor:
    """Elasticity tensor with minor and major symmetries.

    Stored as the symmetric Voigt matrix ``voigt``; index pairs are ordered
    (11, 22, 12) in 2D and (11, 22, 33, 23, 13, 12) in 3D.  Entries are the
    raw c_ijkl, without Voigt factors of 2.
    """

    voigt: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        V = np.array(self.voigt, dtype=float)
        m = V.shape[0]
        if V.shape != (m, m) or m not in (3, 6):
            raise DimensionMismatch(f"Voigt matrix must be 3x3 or 6x6, got {V.shape}")
        if np.max(np.abs(V - V.T)) > SYM_TOL * max(1.0, np.max(np.abs(V))):
            raise ValueError("elasticity tensor lacks major symmetry")
        V = 0.5 * (V + V.T)
        V.setflags(write=False)
        object.__setattr__(self, "voigt", V)
        object.__setattr__(self, "dim", 2 if m == 3 else 3)

    @classmethod
    def from_full(cls, c) -> "ElasticityTensor":
        """Build from a d^4 array, enforcing minor and major symmetry."""
        c = np.asarray(c, dtype=float)
        d = c.shape[0]
        if c.shape != (d, d, d, d) or d not in (2, 3):
            raise DimensionMismatch(f"expected a dxdxdxd array, got {c.shape}")
        sym = (c + c.transpose(1, 0, 2, 3) + c.transpose(0, 1, 3, 2) + c.transpose(1, 0, 3, 2)) / 4.0
        sym = 0.5 * (sym + sym.transpose(2, 3, 0, 1))
        if np.max(np.abs(sym - c)) > SYM_TOL * max(1.0, np.max(np.abs(c))):
            raise ValueError("tensor violates minor/major symmetry")
        pairs = _PAIRS[d]
        V = np.array([[sym[i, j, k, l] for (k, l) in pairs] for (i, j) in pairs])
        return cls(V)

    @classmethod
    def isotropic(cls, lam: float, mu: float, dim: int) -> "ElasticityTensor":
        I = np.eye(dim)
        c = (lam * np.einsum("ij,kl->ijkl", I, I)
             + mu * (np.einsum("ik,jl->ijkl", I, I) + np.einsum("il,jk->ijkl", I, I)))
        return cls.from_full(c)

    def full(self) -> np.ndarray:
        d = self.dim
        pairs = _PAIRS[d]
        idx = {}
        for a, (i, j) in enumerate(pairs):
            idx[(i, j)] = idx[(j, i)] = a
        c = np.empty((d,) * 4)
        for i, j, k, l in itertools.product(range(d), repeat=4):
            c[i, j, k, l] = self.voigt[idx[(i, j)], idx[(k, l)]]
        return c

    def mandel(self) -> np.ndarray:
        """Matrix of the quadratic form on symmetric tensors in an orthonormal basis."""
        d = self.dim
        w = np.array([1.0 if i == j else np.sqrt(2.0) for (i, j) in _PAIRS[d]])
        return w[:, None] * self.voigt * w[None, :]

    def energy(self, eps) -> float:
        """0.5 C eps : eps."""
        eps = np.asarray(eps, dtype=float)
        return 0.5 * float(np.einsum("ijkl,ij,kl->", self.full(), eps, eps))

    def stress(self, eps) -> np.ndarray:
        return np.einsum("ijkl,kl->ij", self.full(), np.asarray(eps, dtype=float))


@dataclass(frozen=True)
class PositiveDefiniteReport:
    passed: bool
    min_eigenvalue: float
    c1212: float
    lemma_determinant: float
    failures: tuple[str, ...]


def check_positive_definite(C: ElasticityTensor, tol: float = 0.0) -> PositiveDefiniteReport:
    """Positive definiteness on symmetric matrices plus the shear-block consequences.

    Indices 1, 2 in ``c1212`` and ``c1212 c2222 - c1222^2`` refer to the
    last two coordinates (the crack-tangent/normal pair in a 2D frame).
    """
    lam_min = float(np.linalg.eigvalsh(C.mandel())[0])
    c = C.full()
    d = C.dim
    i, j = d - 2, d - 1
    c1212 = float(c[i, j, i, j])
    det = float(c[i, j, i, j] * c[j, j, j, j] - c[i, j, j, j] ** 2)
    failures = []
    if not lam_min > tol:
        failures.append(f"min eigenvalue {lam_min:.6g} <= {tol}")
    if not c1212 > tol:
        failures.append(f"c1212 = {c1212:.6g} <= {tol}")
    if not det > tol:
        failures.append(f"c1212*c2222 - c1222^2 = {det:.6g} <= {tol}")
    return PositiveDefiniteReport(not failures, lam_min, c1212, det, tuple(failures))


def rotate_elasticity_tensor(C: ElasticityTensor, Q) -> ElasticityTensor:
    """c~_ijkl = sum Q_ip Q_jq Q_kr Q_ls c_pqrs, rows of Q being the new basis."""
    Q = np.asarray(Q, dtype=float)
    c = np.einsum("ip,jq,kr,ls,pqrs->ijkl", Q, Q, Q, Q, C.full(), optimize=True)
    return ElasticityTensor.from_full(c)


def _require_pd(C: ElasticityTensor) -> None:
    rep = check_positive_definite(C)
    if not rep.passed:
        raise NotPositiveDefinite("; ".join(rep.failures))


# ---------------------------------------------------------------------------
# 2D
# ---------------------------------------------------------------------------

def wdlin_isotropic_2d(eps, n, mu: float, lam: float) -> float:
    """Two-branch linearized crack energy for isotropic 2D elasticity."""
    eps = _as_strain(eps, 2)
    frame = frame_from_normal(n, dim=2)
    e = frame.to_frame(eps)
    e11, e22 = e[0, 0], e[1, 1]  # crack-parallel and crack-normal strain
    L = lam + 2.0 * mu
    if e22 > -lam / L * e11:
        return 0.5 * (L - lam * lam / L) * e11 * e11
    return 0.5 * L * (e11 * e11 + e22 * e22) + lam * e11 * e22


def wdlin_anisotropic_2d(eps, n, C: ElasticityTensor) -> float:
    """Two-branch linearized crack energy for general 2D elasticity."""
    eps = _as_strain(eps, 2)
    if C.dim != 2:
        raise DimensionMismatch("expected a 2D elasticity tensor")
    _require_pd(C)
    frame = frame_from_normal(n, dim=2)
    c = rotate_elasticity_tensor(C, frame.basis).full()
    e = frame.to_frame(eps)
    ett, enn = e[0, 0], e[1, 1]
    tttt, tttn, ttnn = c[0, 0, 0, 0], c[0, 0, 0, 1], c[0, 0, 1, 1]
    tntn, tnnn, nnnn = c[0, 1, 0, 1], c[0, 1, 1, 1], c[1, 1, 1, 1]
    D = tntn * nnnn - tnnn * tnnn
    if enn > (tttn * tnnn - ttnn * tntn) / D * ett:
        k = tttt - (tttn ** 2 * nnnn - 2.0 * tttn * ttnn * tnnn + ttnn ** 2 * tntn) / D
        return 0.5 * k * ett * ett
    return (0.5 * (tttt - tttn ** 2 / tntn) * ett * ett
            + (ttnn - tttn * tnnn / tntn) * ett * enn
            + 0.5 * (nnnn - tnnn ** 2 / tntn) * enn * enn)


# ---------------------------------------------------------------------------
# General (2D or 3D) relaxation in the crack frame
# ---------------------------------------------------------------------------

def _solve(K: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        cond = np.linalg.cond(K)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    if not np.isfinite(cond) or cond > 1e14:
        raise SingularSystem(f"ill-conditioned relaxation system (cond = {cond:.3e})")
    return np.linalg.solve(K, rhs)


def relaxed_strain(eps, n, C: ElasticityTensor) -> tuple[np.ndarray, bool, np.ndarray]:
    """Relaxed strain in the crack frame.

    Returns the frame strain S with its normal row relaxed, a flag that is
    True on the open branch, and the frame rotation.  The shear gradients
    solve c_{i n j n} x_j = -(rhs) for the free components, as in the
    three- and two-unknown systems of the 3D case formulas.
    """
    d = C.dim
    eps = _as_strain(eps, d)
    frame = frame_from_normal(n, dim=d)
    Q = frame.basis
    c = rotate_elasticity_tensor(C, Q).full()
    e = frame.to_frame(eps)
    N = d - 1
    # free components: (t_i, n) for i < N, then (n, n)
    free = [(i, N) for i in range(N)] + [(N, N)]
    fixed = [(i, j) for i in range(N) for j in range(i, N)]

    def cc(p, q):
        return c[p[0], p[1], q[0], q[1]]

    # quadratic form 0.5 S:C:S with S_tn = x/2 (engineering shear) and S_nn = x
    wf = np.array([0.5] * N + [1.0])  # map unknown -> symmetric component
    mult = np.array([2.0] * N + [1.0])  # symmetric pair multiplicity
    K = np.array([[cc(a, b) * wf[j] * mult[j] for j, b in enumerate(free)] for a in free])
    # fixed-part contribution: sum over fixed pairs with multiplicity
    fixed_vals = np.array([e[i, j] for (i, j) in fixed])
    fixed_mult = np.array([1.0 if i == j else 2.0 for (i, j) in fixed])
    B = np.array([[cc(a, b) * fixed_mult[k] for k, b in enumerate(fixed)] for a in free])
    rhs_fixed = -B @ fixed_vals

    # open branch: all free components relaxed
    x_open = _solve(K, rhs_fixed)
    open_ = e[N, N] >= x_open[-1]
    if open_:
        x = x_open
    else:
        Ks = K[:N, :N]
        rhs = rhs_fixed[:N] - K[:N, N] * e[N, N]
        x = np.r_[_solve(Ks, rhs), e[N, N]]
    S = e.copy()
    for k, (i, j) in enumerate(free):
        S[i, j] = S[j, i] = x[k] * wf[k]
    return S, bool(open_), Q


def wdlin_3d(eps, n, C: ElasticityTensor | None = None, *, mu: float | None = None,
             lam: float | None = None) -> float:
    """Linearized crack energy in 3D for general or isotropic elasticity.

    Case 1 (open, eps_nn >= grad A*_nn . eps_bar) relaxes the three normal
    components; case 2 relaxes only the two crack shears.
    """
    if C is None:
        if mu is None or lam is None:
            raise ValueError("provide C or (mu, lam)")
        C = ElasticityTensor.isotropic(lam, mu, 3)
    if C.dim != 3:
        raise DimensionMismatch("expected a 3D elasticity tensor")
    _require_pd(C)
    S, _, Q = relaxed_strain(eps, n, C)
    return rotate_elasticity_tensor(C, Q).energy(S)


def wdlin_isotropic_3d(eps, n, mu: float, lam: float) -> float:
    """Closed form of :func:`wdlin_3d` for isotropic elasticity.

    With (1, 2) the crack-parallel and 3 the normal frame index:
    open when eps33 >= -lam/(lam+2mu) (eps11 + eps22), giving
    0.5 (L - lam^2/L)(e11^2 + e22^2) + (lam - lam^2/L) e11 e22 + 2 mu e12^2
    with L = lam + 2 mu; otherwise the intact energy without e13, e23.
    """
    eps = _as_strain(eps, 3)
    frame = frame_from_normal(n, dim=3)
    e = frame.to_frame(eps)
    e11, e22, e33, e12 = e[0, 0], e[1, 1], e[2, 2], e[0, 1]
    L = lam + 2.0 * mu
    if e33 >= -lam / L * (e11 + e22):
        k = lam * lam / L
        return 0.5 * (L - k) * (e11 ** 2 + e22 ** 2) + (lam - k) * e11 * e22 + 2.0 * mu * e12 ** 2
    return (0.5 * L * (e11 ** 2 + e22 ** 2 + e33 ** 2)
            + lam * (e11 * e22 + e11 * e33 + e22 * e33) + 2.0 * mu * e12 ** 2)


def wdlin_stress(eps, n, C: ElasticityTensor) -> np.ndarray:
    """Stress of the linearized crack energy, C : S with S the relaxed strain.

    By stationarity the normal-row components of C : S vanish when relaxed.
    """
    S, _, Q = relaxed_strain(eps, n, C)
    sig = rotate_elasticity_tensor(C, Q).stress(S)
    return Q.T @ sig @ Q
