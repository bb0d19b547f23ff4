"""Effective crack energy Wd, its stress, and crack-face tractions.

Wd(F, n) relaxes the intact energy over the crack-face shears A_tn and, when
the crack is open, also over the normal stretch A_nn:

    Wd = min_{A'_nn, A'_tn} W(A')   if A_nn >= A*_nn   (open)
    Wd = min_{A'_tn} W(A')          otherwise          (closed)

where A is the triangular factor of F in the crack frame and A*_nn is the
minimizing normal stretch.  Built-in families use closed forms or a 1D
convex solve; any family can use the generic minimization over the normal
column of F, see :func:`effective_energy_generic`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ..errors import NonPositive, RelaxationDiverged
from ..kinematics import (
    CrackFrame,
    TriangularFactor,
    as_deformation_gradient,
    frame_from_normal,
    qr_in_frame,
)
from .materials import (
    Family,
    MaterialModel,
    check_dimension,
    energy_unchecked,
    intact_energy,
    intact_stress,
    stress_unchecked,
)

__all__ = [
    "Branch",
    "RelaxationResult",
    "CrackTraction",
    "a22_star",
    "a33_star",
    "effective_energy",
    "effective_energy_generic",
    "effective_stress",
    "crack_traction",
    "compatibility_defect",
    "landscape_theta",
    "local_minima",
]


class Branch(str, enum.Enum):
    OPEN = "Open"
    CLOSED = "Closed"


@dataclass(frozen=True)
class RelaxationResult:
    """Outcome of the crack-energy relaxation.

    ``a_star`` holds the relaxed triangular factor; ``minimizer`` is the
    matrix M with Wd(F) = W(F M), used for the envelope stress.
    """

    energy: float
    branch: Branch
    a_star: TriangularFactor
    a_nn_threshold: float
    factor: TriangularFactor
    rotation: np.ndarray
    minimizer: np.ndarray


@dataclass(frozen=True)
class CrackTraction:
    normal: float
    shear: tuple[float, ...]


# ---------------------------------------------------------------------------
# 1D thresholds
# ---------------------------------------------------------------------------

def _convex_root(dphi, ddphi, x0: float = 1.0) -> float:
    """Root of an increasing function on (0, inf): bracket, Brent, Newton polish."""
    lo, hi = x0, x0
    while dphi(lo) > 0.0:
        lo *= 0.5
        if lo < 1e-300:
            raise RelaxationDiverged("no bracket for the 1D relaxation")
    while dphi(hi) < 0.0:
        hi *= 2.0
        if hi > 1e300:
            raise RelaxationDiverged("no bracket for the 1D relaxation")
    if lo == hi:
        return lo
    x = brentq(dphi, lo, hi, xtol=1e-15, rtol=4.0 * np.finfo(float).eps, maxiter=200)
    for _ in range(2):
        g, h = dphi(x), ddphi(x)
        if h > 0.0:
            step = g / h
            if lo <= x - step <= hi:
                x -= step
    return x


def a22_star(model: MaterialModel, a11: float) -> float:
    """Minimizing A22 of W(diag(a11, A22)) for 2D families."""
    if not a11 > 0:
        raise NonPositive(f"a11 must be positive, got {a11}")
    check_dimension(model, 2)
    if model.family is Family.NEO_HOOKEAN_2D:
        mu, lam = model.mu, model.lam
        disc = 4.0 * mu * mu + 4.0 * mu * lam * a11 * a11 + lam * lam * a11 * a11
        return (lam * a11 + np.sqrt(disc)) / (2.0 * (mu + lam * a11 * a11))
    if model.family is Family.PQ_2D:
        mu, lb, p = model.mu, model.lambda_bar, model.p
        c = 2.0 ** (0.5 * p - 1.0)
        a2 = a11 * a11

        def dphi(x):
            return mu * (a2 + x * x) ** (0.5 * p - 1.0) * x - mu * c / x + lb * (a11 * x - 1.0) * a11

        def ddphi(x):
            s = a2 + x * x
            return (mu * s ** (0.5 * p - 1.0) + mu * (p - 2.0) * s ** (0.5 * p - 2.0) * x * x
                    + mu * c / (x * x) + lb * a2)

        return _convex_root(dphi, ddphi, 1.0 / a11)
    raise ValueError(f"a22_star is not available for {model.family.value}")


def a33_star(model: MaterialModel, a11: float, a22: float, a12: float = 0.0) -> float:
    """Minimizing A33 of W([[a11, a12, 0], [0, a22, 0], [0, 0, A33]]) for 3D families."""
    if not (a11 > 0 and a22 > 0):
        raise NonPositive(f"a11, a22 must be positive, got {a11}, {a22}")
    check_dimension(model, 3)
    lb = model.lambda_bar
    m1, m2 = model.mu1, model.mu2
    s = a11 * a11 + a12 * a12 + a22 * a22
    b = a11 * a22
    if model.family is Family.MOONEY_RIVLIN_3D:
        K = m1 + m2 * s + lb * b * b
        return (lb * b + np.sqrt((lb * b) ** 2 + 4.0 * K * (m1 + 2.0 * m2))) / (2.0 * K)
    if model.family is Family.PQ_3D:
        p, q = model.p, model.q
        c = m1 * 3.0 ** (0.5 * p - 1.0) + 2.0 * m2 * 3.0 ** (0.5 * q - 1.0)

        def dphi(x):
            S = s + x * x
            G = b * b + x * x * s
            return (m1 * S ** (0.5 * p - 1.0) * x + m2 * G ** (0.5 * q - 1.0) * s * x
                    - c / x + lb * (b * x - 1.0) * b)

        def ddphi(x):
            S = s + x * x
            G = b * b + x * x * s
            return (m1 * (S ** (0.5 * p - 1.0) + (p - 2.0) * S ** (0.5 * p - 2.0) * x * x)
                    + m2 * s * (G ** (0.5 * q - 1.0) + (q - 2.0) * G ** (0.5 * q - 2.0) * s * x * x)
                    + c / (x * x) + lb * b * b)

        return _convex_root(dphi, ddphi, 1.0 / b)
    raise ValueError(f"a33_star is not available for {model.family.value}")


# ---------------------------------------------------------------------------
# Closed-form / semi-closed relaxation
# ---------------------------------------------------------------------------

def _frame(model: MaterialModel, n) -> CrackFrame:
    return frame_from_normal(n, dim=model.dim)


def _relaxed_coeffs(model: MaterialModel, A: np.ndarray) -> tuple[np.ndarray, Branch, float]:
    Ar = np.zeros_like(A)
    if A.shape[0] == 2:
        thr = a22_star(model, A[0, 0])
        Ar[0, 0] = A[0, 0]
    else:
        thr = a33_star(model, A[0, 0], A[1, 1], A[0, 1])
        Ar[:2, :2] = A[:2, :2]
    branch = Branch.OPEN if A[-1, -1] >= thr else Branch.CLOSED
    Ar[-1, -1] = thr if branch is Branch.OPEN else A[-1, -1]
    return Ar, branch, thr


def _assemble(model, F, frame, R, fac, Ar, branch, thr) -> RelaxationResult:
    relaxed = TriangularFactor(Ar, frame)
    At = fac.tensor()
    Art = relaxed.tensor()
    M = np.linalg.solve(At, Art)
    energy = intact_energy(model, R @ Art)
    return RelaxationResult(energy, branch, relaxed, thr, fac, R, M)


def effective_energy(model: MaterialModel, F, n) -> RelaxationResult:
    """Wd(F, n) via closed forms (NeoHookean2D, MooneyRivlin3D) or a 1D solve (p,q).

    UserSupplied models fall back to :func:`effective_energy_generic`.
    """
    if model.family is Family.USER:
        return effective_energy_generic(model, F, n)
    frame = _frame(model, n)
    F = as_deformation_gradient(F, model.dim)
    R, fac = qr_in_frame(F, frame)
    Ar, branch, thr = _relaxed_coeffs(model, fac.coeffs)
    return _assemble(model, F, frame, R, fac, Ar, branch, thr)


# ---------------------------------------------------------------------------
# Generic relaxation over the normal column of F
# ---------------------------------------------------------------------------

A_BOX = (1e-6, 1e3)
GRAD_TOL = 1e-10
MAX_ITER = 200
RESTARTS = 5


def _column_map(frame: CrackFrame, v: np.ndarray, free_normal: bool) -> np.ndarray:
    """M(v) = I + ((a - 1) n + sum_i s_i t_i) (x) n."""
    n = frame.n
    if free_normal:
        a, s = v[0], v[1:]
    else:
        a, s = 1.0, v
    col = (a - 1.0) * n + s @ frame.tangents
    M = np.eye(frame.dim)
    M += col[:, None] * n[None, :]
    return M


def _minimize_column(model, F, frame, free_normal, x0, rng):
    """Safeguarded Newton on g(v) = W(F M(v)) with finite-difference Hessian.

    Far from the minimizer the step is accepted by an Armijo test; close to
    it, where energy differences drop below rounding, a step is accepted if
    it halves the gradient norm without raising the energy beyond rounding.
    """
    dirs = np.vstack([frame.n[None, :], frame.tangents]) if free_normal else frame.tangents
    n = frame.n
    Fn = F @ n
    Fd = F @ dirs.T  # columns F t_i (and F n)
    FtT = F.T

    def FM(v):
        # F M(v) replaces the normal column image F n by F (a n + s.t)
        if free_normal:
            w = Fd @ v
        else:
            w = Fn + Fd @ v
        return F + (w - Fn)[:, None] * n[None, :]

    def g(v):
        return energy_unchecked(model, FM(v))

    def grad(v):
        return dirs @ (FtT @ (stress_unchecked(model, FM(v)) @ n))

    def in_box(v):
        return not free_normal or (A_BOX[0] <= v[0] <= A_BOX[1])

    def hessian(v, gv):
        # forward differences suffice: convergence is judged on the exact gradient
        h = 1e-7 * max(1.0, float(np.linalg.norm(v)))
        H = np.empty((v.size, v.size))
        for i in range(v.size):
            e = np.zeros(v.size)
            e[i] = h
            H[:, i] = (grad(v + e) - gv) / h
        return 0.5 * (H + H.T)

    best = None
    x0 = np.asarray(x0, dtype=float)
    starts = [x0] + [x0 + 0.1 * rng.standard_normal(x0.size) for _ in range(RESTARTS)]
    for v in starts:
        if not in_box(v) or not np.isfinite(g(v)):
            continue
        v = v.copy()
        fv = g(v)
        gv = grad(v)
        gn = float(np.linalg.norm(gv))
        ok = gn <= GRAD_TOL
        it = 0
        while not ok and it < MAX_ITER:
            it += 1
            H = hessian(v, gv)
            w, V = np.linalg.eigh(H)
            if w[0] > 0.0:
                step = -(V / w) @ (V.T @ gv)
            else:
                w = np.maximum(np.abs(w), 1e-8)
                step = -(V / w) @ (V.T @ gv)
            slope = float(gv @ step)
            t = 1.0
            accepted = False
            while t > 1e-12:
                vn = v + t * step
                if in_box(vn):
                    fn = g(vn)
                    if np.isfinite(fn):
                        if fn <= fv + 1e-4 * t * slope:
                            accepted = True
                            break
                        if fn <= fv + 1e-13 * (1.0 + abs(fv)):
                            gn_new = float(np.linalg.norm(grad(vn)))
                            if gn_new <= 0.5 * gn:
                                accepted = True
                                break
                t *= 0.5
            if not accepted:
                break
            v, fv = vn, fn
            gv = grad(v)
            gn = float(np.linalg.norm(gv))
            ok = gn <= GRAD_TOL
        if ok and (best is None or fv < best[1] - 1e-14 or
                   (abs(fv - best[1]) <= 1e-14 and free_normal and v[0] < best[0][0])):
            best = (v, fv)
        if ok:
            break
    if best is None:
        raise RelaxationDiverged("inner minimization of the crack energy did not converge")
    return best


def effective_energy_generic(model: MaterialModel, F, n, seed: int = 0) -> RelaxationResult:
    """Wd(F, n) by direct minimization over the normal column of F.

    Minimizes W(F (I + ((a-1) n + s.t) (x) n)) over (a, s).  The minimizing
    a gives A*_nn = a A_nn.  If a <= 1 the crack is open and the full
    minimum is taken; otherwise a is fixed at 1 and only s is relaxed.
    """
    frame = _frame(model, n)
    F = as_deformation_gradient(F, model.dim)
    R, fac = qr_in_frame(F, frame)
    rng = np.random.default_rng(seed)
    d = model.dim
    v_open, e_open = _minimize_column(model, F, frame, True, np.r_[1.0, np.zeros(d - 1)], rng)
    thr = fac.a_nn * v_open[0]
    if fac.a_nn >= thr:
        branch, v, energy = Branch.OPEN, v_open, e_open
        M = _column_map(frame, v, True)
    else:
        v, energy = _minimize_column(model, F, frame, False, np.zeros(d - 1), rng)
        branch = Branch.CLOSED
        M = _column_map(frame, v, False)
    _, relaxed = qr_in_frame(F @ M, frame)
    return RelaxationResult(float(energy), branch, relaxed, float(thr), fac, R, M)


# ---------------------------------------------------------------------------
# Derivatives
# ---------------------------------------------------------------------------

def _relaxation(model, F, n, generic: bool) -> RelaxationResult:
    return effective_energy_generic(model, F, n) if generic else effective_energy(model, F, n)


def effective_stress(model: MaterialModel, F, n, generic: bool = False) -> np.ndarray:
    """dWd/dF by the envelope property: P(F M*) M*^T."""
    res = _relaxation(model, F, n, generic)
    F = np.asarray(F, dtype=float)
    M = res.minimizer
    return intact_stress(model, F @ M) @ M.T


def crack_traction(model: MaterialModel, F, n, generic: bool = False) -> CrackTraction:
    """Frame derivatives of Wd with respect to A_nn and the A_tn."""
    res = _relaxation(model, F, n, generic)
    F = np.asarray(F, dtype=float)
    M = res.minimizer
    T = intact_stress(model, F @ M) @ M.T
    frame = res.factor.frame
    S = frame.to_frame(res.rotation.T @ T)
    return CrackTraction(float(S[-1, -1]), tuple(float(x) for x in S[:-1, -1]))


def compatibility_defect(model: MaterialModel, A: TriangularFactor, frame: CrackFrame | None = None,
                         h: float = 1e-4) -> float:
    """max_i |d^2 W / dA_nn dA_{t_i n}| at A by central differences."""
    frame = frame or A.frame
    base = np.array(A.coeffs)
    d = base.shape[0]

    def w(dn, dt, i):
        X = base.copy()
        X[-1, -1] += dn
        X[i, -1] += dt
        return intact_energy(model, frame.from_frame(X))

    out = 0.0
    for i in range(d - 1):
        mixed = (w(h, h, i) - w(h, -h, i) - w(-h, h, i) + w(-h, -h, i)) / (4.0 * h * h)
        out = max(out, abs(mixed))
    return out


# ---------------------------------------------------------------------------
# Orientation landscape
# ---------------------------------------------------------------------------

def landscape_theta(model: MaterialModel, F, samples: int = 721) -> list[tuple[float, float]]:
    """Sample Wd(F, (cos t, sin t)) on t in [0, pi] (inclusive)."""
    if samples < 8:
        raise ValueError("samples must be at least 8")
    check_dimension(model, 2)
    thetas = np.linspace(0.0, np.pi, samples)
    return [(float(t), effective_energy(model, F, (np.cos(t), np.sin(t))).energy) for t in thetas]


def local_minima(values, rtol: float = 1e-12, atol: float = 1e-14, periodic: bool = True) -> list[int]:
    """Indices of local minima, one index per flat-bottom plateau.

    With ``periodic`` the last sample is taken to coincide with the first
    (theta = 0 and theta = pi describe the same crack).
    """
    v = np.asarray(values, dtype=float)
    if periodic:
        v = v[:-1]
    m = v.size

    def eq(a, b):
        return abs(a - b) <= atol + rtol * max(abs(a), abs(b))

    # collapse runs of equal values into plateaus
    starts = [0] + [i for i in range(1, m) if not eq(v[i], v[i - 1])]
    if periodic and len(starts) > 1 and eq(v[0], v[-1]):
        starts = starts[1:]
    if len(starts) <= 1:
        return [] if periodic else [0]
    levels = [v[s] for s in starts]
    k = len(starts)
    out = []
    for j in range(k):
        left = levels[j - 1] if (periodic or j > 0) else np.inf
        right = levels[(j + 1) % k] if (periodic or j < k - 1) else np.inf
        if levels[j] < left and levels[j] < right:
            out.append(starts[j])
    return out
