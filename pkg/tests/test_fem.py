import numpy as np
import pytest

from fracture_qr.constitutive import MaterialModel, intact_energy
from fracture_qr.errors import ElementInverted, EmptyMesh, NotConverged
from fracture_qr.fem.energy import evaluate, total_energy
from fracture_qr.fem.mesh import Mesh, read_mesh, rectangle_mesh, square_with_hole_mesh, write_mesh
from fracture_qr.fem.solvers import (
    affine_predictor,
    apply_irreversibility,
    project_damage,
    solve_damage,
    solve_displacement,
    staggered_step,
)
from fracture_qr.fem.state import (
    BoundaryCondition,
    PhaseFieldParams,
    SimulationState,
    check_resolution,
    dirichlet_values,
    load_checkpoint,
    save_checkpoint,
)

from .helpers import random_rotation

NH = MaterialModel.neo_hookean_2d(1.0, 1.0, g_c=0.05)
PQ = MaterialModel.pq_2d(1.5, 1.0, 1.0, g_c=0.05)
TAGS = ("bottom", "right", "top", "left")


def random_state(rng, mesh, d_scale=0.6):
    st = SimulationState.initial(mesh)
    F = np.eye(2) + 0.1 * rng.normal(size=(2, 2))
    st.y = mesh.nodes @ F.T + 0.01 * rng.normal(size=mesh.nodes.shape)
    d = rng.normal(size=(mesh.n_nodes, 2))
    st.d = d_scale * d / np.maximum(1.0, np.linalg.norm(d, axis=1))[:, None]
    return st


def affine_bcs(F0):
    return [BoundaryCondition(t, "affine", F0) for t in TAGS]


# ---------------------------------------------------------------------------
# Mesh and state
# ---------------------------------------------------------------------------

def test_mesh_validation(tmp_path):
    with pytest.raises(EmptyMesh):
        Mesh(np.zeros((0, 2)), np.zeros((0, 3), dtype=int))
    with pytest.raises(ValueError):
        Mesh(np.array([[0, 0], [1, 0], [0, 1.0]]), np.array([[0, 2, 1]]))
    with pytest.raises(ValueError):
        Mesh(np.array([[0, 0], [1, 0], [1, 0.0]]), np.array([[0, 1, 2]]))
    m = rectangle_mesh(3, 2, pattern="alternate")
    path = tmp_path / "m.txt"
    write_mesh(m, path)
    m2 = read_mesh(path)
    assert np.array_equal(m.nodes, m2.nodes) and np.array_equal(m.triangles, m2.triangles)
    assert m2.tags == set(TAGS)
    assert m.area.sum() == pytest.approx(1.0)
    h = square_with_hole_mesh(1.0, 0.1, 16, 4)
    assert h.tags == {"cavity", "outer"}
    assert h.area.sum() == pytest.approx(1.0 - np.pi * 0.01, rel=2e-2)


def test_params_validation():
    for kw in ({"epsilon": 0.0}, {"d_c": 1.0}, {"d_c": 0.0}, {"eta": 0.0}, {"max_stagger": 0}):
        with pytest.raises(ValueError):
            PhaseFieldParams(**kw)


def test_checkpoint_roundtrip(tmp_path, rng):
    m = rectangle_mesh(3, 3)
    st = random_state(rng, m)
    st.freeze([0, 4], [1.0, 1.0])
    st.step = 7
    save_checkpoint(st, tmp_path / "s.bin")
    raw = (tmp_path / "s.bin").read_bytes()
    assert raw[:8] == b"FQRSTATE" and raw[8] == 1
    back = load_checkpoint(tmp_path / "s.bin")
    for f in ("y", "d", "frozen", "frozen_dir", "d_lower"):
        assert np.array_equal(getattr(st, f), getattr(back, f))
    assert back.step == 7 and back.mesh.tags == m.tags
    (tmp_path / "bad.bin").write_bytes(b"FQRSTATE\x09" + raw[9:])
    with pytest.raises(ValueError):
        load_checkpoint(tmp_path / "bad.bin")


def test_dirichlet_and_resolution():
    m = rectangle_mesh(4, 4)
    with pytest.raises(KeyError):
        dirichlet_values(m, [BoundaryCondition("nope", "zero")])
    fixed, vals = dirichlet_values(m, [BoundaryCondition("top", "affine", np.diag([1, 2.0]), (False, True))])
    top = m.boundary_nodes("top")
    assert fixed[top, 1].all() and not fixed[top, 0].any()
    assert np.allclose(vals[top, 1], 2.0 * m.nodes[top, 1])
    with pytest.warns(UserWarning):
        assert not check_resolution(m, PhaseFieldParams(epsilon=0.015))
    assert check_resolution(m, PhaseFieldParams(epsilon=1.0))


# ---------------------------------------------------------------------------
# Energy
# ---------------------------------------------------------------------------

def test_energy_zero_and_affine():
    m = rectangle_mesh(2, 2)
    p = PhaseFieldParams(epsilon=0.1)
    st = SimulationState.initial(m)
    E, gy, gd = total_energy(st, NH, p)
    assert E == 0.0 and np.all(gy == 0.0) and np.all(gd == 0.0)
    F0 = np.array([[1.1, 0.2], [0.0, 0.9]])
    st.y = m.nodes @ F0.T
    E, _, _ = total_energy(st, NH, p)
    assert E == pytest.approx((1.0 + p.eta) * intact_energy(NH, F0), rel=1e-13)


@pytest.mark.parametrize("model", [NH, PQ])
def test_energy_gradient_fd(model, rng):
    m = rectangle_mesh(3, 3, pattern="alternate")  # 16 nodes
    p = PhaseFieldParams(epsilon=0.2)
    st = random_state(rng, m)
    t = evaluate(m, st.y, st.d, model, p)
    h = 1e-6
    for field, grad in (("y", t.grad_y), ("d", t.grad_d)):
        fd = np.zeros_like(grad)
        for idx in np.ndindex(grad.shape):
            for sgn in (1, -1):
                y, d = st.y.copy(), st.d.copy()
                (y if field == "y" else d)[idx] += sgn * h
                fd[idx] += sgn * evaluate(m, y, d, model, p, False, False).energy / (2 * h)
        assert np.linalg.norm(grad - fd) <= 1e-5 * np.linalg.norm(fd)


def test_energy_objectivity(rng):
    m = rectangle_mesh(3, 3)
    p = PhaseFieldParams(epsilon=0.2)
    st = random_state(rng, m)
    E = total_energy(st, NH, p)[0]
    Q = random_rotation(rng, 2)
    st.y = st.y @ Q.T + np.array([0.3, -0.2])
    assert total_energy(st, NH, p)[0] == pytest.approx(E, rel=1e-10)


def test_energy_inverted_element():
    m = rectangle_mesh(1, 1, pattern="right")
    st = SimulationState.initial(m)
    st.y = st.y.copy()
    st.y[:, 0] *= -1.0
    with pytest.raises(ElementInverted) as exc:
        total_energy(st, NH, PhaseFieldParams())
    assert exc.value.element in (0, 1)
    assert evaluate(m, st.y, st.d, NH, PhaseFieldParams(), False, False, check=False).energy == np.inf


# ---------------------------------------------------------------------------
# Solvers
# ---------------------------------------------------------------------------

def test_patch_test():
    m = rectangle_mesh(6, 6)
    p = PhaseFieldParams(epsilon=0.5)
    st = SimulationState.initial(m)
    F0 = np.diag([1.0, 1.2])
    fixed, vals = dirichlet_values(m, affine_bcs(F0))
    st.y = np.where(fixed, vals, st.y)
    rep = solve_displacement(st, NH, p, affine_bcs(F0))
    assert rep.converged
    assert np.max(np.abs(st.y - m.nodes @ F0.T)) < 1e-8


def test_damage_unloaded_stays_zero():
    m = rectangle_mesh(4, 4)
    st = SimulationState.initial(m)
    solve_damage(st, NH, PhaseFieldParams(epsilon=0.5))
    assert np.all(st.d == 0.0)


def test_project_damage(rng):
    d = 3.0 * rng.normal(size=(10, 2))
    lower = np.full((10, 2), -np.inf)
    lower[:5] = 0.0
    frozen = np.zeros(10, dtype=bool)
    frozen[9] = True
    fdir = np.zeros((10, 2))
    fdir[9] = [0.6, 0.8]
    out = project_damage(d, lower, frozen, fdir)
    assert np.all(np.linalg.norm(out, axis=1) <= 1.0 + 1e-15)
    assert np.all(out[:5] >= 0.0)
    assert np.array_equal(out[9], fdir[9])


def test_staggered_zero_load_one_sweep():
    m = rectangle_mesh(4, 4)
    st = SimulationState.initial(m)
    _, rep = staggered_step(st, NH, PhaseFieldParams(epsilon=0.5), affine_bcs(np.eye(2)))
    assert rep.iterations == 1


def _notched(n=8, eps=0.25):
    m = rectangle_mesh(n, n)
    st = SimulationState.initial(m)
    X = m.nodes
    notch = np.flatnonzero((np.abs(X[:, 1] - 0.5) < 1e-9) & (X[:, 0] <= 0.25 + 1e-9))
    st.freeze(notch, [0.0, 1.0])
    return m, st, PhaseFieldParams(epsilon=eps)


def test_staggered_monotone_and_constraints():
    m, st, p = _notched()
    model = MaterialModel.neo_hookean_2d(1.0, 0.0, g_c=0.02)
    frozen_before = st.d[st.frozen].copy()
    F_old = np.eye(2)
    max_d = []
    for s in (1.05, 1.1, 1.15):
        F0 = np.diag([1.0, s])
        bcs = [BoundaryCondition("bottom", "zero"), BoundaryCondition("top", "affine", F0)]
        affine_predictor(st, F_old, F0)
        F_old = F0
        st, rep = staggered_step(st, model, p, bcs)
        assert np.all(np.diff(rep.energies) <= 1e-10)
        st.check_invariants()
        assert np.array_equal(st.d[st.frozen][: len(frozen_before)], frozen_before)
        apply_irreversibility(st, p)
        st.check_invariants()
        max_d.append(np.linalg.norm(st.d[~st.frozen], axis=1).max())
    assert max_d[0] <= max_d[1] <= max_d[2]


def test_staggered_deterministic():
    runs = []
    for _ in range(2):
        m, st, p = _notched()
        F0 = np.array([[1.0, 0.1], [0.0, 1.0]])
        bcs = [BoundaryCondition("bottom", "zero"), BoundaryCondition("top", "affine", F0)]
        affine_predictor(st, np.eye(2), F0)
        out, rep = staggered_step(st, NH, p, bcs)
        runs.append((out.y, out.d, rep.iterations, [r.iterations for r in rep.damage]))
    assert np.array_equal(runs[0][0], runs[1][0]) and np.array_equal(runs[0][1], runs[1][1])
    assert runs[0][2:] == runs[1][2:]


def test_staggered_not_converged():
    m, st, _ = _notched()
    p = PhaseFieldParams(epsilon=0.25, max_stagger=1, stagger_tol=1e-12)
    F0 = np.diag([1.0, 1.2])
    bcs = [BoundaryCondition("bottom", "zero"), BoundaryCondition("top", "affine", F0)]
    affine_predictor(st, np.eye(2), F0)
    with pytest.raises(NotConverged) as exc:
        staggered_step(st, MaterialModel.neo_hookean_2d(1.0, 0.0, g_c=0.02), p, bcs)
    assert np.isfinite(exc.value.residual)


def test_irreversibility_examples():
    m = rectangle_mesh(2, 2)
    p = PhaseFieldParams()
    st = SimulationState.initial(m)
    st.d[0] = [0.96, 0.0]
    st.d[1] = [0.0, 0.9]
    st.freeze([2], [0.0, 1.0])
    apply_irreversibility(st, p)
    assert st.frozen[0] and np.array_equal(st.d[0], [1.0, 0.0])
    assert not st.frozen[1] and np.array_equal(st.d[1], [0.0, 0.9])
    assert np.array_equal(st.d[2], [0.0, 1.0])
    before = st.frozen.copy()
    apply_irreversibility(st, p)
    assert np.array_equal(st.frozen, before)
