"""Shared random generators and finite-difference utilities for the tests."""

import numpy as np


def random_rotation(rng, dim):
    Q, R = np.linalg.qr(rng.normal(size=(dim, dim)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


def random_unit(rng, dim):
    v = rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_F(rng, dim, scale=0.3):
    """Random deformation gradient near the identity with det F > 0."""
    while True:
        F = random_rotation(rng, dim) @ (np.eye(dim) + scale * rng.normal(size=(dim, dim)))
        if np.linalg.det(F) > 0.2:
            return F


def fd_gradient(f, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        e = np.zeros_like(x)
        e[idx] = h
        g[idx] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g
