"""Reusable surfaces and point sets for tests and experiments."""
from __future__ import annotations

import numpy as np

from .surface import HolomorphicPolynomial


def degenerate_slice_points(c1: complex, u_values) -> np.ndarray:
    """Points of C^2 on the complex line z_1 - i z_2 = c1, parametrized by u = z_1 + i z_2.

    For phi = z_1^2 + z_2^2 the raw normals there are
    ``conj(u) (1, i, 0) + (conj(c1), -i conj(c1), -1)``, all inside one fixed
    2-dimensional complex subspace of C^3.
    """
    u = np.asarray(u_values, dtype=complex)
    z1 = (u + c1) / 2
    z2 = (u - c1) / 2j
    return np.stack([z1, z2], axis=-1)


def degenerate_slice_surface() -> HolomorphicPolynomial:
    return HolomorphicPolynomial.sum_of_squares(2)


def degenerate_slice_subspace(c1: complex) -> np.ndarray:
    """Orthonormal rows spanning the subspace that contains every slice normal."""
    a = np.array([1, 1j, 0], dtype=complex)
    b = np.array([np.conj(c1), -1j * np.conj(c1), -1], dtype=complex)
    q, _ = np.linalg.qr(np.stack([a, b], axis=1))
    return q.T


def holomorphic_fixtures(rng: np.random.Generator | None = None) -> list[HolomorphicPolynomial]:
    """A few holomorphic phases on C and C^2 (fixed plus seeded random ones)."""
    rng = np.random.default_rng(0) if rng is None else rng
    out = [
        HolomorphicPolynomial.quadratic(np.eye(1)),
        HolomorphicPolynomial.sum_of_squares(2),
        HolomorphicPolynomial(2, {(3, 0): 1.0, (1, 2): 2 - 1j, (0, 1): 0.5j}),
    ]
    out += [HolomorphicPolynomial.random(2, 4, rng) for _ in range(3)]
    return out
