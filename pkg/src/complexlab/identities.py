"""Randomized suites for the exact algebraic identities.

Each suite returns a list of ``(label, lhs, rhs)`` rows; ``relative_error``
turns a row into a single number.
"""
from __future__ import annotations

import numpy as np

from . import linalg
from .surface import (
    HolomorphicPolynomial,
    chessian,
    fd_phase_hessian,
    hessian_identity_check,
)
from .transversality import vmatrix_identity_check


def relative_error(lhs: float, rhs: float) -> float:
    scale = max(abs(lhs), abs(rhs))
    return abs(lhs - rhs) / scale if scale > 0 else 0.0


def block_det_suite(rng: np.random.Generator, count: int, sizes=(2, 8)):
    rows = []
    for _ in range(count):
        m = int(rng.integers(sizes[0], sizes[1] + 1))
        B, D = rng.standard_normal((2, m, m))
        rows.append((f"m={m}", *linalg.block_det_identity(B, D)))
    return rows


def _random_points(rng, m: int, count: int) -> list[np.ndarray]:
    return [rng.uniform(-1, 1, m) + 1j * rng.uniform(-1, 1, m) for _ in range(count)]


def vmatrix_suite(rng: np.random.Generator, count: int, ns=(2, 3, 4)):
    rows = []
    for i in range(count):
        n = ns[i % len(ns)]
        phi = HolomorphicPolynomial.random(n - 1, int(rng.integers(2, 5)), rng)
        lhs, rhs = vmatrix_identity_check(phi, _random_points(rng, n - 1, n))
        rows.append((f"n={n}", lhs, rhs))
    return rows


def hessian_suite(rng: np.random.Generator, count: int, n: int, fd: bool = False):
    """Analytic (or finite-difference) Hessian determinant against ``|(s,t)|^(2n-2) |det H|^2``."""
    rows = []
    for _ in range(count):
        phi = HolomorphicPolynomial.random(n - 1, int(rng.integers(2, 5)), rng)
        z = _random_points(rng, n - 1, 1)[0]
        s, t = rng.uniform(-2, 2, 2)
        if fd:
            lhs = abs(float(linalg.det(fd_phase_hessian(phi, z, s, t))))
            rhs = (s * s + t * t) ** (n - 1) * abs(linalg.det(chessian(phi, z))) ** 2
            rows.append((f"n={n} fd", lhs, float(rhs)))
        else:
            rows.append((f"n={n}", *hessian_identity_check(phi, z, s, t)))
    return rows


def takagi_suite(rng: np.random.Generator, count: int, max_size: int = 16):
    """Rows carry the reconstruction error (lhs) and the singular-value error (rhs), both relative."""
    rows = []
    for i in range(count):
        m = int(rng.integers(1, max_size + 1))
        G = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        if i % 5 == 4:
            # repeated singular values: U^t diag(d) U with clustered d
            d = np.repeat(rng.uniform(0.5, 2, (m + 1) // 2), 2)[:m]
            U = linalg.random_unitary(m, rng)
            A = U.T @ np.diag(d) @ U
            A = 0.5 * (A + A.T)
        else:
            A = G + G.T
        tk = linalg.takagi(A)
        norm = np.linalg.norm(A, 2)
        rec = np.linalg.norm(A - tk.reconstruct(), 2) / norm
        sv = np.max(np.abs(tk.D - np.linalg.svd(A, compute_uv=False))) / norm
        rows.append((f"m={m}", float(rec), float(sv)))
    return rows


def wedge_suite(rng: np.random.Generator, count: int, ns=(2, 3, 4)):
    """Wedge of n unit vectors in C^n against |det_C|^2."""
    rows = []
    for i in range(count):
        n = ns[i % len(ns)]
        vs = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        vs /= np.linalg.norm(vs, axis=1)[:, None]
        rows.append((f"n={n}", linalg.wedge(vs), float(abs(linalg.det(vs.T)) ** 2)))
    return rows
