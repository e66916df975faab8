"""Complex/real linear algebra primitives.

Conventions: a complex vector ``v = (a_1 + i b_1, ..., a_n + i b_n)`` is
realified by interleaving, ``(a_1, b_1, ..., a_n, b_n)``. The pairing
``pair(u, v) = Re(sum u_j conj(v_j))`` is then the Euclidean inner product of
the realified vectors.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

RANK_RTOL = 1e-10
SYMMETRY_TOL = 1e-12


def _as_cvec(v) -> np.ndarray:
    arr = np.asarray(v, dtype=complex)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"expected a non-empty 1-d vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector has non-finite entries")
    return arr


def pair(a, b) -> float:
    a = _as_cvec(a)
    b = _as_cvec(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.size} vs {b.size}")
    return float(np.real(np.sum(a * np.conj(b))))


def realify(v) -> np.ndarray:
    """Interleave real and imaginary parts; works on the last axis."""
    v = np.asarray(v, dtype=complex)
    out = np.empty(v.shape[:-1] + (2 * v.shape[-1],), dtype=float)
    out[..., 0::2] = v.real
    out[..., 1::2] = v.imag
    return out


def complexify(x) -> np.ndarray:
    """Inverse of :func:`realify`."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] % 2:
        raise ValueError("realified vectors have even length")
    return x[..., 0::2] + 1j * x[..., 1::2]


def det(m) -> float | complex:
    """Determinant by partially pivoted LU (LAPACK getrf), product of pivots."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"determinant needs a square matrix, got {m.shape}")
    if m.shape[0] == 0:
        return 1.0
    with warnings.catch_warnings():
        # an exactly singular input is a valid case with determinant 0
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(m, check_finite=True)
    sign = (-1) ** int(np.sum(piv != np.arange(m.shape[0])))
    return sign * np.prod(np.diag(lu))


def block_det_identity(B, D) -> tuple[float, float]:
    """Both sides of ``det([[B, D], [-D, B]]) = |det(B + iD)|^2``."""
    B = np.asarray(B, dtype=float)
    D = np.asarray(D, dtype=float)
    if B.shape != D.shape or B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValueError(f"B and D must be square of equal size, got {B.shape} and {D.shape}")
    block = np.block([[B, D], [-D, B]])
    lhs = float(np.real(det(block)))
    rhs = float(abs(det(B + 1j * D)) ** 2)
    return lhs, rhs


def realified_frame(vs) -> np.ndarray:
    """Columns I(v_1), I(i v_1), ..., I(v_k), I(i v_k) as a 2n x 2k matrix."""
    vs = np.atleast_2d(np.asarray(vs, dtype=complex))
    cols = []
    for v in vs:
        cols.append(realify(v))
        cols.append(realify(1j * v))
    return np.stack(cols, axis=1)


def wedge(vs) -> float:
    """Transversality of the real 2-planes span{I(v_j), I(i v_j)}.

    The 2k realified columns are completed by an orthonormal basis of the
    orthogonal complement of their span; the absolute determinant of the
    resulting 2n x 2n matrix is returned. Degenerate spans give 0.
    """
    vs = np.atleast_2d(np.asarray(vs, dtype=complex))
    k, n = vs.shape
    if k < 1 or k > n:
        raise ValueError(f"wedge needs 1 <= k <= n, got k={k}, n={n}")
    if not np.all(np.isfinite(vs)):
        raise ValueError("non-finite vector entries")
    frame = realified_frame(vs)
    scale = np.max(np.linalg.norm(frame, axis=0))
    if scale == 0.0:
        return 0.0
    q, r, _ = scipy.linalg.qr(frame, pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size < 2 * k or diag[-1] <= RANK_RTOL * scale:
        return 0.0
    complement = q[:, 2 * k:]
    return float(abs(det(np.hstack([frame, complement]))))


@dataclass(frozen=True)
class TakagiFactorization:
    """``A = U.T @ diag(D) @ U`` with ``U`` unitary and ``D`` descending."""

    U: np.ndarray
    D: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return self.U.T @ np.diag(self.D) @ self.U


def _tie_groups(s: np.ndarray, rtol: float) -> list[list[int]]:
    groups: list[list[int]] = []
    scale = max(float(s[0]), 1.0) if s.size else 1.0
    for i, value in enumerate(s):
        if groups and abs(s[groups[-1][-1]] - value) <= rtol * scale:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def takagi(A, tie_rtol: float = 1e-9) -> TakagiFactorization:
    """Autonne-Takagi factorization of a complex symmetric matrix.

    From the SVD ``A = W diag(s) X^H``, each block of (numerically) equal
    singular values carries a unitary symmetric phase matrix
    ``Z = W_b^H conj(X_b)``; with ``S = sqrtm(Z)`` the columns ``W_b S``
    give ``A = V diag(s) V^T`` and ``U = V^T``.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"takagi needs a square matrix, got {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    norm = max(np.linalg.norm(A), 1.0)
    if np.max(np.abs(A - A.T), initial=0.0) > SYMMETRY_TOL * norm:
        raise ValueError("matrix is not symmetric")
    m = A.shape[0]
    if m == 0:
        return TakagiFactorization(np.zeros((0, 0), complex), np.zeros(0))
    W, s, Xh = np.linalg.svd(A)
    X = Xh.conj().T
    V = np.empty_like(W)
    zero_cut = 1e-13 * max(float(s[0]), np.finfo(float).tiny)
    for idx in _tie_groups(s, tie_rtol):
        Wb = W[:, idx]
        if s[idx[0]] <= zero_cut:
            # null block: any unitary completion works
            V[:, idx] = Wb
            continue
        Z = Wb.conj().T @ X[:, idx].conj()
        V[:, idx] = Wb @ scipy.linalg.sqrtm(Z)
    return TakagiFactorization(U=V.T, D=s.copy())


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def numerical_rank(m, rtol: float = 1e-8, scale: float | None = None) -> int:
    """Count singular values above ``rtol * scale`` (default scale: the largest one)."""
    m = np.atleast_2d(np.asarray(m))
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    ref = s[0] if scale is None else scale
    if s.size == 0 or ref == 0.0:
        return 0
    return int(np.sum(s > rtol * ref))


def principal_angles(A, B) -> np.ndarray:
    """Principal angles (ascending) between the column spans of A and B."""
    return np.sort(scipy.linalg.subspace_angles(np.asarray(A), np.asarray(B)))
