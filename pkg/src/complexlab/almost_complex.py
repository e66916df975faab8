"""Linear almost complex structures on R^(2m) and their reduction to J0."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from . import linalg
from .surface import HolomorphicPolynomial, real_partials

ACS_TOL = 1e-10
P = np.array([[0.0, -1.0], [1.0, 0.0]])


def standard_structure(m: int) -> np.ndarray:
    """J0: block diagonal with m copies of P."""
    return np.kron(np.eye(m), P)


def acs_violations(J, tol: float = ACS_TOL) -> list[str]:
    J = np.asarray(J, dtype=float)
    if J.ndim != 2 or J.shape[0] != J.shape[1]:
        return ["not square"]
    if J.shape[0] % 2:
        return ["odd size"]
    eye = np.eye(J.shape[0])
    out = []
    if np.max(np.abs(J @ J + eye)) > tol:
        out.append("J^2 != -I")
    if np.max(np.abs(J.T @ J - eye)) > tol:
        out.append("J not orthogonal")
    if np.max(np.abs(J.T + J)) > tol:
        out.append("J not skew-symmetric")
    return out


def is_acs(J, tol: float = ACS_TOL) -> bool:
    return not acs_violations(J, tol)


@dataclass(frozen=True)
class AlmostComplexStructure:
    J: np.ndarray

    def __post_init__(self):
        bad = acs_violations(self.J)
        if bad:
            raise ValueError("not an almost complex structure: " + ", ".join(bad))

    @property
    def size(self) -> int:
        return self.J.shape[0]


def random_acs(m: int, seed: int) -> AlmostComplexStructure:
    """``Q^t J0 Q`` on R^(2m) for a seeded random orthogonal Q."""
    if m < 1:
        raise ValueError("m must be >= 1")
    Q = linalg.random_orthogonal(2 * m, np.random.default_rng(seed))
    J = Q.T @ standard_structure(m) @ Q
    # restore exact skew-symmetry lost to rounding
    return AlmostComplexStructure(0.5 * (J - J.T))


@dataclass
class ReductionResult:
    L: np.ndarray
    residual: float


def _normalize_eigvecs(V: np.ndarray) -> np.ndarray:
    """Phase-fix each column so its first non-negligible entry is positive real, then sort."""
    cols, keys = [], []
    for v in V.T:
        i = int(np.flatnonzero(np.abs(v) > 1e-8)[0])
        lead = v[i]
        cols.append(v * (abs(lead) / lead))
        keys.append(-abs(lead))
    order = np.argsort(keys, kind="stable")
    return np.stack([cols[i] for i in order], axis=1)


def plus_i_eigenvectors(J) -> np.ndarray:
    """Orthonormal basis (columns) of the +i eigenspace of J."""
    J = np.asarray(J, dtype=float)
    V = scipy.linalg.null_space(J - 1j * np.eye(J.shape[0]), rcond=1e-8)
    if 2 * V.shape[1] != J.shape[0]:
        raise np.linalg.LinAlgError(f"+i eigenspace has dimension {V.shape[1]}, expected {J.shape[0] // 2}")
    return _normalize_eigvecs(V)


def reduce_to_standard(J) -> ReductionResult:
    """L with ``L^-1 J L = J0``, built from the +i eigenvectors v_j.

    Columns are ``(Re v_j, -Im v_j)``: from ``J v = i v`` one gets
    ``J Re v = -Im v`` and ``J Im v = Re v``, matching ``J0 e_1 = e_2``,
    ``J0 e_2 = -e_1`` on each block.
    """
    J = np.asarray(J, dtype=float)
    bad = acs_violations(J)
    if bad:
        raise ValueError("not an almost complex structure: " + ", ".join(bad))
    V = plus_i_eigenvectors(J)
    L = np.empty(J.shape)
    L[:, 0::2] = V.real
    L[:, 1::2] = -V.imag
    if abs(np.linalg.det(L)) <= 1e-10:
        raise np.linalg.LinAlgError("reduction matrix is singular")
    J0 = standard_structure(J.shape[0] // 2)
    residual = float(np.linalg.norm(np.linalg.solve(L, J @ L) - J0))
    return ReductionResult(L, residual)


def eigenvalue_multiplicities(J, tol: float = 1e-9) -> tuple[int, int]:
    """Counts of eigenvalues within tol of +i and of -i."""
    ev = np.linalg.eigvals(np.asarray(J, dtype=float))
    return int(np.sum(np.abs(ev - 1j) <= tol)), int(np.sum(np.abs(ev + 1j) <= tol))


RealMap = Callable[[np.ndarray], np.ndarray]


def _fd_gradients(g: RealMap, x: np.ndarray, step: float) -> tuple[np.ndarray, np.ndarray]:
    grads = np.empty((2, x.size))
    for i in range(x.size):
        e = np.zeros(x.size)
        e[i] = step
        grads[:, i] = (np.asarray(g(x + e)) - np.asarray(g(x - e))) / (2 * step)
    return grads[0], grads[1]


def acs_graph_residual(phi: HolomorphicPolynomial | RealMap, J, samples, step: float = 1e-5) -> float:
    """``max |grad phi_2 - J grad phi_1|`` over real sample points.

    Holomorphic polynomials use analytic partials; a callable ``x -> (phi_1, phi_2)``
    on R^(2m) is differentiated by central differences.
    """
    J = np.asarray(J, dtype=float)
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.shape[1] != J.shape[0]:
        raise ValueError("J size must match the real parameter dimension")
    worst = 0.0
    for x in samples:
        if isinstance(phi, HolomorphicPolynomial):
            d1, d2 = real_partials(phi, linalg.complexify(x))
        else:
            d1, d2 = _fd_gradients(phi, x, step)
        worst = max(worst, float(np.linalg.norm(d2 - J @ d1)))
    return worst
