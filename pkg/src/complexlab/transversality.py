"""Brascamp-Lieb data from surface points and transversality predicates."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import linalg
from .surface import HolomorphicPolynomial, normal, real_parametrization_maps, real_partials

RANK_RTOL = 1e-8
SURJECTIVE_RTOL = 1e-10


@dataclass(frozen=True)
class BLDatum:
    """Linear maps ``L_j: R^d -> R^{d_j}`` (rows x columns = d_j x d) with exponents ``p_j``."""

    maps: tuple[np.ndarray, ...]
    exponents: tuple[float | Fraction, ...]
    dim: int

    def __post_init__(self):
        if len(self.maps) != len(self.exponents):
            raise ValueError("one exponent per map required")
        for j, L in enumerate(self.maps):
            if L.ndim != 2 or L.shape[1] != self.dim:
                raise ValueError(f"map {j} has shape {L.shape}, expected (d_j, {self.dim})")
            if linalg.numerical_rank(L, SURJECTIVE_RTOL) != L.shape[0]:
                raise ValueError(f"map {j} is not surjective")
        if any(p < 0 for p in self.exponents):
            raise ValueError("exponents must be nonnegative")

    @property
    def target_dims(self) -> tuple[int, ...]:
        return tuple(L.shape[0] for L in self.maps)


@dataclass(frozen=True)
class SubspaceSample:
    basis: np.ndarray  # d x m, orthonormal columns

    @property
    def dimension(self) -> int:
        return self.basis.shape[1]


def surface_bl_datum(phi: HolomorphicPolynomial, points, k: int | None = None) -> BLDatum:
    """BL datum of the maps ``(d Sigma(a_j))^*`` with ``p_j = 1/(n-1)`` (or ``1/(k-1)``)."""
    points = [np.atleast_1d(np.asarray(a, dtype=complex)) for a in points]
    n = phi.dim + 1
    m = len(points)
    if k is None:
        k = n if m == n else m
    if k < 2:
        raise ValueError("multilinearity must be >= 2")
    maps = tuple(real_parametrization_maps(phi, a).T for a in points)
    p = Fraction(1, k - 1)
    return BLDatum(maps=maps, exponents=(p,) * m, dim=2 * n)


def bl_scaling_check(datum: BLDatum, tol: float = 1e-12) -> bool:
    total = sum(p * dj for p, dj in zip(datum.exponents, datum.target_dims))
    if all(isinstance(p, (int, Fraction)) for p in datum.exponents):
        return Fraction(total) == datum.dim
    return abs(float(total) - datum.dim) <= tol


def _dim_image(L: np.ndarray, basis: np.ndarray) -> int:
    # basis is orthonormal, so ||L|| bounds every singular value of L @ basis
    return linalg.numerical_rank(L @ basis, RANK_RTOL, scale=np.linalg.norm(L, 2))


def dimension_slack(datum: BLDatum, basis: np.ndarray) -> float:
    """``sum p_j dim(L_j V) - dim V`` (negative means a violation)."""
    rhs = sum(float(p) * _dim_image(L, basis) for p, L in zip(datum.exponents, datum.maps))
    return rhs - linalg.numerical_rank(basis, RANK_RTOL)


def random_subspace(d: int, m: int, rng: np.random.Generator) -> np.ndarray:
    q, _ = np.linalg.qr(rng.standard_normal((d, m)))
    return q


def kernel_subspaces(datum: BLDatum):
    """Each kernel ker L_j and each pairwise sum ker L_i + ker L_j (orthonormal bases)."""
    kernels = []
    for L in datum.maps:
        _, s, vh = np.linalg.svd(L)
        rank = int(np.sum(s > RANK_RTOL * s[0])) if s.size else 0
        kernels.append(vh[rank:].T)
    for ker in kernels:
        if ker.shape[1]:
            yield ker
    for a, b in itertools.combinations(kernels, 2):
        span = np.hstack([a, b])
        if span.shape[1] == 0:
            continue
        u, s, _ = np.linalg.svd(span, full_matrices=False)
        r = int(np.sum(s > RANK_RTOL * s[0]))
        yield u[:, :r]


@dataclass
class BLDimensionReport:
    passed: bool
    trials: int
    seed: int
    violation: dict | None = None
    kernel_subspaces_checked: int = 0

    def to_json(self) -> dict:
        out = {"pass": self.passed, "trials": self.trials, "seed": self.seed}
        if self.violation is not None:
            out["violation"] = self.violation
        return out


def _violation(basis: np.ndarray, source: str) -> dict:
    return {"dimension": int(basis.shape[1]), "basis": basis.tolist(), "source": source}


def bl_dimension_check_mc(datum: BLDatum, trials: int, seed: int) -> BLDimensionReport:
    """Search for a subspace V with ``dim V > sum p_j dim(L_j V)``.

    Kernel subspaces (and pairwise sums) are tested deterministically first,
    then ``trials`` random subspaces of random dimension in [1, d].
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    checked = 0
    for basis in kernel_subspaces(datum):
        checked += 1
        if dimension_slack(datum, basis) < -1e-12:
            return BLDimensionReport(False, 0, seed, _violation(basis, "kernel"), checked)
    rng = np.random.default_rng(seed)
    d = datum.dim
    for t in range(trials):
        m = int(rng.integers(1, d + 1))
        basis = random_subspace(d, m, rng)
        if dimension_slack(datum, basis) < -1e-12:
            return BLDimensionReport(False, t + 1, seed, _violation(basis, "random"), checked)
    return BLDimensionReport(True, trials, seed, None, checked)


def kernel_basis(phi: HolomorphicPolynomial, a) -> tuple[np.ndarray, np.ndarray]:
    """The two spanning vectors of ker L_j built from real partials of phi_1, phi_2."""
    d1, d2 = real_partials(phi, a)
    v1 = np.concatenate([d1, [-1.0, 0.0]])
    v2 = np.concatenate([d2, [0.0, -1.0]])
    return v1, v2


def kernel_basis_cr(phi: HolomorphicPolynomial, a) -> np.ndarray:
    """``v_2`` rewritten through Cauchy-Riemann: ``(-d_y phi_1, d_x phi_1, ..., 0, -1)``."""
    d1, _ = real_partials(phi, a)
    out = np.empty(d1.size + 2)
    out[0:-2:2] = -d1[1::2]
    out[1:-2:2] = d1[0::2]
    out[-2:] = (0.0, -1.0)
    return out


def vmatrix_identity_check(phi: HolomorphicPolynomial, points) -> tuple[float, float]:
    """``|det(v_11 .. v_1n v_21 .. v_2n)|`` against ``|det_C(n(phi, a_1) .. n(phi, a_n))|^2``."""
    n = phi.dim + 1
    if len(points) != n:
        raise ValueError(f"need exactly n = {n} points")
    firsts, seconds, normals = [], [], []
    for a in points:
        v1, v2 = kernel_basis(phi, a)
        firsts.append(v1)
        seconds.append(v2)
        normals.append(normal(phi, a).raw)
    lhs = abs(float(linalg.det(np.column_stack(firsts + seconds))))
    rhs = abs(linalg.det(np.column_stack(normals))) ** 2
    return lhs, float(rhs)


def transversality(phi: HolomorphicPolynomial, points) -> float:
    n = phi.dim + 1
    if not 1 <= len(points) <= n:
        raise ValueError(f"need 1 <= k <= {n} points")
    return linalg.wedge([normal(phi, a).unit for a in points])


def transversal(phi: HolomorphicPolynomial, points, c: float) -> bool:
    if len(points) < 2:
        raise ValueError("transversality needs k >= 2 points")
    return transversality(phi, points) > c


@dataclass
class HahaReport:
    passed: bool
    checked: int
    excluded_zero: int
    worst_slack: float
    failures: list = field(default_factory=list)


def haha_inequality_check(datum: BLDatum, samples) -> HahaReport:
    """Check ``sum_j (d - dim ker(L_j|_V)) >= m d - dim V`` on each sampled subspace.

    With d = 2n and m = n maps the right side is ``2n^2 - dim V``; the
    inequality is equivalent to ``sum_j dim(ker L_j & V) <= dim V``, which in
    turn gives ``sum_j dim(L_j V) >= (n - 1) dim V``. V = {0} is skipped.
    """
    d = datum.dim
    target = len(datum.maps) * d
    checked = excluded = 0
    worst = np.inf
    failures = []
    for sample in samples:
        basis = sample.basis if isinstance(sample, SubspaceSample) else np.asarray(sample)
        dim_v = linalg.numerical_rank(basis, RANK_RTOL) if basis.size else 0
        if dim_v == 0:
            excluded += 1
            continue
        kernel_dims = [dim_v - _dim_image(L, basis) for L in datum.maps]
        total = sum(d - kd for kd in kernel_dims)
        slack = total - (target - dim_v)
        worst = min(worst, slack)
        checked += 1
        if slack < 0:
            failures.append({"dimension": dim_v, "kernel_dims": kernel_dims})
    return HahaReport(not failures, checked, excluded, float(worst), failures)


def subspace_distance(basis_a: np.ndarray, basis_b: np.ndarray) -> float:
    """Largest principal angle between two real subspaces of equal dimension."""
    return float(np.max(linalg.principal_angles(basis_a, basis_b)))
