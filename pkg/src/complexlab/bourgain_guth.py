"""Cap/box partitions, cap coefficients and the broad/narrow case split.

Frequency caps tile Q(0,1) in R^(2n-2) with side 1/K; physical boxes tile
Q(0,R) in R^(2n) with side K. Cap coefficients come in two modes: ``proxy``
(max of |E f_q| over a 3^(2n) grid in the box) and ``exact`` (the mollified
average, integrated by seeded Monte-Carlo over |s| <= 8K).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import betainc, gamma, jv

from . import linalg
from .extension import Amplitude, DomainBox, QuadratureSpec, extend_batch
from .surface import HolomorphicPolynomial, normal

CAP_BUDGET = 10_000
EXHAUSTIVE_LIMIT = 24
RANDOM_TUPLES = 10_000
TRUNCATION = 8.0


class BudgetError(ValueError):
    pass


@dataclass(frozen=True)
class CapGrid:
    n: int
    K: int

    @property
    def count(self) -> int:
        return self.K ** (2 * self.n - 2)

    @property
    def side(self) -> float:
        return 1.0 / self.K

    def centers(self) -> np.ndarray:
        """Real cap centres, lexicographic order, shape (count, 2n-2)."""
        axis = -0.5 + (np.arange(self.K) + 0.5) / self.K
        m = 2 * self.n - 2
        return np.stack(np.meshgrid(*([axis] * m), indexing="ij"), -1).reshape(-1, m)

    def box(self, index: int) -> DomainBox:
        return DomainBox(self.centers()[index], 0.5 / self.K)


@dataclass(frozen=True)
class BoxGrid:
    n: int
    K: int
    R: float

    @property
    def per_axis(self) -> int:
        return int(round(self.R / self.K))

    @property
    def count(self) -> int:
        return self.per_axis ** (2 * self.n)

    def centers(self):
        """Lazily enumerated box centres in R^(2n)."""
        axis = -self.R / 2 + (np.arange(self.per_axis) + 0.5) * self.K
        for c in itertools.product(axis, repeat=2 * self.n):
            yield np.array(c)


def build_grids(n: int, K: int, R: float) -> tuple[CapGrid, BoxGrid]:
    if n < 2:
        raise ValueError("n must be >= 2")
    if K < 4:
        raise ValueError("K must be >= 4")
    if R < K or abs(R / K - round(R / K)) > 1e-12:
        raise ValueError("R must be a positive integer multiple of K")
    if K ** (2 * n - 2) > CAP_BUDGET:
        raise BudgetError(f"cap count K^(2n-2) = {K ** (2 * n - 2)} exceeds the budget {CAP_BUDGET}")
    return CapGrid(n, K), BoxGrid(n, K, float(R))


# mollifiers ---------------------------------------------------------------


SMOOTHSTEP_ORDER = 6
TABLE_RADIUS = 60.0


def eta_hat(rho) -> np.ndarray:
    """Radial bump: 1 on [0, 1], 0 beyond 2, C^p smoothstep polynomial in between.

    The order-p smoothstep is the regularized incomplete beta I_u(p+1, p+1).
    A high order keeps eta decaying fast enough for zeta to be integrable.
    """
    u = np.clip(np.asarray(rho, dtype=float) - 1.0, 0.0, 1.0)
    p = SMOOTHSTEP_ORDER
    return 1.0 - betainc(p + 1, p + 1, u)


@lru_cache(maxsize=None)
def eta_table(d: int, r_max: float = TABLE_RADIUS, step: float = 0.01) -> tuple[np.ndarray, np.ndarray]:
    """Inverse Fourier transform of the radial bump in R^d on a radial grid (Hankel transform)."""
    nu = d / 2 - 1
    x, wts = np.polynomial.legendre.leggauss(200)
    rho = np.concatenate([(x + 1) / 2, 1 + (x + 1) / 2])
    wq = np.concatenate([wts, wts]) / 2
    g = eta_hat(rho) * rho ** (d / 2) * wq
    r = np.arange(0.0, r_max + step / 2, step)
    vals = np.empty_like(r)
    rr = r[1:, None]
    vals[1:] = (2 * np.pi) ** (-d / 2) * rr[:, 0] ** (-nu) * (jv(nu, rr * rho[None]) @ g)
    # r -> 0 limit of J_nu(r rho) / r^nu
    vals[0] = (2 * np.pi) ** (-d / 2) * np.sum(g * rho**nu) / (2**nu * gamma(nu + 1))
    return r, vals


@lru_cache(maxsize=None)
def zeta_table(d: int, n: int, r_max: float = TABLE_RADIUS, step: float = 0.01) -> tuple[np.ndarray, np.ndarray]:
    """``max_{|x'| <= sqrt d} |eta(x + x')|^(1/n)`` as a function of |x|.

    For radial eta the max runs over radii in [|x| - sqrt d, |x| + sqrt d].
    """
    r, eta = eta_table(d, r_max + math.sqrt(d) + step, step)
    a = np.abs(eta) ** (1.0 / n)
    w = int(math.ceil(math.sqrt(d) / step))
    keep = r <= r_max + step / 2
    out = np.array([a[max(0, i - w): i + w + 1].max() for i in range(int(keep.sum()))])
    return r[keep], out


def zeta(x, d: int, n: int) -> np.ndarray:
    r, z = zeta_table(d, n)
    rad = np.linalg.norm(np.atleast_2d(x), axis=-1)
    return np.interp(rad, r, z, right=0.0)


def zeta_tail_fraction(d: int, n: int, radius: float = TRUNCATION) -> float:
    """Share of the radial zeta mass beyond ``radius``, relative to the tabulated range.

    |eta|^(1/n) against r^(d-1) has a heavy tail, so this is large for radius 8.
    """
    r, z = zeta_table(d, n)
    dens = z * r ** (d - 1)
    total = np.trapezoid(dens, r)
    tail = np.trapezoid(dens[r >= radius], r[r >= radius])
    return float(tail / total)


# amplitudes ---------------------------------------------------------------


@dataclass
class GaussianMixture(Amplitude):
    weights: np.ndarray
    centers: np.ndarray
    sigmas: np.ndarray
    scale: float = 1.0
    kind = "gaussian-mixture"

    def coupled_coords(self, n_real):
        return [set(range(n_real))]

    def factor(self, coords, x):
        out = np.zeros(x.shape[0])
        for w, c, s in zip(self.weights, self.centers, self.sigmas):
            out += w * np.exp(-np.sum((x - c[list(coords)]) ** 2, axis=1) / (2 * s * s))
        return out


def random_mixture(rng: np.random.Generator, n: int, bumps: int | None = None, sigma_range=(0.005, 0.2)) -> GaussianMixture:
    """1 to 3 bumps in Q(0,1) with log-uniform weights and widths, so single caps can dominate."""
    m = 2 * n - 2
    if bumps is None:
        bumps = int(rng.integers(1, 4))
    lo, hi = np.log10(sigma_range[0]), np.log10(sigma_range[1])
    return GaussianMixture(
        weights=10.0 ** rng.uniform(-4, 0, bumps),
        centers=rng.uniform(-0.5, 0.5, (bumps, m)),
        sigmas=10.0 ** rng.uniform(lo, hi, bumps),
    )


# cap coefficients ---------------------------------------------------------


def proxy_offsets(n: int, K: int) -> np.ndarray:
    return K * np.array(list(itertools.product((-1 / 3, 0.0, 1 / 3), repeat=2 * n)))


@dataclass
class CapCoefficient:
    value: float
    mode: str
    stderr: float = 0.0
    truncation: float = 0.0


def cap_coefficient(
    phi: HolomorphicPolynomial,
    f: Amplitude,
    cap: DomainBox,
    box_center,
    K: int,
    mode: str = "proxy",
    quad: QuadratureSpec = QuadratureSpec(),
    samples: int = 4096,
    seed: int = 0,
    truncation: float = TRUNCATION,
) -> CapCoefficient:
    n = phi.dim + 1
    d = 2 * n
    wq = np.asarray(box_center, dtype=float)
    if mode == "proxy":
        vals = np.abs(extend_batch(phi, cap, f, wq + proxy_offsets(n, K), quad))
        return CapCoefficient(float(vals.max()), "proxy")
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 4242])))
    # uniform points in the ball of radius truncation * K
    g = rng.standard_normal((samples, d))
    g /= np.linalg.norm(g, axis=1)[:, None]
    s = truncation * K * g * rng.uniform(size=(samples, 1)) ** (1.0 / d)
    try:
        e = np.abs(extend_batch(phi, cap, f, wq - s, quad))
    except ValueError as exc:
        raise BudgetError(f"{exc}; use proxy mode") from exc
    integrand = e ** (1.0 / n) * zeta(s / K, d, n)
    ball = math.pi ** (d / 2) / gamma(d / 2 + 1) * (truncation * K) ** d
    integral = ball * float(integrand.mean())
    err = ball * float(integrand.std(ddof=1)) / math.sqrt(samples)
    value = K ** (-2.0 * n * n) * integral**n
    stderr = n * K ** (-2.0 * n * n) * integral ** (n - 1) * err
    return CapCoefficient(value, "exact", stderr, zeta_tail_fraction(d, n, truncation))


def coefficient_table(phi, f, caps: CapGrid, box_centers, K, quad=QuadratureSpec(), comparability_samples=16, seed=0):
    """Proxy coefficients (boxes x caps) and, per pair, max |E f_q| at random points of the box."""
    n = phi.dim + 1
    box_centers = np.asarray(box_centers, dtype=float)
    nb = box_centers.shape[0]
    offs = proxy_offsets(n, K)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 77])))
    rand = rng.uniform(-K / 2, K / 2, (nb, comparability_samples, 2 * n))
    ws = np.concatenate([(box_centers[:, None] + offs[None]).reshape(-1, 2 * n), (box_centers[:, None] + rand).reshape(-1, 2 * n)])
    coeff = np.empty((nb, caps.count))
    sampled = np.empty((nb, caps.count))
    split = nb * offs.shape[0]
    for j, c in enumerate(caps.centers()):
        vals = np.abs(extend_batch(phi, DomainBox(c, 0.5 / K), f, ws, quad))
        coeff[:, j] = vals[:split].reshape(nb, -1).max(axis=1)
        sampled[:, j] = vals[split:].reshape(nb, -1).max(axis=1)
    return coeff, sampled


def comparability_ratio(coeff: np.ndarray, sampled: np.ndarray, rel_floor: float = 1e-12) -> float:
    """``max |E f_q(w)| / C_q^Q`` over pairs with non-negligible coefficient."""
    mask = coeff > rel_floor * coeff.max()
    return float(np.max(sampled[mask] / coeff[mask])) if mask.any() else 0.0


# case split ---------------------------------------------------------------


def split_caps(coefficients, K: int, n: int) -> tuple[list[int], list[int]]:
    """Indices below ``K^(2-2n) max`` are small; ties go to the large set."""
    c = np.asarray(coefficients, dtype=float)
    if c.size == 0:
        return [], []
    thr = float(K) ** (2 - 2 * n) * c.max()
    small = [int(i) for i in np.flatnonzero(c < thr)]
    large = [int(i) for i in np.flatnonzero(c >= thr)]
    return small, large


@dataclass
class CaseReport:
    kind: str  # "broad" or "narrow"
    large: list
    witnesses: tuple | None = None
    wedge: float | None = None
    max_distance: float | None = None
    constant: float | None = None
    ambiguous: bool = False
    search: str = "exhaustive"
    subspace: np.ndarray | None = field(default=None, repr=False)


def fit_subspace(normals: np.ndarray, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Best dim-dimensional complex subspace (rows of the basis) and each normal's distance to it."""
    if dim == 0:
        return np.zeros((0, normals.shape[1]), complex), np.linalg.norm(normals, axis=1)
    _, _, vh = np.linalg.svd(normals)
    basis = vh[:dim]
    coef = normals @ basis.conj().T
    resid = normals - coef @ basis
    return basis, np.linalg.norm(resid, axis=1)


def classify(
    phi: HolomorphicPolynomial,
    large_centers,
    k: int,
    c: float,
    K: int,
    seed: int = 0,
    distance_constant: float = 1.0,
    indices=None,
) -> CaseReport:
    """Broad if some k caps have wedge of unit normals > c / K^(2k); otherwise narrow."""
    n = phi.dim + 1
    if not 2 <= k <= n:
        raise ValueError("need 2 <= k <= n")
    pts = [np.atleast_1d(np.asarray(p, dtype=complex)) for p in large_centers]
    idx = list(range(len(pts))) if indices is None else list(indices)
    normals = np.array([normal(phi, p).unit for p in pts]) if pts else np.zeros((0, n), complex)
    floor = c / float(K) ** (2 * k)
    m = len(pts)
    search = "exhaustive"
    if m >= k:
        if m <= EXHAUSTIVE_LIMIT:
            candidates = itertools.combinations(range(m), k)
        else:
            search = "greedy+random"
            candidates = _greedy_then_random(normals, k, seed)
        for tup in candidates:
            w = linalg.wedge(normals[list(tup)])
            if w > floor:
                return CaseReport("broad", idx, tuple(idx[t] for t in tup), w, search=search)
    if m == 0:
        return CaseReport("narrow", idx, max_distance=0.0, constant=0.0, search=search)
    basis, dist = fit_subspace(normals, k - 1)
    md = float(dist.max())
    return CaseReport(
        "narrow", idx, max_distance=md, constant=md * K, ambiguous=md > distance_constant / K,
        search=search, subspace=basis,
    )


def _greedy_then_random(normals: np.ndarray, k: int, seed: int):
    m = normals.shape[0]
    chosen = [0]
    while len(chosen) < k:
        best, best_w = None, -1.0
        for j in range(m):
            if j in chosen:
                continue
            w = linalg.wedge(normals[chosen + [j]])
            if w > best_w:
                best, best_w = j, w
        chosen.append(best)
    yield tuple(chosen)
    rng = np.random.default_rng(seed)
    for _ in range(RANDOM_TUPLES):
        yield tuple(rng.choice(m, size=k, replace=False))


@dataclass
class NarrowCountReport:
    passed: bool
    max_counts: dict
    constant: float
    slope: float | None
    bound: float


def narrow_count_check(reports_by_K: dict, k: int, bound: float = 10.0, enforce: bool = True) -> NarrowCountReport:
    """``#Q_l <= C K^(2k-4)`` over narrow boxes, plus a log-log slope check across K."""
    counts = {}
    for K, reports in sorted(reports_by_K.items()):
        narrow = [len(r.large) for r in reports if r.kind == "narrow"]
        counts[K] = max(narrow, default=0)
    constant = max((cnt / float(K) ** (2 * k - 4) for K, cnt in counts.items()), default=0.0)
    pos = [(K, cnt) for K, cnt in counts.items() if cnt > 0]
    slope = None
    if len(pos) >= 2:
        slope = float(np.polyfit(np.log([p[0] for p in pos]), np.log([p[1] for p in pos]), 1)[0])
    ok = constant <= bound and (slope is None or slope <= 2 * k - 4 + 0.5)
    return NarrowCountReport(ok or not enforce, counts, constant, slope, bound)


# exponents ----------------------------------------------------------------


def exponent_threshold(n: int, k: int) -> Fraction:
    """``max(2(n-k+2)/(n-k+1), 2k/(k-1))`` as an exact fraction."""
    if not 2 <= k <= n - 1:
        raise ValueError(f"k must lie in [2, {n - 1}]")
    return max(Fraction(2 * (n - k + 2), n - k + 1), Fraction(2 * k, k - 1))


def optimal_k(n: int) -> int:
    if n < 3:
        raise ValueError("need n >= 3")
    if n % 2 == 0:
        return n // 2 + 1
    return min(range(2, n), key=lambda k: (exponent_threshold(n, k), k))


# pipeline -----------------------------------------------------------------


@dataclass
class BGResult:
    K: int
    reports: list
    comparability: float
    coefficients: np.ndarray = field(repr=False)


def run_pipeline(phi, f, K: int, R: float, k: int = 2, c: float = 1e-2, quad=QuadratureSpec(), seed: int = 0) -> BGResult:
    """Coefficients, split and classification for every box of Q(0,R)."""
    n = phi.dim + 1
    caps, boxes = build_grids(n, K, R)
    centers = np.array(list(boxes.centers()))
    coeff, sampled = coefficient_table(phi, f, caps, centers, K, quad, seed=seed)
    cap_pts = linalg.complexify(caps.centers())
    reports = []
    for b in range(centers.shape[0]):
        _, large = split_caps(coeff[b], K, n)
        reports.append(classify(phi, cap_pts[large], k, c, K, seed=seed + b, indices=large))
    return BGResult(K, reports, comparability_ratio(coeff, sampled), coeff)
