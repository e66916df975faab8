"""Extension operator on complex hypersurfaces by tensor-product quadrature.

    E_D f(w) = int_D exp(i w . (z, phi(z))) f(z) dz,   w in C^n,

where ``.`` is the real pairing ``Re sum w_j conj(v_j)``, so the phase equals
``<w', x> + s phi_1(x) + t phi_2(x)`` with ``w_n = s + i t``.

The tensor-product sum factorizes over groups of real coordinates that are
not coupled by the phase or the amplitude; each group is summed on its own
grid and the group sums are multiplied. This is the same quadrature sum,
evaluated without materializing the full grid.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from . import linalg
from .parallel import chunk_bounds, ordered_map
from .surface import HolomorphicPolynomial, cgrad

log = logging.getLogger(__name__)

CHUNK = 1 << 18
MAX_GROUP_POINTS = 200_000_000
MIN_RESCALE_POINTS = 16
DEFAULT_T_VALUES = (8.0, 12.0, 18.0, 27.0, 40.0, 60.0, 91.0, 128.0)


class QuadratureError(ValueError):
    """Raised when the requested quadrature is under-resolved or over budget."""


@dataclass(frozen=True)
class DomainBox:
    center: np.ndarray
    half_widths: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        h = np.broadcast_to(np.asarray(self.half_widths, dtype=float), c.shape).copy()
        if np.any(h <= 0) or np.any(h > 2):
            raise ValueError("half-widths must lie in (0, 2]")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "half_widths", h)

    @classmethod
    def cube(cls, a, side: float) -> "DomainBox":
        """Q(a, side): the cube centred at complex point a with the given side length."""
        a = np.atleast_1d(np.asarray(a, dtype=complex))
        return cls(linalg.realify(a), np.full(2 * a.size, side / 2.0))

    @property
    def dim_real(self) -> int:
        return self.center.size

    @property
    def volume(self) -> float:
        return float(np.prod(2 * self.half_widths))

    def grid_samples(self, per_axis: int = 9, cap: int = 100_000) -> np.ndarray:
        n = self.dim_real
        while per_axis > 2 and per_axis**n > cap:
            per_axis -= 1
        axes = [np.linspace(c - h, c + h, per_axis) for c, h in zip(self.center, self.half_widths)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)


# amplitudes ---------------------------------------------------------------


class Amplitude:
    """Density f on the parameter domain, evaluated factor by factor.

    ``coupled_coords`` lists coordinate sets that must be summed together;
    ``factor(coords, x)`` returns the part of f depending on ``coords`` only.
    """

    kind = "abstract"
    scale: float = 1.0

    def coupled_coords(self, n_real: int) -> list[set[int]]:
        return []

    def factor(self, coords: tuple[int, ...], x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        n = x.shape[-1]
        coords = tuple(range(n))
        return self.scale * self.factor(coords, x)

    def rescaled(self, a, r: float) -> "Amplitude":
        """``u -> r^(2m) f(a + r u)`` for a complex centre a."""
        return Composed(self, linalg.realify(np.atleast_1d(np.asarray(a, dtype=complex))), r)

    def scaled(self, factor: float) -> "Amplitude":
        return Scaled(self, factor)


@dataclass
class Indicator(Amplitude):
    scale: float = 1.0
    kind = "indicator"

    def factor(self, coords, x):
        return np.ones(x.shape[0])


@dataclass
class Gaussian(Amplitude):
    """``exp(-|x - center|^2 / (2 sigma^2))``; the centre defaults to the origin."""

    sigma: float
    center: np.ndarray | None = None
    scale: float = 1.0
    kind = "gaussian"

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")

    def factor(self, coords, x):
        c = np.zeros(len(coords)) if self.center is None else np.asarray(self.center, dtype=float)[list(coords)]
        return np.exp(-np.sum((x - c) ** 2, axis=-1) / (2 * self.sigma**2))


@dataclass
class PolynomialAmplitude(Amplitude):
    """Polynomial in the real coordinates: ``{multi-index over 2m coords: coefficient}``."""

    coeffs: dict
    scale: float = 1.0
    kind = "polynomial"

    @cached_property
    def _vars(self) -> set[int]:
        return {i for alpha in self.coeffs for i, a in enumerate(alpha) if a}

    def coupled_coords(self, n_real):
        return [set(self._vars)] if self._vars else []

    def factor(self, coords, x):
        if not self._vars.issubset(coords):
            if self._vars.isdisjoint(coords):
                return np.ones(x.shape[0])
            raise ValueError("polynomial amplitude factor requested on a partial coordinate group")
        pos = {c: k for k, c in enumerate(coords)}
        out = np.zeros(x.shape[0], dtype=complex)
        for alpha, c in self.coeffs.items():
            term = np.full(x.shape[0], complex(c))
            for i, a in enumerate(alpha):
                if a:
                    term = term * x[:, pos[i]] ** a
            out += term
        return out if np.any(out.imag) else out.real


@dataclass
class Tabulated(Amplitude):
    """Multilinear interpolation of grid values; zero outside the grid."""

    axes: tuple
    values: np.ndarray
    scale: float = 1.0
    kind = "tabulated"

    @cached_property
    def _interp(self):
        return RegularGridInterpolator(self.axes, self.values, bounds_error=False, fill_value=0.0)

    def coupled_coords(self, n_real):
        return [set(range(len(self.axes)))]

    def factor(self, coords, x):
        if len(coords) != len(self.axes):
            if set(coords).isdisjoint(range(len(self.axes))):
                return np.ones(x.shape[0])
            raise ValueError("tabulated amplitude factor requested on a partial coordinate group")
        order = np.argsort(coords)
        return self._interp(x[:, order])


@dataclass
class Composed(Amplitude):
    base: Amplitude
    shift: np.ndarray
    r: float
    kind = "composed"

    @property
    def scale(self) -> float:
        return self.base.scale * self.r ** self.shift.size

    def coupled_coords(self, n_real):
        return self.base.coupled_coords(n_real)

    def factor(self, coords, x):
        return self.base.factor(coords, self.shift[list(coords)] + self.r * x)


@dataclass
class Scaled(Amplitude):
    base: Amplitude
    by: float
    kind = "scaled"

    @property
    def scale(self) -> float:
        return self.base.scale * self.by

    def coupled_coords(self, n_real):
        return self.base.coupled_coords(n_real)

    def factor(self, coords, x):
        return self.base.factor(coords, x)


# phase --------------------------------------------------------------------


def real_expansion(phi: HolomorphicPolynomial) -> dict[tuple[int, ...], complex]:
    """Coefficients of phi in the real monomials of (x_1, y_1, ..., x_m, y_m)."""
    m = phi.dim
    out: dict[tuple[int, ...], complex] = {}
    for alpha, c in phi.coeffs.items():
        partial = {(0,) * (2 * m): complex(c)}
        for j, a in enumerate(alpha):
            if not a:
                continue
            nxt: dict[tuple[int, ...], complex] = {}
            for beta, coef in partial.items():
                for k in range(a + 1):
                    b = list(beta)
                    b[2 * j] += a - k
                    b[2 * j + 1] += k
                    key = tuple(b)
                    nxt[key] = nxt.get(key, 0j) + coef * math.comb(a, k) * (1j**k)
            partial = nxt
        for beta, coef in partial.items():
            out[beta] = out.get(beta, 0j) + coef
    return out


@dataclass
class _Phase:
    linear: np.ndarray  # real 2m
    terms: list  # (exponent tuple over 2m, real coefficient)

    def coupled_coords(self) -> list[set[int]]:
        groups = []
        for beta, _ in self.terms:
            vars_ = {i for i, b in enumerate(beta) if b}
            if len(vars_) > 1:
                groups.append(vars_)
        return groups

    def evaluate(self, coords: tuple[int, ...], x: np.ndarray) -> np.ndarray:
        pos = {c: k for k, c in enumerate(coords)}
        out = x @ self.linear[list(coords)]
        for beta, coef in self.terms:
            vars_ = [i for i, b in enumerate(beta) if b]
            if not vars_ or not all(v in pos for v in vars_):
                continue
            term = np.full(x.shape[0], coef)
            for v in vars_:
                term = term * x[:, pos[v]] ** beta[v]
            out = out + term
        return out


def _phase(phi: HolomorphicPolynomial, w: np.ndarray) -> tuple[_Phase, float]:
    m2 = 2 * phi.dim
    wn = complex(w[m2], w[m2 + 1])
    terms = []
    const = 0.0
    for beta, coef in real_expansion(phi).items():
        val = (np.conj(wn) * coef).real
        if val == 0.0:
            continue
        if not any(beta):
            const += val
        else:
            terms.append((beta, val))
    return _Phase(linear=np.asarray(w[:m2], dtype=float), terms=terms), const


def _groups(n: int, coupled: list[set[int]]) -> list[tuple[int, ...]]:
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for g in coupled:
        g = sorted(g)
        for a in g[1:]:
            ra, rb = find(g[0]), find(a)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    out: dict[int, list[int]] = {}
    for i in range(n):
        out.setdefault(find(i), []).append(i)
    return [tuple(v) for _, v in sorted(out.items())]


# quadrature ---------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureSpec:
    """Tensor-product rule; ``points_per_axis=None`` picks the minimal resolved count."""

    points_per_axis: int | None = None
    rule: str = "midpoint"
    nyquist_factor: float = 8.0
    workers: int = 1

    def __post_init__(self):
        if self.rule not in ("midpoint", "gauss-legendre"):
            raise ValueError(f"unknown rule {self.rule!r}")
        if self.nyquist_factor < 4:
            raise ValueError("nyquist_factor must be >= 4")
        if self.points_per_axis is not None and self.points_per_axis < 1:
            raise ValueError("points_per_axis must be positive")


def sup_gradient(phi: HolomorphicPolynomial, box: DomainBox) -> float:
    """Grid estimate of sup |grad phi| over the box (corners included)."""
    if phi.degree <= 1:
        return float(np.linalg.norm(cgrad(phi, np.zeros(phi.dim)))) if phi.coeffs else 0.0
    z = linalg.complexify(box.grid_samples())
    return float(np.max(np.linalg.norm(cgrad(phi, z), axis=-1)))


def required_points(phi: HolomorphicPolynomial, box: DomainBox, w, nyquist_factor: float) -> np.ndarray:
    """Per-axis node counts demanded by the resolution invariant."""
    w = np.asarray(w, dtype=float)
    density = nyquist_factor * (1 + np.linalg.norm(w) * (1 + sup_gradient(phi, box))) / (2 * np.pi)
    return np.maximum(np.ceil(density * 2 * box.half_widths).astype(int), 1)


def _nodes(rule: str, count: int, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
    h = hi - lo
    if rule == "midpoint":
        x = lo + (np.arange(count) + 0.5) * (h / count)
        return x, np.full(count, h / count)
    x, wts = np.polynomial.legendre.leggauss(count)
    return lo + (x + 1) * (h / 2), wts * (h / 2)


def _group_sum(coords, nodes, weights, phase: _Phase, amp: Amplitude, workers: int) -> complex:
    counts = [nodes[c].size for c in coords]
    total = int(np.prod(counts))
    if total > MAX_GROUP_POINTS:
        raise QuadratureError(f"coordinate group {coords} needs {total} nodes (> {MAX_GROUP_POINTS})")
    bounds = chunk_bounds(total, CHUNK)

    def chunk(i):
        lo, hi = bounds[i]
        idx = np.unravel_index(np.arange(lo, hi), counts)
        x = np.stack([nodes[c][k] for c, k in zip(coords, idx)], axis=-1)
        wt = np.prod([weights[c][k] for c, k in zip(coords, idx)], axis=0)
        vals = wt * amp.factor(coords, x) * np.exp(1j * phase.evaluate(coords, x))
        return complex(np.sum(vals))

    acc = 0j
    for part in ordered_map(chunk, len(bounds), workers):
        acc += part
    return acc


def extend(
    phi: HolomorphicPolynomial,
    box: DomainBox,
    f: Amplitude,
    w,
    quad: QuadratureSpec = QuadratureSpec(),
) -> complex:
    """Evaluate E_D^phi f(w) for a realified w in R^(2n)."""
    w = np.asarray(w, dtype=float)
    m2 = 2 * phi.dim
    if w.shape != (m2 + 2,):
        raise ValueError(f"w must be a real vector of length {m2 + 2}")
    if box.dim_real != m2:
        raise ValueError("domain dimension does not match phi")
    need = required_points(phi, box, w, quad.nyquist_factor)
    if quad.points_per_axis is None:
        counts = need
    else:
        if np.any(quad.points_per_axis < need):
            raise QuadratureError(
                f"under-resolved quadrature: {quad.points_per_axis} points per axis, "
                f"need {int(need.max())} for |w| = {np.linalg.norm(w):.6g}"
            )
        counts = np.full(m2, quad.points_per_axis)
    nodes, weights = [], []
    for i in range(m2):
        c, h = box.center[i], box.half_widths[i]
        x, wt = _nodes(quad.rule, int(counts[i]), c - h, c + h)
        nodes.append(x)
        weights.append(wt)
    phase, const = _phase(phi, w)
    groups = _groups(m2, phase.coupled_coords() + f.coupled_coords(m2))
    result = complex(f.scale) * np.exp(1j * const)
    for coords in groups:
        result *= _group_sum(coords, nodes, weights, phase, f, quad.workers)
    return complex(result)


# decay --------------------------------------------------------------------


@dataclass
class DecayFitResult:
    exponent: float
    intercept: float
    residual: float
    t_values: list[float]
    magnitudes: list[float] = field(default_factory=list)

    @property
    def t_range(self) -> tuple[float, float]:
        return (min(self.t_values), max(self.t_values))


class DecayFitError(ValueError):
    pass


def decay_fit(
    phi: HolomorphicPolynomial,
    f: Amplitude,
    ray=(1.0, 0.0),
    t_values=DEFAULT_T_VALUES,
    quad: QuadratureSpec = QuadratureSpec(),
    box: DomainBox | None = None,
) -> DecayFitResult:
    """Slope of log|E f(0, t ray)| against log t."""
    ray = np.asarray(ray, dtype=float)
    ray = ray / np.linalg.norm(ray)
    t_values = [float(t) for t in t_values]
    if len(t_values) < 6:
        raise ValueError("decay fit needs at least 6 t values")
    if box is None:
        box = DomainBox(np.zeros(2 * phi.dim), 1.0)
    if isinstance(f, Indicator):
        warnings.warn("indicator amplitudes add boundary terms to the decay rate", stacklevel=2)
    mags = []
    for t in t_values:
        w = np.zeros(2 * phi.dim + 2)
        w[-2:] = t * ray
        val = abs(extend(phi, box, f, w, quad))
        if val < 1e-13:
            raise DecayFitError(f"|E| = {val:.3g} at t = {t:g} is below 1e-13; fit unstable")
        log.debug("t=%g |E|=%.17g", t, val)
        mags.append(val)
    lt, lm = np.log(t_values), np.log(mags)
    slope, intercept = np.polyfit(lt, lm, 1)
    resid = float(np.sqrt(np.mean((lm - (slope * lt + intercept)) ** 2)))
    return DecayFitResult(float(slope), float(intercept), resid, t_values, mags)


# parabolic rescaling ------------------------------------------------------


def rescale_radius_limit(M, n: int) -> float:
    """``(sqrt(d) (1 + 2 ||M||))^-1`` with d = 2n the real ambient dimension."""
    return 1.0 / (math.sqrt(2 * n) * (1 + 2 * np.linalg.norm(np.asarray(M), 2)))


def rescaled_frequency(M, a, r: float, w) -> np.ndarray:
    """``(r (w' + w_n conj(grad psi(a))), r^2 w_n)`` realified, for psi(z) = z^t M z."""
    M = np.asarray(M, dtype=complex)
    a = np.atleast_1d(np.asarray(a, dtype=complex))
    wc = linalg.complexify(np.asarray(w, dtype=float))
    w_head, wn = wc[:-1], wc[-1]
    grad = 2 * M @ a
    head = r * (w_head + wn * np.conj(grad))
    return linalg.realify(np.append(head, r * r * wn))


def parabolic_rescale_check(M, a, r: float, f: Amplitude, w, quad: QuadratureSpec = QuadratureSpec(rule="gauss-legendre")):
    """``|E_{Q(a,r)} f(w)|`` against ``|E_{Q(0,1)} f_{a,r}(w~)|`` for psi(z) = z^t M z."""
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    a = np.atleast_1d(np.asarray(a, dtype=complex))
    n = M.shape[0] + 1
    identity_case = np.all(a == 0) and r == 1
    if not identity_case and r >= rescale_radius_limit(M, n):
        raise ValueError(f"r = {r} must be below {rescale_radius_limit(M, n):.6g}")
    psi = HolomorphicPolynomial.quadratic(M)
    w = np.asarray(w, dtype=float)
    w_tilde = rescaled_frequency(M, a, r, w)
    small, unit = DomainBox.cube(a, r), DomainBox.cube(np.zeros_like(a), 1.0)
    if quad.points_per_axis is None:
        # one node count for both sides, resolving each of them
        need = max(
            int(required_points(psi, small, w, quad.nyquist_factor).max()),
            int(required_points(psi, unit, w_tilde, quad.nyquist_factor).max()),
            MIN_RESCALE_POINTS,
        )
        quad = QuadratureSpec(need, quad.rule, quad.nyquist_factor, quad.workers)
    lhs = abs(extend(psi, small, f, w, quad))
    rhs = abs(extend(psi, unit, f.rescaled(a, r), w_tilde, quad))
    return lhs, rhs


def extend_batch(
    phi: HolomorphicPolynomial,
    box: DomainBox,
    f: Amplitude,
    ws,
    quad: QuadratureSpec = QuadratureSpec(),
    max_work: int = 50_000_000,
) -> np.ndarray:
    """E_D f at many frequencies on one shared full tensor grid (small domains)."""
    ws = np.atleast_2d(np.asarray(ws, dtype=float))
    m2 = 2 * phi.dim
    if ws.shape[1] != m2 + 2:
        raise ValueError(f"frequencies must have length {m2 + 2}")
    wmax = ws[np.argmax(np.linalg.norm(ws, axis=1))]
    need = required_points(phi, box, wmax, quad.nyquist_factor)
    if quad.points_per_axis is not None:
        if np.any(quad.points_per_axis < need):
            raise QuadratureError(
                f"under-resolved quadrature: {quad.points_per_axis} points per axis, need {int(need.max())}"
            )
        need = np.full(m2, quad.points_per_axis)
    axes = [_nodes(quad.rule, int(c), box.center[i] - box.half_widths[i], box.center[i] + box.half_widths[i]) for i, c in enumerate(need)]
    x = np.stack(np.meshgrid(*[a[0] for a in axes], indexing="ij"), -1).reshape(-1, m2)
    wt = np.prod(np.stack(np.meshgrid(*[a[1] for a in axes], indexing="ij"), -1).reshape(-1, m2), axis=1)
    if x.shape[0] * ws.shape[0] > max_work:
        raise QuadratureError(f"batch needs {x.shape[0] * ws.shape[0]} phase evaluations (> {max_work})")
    g = wt * f.scale * f.factor(tuple(range(m2)), x)
    feats = np.hstack([x, phi.eval_real(x)])
    return np.exp(1j * (ws @ feats.T)) @ g
