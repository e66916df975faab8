"""Monte-Carlo overlap integrals for families of complex-line tubes.

A tube is the delta-neighbourhood in R^(2n) of the real 2-plane
``anchor + span{I(v), I(iv)}``. Tubes are unbounded; the integration box
[-1, 1]^(2n) does the clipping.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .parallel import chunk_bounds, ordered_map

MC_CHUNK = 1 << 14


@dataclass(frozen=True)
class ComplexLineTube:
    direction: np.ndarray
    anchor: np.ndarray
    radius: float

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.direction, dtype=complex))
        a = np.asarray(self.anchor, dtype=float)
        if abs(np.linalg.norm(v) - 1) > 1e-12:
            raise ValueError("tube direction must be a unit vector")
        if a.shape != (2 * v.size,):
            raise ValueError("anchor must be a real 2n-vector")
        if not 0 < self.radius <= 1:
            raise ValueError("radius must lie in (0, 1]")
        object.__setattr__(self, "direction", v)
        object.__setattr__(self, "anchor", a)

    @property
    def frame(self) -> np.ndarray:
        """Orthonormal 2n x 2 basis of the tube's real 2-plane."""
        return linalg.realified_frame(self.direction)

    def with_radius(self, radius: float) -> "ComplexLineTube":
        return ComplexLineTube(self.direction, self.anchor, radius)


def tube_contains(tube: ComplexLineTube, x) -> bool | np.ndarray:
    x = np.asarray(x, dtype=float)
    y = x - tube.anchor
    proj = y @ tube.frame
    dist2 = np.sum(y * y, axis=-1) - np.sum(proj * proj, axis=-1)
    return dist2 <= tube.radius**2


def line_angle(u, v) -> float:
    """Largest principal angle between the real 2-planes of two complex lines."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    c = abs(np.vdot(u, v)) / (np.linalg.norm(u) * np.linalg.norm(v))
    return float(np.arccos(min(c, 1.0)))


@dataclass
class TubeFamily:
    tubes: list
    base: np.ndarray
    nu: float

    def __post_init__(self):
        self.base = np.asarray(self.base, dtype=complex)
        self.base = self.base / np.linalg.norm(self.base)
        for t in self.tubes:
            if line_angle(t.direction, self.base) > self.nu + 1e-12:
                raise ValueError("tube direction outside the nu-neighbourhood of the base line")

    def __len__(self) -> int:
        return len(self.tubes)

    def with_radius(self, radius: float) -> "TubeFamily":
        return TubeFamily([t.with_radius(radius) for t in self.tubes], self.base, self.nu)

    def straightened(self, radius: float) -> "TubeFamily":
        """Same anchors, every direction replaced by the base line."""
        return TubeFamily([ComplexLineTube(self.base, t.anchor, radius) for t in self.tubes], self.base, self.nu)

    def max_angle(self) -> float:
        return max((line_angle(t.direction, self.base) for t in self.tubes), default=0.0)

    def _arrays(self):
        anchors = np.stack([t.anchor for t in self.tubes])
        frames = np.stack([t.frame for t in self.tubes])  # T x 2n x 2
        radii = np.array([t.radius for t in self.tubes])
        return anchors, frames, radii


def sample_tube_family(base, nu: float, count: int, delta: float, seed: int) -> TubeFamily:
    """Directions at Hermitian angle ``nu * U`` (U uniform) from ``base``; anchors uniform in the box."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if not 0 <= nu <= 0.5:
        raise ValueError("nu must lie in [0, 0.5]")
    base = np.asarray(base, dtype=complex)
    base = base / np.linalg.norm(base)
    n = base.size
    rng = np.random.default_rng(seed)
    tubes = []
    for _ in range(count):
        g = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        g = g - np.vdot(base, g) * base
        g = g / np.linalg.norm(g)
        theta = nu * rng.uniform()
        v = math.cos(theta) * base + math.sin(theta) * g
        v = v / np.linalg.norm(v)
        anchor = rng.uniform(-1.0, 1.0, 2 * n)
        tubes.append(ComplexLineTube(v, anchor, delta))
    return TubeFamily(tubes, base, nu)


def _prepare(fam: TubeFamily):
    anchors, frames, radii = fam._arrays()
    t, d, _ = frames.shape
    ae = np.einsum("td,tde->te", anchors, frames)
    # dist^2 = |x|^2 - |x E|^2 - 2 x.(a - E E^t a) + |a|^2 - |E^t a|^2
    lin = anchors - np.einsum("tde,te->td", frames, ae)
    const = np.sum(anchors**2, axis=1) - np.sum(ae**2, axis=1)
    flat = frames.transpose(1, 0, 2).reshape(d, 2 * t)
    return flat, (2 * lin).T.copy(), radii**2 - const


def _family_counts(x: np.ndarray, fam) -> np.ndarray:
    flat, lin2, bound = fam if isinstance(fam, tuple) else _prepare(fam)
    xe = x @ flat
    xe *= xe
    quad = xe[:, 0::2] + xe[:, 1::2]
    quad += x @ lin2
    quad -= np.sum(x * x, axis=1)[:, None]
    return np.count_nonzero(quad >= -bound[None], axis=1)


def kakeya_integral(families, samples: int, seed: int, workers: int = 1) -> tuple[float, float]:
    """MC estimate of ``int_[-1,1]^2n prod_j (#tubes of family j at x)^(1/(k-1))`` and its standard error."""
    families = list(families)
    k = len(families)
    if k < 2:
        raise ValueError("need k >= 2 families")
    if samples < 10_000:
        raise ValueError("need at least 1e4 samples")
    if any(len(f) == 0 for f in families):
        return 0.0, 0.0
    d = families[0].tubes[0].anchor.size
    power = 1.0 / (k - 1)
    bounds = chunk_bounds(samples, MC_CHUNK)
    prepared = [_prepare(f) for f in families]

    def chunk(i):
        lo, hi = bounds[i]
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, i])))
        x = rng.uniform(-1.0, 1.0, (hi - lo, d))
        val = np.ones(hi - lo)
        for fam in prepared:
            val = val * _family_counts(x, fam) ** power
        return float(np.sum(val)), float(np.sum(val * val))

    s1 = s2 = 0.0
    for a, b in ordered_map(chunk, len(bounds), workers):
        s1 += a
        s2 += b
    vol = 2.0**d
    mean = s1 / samples
    var = max(s2 / samples - mean * mean, 0.0) * samples / (samples - 1)
    return vol * mean, vol * math.sqrt(var / samples)


@dataclass
class KakeyaReport:
    k: int
    n: int
    delta: float
    counts: list
    estimate: float
    stderr: float
    samples: int
    seed: int

    @property
    def constant(self) -> float:
        denom = self.delta ** (2 * self.n) * math.prod(c ** (1.0 / (self.k - 1)) for c in self.counts)
        return self.estimate / denom if denom else 0.0

    @property
    def constant_stderr(self) -> float:
        return self.stderr * (self.constant / self.estimate) if self.estimate else 0.0


class TransversalityFloorError(ValueError):
    def __init__(self, tuple_index, value, floor):
        super().__init__(f"tube tuple {tuple_index} has wedge {value:.6g} below the floor {floor:g}")
        self.tuple_index = tuple_index
        self.value = value


def check_transversality(families, c: float):
    """Raise on the first tuple of tube directions (one per family) with wedge < c."""
    dirs = [[t.direction for t in fam.tubes] for fam in families]
    for idx in itertools.product(*(range(len(d)) for d in dirs)):
        w = linalg.wedge([dirs[j][i] for j, i in enumerate(idx)])
        if w < c:
            raise TransversalityFloorError(idx, w, c)


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)
    epsilon: float | None = None

    def to_rows(self):
        return [(r.delta, r.constant, r.constant_stderr, r.samples) for r in self.rows]


def default_bases(k: int, n: int) -> list[np.ndarray]:
    return [np.eye(n, dtype=complex)[j] for j in range(k)]


def kakeya_sweep(
    k: int,
    n: int,
    deltas,
    family_size: int,
    nu: float,
    c: float,
    seed: int,
    samples: int = 10_000_000,
    bases=None,
    workers: int = 1,
) -> SweepResult:
    """C(delta) per delta; epsilon is the slope of log C against log(1/delta)."""
    if not 2 <= k <= n:
        raise ValueError("need 2 <= k <= n")
    bases = default_bases(k, n) if bases is None else [np.asarray(b, dtype=complex) for b in bases]
    if linalg.wedge([b / np.linalg.norm(b) for b in bases]) < c:
        raise TransversalityFloorError(tuple(range(k)), linalg.wedge(bases), c)
    out = SweepResult()
    for i, delta in enumerate(deltas):
        fams = [sample_tube_family(b, nu, family_size, delta, seed + 1000 * j) for j, b in enumerate(bases)]
        check_transversality(fams, c)
        est, err = kakeya_integral(fams, samples, seed + i, workers)
        out.rows.append(KakeyaReport(k, n, float(delta), [len(f) for f in fams], est, err, samples, seed + i))
    if len(out.rows) >= 2:
        x = np.log([1.0 / r.delta for r in out.rows])
        y = np.log([r.constant for r in out.rows])
        out.epsilon = float(np.polyfit(x, y, 1)[0])
    return out


@dataclass
class InductionReport:
    lhs: float
    rhs: float
    lhs_stderr: float
    rhs_stderr: float
    straightened: float | None

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs else math.inf


def induction_ratio(delta: float, nu: float, families, samples: int = 10_000_000, seed: int = 0, workers: int = 1) -> InductionReport:
    """C at radius delta against C at radius delta/nu for the same families.

    The straightened value (base directions, radius delta/nu) is reported as a diagnostic.
    """
    if not 0 < nu <= 1 or delta / nu > 1:
        raise ValueError("need 0 < nu <= 1 and delta/nu <= 1")
    families = list(families)
    if not families or any(len(f) == 0 for f in families):
        return InductionReport(0.0, 0.0, 0.0, 0.0, None)
    k = len(families)
    n = families[0].base.size
    counts = [len(f) for f in families]

    def measure(fams, radius):
        est, err = kakeya_integral(fams, samples, seed, workers)
        rep = KakeyaReport(k, n, radius, counts, est, err, samples, seed)
        return rep.constant, rep.constant_stderr

    lhs, lerr = measure([f.with_radius(delta) for f in families], delta)
    big = delta / nu
    rhs, rerr = measure([f.with_radius(big) for f in families], big)
    straight = None
    if nu < 1:
        straight = measure([f.straightened(big) for f in families], big)[0]
    return InductionReport(lhs, rhs, lerr, rerr, straight)


def grid_oracle(families, per_axis: int) -> float:
    """Midpoint-grid value of the overlap integral (for small configurations)."""
    families = list(families)
    k = len(families)
    d = families[0].tubes[0].anchor.size
    h = 2.0 / per_axis
    axis = -1 + h * (np.arange(per_axis) + 0.5)
    total = 0.0
    # sweep the first coordinate to bound memory
    rest = np.stack(np.meshgrid(*([axis] * (d - 1)), indexing="ij"), -1).reshape(-1, d - 1)
    for x0 in axis:
        x = np.hstack([np.full((rest.shape[0], 1), x0), rest])
        val = np.ones(x.shape[0])
        for fam in families:
            val = val * _family_counts(x, fam) ** (1.0 / (k - 1))
        total += float(val.sum())
    return total * h**d
