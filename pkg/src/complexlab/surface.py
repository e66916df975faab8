"""Holomorphic polynomial surface generators phi: C^m -> C (m = n - 1).

A point ``z`` of C^m is identified with the real vector
``(x_1, y_1, ..., x_m, y_m)``; ``phi_1 = Re phi`` and ``phi_2 = Im phi``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from . import linalg

MAX_DEGREE = 8
HESSIAN_SINGULAR_TOL = 1e-8


class HolomorphicPolynomial:
    """Polynomial ``sum_alpha c_alpha z^alpha`` in ``dim`` complex variables."""

    def __init__(self, dim: int, coeffs: Mapping[tuple[int, ...], complex], max_degree: int = MAX_DEGREE):
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        terms: dict[tuple[int, ...], complex] = {}
        for alpha, c in coeffs.items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != dim or min(alpha) < 0:
                raise ValueError(f"bad multi-index {alpha} for dimension {dim}")
            if sum(alpha) > max_degree:
                raise ValueError(f"degree {sum(alpha)} exceeds cap {max_degree}")
            c = complex(c)
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise ValueError(f"non-finite coefficient at {alpha}")
            if c != 0:
                terms[alpha] = terms.get(alpha, 0j) + c
        self.dim = dim
        self.max_degree = max_degree
        self.coeffs: dict[tuple[int, ...], complex] = {a: c for a, c in sorted(terms.items()) if c != 0}
        if self.coeffs:
            self._exps = np.array(list(self.coeffs), dtype=int)
            self._vals = np.array(list(self.coeffs.values()), dtype=complex)
        else:
            self._exps = np.zeros((0, dim), dtype=int)
            self._vals = np.zeros(0, dtype=complex)

    # construction helpers -------------------------------------------------

    @classmethod
    def quadratic(cls, M) -> "HolomorphicPolynomial":
        """``z^t M z`` for a symmetric complex matrix M."""
        M = np.asarray(M, dtype=complex)
        m = M.shape[0]
        coeffs: dict[tuple[int, ...], complex] = {}
        for i in range(m):
            for j in range(m):
                alpha = [0] * m
                alpha[i] += 1
                alpha[j] += 1
                coeffs[tuple(alpha)] = coeffs.get(tuple(alpha), 0j) + M[i, j]
        return cls(m, coeffs)

    @classmethod
    def sum_of_squares(cls, m: int, scale: complex = 1.0) -> "HolomorphicPolynomial":
        return cls.quadratic(scale * np.eye(m))

    @classmethod
    def random(cls, dim: int, degree: int, rng: np.random.Generator, scale: float = 1.0) -> "HolomorphicPolynomial":
        coeffs = {}
        for alpha in multi_indices(dim, 0, degree):
            coeffs[alpha] = scale * complex(rng.standard_normal(), rng.standard_normal())
        return cls(dim, coeffs)

    @property
    def degree(self) -> int:
        return int(self._exps.sum(axis=1).max()) if self.coeffs else 0

    def __repr__(self) -> str:
        return f"HolomorphicPolynomial(dim={self.dim}, terms={len(self.coeffs)})"

    def __eq__(self, other) -> bool:
        return isinstance(other, HolomorphicPolynomial) and self.dim == other.dim and self.coeffs == other.coeffs

    def __add__(self, other: "HolomorphicPolynomial") -> "HolomorphicPolynomial":
        self._check_dim(other.dim)
        out = dict(self.coeffs)
        for a, c in other.coeffs.items():
            out[a] = out.get(a, 0j) + c
        return HolomorphicPolynomial(self.dim, out, max(self.max_degree, other.max_degree))

    def __sub__(self, other: "HolomorphicPolynomial") -> "HolomorphicPolynomial":
        return self + other.scaled(-1.0)

    def __mul__(self, other: "HolomorphicPolynomial") -> "HolomorphicPolynomial":
        self._check_dim(other.dim)
        out: dict[tuple[int, ...], complex] = {}
        for a, c in self.coeffs.items():
            for b, d in other.coeffs.items():
                key = tuple(x + y for x, y in zip(a, b))
                out[key] = out.get(key, 0j) + c * d
        return HolomorphicPolynomial(self.dim, out, self.max_degree + other.max_degree)

    def scaled(self, factor: complex) -> "HolomorphicPolynomial":
        return HolomorphicPolynomial(self.dim, {a: factor * c for a, c in self.coeffs.items()}, self.max_degree)

    def _check_dim(self, m: int) -> None:
        if m != self.dim:
            raise ValueError(f"dimension mismatch: polynomial in {self.dim} variables, got {m}")

    # evaluation -----------------------------------------------------------

    def __call__(self, z) -> complex | np.ndarray:
        return self.eval(z)

    def eval(self, z) -> complex | np.ndarray:
        """Evaluate at one point (shape (m,)) or a batch (shape (..., m))."""
        z = np.asarray(z, dtype=complex)
        self._check_dim(z.shape[-1])
        if not self.coeffs:
            out = np.zeros(z.shape[:-1], dtype=complex)
            return complex(out) if out.ndim == 0 else out
        deg = int(self._exps.max())
        # powers[p, ..., j] = z_j ** p
        powers = np.ones((deg + 1,) + z.shape, dtype=complex)
        for p in range(1, deg + 1):
            powers[p] = powers[p - 1] * z
        out = np.zeros(z.shape[:-1], dtype=complex)
        for alpha, c in zip(self._exps, self._vals):
            term = np.full(z.shape[:-1], c, dtype=complex)
            for j, a in enumerate(alpha):
                if a:
                    term = term * powers[a, ..., j]
            out = out + term
        return complex(out) if out.ndim == 0 else out

    def eval_real(self, x) -> np.ndarray:
        """``(phi_1, phi_2)`` at realified points, shape (..., 2)."""
        val = self.eval(linalg.complexify(x))
        return np.stack([np.real(val), np.imag(val)], axis=-1)

    # calculus -------------------------------------------------------------

    def derivative(self, alpha) -> "HolomorphicPolynomial":
        """Complex partial derivative ``d^alpha phi`` computed on coefficients."""
        alpha = tuple(int(a) for a in alpha)
        self._check_dim(len(alpha))
        out = {}
        for beta, c in self.coeffs.items():
            if all(b >= a for a, b in zip(alpha, beta)):
                factor = 1
                for a, b in zip(alpha, beta):
                    factor *= math.perm(b, a)
                out[tuple(b - a for a, b in zip(alpha, beta))] = c * factor
        return HolomorphicPolynomial(self.dim, out, self.max_degree)

    def gradient_polys(self) -> list["HolomorphicPolynomial"]:
        return [self.derivative(_unit(self.dim, j)) for j in range(self.dim)]

    def compose_affine(self, A, b=None) -> "HolomorphicPolynomial":
        """``z -> phi(A z + b)`` expanded into coefficients."""
        A = np.asarray(A, dtype=complex)
        m = self.dim
        if A.shape != (m, m):
            raise ValueError(f"affine map must be {m}x{m}")
        b = np.zeros(m, complex) if b is None else np.asarray(b, dtype=complex)
        linear = []
        for i in range(m):
            coeffs = {tuple(_unit(m, j)): A[i, j] for j in range(m)}
            coeffs[(0,) * m] = b[i]
            linear.append(HolomorphicPolynomial(m, coeffs, self.max_degree))
        one = HolomorphicPolynomial(m, {(0,) * m: 1.0}, self.max_degree)
        powers: list[list[HolomorphicPolynomial]] = []
        deg = self.degree
        for i in range(m):
            row = [one]
            for _ in range(deg):
                row.append(_truncate(row[-1] * linear[i], self.max_degree))
            powers.append(row)
        out = HolomorphicPolynomial(m, {}, self.max_degree)
        for alpha, c in self.coeffs.items():
            term = one.scaled(c)
            for i, a in enumerate(alpha):
                if a:
                    term = _truncate(term * powers[i][a], self.max_degree)
            out = out + term
        return HolomorphicPolynomial(m, out.coeffs, self.max_degree)

    def homogeneous_part(self, low: int, high: int | None = None) -> "HolomorphicPolynomial":
        high = low if high is None else high
        return HolomorphicPolynomial(
            self.dim, {a: c for a, c in self.coeffs.items() if low <= sum(a) <= high}, self.max_degree
        )

    # serialization --------------------------------------------------------

    def to_text(self) -> str:
        lines = [f"# dim {self.dim}"]
        for alpha, c in self.coeffs.items():
            lines.append(" ".join(str(a) for a in alpha) + f" {c.real!r} {c.imag!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "HolomorphicPolynomial":
        """Parse lines ``a_1 ... a_m re im``; ``#`` starts a comment."""
        coeffs: dict[tuple[int, ...], complex] = {}
        dim = None
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) < 3:
                raise ValueError(f"line {lineno}: expected 'multi-index re im'")
            alpha = tuple(int(p) for p in parts[:-2])
            if dim is None:
                dim = len(alpha)
            elif len(alpha) != dim:
                raise ValueError(f"line {lineno}: multi-index length {len(alpha)} != {dim}")
            coeffs[alpha] = coeffs.get(alpha, 0j) + complex(float(parts[-2]), float(parts[-1]))
        if dim is None:
            m = _header_dim(text)
            if m is None:
                raise ValueError("empty polynomial file without '# dim m' header")
            dim = m
        return cls(dim, coeffs)


def _header_dim(text: str) -> int | None:
    for raw in text.splitlines():
        parts = raw.strip().lstrip("#").split()
        if len(parts) == 2 and parts[0] == "dim":
            return int(parts[1])
    return None


def _unit(m: int, j: int) -> tuple[int, ...]:
    alpha = [0] * m
    alpha[j] = 1
    return tuple(alpha)


def _truncate(p: HolomorphicPolynomial, degree: int) -> HolomorphicPolynomial:
    return HolomorphicPolynomial(p.dim, {a: c for a, c in p.coeffs.items() if sum(a) <= degree}, p.max_degree)


def multi_indices(dim: int, low: int, high: int):
    """All multi-indices of length ``dim`` with ``low <= |alpha| <= high``."""
    for total in range(low, high + 1):
        for combo in itertools.combinations_with_replacement(range(dim), total):
            alpha = [0] * dim
            for j in combo:
                alpha[j] += 1
            yield tuple(alpha)


# pointwise calculus -------------------------------------------------------


def cgrad(phi: HolomorphicPolynomial, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    phi._check_dim(z.shape[-1])
    return np.stack([np.asarray(g.eval(z)) for g in phi.gradient_polys()], axis=-1)


def chessian(phi: HolomorphicPolynomial, z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    phi._check_dim(z.shape[-1])
    m = phi.dim
    H = np.empty(z.shape[:-1] + (m, m), dtype=complex)
    for i in range(m):
        for j in range(i, m):
            alpha = [0] * m
            alpha[i] += 1
            alpha[j] += 1
            val = phi.derivative(alpha).eval(z)
            H[..., i, j] = val
            H[..., j, i] = val
    return H


@dataclass(frozen=True)
class NormalVector:
    raw: np.ndarray
    unit: np.ndarray


def normal(phi: HolomorphicPolynomial, a) -> NormalVector:
    """``(conj d_1 phi(a), ..., conj d_m phi(a), -1)`` and its normalization."""
    raw = np.append(np.conj(cgrad(phi, a)), -1.0 + 0j)
    return NormalVector(raw=raw, unit=raw / np.linalg.norm(raw))


def real_partials(phi: HolomorphicPolynomial, a) -> tuple[np.ndarray, np.ndarray]:
    """Real gradients of phi_1, phi_2 in the interleaved (x_j, y_j) order.

    By Cauchy-Riemann, ``phi' = d phi_1/dx + i d phi_2/dx`` and
    ``d phi_1/dy = -d phi_2/dx``, ``d phi_2/dy = d phi_1/dx``.
    """
    g = cgrad(phi, a)
    m = phi.dim
    d1 = np.empty(2 * m)
    d2 = np.empty(2 * m)
    d1[0::2], d1[1::2] = g.real, -g.imag
    d2[0::2], d2[1::2] = g.imag, g.real
    return d1, d2


def real_parametrization_maps(phi: HolomorphicPolynomial, a) -> np.ndarray:
    """Jacobian of ``Sigma(x) = (x, phi_1(x), phi_2(x))`` at a; shape (2n, 2n-2).

    Its transpose is the row-major block ``[I_{2n-2} | grad phi_1 | grad phi_2]``.
    """
    d1, d2 = real_partials(phi, a)
    m2 = 2 * phi.dim
    return np.vstack([np.eye(m2), d1[None, :], d2[None, :]])


RealMap = Callable[[np.ndarray], np.ndarray]


def cauchy_riemann_residual(phi: HolomorphicPolynomial | RealMap, samples, step: float = 1e-4) -> float:
    """Max Cauchy-Riemann defect by central differences of the real parametrization.

    ``phi`` may be a polynomial or any map taking realified points (..., 2m)
    to ``(phi_1, phi_2)`` pairs (..., 2).
    """
    f = phi.eval_real if isinstance(phi, HolomorphicPolynomial) else phi
    samples = np.asarray(samples)
    x = linalg.realify(samples) if np.iscomplexobj(samples) else samples.astype(float)
    x = np.atleast_2d(x)
    m2 = x.shape[-1]
    grads = np.empty(x.shape[:-1] + (m2, 2))
    for i in range(m2):
        e = np.zeros(m2)
        e[i] = step
        grads[..., i, :] = (np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2 * step)
    dx1, dy1 = grads[..., 0::2, 0], grads[..., 1::2, 0]
    dx2, dy2 = grads[..., 0::2, 1], grads[..., 1::2, 1]
    defect = np.abs(dx1 - dy2) + np.abs(dy1 + dx2)
    return float(defect.max()) if defect.size else 0.0


def real_phase_hessian(phi: HolomorphicPolynomial, z, s: float, t: float) -> np.ndarray:
    """Real Hessian of ``s phi_1 + t phi_2`` in (x-block, y-block) order.

    With ``H = A + iB`` the complex Hessian, holomorphy gives
    ``phi_1: xx=A, xy=-B, yy=-A`` and ``phi_2: xx=B, xy=A, yy=-B``.
    """
    H = chessian(phi, z)
    A, B = H.real, H.imag
    xx = s * A + t * B
    xy = -s * B + t * A
    return np.block([[xx, xy], [xy.T, -xx]])


def hessian_identity_check(phi: HolomorphicPolynomial, z, s: float, t: float) -> tuple[float, float]:
    lhs = abs(float(linalg.det(real_phase_hessian(phi, z, s, t))))
    rhs = (s * s + t * t) ** phi.dim * abs(linalg.det(chessian(phi, z))) ** 2
    return lhs, float(rhs)


def fd_phase_hessian(phi: HolomorphicPolynomial, z, s: float, t: float, step: float = 1e-3) -> np.ndarray:
    """Central-difference real Hessian of ``s phi_1 + t phi_2`` (x-block, y-block order)."""
    z = np.asarray(z, dtype=complex)
    m = phi.dim
    x0 = np.concatenate([z.real, z.imag])

    def f(x):
        v = phi.eval(x[..., :m] + 1j * x[..., m:])
        return s * np.real(v) + t * np.imag(v)

    n2 = 2 * m
    H = np.empty((n2, n2))
    eye = np.eye(n2) * step
    for i in range(n2):
        for j in range(i, n2):
            val = (
                f(x0 + eye[i] + eye[j]) - f(x0 + eye[i] - eye[j]) - f(x0 - eye[i] + eye[j]) + f(x0 - eye[i] - eye[j])
            ) / (4 * step * step)
            H[i, j] = H[j, i] = val
    return H


# normalization class ------------------------------------------------------


@dataclass(frozen=True)
class SurfaceClassSpec:
    """Class of g with g(0)=0, grad g(0)=0 and derivatives of g - z.z/2 below delta.

    ``r`` is the side length of the closed cube Q(0, r) (half-width r/2).
    """

    delta: float
    r: float
    order_cap: int | None = None  # defaults to 2n + 2 = 2 dim + 4

    def __post_init__(self):
        if not (0 < self.delta < 1):
            raise ValueError("delta must lie in (0, 1)")
        if not (0 < self.r <= 2):
            raise ValueError("r must lie in (0, 2]")


@dataclass(frozen=True)
class ClassCheckResult:
    passed: bool
    max_deviation: float
    reason: str = ""

    def __iter__(self):
        return iter((self.passed, self.max_deviation))


def class_grid(dim: int, half_width: float, per_axis: int = 5, cap: int = 100_000) -> np.ndarray:
    n_real = 2 * dim
    while per_axis > 2 and per_axis**n_real > cap:
        per_axis -= 1
    axis = np.linspace(-half_width, half_width, per_axis)
    mesh = np.stack(np.meshgrid(*([axis] * n_real), indexing="ij"), axis=-1).reshape(-1, n_real)
    return linalg.complexify(mesh)


def class_check(g: HolomorphicPolynomial, spec: SurfaceClassSpec, zero_tol: float = 1e-12) -> ClassCheckResult:
    """Grid-sampled membership test; the sup is a lower bound on the true sup."""
    m = g.dim
    if abs(g.coeffs.get((0,) * m, 0j)) > zero_tol:
        return ClassCheckResult(False, math.inf, "g(0) != 0")
    for j in range(m):
        if abs(g.coeffs.get(_unit(m, j), 0j)) > zero_tol:
            return ClassCheckResult(False, math.inf, "grad g(0) != 0")
    cap = spec.order_cap if spec.order_cap is not None else 2 * (m + 1) + 2
    half = HolomorphicPolynomial.sum_of_squares(m, 0.5)
    diff = g - half
    pts = class_grid(m, spec.r / 2)
    worst = 0.0
    for alpha in multi_indices(m, 2, cap):
        d = diff.derivative(alpha)
        if not d.coeffs:
            continue
        worst = max(worst, float(np.max(np.abs(d.eval(pts)))))
    passed = worst < spec.delta
    return ClassCheckResult(passed, worst, "" if passed else "derivative bound exceeded")


def normalize_at(g: HolomorphicPolynomial, z0, eps: float) -> HolomorphicPolynomial:
    """Rescale g about z0 by eps and diagonalize its Hessian to the identity.

    Returns ``y -> g_eps((sqrt(D) U)^{-1} y)`` where
    ``g_eps(z) = eps^-2 (g(eps z + z0) - g(z0) - grad g(z0) . eps z)`` and
    ``Hg(z0) = U^t D U`` is the Takagi factorization.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    z0 = np.asarray(z0, dtype=complex)
    H = chessian(g, z0)
    if abs(linalg.det(H)) <= HESSIAN_SINGULAR_TOL:
        raise ValueError(f"Hessian is singular at z0 (|det| <= {HESSIAN_SINGULAR_TOL})")
    m = g.dim
    shifted = g.compose_affine(eps * np.eye(m), z0).homogeneous_part(2, g.max_degree)
    g_eps = shifted.scaled(eps**-2.0)
    fac = linalg.takagi(H)
    transform = np.linalg.inv(np.diag(np.sqrt(fac.D)) @ fac.U)
    return g_eps.compose_affine(transform).homogeneous_part(2, g.max_degree)


def normalization_threshold(
    g: HolomorphicPolynomial, z0, spec: SurfaceClassSpec, eps_values=None
) -> float:
    """Largest eps in a decreasing sweep below which every normalization passes.

    Returns 0.0 when even the smallest eps fails.
    """
    if eps_values is None:
        eps_values = 2.0 ** -np.arange(0, 21)
    eps_values = sorted(eps_values, reverse=True)
    threshold = 0.0
    for eps in reversed(eps_values):
        if not class_check(normalize_at(g, z0, eps), spec).passed:
            break
        threshold = eps
    return threshold
