"""Experiment dispatch, checks and artifact writing."""
from __future__ import annotations

import csv
import io
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, almost_complex, bourgain_guth, extension, identities, kakeya
from .config import ConfigError, ExperimentConfig, validate
from .fixtures import holomorphic_fixtures
from .surface import HolomorphicPolynomial
from .transversality import bl_dimension_check_mc, bl_scaling_check, surface_bl_datum

SCHEMA_VERSION = 1


def fmt(x) -> str:
    """17 significant digits for floats, plain text otherwise."""
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    if isinstance(x, (np.integer,)):
        return str(int(x))
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return float(fmt(x))
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


@dataclass
class Check:
    name: str
    passed: bool
    values: dict = field(default_factory=dict)


@dataclass
class RunReport:
    config: dict
    seed: int
    seed_source: str
    workers: int
    checks: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)  # csv name -> (header, rows, footer)
    extra: dict = field(default_factory=dict)
    wall_clock: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return _jsonable(
            {
                "schema": SCHEMA_VERSION,
                "tool_version": __version__,
                "config": self.config,
                "seed": self.seed,
                "seed_source": self.seed_source,
                "workers": self.workers,
                "passed": self.passed,
                "checks": [{"name": c.name, "pass": c.passed, **c.values} for c in self.checks],
                "results": self.extra,
                "wall_clock_s": self.wall_clock,
            }
        )

    def csv_text(self, name: str) -> str:
        header, rows, footer = self.tables[name]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
        if footer is not None:
            buf.write("# " + json.dumps(_jsonable(footer), sort_keys=True) + "\n")
        return buf.getvalue()

    def write(self, out_dir) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = []
        for name in self.tables:
            p = out / f"{name}.csv"
            p.write_text(self.csv_text(name), encoding="utf-8")
            paths.append(p)
        p = out / "report.json"
        p.write_text(json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        paths.append(p)
        return paths


# experiments --------------------------------------------------------------


def _quad(cfg: ExperimentConfig, rule: str | None = None) -> extension.QuadratureSpec:
    return extension.QuadratureSpec(cfg.points_per_axis, rule or cfg.rule, cfg.nyquist_factor, cfg.workers)


def _suite_check(rep, name, rows, tol, table):
    errs = [identities.relative_error(l, r) for _, l, r in rows]
    rep.tables[table] = (["label", "lhs", "rhs", "rel_err"], [(a, l, r, e) for (a, l, r), e in zip(rows, errs)], None)
    rep.checks.append(Check(name, max(errs) <= tol, {"max_rel_err": max(errs), "tol": tol, "count": len(rows)}))


def run_identities(cfg, rep):
    rng = np.random.default_rng(cfg.seed)
    t = cfg.trials
    _suite_check(rep, "block_det", identities.block_det_suite(rng, t), 1e-10, "block_det")
    ns = tuple(sorted({2, cfg.n}))
    _suite_check(rep, "vmatrix", identities.vmatrix_suite(rng, t, ns), 1e-9, "vmatrix")
    _suite_check(rep, "hessian", identities.hessian_suite(rng, t, cfg.n), 1e-8, "hessian")
    _suite_check(rep, "hessian_fd", identities.hessian_suite(rng, t, cfg.n, fd=True), 1e-4, "hessian_fd")
    rows = identities.takagi_suite(rng, t)
    rep.tables["takagi"] = (["label", "reconstruction", "singular_values"], rows, None)
    worst = max(max(r[1], r[2]) for r in rows)
    rep.checks.append(Check("takagi", worst <= 1e-10, {"max_err": worst, "tol": 1e-10}))
    _suite_check(rep, "wedge", identities.wedge_suite(rng, t, (2, 3, 4)), 1e-10, "wedge")


def run_decay(cfg, rep):
    phi = HolomorphicPolynomial.sum_of_squares(cfg.n - 1)
    fit = extension.decay_fit(phi, extension.Gaussian(cfg.sigma), t_values=cfg.t_values, quad=_quad(cfg))
    rows = [(t, m, np.log(t), np.log(m)) for t, m in zip(fit.t_values, fit.magnitudes)]
    footer = {"exponent": fit.exponent, "residual": fit.residual}
    rep.tables["decay"] = (["t", "abs_E", "log_t", "log_abs_E"], rows, footer)
    target = -(cfg.n - 1)
    tol = 0.1 * cfg.n
    rep.checks.append(Check("decay_exponent", abs(fit.exponent - target) <= tol, {"exponent": fit.exponent, "target": target, "tol": tol}))
    rep.extra["decay"] = footer


def random_rescale_instance(rng: np.random.Generator):
    M = np.array([[rng.uniform(0.5, 1.5) * np.exp(1j * rng.uniform(0, 2 * np.pi))]])
    r = rng.uniform(0.2, 0.95) * extension.rescale_radius_limit(M, 2)
    lo, hi = -0.5 + r / 2, 0.5 - r / 2
    a = np.array([rng.uniform(lo, hi) + 1j * rng.uniform(lo, hi)])
    w = rng.standard_normal(4)
    w *= rng.uniform(0, 20) / np.linalg.norm(w)
    f = extension.Gaussian(rng.uniform(0.1, 0.5), center=rng.uniform(-0.3, 0.3, 2))
    return M, a, r, f, w


def run_rescale(cfg, rep):
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for i in range(cfg.trials):
        M, a, r, f, w = random_rescale_instance(rng)
        lhs, rhs = extension.parabolic_rescale_check(M, a, r, f, w, _quad(cfg, "gauss-legendre"))
        rows.append((i, r, lhs, rhs, identities.relative_error(lhs, rhs)))
    worst = max(row[-1] for row in rows)
    rep.tables["rescale"] = (["trial", "r", "lhs", "rhs", "rel_err"], rows, None)
    rep.checks.append(Check("rescale", worst <= 1e-6, {"max_rel_err": worst, "tol": 1e-6}))


def coincident_tube_check(delta: float, samples: int, seed: int, workers: int = 1):
    """Two identical tubes along the first complex axis: exact overlap 4 pi delta^2."""
    tube = kakeya.ComplexLineTube(np.array([1, 0], complex), np.zeros(4), delta)
    fam = kakeya.TubeFamily([tube], tube.direction, 0.0)
    est, err = kakeya.kakeya_integral([fam, fam], samples, seed, workers)
    return est, err, 4 * np.pi * delta**2


def run_kakeya(cfg, rep):
    sweep = kakeya.kakeya_sweep(
        cfg.k, cfg.n, cfg.deltas, cfg.family_size, cfg.nu, cfg.c, cfg.seed, cfg.samples, workers=cfg.workers
    )
    footer = {"epsilon": sweep.epsilon}
    rep.tables["kakeya"] = (["delta", "C", "stderr", "samples"], sweep.to_rows(), footer)
    rep.extra["kakeya"] = footer
    if sweep.epsilon is not None:
        rep.checks.append(Check("kakeya_epsilon", sweep.epsilon <= 0.3, {"epsilon": sweep.epsilon, "bound": 0.3}))
    if cfg.n == 2:
        est, err, exact = coincident_tube_check(max(cfg.deltas), cfg.samples, cfg.seed, cfg.workers)
        rep.checks.append(Check("coincident_tube", abs(est - exact) <= 3 * err, {"estimate": est, "stderr": err, "exact": exact}))
    if cfg.induction:
        bases = kakeya.default_bases(cfg.k, cfg.n)
        nu, delta = cfg.induction_nu, cfg.induction_delta
        fams = [kakeya.sample_tube_family(b, min(nu, 0.5), cfg.family_size, delta, cfg.seed + 1000 * j) for j, b in enumerate(bases)]
        ind = kakeya.induction_ratio(delta, nu, fams, cfg.samples, cfg.seed, cfg.workers)
        vals = {"lhs": ind.lhs, "rhs": ind.rhs, "ratio": ind.ratio, "bound": cfg.ratio_bound, "straightened": ind.straightened}
        rep.tables["induction"] = (["delta", "nu", "lhs", "rhs", "ratio"], [(delta, nu, ind.lhs, ind.rhs, ind.ratio)], None)
        rep.checks.append(Check("induction_ratio", ind.lhs <= cfg.ratio_bound * ind.rhs, vals))


def run_bg(cfg, rep):
    phi = HolomorphicPolynomial.sum_of_squares(cfg.n - 1)
    rng = np.random.default_rng(cfg.seed)
    quad = _quad(cfg)
    per_K = {}
    ratios = []
    rows = []
    classified = True
    first_reports = None
    for i, K in enumerate(cfg.K_values):
        count = cfg.amplitudes if i == 0 else cfg.sweep_amplitudes
        R = cfg.R if (cfg.R is not None and i == 0) else 2 * K
        per_K[K] = []
        for a in range(count):
            f = bourgain_guth.random_mixture(rng, cfg.n)
            res = bourgain_guth.run_pipeline(phi, f, K, R, cfg.k, cfg.c, quad, seed=cfg.seed + a)
            classified &= all(r.kind in ("broad", "narrow") for r in res.reports)
            per_K[K].extend(res.reports)
            if i == 0:
                ratios.append(res.comparability)
                if first_reports is None:
                    first_reports = res.reports
        narrow = [r for r in per_K[K] if r.kind == "narrow"]
        rows.append((K, max((len(r.large) for r in narrow), default=0), len(per_K[K]) - len(narrow), len(narrow)))
    nc = bourgain_guth.narrow_count_check(per_K, cfg.k, cfg.narrow_bound)
    comp = max(ratios)
    rep.tables["bg"] = (["K", "max_large_narrow", "broad_boxes", "narrow_boxes"], rows, None)
    rep.tables["comparability"] = (["amplitude", "ratio"], list(enumerate(ratios)), None)
    rep.checks.append(Check("every_box_classified", classified, {}))
    rep.checks.append(Check("comparability", comp <= cfg.comparability_bound, {"ratio": comp, "bound": cfg.comparability_bound}))
    rep.checks.append(Check("narrow_count", nc.passed, {"constant": nc.constant, "slope": nc.slope, "bound": nc.bound}))
    thresholds = {str(n): str(bourgain_guth.exponent_threshold(n, bourgain_guth.optimal_k(n))) for n in range(4, 13, 2)}
    rep.extra["bg"] = {
        "threshold_table": thresholds,
        "counts": {str(r[0]): {"broad": r[2], "narrow": r[3], "max_large_narrow": r[1]} for r in rows},
        "boxes": [
            {"kind": r.kind, "large": len(r.large), "witnesses": r.witnesses, "max_distance": r.max_distance, "search": r.search}
            for r in first_reports
        ],
    }


def run_acs(cfg, rep):
    rows = []
    m = cfg.size // 2
    for i in range(cfg.trials):
        J = almost_complex.random_acs(m, cfg.seed + i).J
        rows.append((i, almost_complex.reduce_to_standard(J).residual))
    worst = max(r[1] for r in rows)
    rep.tables["acs"] = (["trial", "residual"], rows, None)
    rep.checks.append(Check("acs_reduction", worst <= 1e-9, {"max_residual": worst, "mean_residual": float(np.mean([r[1] for r in rows]))}))
    rng = np.random.default_rng(cfg.seed)
    cr = 0.0
    for phi in holomorphic_fixtures(rng):
        J0 = almost_complex.standard_structure(phi.dim)
        pts = rng.uniform(-1, 1, (10, 2 * phi.dim))
        cr = max(cr, almost_complex.acs_graph_residual(lambda x, p=phi: p.eval_real(x), J0, pts))
    rep.checks.append(Check("cauchy_riemann", cr <= 1e-6, {"max_residual": cr}))


def run_bl(cfg, rep):
    rng = np.random.default_rng(cfg.seed)
    phi = HolomorphicPolynomial.sum_of_squares(cfg.n - 1)
    pts = [rng.uniform(-0.5, 0.5, cfg.n - 1) + 1j * rng.uniform(-0.5, 0.5, cfg.n - 1) for _ in range(cfg.n)]
    datum = surface_bl_datum(phi, pts)
    rows = []
    ok = bl_scaling_check(datum)
    for s in range(3):
        r = bl_dimension_check_mc(datum, cfg.trials, cfg.seed + s)
        rows.append((cfg.seed + s, r.trials, int(r.passed)))
        ok &= r.passed
    coincident = surface_bl_datum(phi, [pts[0]] * cfg.n)
    rej = bl_dimension_check_mc(coincident, cfg.trials, cfg.seed)
    rep.tables["bl"] = (["seed", "trials", "pass"], rows, None)
    rep.checks.append(Check("bl_transversal", ok, {"scaling": bl_scaling_check(datum)}))
    rep.checks.append(Check("bl_coincident_rejected", not rej.passed, {"source": (rej.violation or {}).get("source")}))


RUNNERS = {
    "identities": run_identities,
    "decay": run_decay,
    "rescale": run_rescale,
    "kakeya": run_kakeya,
    "bg": run_bg,
    "acs": run_acs,
    "bl": run_bl,
}


def run(cfg: ExperimentConfig, out_dir=None) -> RunReport:
    seed_source = "config"
    env = os.environ.get("LAB_SEED")
    if env is not None:
        try:
            cfg = cfg.replace(seed=int(env))
        except ValueError as exc:
            raise ConfigError(f"LAB_SEED: cannot parse {env!r}") from exc
        seed_source = "LAB_SEED"
    problems = validate(cfg)
    if problems:
        raise ConfigError("; ".join(problems))
    rep = RunReport(cfg.to_dict(), cfg.seed, seed_source, cfg.workers)
    t0 = time.perf_counter()
    try:
        RUNNERS[cfg.kind](cfg, rep)
    except bourgain_guth.BudgetError as exc:
        raise ConfigError(str(exc)) from exc
    rep.wall_clock = time.perf_counter() - t0
    if out_dir is not None:
        rep.write(out_dir)
    return rep
