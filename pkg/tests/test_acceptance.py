"""The fourteen acceptance criteria at their stated sizes and tolerances.

Each test prints (and records for the terminal summary) one PASS/FAIL line.
"""
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from complexlab import almost_complex, extension, identities, kakeya
from complexlab.bourgain_guth import exponent_threshold
from complexlab.config import ExperimentConfig, load
from complexlab.fixtures import holomorphic_fixtures
from complexlab.runner import coincident_tube_check, random_rescale_instance, run
from complexlab.surface import HolomorphicPolynomial as HP
from complexlab.transversality import bl_dimension_check_mc, bl_scaling_check, surface_bl_datum, transversality

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

# comparability ratio first recorded with configs/bg.ini (seed 1)
FIRST_COMPARABILITY = 1.0065641826455844

pytestmark = pytest.mark.slow


def worst(rows):
    return max(identities.relative_error(l, r) for _, l, r in rows)


def test_01_block_det(verdict):
    t = time.perf_counter()
    err = worst(identities.block_det_suite(np.random.default_rng(1), 1000))
    dt = time.perf_counter() - t
    assert verdict(1, "block-determinant", err <= 1e-10 and dt < 5, f"max_rel_err={err:.3g} time={dt:.2f}s")


def test_02_vmatrix(verdict):
    t = time.perf_counter()
    err = worst(identities.vmatrix_suite(np.random.default_rng(2), 200, (2, 3, 4)))
    dt = time.perf_counter() - t
    assert verdict(2, "kernel/normal identity", err <= 1e-9 and dt < 10, f"max_rel_err={err:.3g} time={dt:.2f}s")


def test_03_hessian(verdict):
    t = time.perf_counter()
    rng = np.random.default_rng(3)
    exact = max(worst(identities.hessian_suite(rng, 100, n)) for n in (2, 3))
    fd = max(worst(identities.hessian_suite(rng, 100, n, fd=True)) for n in (2, 3))
    dt = time.perf_counter() - t
    ok = exact <= 1e-8 and fd <= 1e-4 and dt < 10
    assert verdict(3, "Hessian identity", ok, f"analytic={exact:.3g} fd={fd:.3g} time={dt:.2f}s")


def test_04_takagi(verdict):
    t = time.perf_counter()
    rows = identities.takagi_suite(np.random.default_rng(4), 500, 16)
    dt = time.perf_counter() - t
    rec = max(r[1] for r in rows)
    sv = max(r[2] for r in rows)
    ok = rec <= 1e-10 and sv <= 1e-10 and dt < 10
    assert verdict(4, "Takagi", ok, f"reconstruction={rec:.3g} singular_values={sv:.3g} time={dt:.2f}s")


def test_05_wedge(verdict):
    t = time.perf_counter()
    err = worst(identities.wedge_suite(np.random.default_rng(5), 500, (2, 3, 4)))
    dt = time.perf_counter() - t
    assert verdict(5, "wedge = |det|^2", err <= 1e-10 and dt < 5, f"max_rel_err={err:.3g} time={dt:.2f}s")


def test_06_decay(verdict):
    t = time.perf_counter()
    f = extension.Gaussian(0.25)
    e2 = extension.decay_fit(HP(1, {(2,): 1}), f).exponent
    e3 = extension.decay_fit(HP.sum_of_squares(2), f).exponent
    dt = time.perf_counter() - t
    ok = -1.2 <= e2 <= -0.8 and -2.3 <= e3 <= -1.7 and dt < 600
    assert verdict(6, "decay exponents", ok, f"n2={e2:.4f} n3={e3:.4f} time={dt:.2f}s")


def test_07_rescale(verdict):
    t = time.perf_counter()
    rng = np.random.default_rng(7)
    errs = []
    for _ in range(50):
        M, a, r, f, w = random_rescale_instance(rng)
        errs.append(identities.relative_error(*extension.parabolic_rescale_check(M, a, r, f, w)))
    dt = time.perf_counter() - t
    assert verdict(7, "parabolic rescaling", max(errs) <= 1e-6 and dt < 300, f"max_rel_err={max(errs):.3g} time={dt:.2f}s")


def _axis_points(n):
    return [np.zeros(n - 1, complex)] + [np.eye(n - 1)[j].astype(complex) for j in range(n - 1)]


def test_08_brascamp_lieb(verdict):
    t = time.perf_counter()
    ok = True
    for n in (2, 3):
        phi = HP.sum_of_squares(n - 1)
        pts = _axis_points(n)
        ok &= transversality(phi, pts) > 0.1
        datum = surface_bl_datum(phi, pts)
        ok &= bl_scaling_check(datum)
        ok &= all(bl_dimension_check_mc(datum, 10_000, s).passed for s in (0, 1, 2))
        bad = bl_dimension_check_mc(surface_bl_datum(phi, [pts[1]] * n), 10_000, 0)
        ok &= not bad.passed and bad.violation["source"] == "kernel"
    dt = time.perf_counter() - t
    assert verdict(8, "Brascamp-Lieb conditions", bool(ok) and dt < 60, f"time={dt:.2f}s")


def test_09_kakeya_sweep(verdict):
    t = time.perf_counter()
    sweep = kakeya.kakeya_sweep(2, 2, [2.0**-j for j in range(2, 6)], 50, 0.05, 0.01, seed=0, samples=10_000_000)
    est, err, exact = coincident_tube_check(0.25, 10_000_000, 0)
    dt = time.perf_counter() - t
    ok = sweep.epsilon <= 0.3 and abs(est - exact) <= 3 * err and dt < 600
    detail = f"epsilon={sweep.epsilon:.4f} coincident={est:.6f}+-{err:.2g} exact={exact:.6f} time={dt:.1f}s"
    assert verdict(9, "multilinear Kakeya sweep", ok, detail)


def test_10_induction(verdict):
    t = time.perf_counter()
    delta, nu = 2.0**-6, 2.0**-2
    fams = [kakeya.sample_tube_family(b, nu, 50, delta, 1000 * j) for j, b in enumerate(kakeya.default_bases(2, 2))]
    rep = kakeya.induction_ratio(delta, nu, fams, samples=10_000_000, seed=0)
    dt = time.perf_counter() - t
    ok = rep.lhs <= 8 * rep.rhs and dt < 600
    assert verdict(10, "induction ratio", ok, f"lhs={rep.lhs:.4g} rhs={rep.rhs:.4g} ratio={rep.ratio:.4f} time={dt:.1f}s")


def test_11_bourgain_guth(verdict):
    t = time.perf_counter()
    cfg = load(CONFIGS / "bg.ini")
    assert cfg.K_values == [8, 16, 32] and cfg.amplitudes == 20 and cfg.n == 2
    rep = run(cfg)
    dt = time.perf_counter() - t
    checks = {c.name: c for c in rep.checks}
    ratio = checks["comparability"].values["ratio"]
    pinned = FIRST_COMPARABILITY / 2 <= ratio <= 2 * FIRST_COMPARABILITY
    narrow = max(r[1] for r in rep.tables["bg"][1])
    ok = checks["every_box_classified"].passed and checks["comparability"].passed and pinned
    ok = ok and checks["narrow_count"].passed and narrow <= 10 and dt < 900
    assert verdict(11, "Bourgain-Guth pipeline", ok, f"comparability={ratio:.6f} max_narrow_large={narrow} time={dt:.1f}s")


def test_12_exponents(verdict):
    t = time.perf_counter()
    ok = all(exponent_threshold(n, n // 2 + 1) == Fraction(2 * (n + 2), n) for n in (4, 6, 8, 10, 12))
    dt = time.perf_counter() - t
    assert verdict(12, "exponent arithmetic", ok and dt < 1, f"time={dt:.4f}s")


def test_13_almost_complex(verdict):
    t = time.perf_counter()
    res = max(almost_complex.reduce_to_standard(almost_complex.random_acs(6, s).J).residual for s in range(100))
    rng = np.random.default_rng(13)
    cr = 0.0
    for phi in holomorphic_fixtures(rng):
        J0 = almost_complex.standard_structure(phi.dim)
        pts = rng.uniform(-1, 1, (10, 2 * phi.dim))
        cr = max(cr, almost_complex.acs_graph_residual(lambda x, p=phi: p.eval_real(x), J0, pts))
    dt = time.perf_counter() - t
    ok = res <= 1e-9 and cr <= 1e-6 and dt < 10
    assert verdict(13, "almost-complex reduction", ok, f"residual={res:.3g} cauchy_riemann={cr:.3g} time={dt:.2f}s")


def test_14_determinism(verdict, tmp_path):
    configs = [
        ExperimentConfig(kind="identities", trials=50, seed=14),
        ExperimentConfig(kind="decay"),
        ExperimentConfig(kind="rescale", trials=10, seed=14),
        ExperimentConfig(kind="kakeya", samples=100_000, deltas=[0.25, 0.125], family_size=10, induction=True, induction_delta=0.0625),
        ExperimentConfig(kind="bg", K_values=[8], amplitudes=2, seed=14),
        ExperimentConfig(kind="acs", trials=10, seed=14),
        ExperimentConfig(kind="bl", n=3, trials=500, seed=14),
    ]
    same = True
    for cfg in configs:
        a, b = tmp_path / cfg.kind / "a", tmp_path / cfg.kind / "b"
        rep = run(cfg, a)
        run(cfg, b)
        for name in rep.tables:
            same &= (a / f"{name}.csv").read_bytes() == (b / f"{name}.csv").read_bytes()
    assert verdict(14, "determinism", bool(same), f"kinds={len(configs)}")
