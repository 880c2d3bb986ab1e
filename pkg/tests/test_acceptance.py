"""End-to-end acceptance gate.

Each test prints one PASS/FAIL line for the quantitative claim it owns and
then asserts it, so a full run reads as a checklist.  The heavy fixtures
(the dirac sweep, the oracle convergence ladder, the tall-box trace run)
are module-scoped and shared.  Expect a couple of minutes with the jitted
kernels; the pure-numpy fallback works but is much slower here.
"""

import math
import tempfile
import warnings

import numpy as np
import pytest

from burgers2d.config import parse_config
from burgers2d.core import CellField, SupportEscapeWarning, build_grid, discretize
from burgers2d.data import (MollifierSpec, NWaveParams, Profile1D, dirac_family,
                            mollified_line_measure, nwave_slice)
from burgers2d.diagnostics import (DiagnosticsReport, build_report,
                                   calibrate_cinfty, dispersive_fit,
                                   mollification_cauchy_check,
                                   support_growth_fit,
                                   vertical_projection_probe)
from burgers2d.experiments import execute
from burgers2d.scheme import (SchemeConfig, cfl_dt, entropy_residual, run, step)
from burgers2d.selfsim import (CharacteristicState, VSSParams, contrg_check,
                               extract_profile, g_of_profile,
                               integrate_characteristic, reduced_ode_check,
                               shock_locus, vss_eval)

SWEEP_BOX = ((-2.5, 2.5), (-0.3, 3.5))
SWEEP_SNAPS = (0.0, 0.05, 0.1, 0.2, 0.25, 0.4, 0.5, 0.7071067811865476, 0.8,
               1.0, 1.4142135623730951, 2.0)
ENTROPY_KS = (-1.0, -0.5, 0.0, 0.5, 1.0)


def _line(num: int, name: str, ok: bool, detail: str) -> bool:
    print(f"ACCEPTANCE {num:02d} {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    return ok


def _quiet_run(datum, grid, scheme):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SupportEscapeWarning)
        return run(datum, grid, scheme)


def _at_time(report: DiagnosticsReport, t: float) -> dict:
    i = int(np.argmin(np.abs(report.times - t)))
    assert abs(report.times[i] - t) < 1e-12
    return report.records[i]


# --------------------------------------------------------------- fixtures

@pytest.fixture(scope="module")
def validate_summary():
    """Convergence ladders 128/256/512 against both exact solutions."""
    cfg = parse_config("[experiment]\nname = validate\n[grid]\nn1 = 512\n"
                       "[scheme]\ncfl = 0.9\nt_end = 0.75\n")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SupportEscapeWarning)
        return execute(cfg, tempfile.mkdtemp())


@pytest.fixture(scope="module")
def sweep_runs():
    """dirac_family(1, m) runs on a common tall box at 512x390."""
    grid = build_grid(SWEEP_BOX, (512, 390))
    out = {}
    for m in (8, 16, 32, 64):
        datum = dirac_family(1.0, m)
        traj = _quiet_run(datum, grid,
                          SchemeConfig(t_end=2.0, cfl=0.5,
                                       snapshot_times=SWEEP_SNAPS))
        out[m] = {"datum": datum, "report": build_report(traj), "grid": grid}
    return out


@pytest.fixture(scope="module")
def c_infty(sweep_runs):
    return calibrate_cinfty([(r["report"], 1.0) for r in sweep_runs.values()])


@pytest.fixture(scope="module")
def trace_profiles(sweep_runs):
    """Early-time transverse profiles: snapshot at half the vertical
    relaxation time of each datum, before the concentration unwinds."""
    grid = sweep_runs[8]["grid"]
    out = {}
    for m in (8, 16, 32):
        datum = dirac_family(1.0, m)
        (lo2, hi2) = datum.support_box[1]
        t_m = 0.5 * (hi2 - lo2) / datum.linf() ** 2
        traj = _quiet_run(datum, grid,
                          SchemeConfig(t_end=t_m, cfl=0.5, snapshot_times=(t_m,)))
        out[m] = g_of_profile(extract_profile(traj.snapshots[-1]))
    return out


def _moment_growth_constant(report: DiagnosticsReport) -> float:
    """Smallest c with I2(u(t)) <= e^(ct) (I2(a) + c sqrt(t)) at every
    recorded time, found by per-time bisection."""
    series = report.column("Iq_2")
    I0 = float(series[0])
    assert report.times[0] == 0.0
    c_hat = 0.0
    for t, It in zip(report.times[1:], series[1:]):
        if It <= I0:
            continue
        lo, hi = 0.0, 64.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if math.exp(mid * t) * (I0 + mid * math.sqrt(t)) >= It:
                hi = mid
            else:
                lo = mid
        c_hat = max(c_hat, hi)
    return c_hat


def _entropy_worst(datum, grid, t_end: float):
    """Evolve step by step, tracking the largest per-cell entropy residual
    positive part over every step and every reference constant k."""
    u = datum if isinstance(datum, CellField) else discretize(datum, grid)
    linf0 = float(np.max(np.abs(u.values)))
    scale = max(1.0, linf0 ** 3 / min(grid.h1, grid.h2))
    cfg = SchemeConfig(t_end=t_end, cfl=0.5)
    worst = 0.0
    while u.time < t_end - 1e-14:
        dt = min(cfl_dt(u, 0.5), 0.1, t_end - u.time)
        before = u
        u = step(u, dt, cfg)
        for k in ENTROPY_KS:
            worst = max(worst,
                        entropy_residual(before, u, dt, k).max_positive_part())
    return worst, scale


# --------------------------------------------------------------- criteria

def test_criterion_01_nwave_oracle_convergence(validate_summary):
    """Embedded wave from t=0.25 to t=1: first-order convergence, small error."""
    orders = [v for v in validate_summary["verdicts"] if v["name"] == "nwave_order"]
    err512 = validate_summary["nwave_errors"][-1]
    ok = (orders[0]["status"] == "pass" and orders[0]["value"] >= 0.7
          and err512 <= 2e-3)
    assert _line(1, "nwave-oracle-convergence", ok,
                 f"min order {orders[0]['value']:.3f} >= 0.7, "
                 f"err@512 {err512:.3e} <= 2e-3")


def test_criterion_02_self_similar_oracle_convergence(validate_summary):
    """Oracle-bounded window run over t in [1, 1.5] converges at order >= 0.8."""
    v = [x for x in validate_summary["verdicts"] if x["name"] == "vss_order"][0]
    ok = v["status"] == "pass" and v["value"] >= 0.8
    assert _line(2, "self-similar-oracle-convergence", ok,
                 f"min order {v['value']:.3f} >= 0.8")


def test_criterion_03_semigroup_axioms():
    """Contraction, comparison, and mass margins on 10 random bump pairs."""
    cfg = parse_config("[experiment]\nname = semigroup\n[grid]\nn1 = 96\n"
                       "n2 = 96\n[scheme]\nt_end = 0.4\n")
    summary = execute(cfg, tempfile.mkdtemp())
    margins = {v["name"]: v["value"] for v in summary["verdicts"]}
    ok = (summary["ok"] and summary["n_pairs"] == 10
          and all(v <= 1e-12 for v in margins.values()))
    assert _line(3, "semigroup-axioms", ok,
                 "worst margins " + ", ".join(f"{k.split('_')[0]} {v:.2e}"
                                              for k, v in margins.items()))


def test_criterion_04_cell_entropy_inequality():
    """Per-step entropy production stays at rounding level for 5 constants."""
    grid_n = build_grid(((-0.5, 1.5), (0.0, 1.0)), (256, 4))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SupportEscapeWarning)
        worst_n, scale_n = _entropy_worst(nwave_slice(NWaveParams(0.0, 1.0), 0.25),
                                          grid_n, 0.75)
    grid_t = build_grid(((-1.0, 1.0), (0.0, 1.0)), (128, 16))
    vals = np.where(grid_t.x1_centers()[:, None] < 0.0, -1.0, 1.0) * np.ones((1, 16))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SupportEscapeWarning)
        worst_t, scale_t = _entropy_worst(CellField(grid_t, vals), grid_t, 0.3)
    ok = worst_n <= 1e-12 * scale_n and worst_t <= 1e-12 * scale_t
    assert _line(4, "cell-entropy-inequality", ok,
                 f"wave {worst_n:.2e} <= {1e-12 * scale_n:.2e}, "
                 f"transonic {worst_t:.2e} <= {1e-12 * scale_t:.2e}")


def test_criterion_05_support_growth(sweep_runs, c_infty):
    """Half-width of dirac_family(1, 16) grows like sqrt(t), inside the strip."""
    rep = sweep_runs[16]["report"]
    grid = sweep_runs[16]["grid"]
    mask = (rep.times == 0.0) | (rep.times >= 0.05)
    sub = DiagnosticsReport(rep.times[mask],
                            [r for r, keep in zip(rep.records, mask) if keep],
                            rep.spec)
    fit = support_growth_fit(sub)
    lo, hi = sweep_runs[16]["datum"].x_support
    hw0 = 0.5 * (hi - lo)
    strip_ok = True
    for t, w in zip(sub.times, sub.half_widths()):
        if t > 0:
            strip_ok = strip_ok and w <= hw0 + c_infty * math.sqrt(t) + grid.h1
    ok = fit.ok and 0.4 <= fit.exponent <= 0.6 and strip_ok
    assert _line(5, "support-growth", ok,
                 f"beta {fit.exponent:.3f} in [0.4, 0.6], "
                 f"sqrt-t strip with c_infty {c_infty:.3f} held: {strip_ok}")


def test_criterion_06_dispersive_decay(sweep_runs):
    """||u(1)||_inf nearly m-independent; decay exponent near -1/2."""
    linf1 = {m: _at_time(sweep_runs[m]["report"], 1.0)["linf"]
             for m in (8, 16, 32)}
    spread = (max(linf1.values()) - min(linf1.values())) / min(linf1.values())
    exps = {m: dispersive_fit(sweep_runs[m]["report"], 1.0, t_min=0.249)["exponent"]
            for m in (8, 16, 32)}
    ok = spread <= 0.15 and all(-0.65 <= e <= -0.35 for e in exps.values())
    assert _line(6, "dispersive-decay", ok,
                 f"linf(1) spread {spread:.3f} <= 0.15, exponents "
                 + ", ".join(f"{e:.3f}" for e in exps.values())
                 + " in [-0.65, -0.35]")


def test_criterion_07_moment_dichotomy(sweep_runs):
    """I2 growth admits a refinement-stable constant; the (1+x2)^4 moment
    at t = 1 climbs with concentration on a log(1/X^2) trend."""
    chat_fine = _moment_growth_constant(sweep_runs[16]["report"])
    coarse_grid = build_grid(SWEEP_BOX, (256, 195))
    traj = _quiet_run(dirac_family(1.0, 16), coarse_grid,
                      SchemeConfig(t_end=2.0, cfl=0.5, snapshot_times=SWEEP_SNAPS))
    chat_coarse = _moment_growth_constant(build_report(traj))
    stable = abs(chat_fine - chat_coarse) / chat_fine <= 0.2

    rep = sweep_runs[16]["report"]
    I0 = rep.column("Iq_2")[0]
    bound_holds = all(
        It <= math.exp(chat_fine * t) * (I0 + chat_fine * math.sqrt(t)) + 1e-12
        for t, It in zip(rep.times[1:], rep.column("Iq_2")[1:]))

    ms = (8, 16, 32, 64)
    incr = []
    logx = []
    for m in ms:
        r = sweep_runs[m]["report"]
        incr.append(_at_time(r, 1.0)["Malpha_4"] - r.records[0]["Malpha_4"])
        lo, hi = sweep_runs[m]["datum"].x_support
        logx.append(math.log(1.0 / (hi - lo) ** 2))
    increasing = all(b > a for a, b in zip(incr, incr[1:]))
    corr = float(np.corrcoef(incr, logx)[0, 1])
    ok = stable and bound_holds and increasing and corr >= 0.9
    assert _line(7, "moment-dichotomy", ok,
                 f"c_hat {chat_fine:.3f} vs {chat_coarse:.3f} "
                 f"(rel {abs(chat_fine - chat_coarse) / chat_fine:.3f} <= 0.2), "
                 f"bound held {bound_holds}, increments increasing {increasing}, "
                 f"log-trend corr {corr:.3f} >= 0.9")


def test_criterion_08_initial_trace():
    """The vertical-line probe returns the datum mass at small time."""
    grid = build_grid(((-0.35, 0.85), (-0.05, 11.95)), (512, 512))
    a = mollified_line_measure(Profile1D("indicator", lo=0.0, hi=1.0),
                               MollifierSpec("cosine", 0.01))
    traj = _quiet_run(a, grid, SchemeConfig(t_end=0.01, cfl=0.5,
                                            snapshot_times=(0.01,)))

    def phi(x):
        ax = np.abs(x)
        taper = 0.5 * (1.0 + np.cos(np.pi * (ax - 0.3) / 0.5))
        return np.where(ax <= 0.3, 1.0, np.where(ax < 0.8, taper, 0.0))

    val = vertical_projection_probe(traj.snapshots[-1], phi)
    err = abs(val - 1.0)
    assert _line(8, "initial-trace", err <= 0.05,
                 f"|probe - M| = {err:.2e} <= 0.05 at t = 0.01, eps = 0.01")


def test_criterion_09_mollification_cauchy():
    """Sup-in-time pair distances never beat the initial continuum distance
    plus a two-cell discretization allowance."""
    gprof = Profile1D("indicator", lo=0.0, hi=1.0)
    grid = build_grid(((-0.6, 1.2), (-0.3, 1.8)), (256, 256))
    widths = [0.2, 0.1, 0.05]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SupportEscapeWarning)
        mat = mollification_cauchy_check(gprof, widths, grid,
                                         SchemeConfig(cfl=0.5, t_end=0.25))
    xs = np.linspace(-0.5, 0.5, 400001)

    def continuum(eps, nu):
        ae = mollified_line_measure(gprof, MollifierSpec("cosine", eps))
        an = mollified_line_measure(gprof, MollifierSpec("cosine", nu))
        return float(np.trapezoid(np.abs(ae(xs, np.full_like(xs, 0.5))
                                         - an(xs, np.full_like(xs, 0.5))), xs))

    htol = 2 * max(grid.h1, grid.h2)
    worst_gap = -math.inf
    ok = True
    for i in range(3):
        for j in range(3):
            if i == j:
                continue
            gap = mat[i, j] - continuum(widths[i], widths[j]) - htol
            worst_gap = max(worst_gap, gap)
            ok = ok and gap <= 0.0
    assert _line(9, "mollification-cauchy", ok,
                 f"worst entry excess over continuum + 2h: {worst_gap:.2e} <= 0")


def test_criterion_10_self_similar_machinery():
    """First integrals, the explicit family, the profile equation, and the
    shock locus all agree to their stated tolerances."""
    rng = np.random.default_rng(0)
    drift = 0.0
    for _ in range(100):
        st0 = CharacteristicState(float(rng.uniform(-2, 2)),
                                  float(rng.uniform(-2, 2)),
                                  float(rng.uniform(0.1, 2.0)))
        path = integrate_characteristic(st0, 2.0, tol=1e-10)
        drift = max(drift, path.drift_I1, path.drift_I2)

    res = 0.0
    for c in (0.0, 0.5, 1.0):
        params = VSSParams(c)
        for t in (0.5, 1.0, 2.0):
            for x1 in np.linspace(-2, 2, 17):
                for x2 in np.linspace(-2, 2, 17):
                    v = vss_eval(params, t, float(x1), float(x2))
                    if v.status != "ok":
                        continue
                    res = max(res, abs((1 - c) * t * v.value ** 2
                                       + c * x1 * v.value - x2))

    z1 = np.linspace(0.25, 2.25, 201)
    z2 = np.linspace(0.25, 2.25, 401)
    ratio = (reduced_ode_check(z1, np.sqrt(z1)).residual_max
             / reduced_ode_check(z2, np.sqrt(z2)).residual_max)

    locus_res = 0.0
    profile_res = 0.0
    invariant_dev = 0.0
    for c, kappa in ((0.5, 0.7), (4.0 / 3.0, 1.0 / 3.0)):
        for curve in shock_locus(VSSParams(c), np.linspace(0.5, 2.0, 64), kappa):
            keep = ~curve.gaps
            w, y1, y2 = curve.W[keep], curve.y1[keep], curve.y2[keep]
            if not w.size:
                continue
            locus_res = max(locus_res, float(np.max(np.abs(
                w * w * (c * (w - y1) ** 2 + w * (4 * y1 / 3 - w)) - kappa))))
            profile_res = max(profile_res, float(np.max(np.abs(
                y2 - (w * w + c * (y1 - w) * w)))))
            if c == 4.0 / 3.0:
                inv = w * (w - 2 * y1)
                invariant_dev = max(invariant_dev, float(np.max(np.abs(
                    inv - np.median(inv)))))

    ok = (drift <= 1e-8 and res <= 1e-12 and ratio >= 3.0
          and locus_res <= 1e-10 and profile_res <= 1e-10
          and invariant_dev <= 1e-10)
    assert _line(10, "self-similar-machinery", ok,
                 f"drift {drift:.2e} <= 1e-8, implicit residual {res:.2e} <= 1e-12, "
                 f"halving ratio {ratio:.2f} >= 3, locus {locus_res:.2e} / "
                 f"profile {profile_res:.2e} <= 1e-10, "
                 f"c=4/3 invariant {invariant_dev:.2e} <= 1e-10")


def test_criterion_11_concentration_obstruction(trace_profiles, c_infty):
    """Transverse profiles sharpen with m and break the admissibility bound:
    the machine-readable verdict that the doubly concentrated limit is
    obstructed."""
    ratios = []
    flagged = []
    for m in (8, 16, 32):
        g = trace_profiles[m]
        ratios.append(g.norm(math.inf) / math.sqrt(g.norm(1)))
        verdicts = contrg_check(g, c_infty)
        worst = verdicts[-1]
        assert worst.p == math.inf
        flagged.append(not worst.satisfied)
    increasing = all(b > a for a, b in zip(ratios, ratios[1:]))
    beyond = all(r > 2.0 * c_infty ** 2 for r in ratios)
    ok = increasing and beyond and all(flagged)
    assert _line(11, "concentration-obstruction", ok,
                 "ratios " + ", ".join(f"{r:.2f}" for r in ratios)
                 + f" all > {2 * c_infty ** 2:.2f} and increasing; "
                 f"violation flagged: {flagged}")
