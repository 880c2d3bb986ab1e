"""Quantitative diagnostics: semigroup margins, support growth, dispersive
decay, moment functionals, vertical-line traces and mollification Cauchy
matrices.  Everything operates on snapshots or trajectories produced by the
scheme module; nothing here advances the solution itself.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np

from .core import CellField, Grid2D, lp_norm
from .data import InitialDatum, MollifierSpec, Profile1D, mollified_line_measure
from .scheme import SchemeConfig, Trajectory, evolve_together


class MomentOverflowWarning(UserWarning):
    """Weighted moment taken while support touches the weighted boundary."""


@dataclass(frozen=True)
class DiagnosticSpec:
    """Which observables a report carries.

    q exponents must sit in (1, 3) (the tightness window for n = 2) and
    alpha exponents above 3 (the divergent-moment regime); support_threshold
    None means 1e-12 * ||u||_inf per field.
    """

    q_list: tuple = (2.0,)
    alpha_list: tuple = (4.0,)
    support_threshold: float | None = None
    probe: object = None

    def __post_init__(self):
        for q in self.q_list:
            if not (1.0 < q < 3.0):
                raise ValueError(f"q must lie in (1, 3), got {q}")
        for a in self.alpha_list:
            if not a > 3.0:
                raise ValueError(f"alpha must exceed 3, got {a}")
        if self.support_threshold is not None and self.support_threshold < 0:
            raise ValueError("support_threshold must be nonnegative")


@dataclass
class DiagnosticsReport:
    """Per-snapshot observable table; one record dict per time."""

    times: np.ndarray
    records: list
    spec: DiagnosticSpec

    def __post_init__(self):
        if len(self.records) != len(self.times):
            raise ValueError("record count must equal times count")
        for rec in self.records:
            for key, val in rec.items():
                if key == "support_x1":
                    continue
                if isinstance(val, float) and not math.isfinite(val):
                    raise ValueError(f"non-finite report entry {key} = {val}")

    def column(self, key: str) -> np.ndarray:
        return np.array([rec[key] for rec in self.records])

    def half_widths(self) -> np.ndarray:
        out = []
        for rec in self.records:
            s = rec["support_x1"]
            out.append(0.0 if s is None else 0.5 * (s[1] - s[0]))
        return np.array(out)


def _threshold_for(field: CellField, threshold: float | None) -> float:
    if threshold is not None:
        return threshold
    amax = float(np.max(np.abs(field.values))) if field.values.size else 0.0
    return 1e-12 * amax


def support_interval(field: CellField, threshold: float | None = None):
    """Smallest x1-interval of cell columns whose column L1 mass exceeds
    threshold * h1 * h2; None for an effectively empty field."""
    thr = _threshold_for(field, threshold)
    if thr < 0:
        raise ValueError("threshold must be nonnegative")
    col = np.sum(np.abs(field.values), axis=1)  # column mass / (h1 h2)
    hit = np.nonzero(col > thr)[0]
    if hit.size == 0:
        return None
    e = field.grid.x1_edges()
    return (float(e[hit[0]]), float(e[hit[-1] + 1]))


def support_interval_x2(field: CellField, threshold: float | None = None):
    """Same reduction along the other axis (rows in x2)."""
    thr = _threshold_for(field, threshold)
    row = np.sum(np.abs(field.values), axis=0)
    hit = np.nonzero(row > thr)[0]
    if hit.size == 0:
        return None
    e = field.grid.x2_edges()
    return (float(e[hit[0]]), float(e[hit[-1] + 1]))


@dataclass(frozen=True)
class PowerFit:
    exponent: float
    constant: float
    ok: bool = True


def support_growth_fit(report: DiagnosticsReport) -> PowerFit:
    """Log-log least squares of half-width(t) - half-width(0+) ~ C t^beta.

    The baseline is the first record's half-width when that record sits at
    t = 0 (the datum's own extent), so pure growth is what gets fitted.
    Degenerate (non-growing) widths come back flagged with exponent 0."""
    t = np.asarray(report.times, dtype=float)
    w = report.half_widths()
    if t.size < 4:
        raise ValueError("need at least 4 time samples")
    w0 = w[0] if t[0] == 0.0 else 0.0
    grow = w - w0
    use = (t > 0) & (grow > 0)
    if np.sum(use) < 2:
        return PowerFit(exponent=0.0, constant=float(np.max(w)), ok=False)
    spread = float(np.max(grow[use]) - np.min(grow[use]))
    if spread <= 1e-12 * max(1.0, float(np.max(np.abs(grow[use])))):
        # widths that do not grow at all: exponent 0 by fiat, flagged
        return PowerFit(exponent=0.0, constant=float(np.max(w)), ok=False)
    beta, logc = np.polyfit(np.log(t[use]), np.log(grow[use]), 1)
    return PowerFit(exponent=float(beta), constant=float(np.exp(logc)))


def halfspace_check(trajectory: Trajectory, which: str,
                    threshold: float | None = None) -> bool:
    """Half-space confinement along a run.

    upper_x2: the support never extends below the datum's lower x2 edge
    (one-sided vertical transport).  right_x1_signed: for nonnegative data
    the support never extends left of the datum's left x1 edge; the sign
    hypothesis is enforced and its violation raises."""
    if which not in ("upper_x2", "right_x1_signed"):
        raise ValueError(f"which must be upper_x2|right_x1_signed, got {which!r}")
    first = trajectory[0]
    if which == "right_x1_signed":
        if float(np.min(first.values)) < -1e-13 * max(1.0, float(np.max(np.abs(first.values)))):
            raise ValueError("hypothesis unmet: right_x1_signed requires a "
                             "nonnegative datum")
        s0 = support_interval(first, threshold)
        if s0 is None:
            return True
        lo = s0[0]
        for snap in trajectory.snapshots:
            s = support_interval(snap, threshold)
            if s is not None and s[0] < lo - 1e-12:
                return False
        return True
    s0 = support_interval_x2(first, threshold)
    if s0 is None:
        return True
    lo = s0[0]
    for snap in trajectory.snapshots:
        s = support_interval_x2(snap, threshold)
        if s is not None and s[0] < lo - 1e-12:
            return False
    return True


def moment_Iq(field: CellField, q: float) -> float:
    """I_q[u] = integral of (|x1|^(q-1) + |x2|^((q-1)/2)) |u|; the tightness
    functional whose growth in time is at most exponential."""
    if not (1.0 < q < 3.0):
        raise ValueError(f"q must lie in (1, 3), got {q}")
    g = field.grid
    w1 = np.abs(g.x1_centers()) ** (q - 1.0)
    w2 = np.abs(g.x2_centers()) ** (0.5 * (q - 1.0))
    absu = np.abs(field.values)
    return float((np.sum(absu * w1[:, None]) + np.sum(absu * w2[None, :])) * g.cell_area)


def tightness_exponent(q: float, n: int = 2) -> float:
    """The t-power s = 1 - 2n(q-1)/(2+n+n^2) in the I_q growth bound
    I_q(u(t)) <= e^(ct)(I_q(a) + c t^s); s = 1/2 at q = 2, n = 2."""
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    upper = 0.5 * (3 + n) + 1.0 / n
    if not (1.0 < q < upper):
        raise ValueError(f"q must lie in (1, {upper}), got {q}")
    return 1.0 - 2.0 * n * (q - 1.0) / (2.0 + n + n * n)


def weighted_moment(field: CellField, alpha: float, threshold: float | None = None) -> float:
    """Signed moment of (1 + x2)^alpha; finite for compact support but
    divergent along concentrating families, which is the point."""
    if not alpha > 3.0:
        raise ValueError(f"alpha must exceed 3, got {alpha}")
    g = field.grid
    if g.x2_min < -1.0:
        raise ValueError("weight (1 + x2)^alpha undefined below x2 = -1; shrink the grid")
    thr = _threshold_for(field, threshold)
    if float(np.sum(np.abs(field.values[:, -1]))) > thr:
        warnings.warn("support touches the top boundary; weighted moment is truncated",
                      MomentOverflowWarning, stacklevel=2)
    w2 = (1.0 + g.x2_centers()) ** alpha
    return float(np.sum(field.values * w2[None, :]) * g.cell_area)


def highmom_lower_bound(M: float, X: float, alpha: float, c_infty: float, t: float) -> float:
    """M + alpha (alpha - 3) M^(5/2) / (12 c^2) * log(1 + c^2 t sqrt(M) / X^2).

    Lower bound for the (1 + x2)^alpha moment of the evolution of mass-M
    data with horizontal support width X; alpha = 3 is the degenerate
    boundary value M."""
    if M <= 0 or X <= 0 or t < 0:
        raise ValueError("need M > 0, X > 0, t >= 0")
    if alpha < 3.0:
        raise ValueError(f"alpha must be >= 3, got {alpha}")
    if c_infty <= 0:
        raise ValueError("c_infty must be positive")
    c2 = c_infty * c_infty
    return M + alpha * (alpha - 3.0) * M ** 2.5 / (12.0 * c2) * math.log1p(c2 * t * math.sqrt(M) / (X * X))


@dataclass(frozen=True)
class SemigroupVerdict:
    kind: str
    passed: bool
    margin: float


def semigroup_check(u0, v0, grid: Grid2D, config: SchemeConfig, kind: str) -> SemigroupVerdict:
    """Evolve two data with synchronized timesteps and measure one semigroup
    axiom: contraction (L1 distance nonincreasing), comparison (cell order
    preserved; requires u0 <= v0), or mass (difference of masses constant).

    Margins are worst-case over every step; the discrete scheme satisfies
    all three exactly, so margins sit at rounding level."""
    from .core import discretize
    if kind not in ("contraction", "comparison", "mass"):
        raise ValueError(f"kind must be contraction|comparison|mass, got {kind!r}")
    fu = u0 if isinstance(u0, CellField) else discretize(u0, grid)
    fv = v0 if isinstance(v0, CellField) else discretize(v0, grid)
    if kind == "comparison" and float(np.max(fu.values - fv.values)) > 1e-13 * max(
            1.0, float(np.max(np.abs(fv.values)))):
        raise ValueError("comparison requires u0 <= v0 cell-wise")
    out = evolve_together([fu, fv], config.t_end, config)
    if kind == "contraction":
        margin = float(out["pair_margins"][0])
        return SemigroupVerdict(kind, margin <= 1e-12 * max(1.0, fu.mass() + fv.mass()), margin)
    if kind == "comparison":
        margin = float(out["order_margins"][0])
        scale = max(1.0, float(np.max(np.abs(fv.values))))
        return SemigroupVerdict(kind, margin <= 1e-12 * scale, margin)
    margin = float(max(out["mass_drift"]))
    return SemigroupVerdict(kind, margin <= 1e-12, margin)


def dispersive_fit(report: DiagnosticsReport, M: float, t_min: float = 0.0) -> dict:
    """Fit ||u(t)||_inf ~ C t^p over records with t > t_min, plus the
    calibration statistic c_hat = max_t ||u(t)||_inf sqrt(t) / M^(1/4)."""
    t = np.asarray(report.times, dtype=float)
    linf = report.column("linf")
    use = t > max(t_min, 0.0)
    if np.sum(use) < 4:
        raise ValueError("need at least 4 samples at positive time")
    if np.any(linf[use] <= 0.0):
        return {"exponent": math.nan, "constant": math.nan, "c_hat": 0.0, "ok": False}
    p, logc = np.polyfit(np.log(t[use]), np.log(linf[use]), 1)
    c_hat = float(np.max(linf[use] * np.sqrt(t[use])) / M ** 0.25)
    return {"exponent": float(p), "constant": float(math.exp(logc)), "c_hat": c_hat, "ok": True}


def calibrate_cinfty(runs) -> float:
    """Empirical lower bound for the dispersive constant: the max over runs
    and positive times of ||u(t)||_inf sqrt(t) / M^(1/4).

    `runs` is a collection of (report, mass) pairs; the standard calibration
    suite feeds several data families through this."""
    runs = list(runs)
    if not runs:
        raise ValueError("need at least one run to calibrate")
    best = 0.0
    for report, M in runs:
        t = np.asarray(report.times, dtype=float)
        linf = report.column("linf")
        use = t > 0
        if np.any(use):
            best = max(best, float(np.max(linf[use] * np.sqrt(t[use]))) / M ** 0.25)
    return best


def vertical_projection_probe(field: CellField, probe) -> float:
    """<u(t), phi (x) 1> = sum_ij u_ij phi(x1_i) h1 h2: the vertical-line
    integral of u tested against a horizontal profile phi."""
    g = field.grid
    phi = np.asarray(probe(g.x1_centers()), dtype=float)
    if phi.shape != (g.n1,):
        raise ValueError("probe must map the x1 center array to same-shape values")
    return float(phi @ np.sum(field.values, axis=1) * g.cell_area)


def mollification_cauchy_check(g: Profile1D, widths, grid: Grid2D,
                               config: SchemeConfig, kernel: str = "cosine") -> np.ndarray:
    """Evolve the mollified line measure at every width with synchronized
    steps; entry (i, j) is the sup over all steps of the L1 distance
    between the runs at widths[i] and widths[j].

    Time-uniform convergence of the mollification pipeline is the claim:
    each entry is bounded by the initial continuum distance plus a
    discretization allowance."""
    from .core import discretize
    widths = list(widths)
    if len(widths) < 2:
        raise ValueError("need at least two widths")
    fields = [discretize(mollified_line_measure(g, MollifierSpec(kernel=kernel, eps=w)), grid)
              for w in widths]
    out = evolve_together(fields, config.t_end, config)
    n = len(widths)
    mat = np.zeros((n, n))
    idx = 0
    for i in range(n):
        for j in range(i + 1, n):
            mat[i, j] = mat[j, i] = out["pair_sup"][idx]
            idx += 1
    return mat


def build_report(trajectory: Trajectory, spec: DiagnosticSpec | None = None) -> DiagnosticsReport:
    """Assemble the observable table for a finished run."""
    spec = spec or DiagnosticSpec()
    records = []
    for i, snap in enumerate(trajectory.snapshots):
        rec = {
            "mass": snap.mass(),
            "l1": lp_norm(snap, 1),
            "l2": lp_norm(snap, 2),
            "linf": lp_norm(snap, math.inf),
            "support_x1": support_interval(snap, spec.support_threshold),
            "entropy_max": float(trajectory.series["entropy_max"][i]),
        }
        for q in spec.q_list:
            rec[f"Iq_{q:g}"] = moment_Iq(snap, q)
        for a in spec.alpha_list:
            rec[f"Malpha_{a:g}"] = weighted_moment(snap, a, spec.support_threshold)
        if spec.probe is not None:
            rec["probe"] = vertical_projection_probe(snap, spec.probe)
        records.append(rec)
    return DiagnosticsReport(times=trajectory.times, records=records, spec=spec)
