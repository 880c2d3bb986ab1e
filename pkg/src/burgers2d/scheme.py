"""First-order monotone finite-volume scheme for
u_t + (u^2/2)_x1 + (u^3/3)_x2 = 0.

Horizontal faces carry the exact Godunov flux of the convex flux u^2/2;
the vertical flux u^3/3 has nonnegative wave speed u^2, so its Godunov flux
degenerates to pure upwinding on the lower state.  Under the CFL bound the
update is monotone, hence L1-contractive, order-preserving and conservative,
and satisfies a per-cell entropy inequality for every Kruzkov entropy
|u - k|; those properties are what the diagnostics harness measures.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import kernels
from .core import CellField, Grid2D, SupportEscapeWarning, discretize

DEFAULT_ENTROPY_KS = (-1.0, -0.5, 0.0, 0.5, 1.0)


@dataclass(frozen=True)
class SchemeConfig:
    """Run parameters: step control, splitting mode and snapshot schedule."""

    t_end: float
    cfl: float = 0.5
    splitting: str = "unsplit"
    snapshot_times: tuple = ()
    dt_max: float = 0.1
    entropy_ks: tuple = DEFAULT_ENTROPY_KS

    def __post_init__(self):
        if not (0.0 < self.cfl <= 1.0):
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.t_end < 0:
            raise ValueError(f"t_end must be nonnegative, got {self.t_end}")
        if self.splitting not in ("unsplit", "strang"):
            raise ValueError(f"splitting must be unsplit|strang, got {self.splitting!r}")
        if self.dt_max <= 0:
            raise ValueError(f"dt_max must be positive, got {self.dt_max}")
        ts = tuple(float(t) for t in self.snapshot_times)
        if ts == ():
            ts = (0.0, self.t_end) if self.t_end > 0 else (0.0,)
        if list(ts) != sorted(ts):
            raise ValueError("snapshot_times must be sorted")
        if ts and (ts[0] < 0 or ts[-1] > self.t_end):
            raise ValueError(f"snapshot_times must lie in [0, {self.t_end}]")
        object.__setattr__(self, "snapshot_times", ts)


def godunov_flux_quadratic(uL: float, uR: float) -> float:
    """Exact Godunov flux for f(u) = u^2/2.

    Shock case uL >= uR: max(f(uL), f(uR)).  Rarefaction case uL < uR:
    min of f over [uL, uR], which is 0 when the interval straddles the
    sonic point u = 0.  Equivalent closed form: max(f(uL+), f(uR-)).
    """
    if not (math.isfinite(uL) and math.isfinite(uR)):
        raise ValueError(f"flux arguments must be finite, got ({uL}, {uR})")
    a = uL if uL > 0.0 else 0.0
    b = uR if uR < 0.0 else 0.0
    return max(0.5 * a * a, 0.5 * b * b)


def upwind_flux_cubic(uL: float, uR: float) -> float:
    """Godunov flux for g(u) = u^3/3; g' = u^2 >= 0 makes it pure upwinding."""
    if not (math.isfinite(uL) and math.isfinite(uR)):
        raise ValueError(f"flux arguments must be finite, got ({uL}, {uR})")
    return uL * uL * uL / 3.0


def _speed_sum(amax: float, h1: float, h2: float) -> float:
    return amax / h1 + amax * amax / h2


def cfl_dt(field: CellField, cfl: float, dt_max: float = 0.1, remaining: float | None = None) -> float:
    """Stable timestep cfl / (max|u|/h1 + max|u|^2/h2), capped by the
    remaining time to the next target when given.  dt_max only enters for an
    all-zero field, where the formula degenerates; the run loop applies its
    own hard cap every step."""
    amax = float(np.max(np.abs(field.values))) if field.values.size else 0.0
    dt = dt_max if amax == 0.0 else cfl / _speed_sum(amax, field.grid.h1, field.grid.h2)
    if remaining is not None:
        dt = min(dt, remaining)
    return dt


def _extend(values: np.ndarray, boundary: str, ghost=None) -> np.ndarray:
    """Pad with one ghost ring.  ghost overrides the boundary mode with
    prescribed edge data (left, right, bottom, top) arrays."""
    n1, n2 = values.shape
    ext = np.empty((n1 + 2, n2 + 2))
    ext[1:-1, 1:-1] = values
    if ghost is not None:
        left, right, bottom, top = ghost
        ext[0, 1:-1] = left
        ext[-1, 1:-1] = right
        ext[1:-1, 0] = bottom
        ext[1:-1, -1] = top
    elif boundary == "periodic":
        ext[0, 1:-1] = values[-1, :]
        ext[-1, 1:-1] = values[0, :]
        ext[1:-1, 0] = values[:, -1]
        ext[1:-1, -1] = values[:, 0]
    else:  # outflow: copy edge cells
        ext[0, 1:-1] = values[0, :]
        ext[-1, 1:-1] = values[-1, :]
        ext[1:-1, 0] = values[:, 0]
        ext[1:-1, -1] = values[:, -1]
    # corners are outside the 5-point stencil; fill with nearest edge value
    ext[0, 0] = ext[0, 1]
    ext[0, -1] = ext[0, -2]
    ext[-1, 0] = ext[-1, 1]
    ext[-1, -1] = ext[-1, -2]
    return ext


def _ghost_from_fn(ghost_fn, grid: Grid2D, t: float):
    """Evaluate a boundary oracle ghost_fn(t, x1, x2) on the four ghost rings."""
    x1c = grid.x1_centers()
    x2c = grid.x2_centers()
    left = ghost_fn(t, np.full(grid.n2, grid.x1_min - 0.5 * grid.h1), x2c)
    right = ghost_fn(t, np.full(grid.n2, grid.x1_max + 0.5 * grid.h1), x2c)
    bottom = ghost_fn(t, x1c, np.full(grid.n1, grid.x2_min - 0.5 * grid.h2))
    top = ghost_fn(t, x1c, np.full(grid.n1, grid.x2_max + 0.5 * grid.h2))
    return (np.asarray(left, dtype=float), np.asarray(right, dtype=float),
            np.asarray(bottom, dtype=float), np.asarray(top, dtype=float))


def _sweep_x1(ext: np.ndarray, dt: float, h1: float) -> np.ndarray:
    """Godunov sweep in x1 only (used by the strang path)."""
    a = np.maximum(ext[:-1, 1:-1], 0.0)
    b = np.minimum(ext[1:, 1:-1], 0.0)
    f = np.maximum(0.5 * a * a, 0.5 * b * b)
    return ext[1:-1, 1:-1] - (dt / h1) * (f[1:, :] - f[:-1, :])

def _sweep_x2(ext: np.ndarray, dt: float, h2: float) -> np.ndarray:
    """Upwind sweep in x2 only."""
    u = ext[1:-1, :-1]
    g = u * u * u / 3.0
    return ext[1:-1, 1:-1] - (dt / h2) * (g[:, 1:] - g[:, :-1])


def step(field: CellField, dt: float, config: SchemeConfig, ghost=None) -> CellField:
    """Advance one timestep.  dt must satisfy the CFL bound for the current
    state (checked, including prescribed ghost data); violating it voids the
    monotonicity guarantees, so it is an error rather than a warning."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    g = field.grid
    amax = float(np.max(np.abs(field.values))) if field.values.size else 0.0
    if ghost is not None:
        for ring in ghost:
            if ring.size:
                amax = max(amax, float(np.max(np.abs(ring))))
    if amax > 0.0 and dt * _speed_sum(amax, g.h1, g.h2) > 1.0 + 1e-12:
        raise ValueError(f"dt={dt} violates the CFL bound for max|u|={amax}")
    ext = _extend(field.values, g.boundary, ghost)
    if config.splitting == "strang":
        half = _sweep_x1(ext, 0.5 * dt, g.h1)
        mid = _sweep_x2(_extend(half, g.boundary, ghost), dt, g.h2)
        new = _sweep_x1(_extend(mid, g.boundary, ghost), 0.5 * dt, g.h1)
    else:
        new = kernels.step_interior(ext, dt, g.h1, g.h2)
    return field.with_values(new, time=field.time + dt)


@dataclass
class Trajectory:
    """Output of run(): snapshots at the requested times plus per-snapshot
    scalar series consumed by the diagnostics module."""

    snapshots: list
    config: SchemeConfig
    series: dict = dc_field(default_factory=dict)
    n_steps: int = 0

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.snapshots])

    def __getitem__(self, i: int) -> CellField:
        return self.snapshots[i]

    def __len__(self) -> int:
        return len(self.snapshots)


def _boundary_ring_mass(values: np.ndarray, grid: Grid2D) -> float:
    edge = abs(values[0, :]).sum() + abs(values[-1, :]).sum()
    edge += abs(values[:, 0]).sum() + abs(values[:, -1]).sum()
    return float(edge) * grid.cell_area


def run(datum, grid: Grid2D, config: SchemeConfig, ghost_fn=None) -> Trajectory:
    """Evolve the discretized datum to t_end, snapshotting at the exact times
    in config.snapshot_times.  dt follows cfl_dt recomputed each step and is
    clipped so every snapshot time is hit exactly.

    datum may be an InitialDatum-like object (anything discretize accepts) or
    an already-discretized CellField.  ghost_fn(t, x1, x2), when given,
    prescribes ghost-cell data from an external solution; its values join the
    CFL reduction so oracle-driven boundaries cannot outrun the interior.

    Emits SupportEscapeWarning once if nonzero mass reaches the outer cell
    ring under outflow conditions (support diagnostics stop being trustworthy
    past that point).
    """
    if isinstance(datum, CellField):
        if datum.grid != grid:
            raise ValueError("CellField datum lives on a different grid")
        u = datum
    else:
        u = discretize(datum, grid)
    snaps_todo = list(config.snapshot_times)
    ks = config.entropy_ks

    snapshots = []
    series = {key: [] for key in ("t", "mass", "l1", "linf", "entropy_max")}
    warned_escape = False
    esc_floor = 1e-13 * max(1.0, float(np.max(np.abs(u.values))) if u.values.size else 0.0)

    def record(fld: CellField, ent: float):
        snapshots.append(fld)
        series["t"].append(fld.time)
        series["mass"].append(fld.mass())
        series["l1"].append(float(np.sum(np.abs(fld.values))) * grid.cell_area)
        series["linf"].append(float(np.max(np.abs(fld.values))) if fld.values.size else 0.0)
        series["entropy_max"].append(ent)

    while snaps_todo and abs(snaps_todo[0] - u.time) <= 1e-14 * max(1.0, u.time):
        snaps_todo.pop(0)
        record(u, 0.0)

    n_steps = 0
    last_entropy = 0.0
    while u.time < config.t_end - 1e-14 * max(1.0, config.t_end):
        target = snaps_todo[0] if snaps_todo else config.t_end
        ghost = _ghost_from_fn(ghost_fn, grid, u.time) if ghost_fn is not None else None
        amax = float(np.max(np.abs(u.values))) if u.values.size else 0.0
        if ghost is not None:
            for ring in ghost:
                if ring.size:
                    amax = max(amax, float(np.max(np.abs(ring))))
        if amax == 0.0 and ghost is None:
            dt = min(config.dt_max, target - u.time)
        else:
            dt = min(config.cfl / _speed_sum(amax, grid.h1, grid.h2) if amax > 0 else config.dt_max,
                     config.dt_max, target - u.time)
        before = u
        u = step(u, dt, config, ghost)
        n_steps += 1
        if ks:
            worst = 0.0
            for k in ks:
                r = kernels.entropy_interior(_extend(before.values, grid.boundary, ghost),
                                             u.values, dt, grid.h1, grid.h2, float(k))
                worst = max(worst, float(np.max(r)))
            last_entropy = worst
        if (not warned_escape and grid.boundary == "outflow" and ghost_fn is None
                and _boundary_ring_mass(u.values, grid) > esc_floor):
            warnings.warn(
                f"nonzero values reached the boundary layer at t={u.time:.6g}; "
                "support diagnostics are unreliable from here on",
                SupportEscapeWarning, stacklevel=2)
            warned_escape = True
        if snaps_todo and u.time >= snaps_todo[0] - 1e-14 * max(1.0, snaps_todo[0]):
            snaps_todo.pop(0)
            record(u, last_entropy)
    if not snapshots or snapshots[-1].time < config.t_end - 1e-12:
        record(u, last_entropy)
    return Trajectory(snapshots=snapshots, config=config,
                      series={k: np.array(v) for k, v in series.items()},
                      n_steps=n_steps)


@dataclass(frozen=True)
class EntropyResidualField:
    """Per-cell discrete Kruzkov entropy production over one step, for one k.
    Nonpositive (up to rounding) certifies the cell entropy inequality."""

    grid: Grid2D
    k: float
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.grid.n1, self.grid.n2):
            raise ValueError("values shape does not match grid")

    def max_positive_part(self) -> float:
        return float(max(np.max(self.values), 0.0))


def entropy_residual(before: CellField, after: CellField, dt: float, k: float) -> EntropyResidualField:
    """Discrete Kruzkov residual for entropy |u - k|:

        r_ij = (|u'-k| - |u-k|)/dt + (QF_{i+1/2} - QF_{i-1/2})/h1
                                   + (QG_{j+1/2} - QG_{j-1/2})/h2

    with numerical entropy fluxes QF(a,b;k) = F(a∨k, b∨k) - F(a∧k, b∧k) and
    likewise QG from the upwind flux.  Crandall-Majda: r_ij ≤ 0 for monotone
    schemes under CFL, so max(r, 0) is pure numerical noise."""
    if before.grid != after.grid:
        raise ValueError("fields live on different grids")
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    g = before.grid
    ext = _extend(before.values, g.boundary)
    r = kernels.entropy_interior(ext, after.values, dt, g.h1, g.h2, float(k))
    return EntropyResidualField(grid=g, k=float(k), values=r)


def evolve_together(fields: list, t_end: float, config: SchemeConfig, record_times=()) -> dict:
    """Advance several fields on a shared grid with a shared dt (the min of
    their individual CFL steps).  Pairwise L1 contraction and comparison then
    hold step-by-step in exact arithmetic, which is what the semigroup and
    mollification diagnostics measure.

    Returns a dict with the final fields, records at the requested times,
    and worst-case per-step statistics for every pair (i < j, row-major):
    "pair_margins" (L1-distance increase, contraction says <= 0),
    "pair_sup" (largest L1 distance seen at any step, initial included),
    "order_margins" (max positive part of fields[i] - fields[j], order
    preservation for initially ordered pairs says ~0), and per-field
    "mass_drift" (max relative deviation from the initial mass).
    """
    if not fields:
        raise ValueError("need at least one field")
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid != g:
            raise ValueError("fields must share a grid")
    todo = sorted(set(float(t) for t in record_times))
    records = {}
    t = fields[0].time
    for f in fields:
        if abs(f.time - t) > 1e-14:
            raise ValueError("fields must share a start time")
    while todo and todo[0] <= t + 1e-14:
        records[todo.pop(0)] = list(fields)

    n = len(fields)
    npairs = n * (n - 1) // 2
    margins = np.zeros(npairs)
    order_margins = np.zeros(npairs)
    area = g.cell_area
    pair_sup = np.zeros(npairs)
    idx = 0
    for i in range(n):
        for j in range(i + 1, n):
            pair_sup[idx] = float(np.sum(np.abs(fields[i].values - fields[j].values))) * area
            idx += 1
    mass0 = np.array([f.mass() for f in fields])
    mass_drift = np.zeros(n)
    while t < t_end - 1e-14 * max(1.0, t_end):
        target = todo[0] if todo else t_end
        amax = max(float(np.max(np.abs(f.values))) for f in fields)
        if amax == 0.0:
            dt = min(config.dt_max, target - t)
        else:
            dt = min(config.cfl / _speed_sum(amax, g.h1, g.h2), config.dt_max, target - t)
        before = fields
        fields = [step(f, dt, config) for f in fields]
        t = fields[0].time
        for f in fields[1:]:
            if abs(f.time - t) > 1e-14 * max(1.0, t):  # shared-dt invariant
                raise RuntimeError("paired runs fell out of sync")
        idx = 0
        for i in range(n):
            for j in range(i + 1, n):
                d_before = float(np.sum(np.abs(before[i].values - before[j].values))) * area
                d_after = float(np.sum(np.abs(fields[i].values - fields[j].values))) * area
                margins[idx] = max(margins[idx], d_after - d_before)
                pair_sup[idx] = max(pair_sup[idx], d_after)
                order_margins[idx] = max(order_margins[idx],
                                         float(np.max(fields[i].values - fields[j].values)))
                idx += 1
        for i in range(n):
            rel = abs(fields[i].mass() - mass0[i]) / max(abs(mass0[i]), 1e-300)
            mass_drift[i] = max(mass_drift[i], rel)
        if todo and t >= todo[0] - 1e-14 * max(1.0, todo[0]):
            records[todo.pop(0)] = list(fields)
    return {"times": np.array(sorted(records)), "fields": fields,
            "records": records, "pair_margins": margins, "pair_sup": pair_sup,
            "order_margins": order_margins, "mass_drift": mass_drift}

