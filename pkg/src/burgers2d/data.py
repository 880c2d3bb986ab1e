"""Initial-data factories: exact N-waves, mollified line measures, and
concentrating bump families, plus the scaling transforms that act on them.

Everything built here knows its own analytic mass, sup-norm and support, and
separable data carry per-axis antiderivatives so cell averages are exact.
That exactness is what lets the conservation and contraction harnesses run
at 1e-12 instead of quadrature accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import CellField, Grid2D

KERNELS = ("triangle", "cosine")


# ---------------------------------------------------------------------------
# 1-D building blocks.  Each factor knows eval, antiderivative and support;
# separable 2-D data are products of two of them.

class _Factor:
    """Base: a compactly supported 1-D density with an exact antiderivative."""

    support: tuple  # (lo, hi)

    def __call__(self, x):
        raise NotImplementedError

    def cdf(self, x):
        """Signed integral from -inf (equivalently support lo) to x."""
        raise NotImplementedError

    def cell_integrals(self, edges: np.ndarray) -> np.ndarray:
        c = self.cdf(np.asarray(edges, dtype=float))
        return np.diff(c)

    @property
    def mass(self) -> float:
        return float(self.cdf(np.array([self.support[1]]))[0])


class _KernelFactor(_Factor):
    """theta_eps(x) = (mass/eps) K((x - center)/eps), K a unit-mass bump."""

    def __init__(self, kernel: str, eps: float, center: float = 0.0, mass: float = 1.0):
        if kernel not in KERNELS:
            raise ValueError(f"kernel must be one of {KERNELS}, got {kernel!r}")
        if eps <= 0:
            raise ValueError(f"width must be positive, got {eps}")
        self.kernel = kernel
        self.eps = float(eps)
        self.center = float(center)
        self._mass = float(mass)
        self.support = (self.center - self.eps, self.center + self.eps)

    def __call__(self, x):
        y = (np.asarray(x, dtype=float) - self.center) / self.eps
        inside = np.abs(y) < 1.0
        if self.kernel == "triangle":
            k = np.where(inside, 1.0 - np.abs(y), 0.0)
        else:
            k = np.where(inside, 0.5 * (1.0 + np.cos(np.pi * y)), 0.0)
        return self._mass * k / self.eps

    def cdf(self, x):
        y = np.clip((np.asarray(x, dtype=float) - self.center) / self.eps, -1.0, 1.0)
        if self.kernel == "triangle":
            c = np.where(y <= 0.0, 0.5 * (y + 1.0) ** 2, 0.5 + y - 0.5 * y * y)
        else:
            c = 0.5 * (y + 1.0) + np.sin(np.pi * y) / (2.0 * np.pi)
        return self._mass * c

    @property
    def sup(self) -> float:
        peak = 1.0  # both kernels peak at 1 at the origin
        return abs(self._mass) * peak / self.eps

    def scaled(self, rho: float) -> "_KernelFactor":
        # rho f(rho x): width /rho, center /rho, same mass
        return _KernelFactor(self.kernel, self.eps / rho, self.center / rho, self._mass)


class _IndicatorFactor(_Factor):
    def __init__(self, lo: float, hi: float, height: float = 1.0):
        if not hi > lo:
            raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
        self.lo = float(lo)
        self.hi = float(hi)
        self.height = float(height)
        self.support = (self.lo, self.hi)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= self.lo) & (x < self.hi), self.height, 0.0)

    def cdf(self, x):
        x = np.clip(np.asarray(x, dtype=float), self.lo, self.hi)
        return self.height * (x - self.lo)

    @property
    def sup(self) -> float:
        return abs(self.height)

    def scaled(self, rho: float) -> "_IndicatorFactor":
        return _IndicatorFactor(self.lo / rho, self.hi / rho, self.height * rho)


class _ConstFactor(_Factor):
    """Constant 1, no finite support: cell averages are exactly 1."""

    support = (-math.inf, math.inf)

    def __call__(self, x):
        return np.ones_like(np.asarray(x, dtype=float))

    def cdf(self, x):
        raise ValueError("constant factor has no finite antiderivative")

    def cell_integrals(self, edges: np.ndarray) -> np.ndarray:
        return np.diff(np.asarray(edges, dtype=float))

    @property
    def mass(self) -> float:
        return math.inf

    @property
    def sup(self) -> float:
        return 1.0


@dataclass(frozen=True)
class NWaveParams:
    """Edges p <= 0 <= q of the self-similar N-wave; mass is (q^2 - p^2)/2."""

    p: float
    q: float

    def __post_init__(self):
        if not (self.p <= 0.0 <= self.q):
            raise ValueError(f"need p <= 0 <= q, got p={self.p}, q={self.q}")

    @property
    def mass(self) -> float:
        return 0.5 * (self.q * self.q - self.p * self.p)


def nwave_exact(params: NWaveParams, t: float, x):
    """Exact N-wave u(t, x) = x/t on p*sqrt(t) <= x <= q*sqrt(t), else 0.

    Both edges are entropy shocks moving at half the inner trace, which is
    what fixes the sqrt(t) spreading; the mass (q^2 - p^2)/2 is conserved.
    """
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    x = np.asarray(x, dtype=float)
    rt = math.sqrt(t)
    out = np.where((x >= params.p * rt) & (x <= params.q * rt), x / t, 0.0)
    return out if out.ndim else float(out)


class _NWaveFactor(_Factor):
    """N-wave slice frozen at time t0, used as 1-D initial data in x1."""

    def __init__(self, params: NWaveParams, t0: float):
        if t0 <= 0:
            raise ValueError(f"t0 must be positive, got {t0}")
        self.params = params
        self.t0 = float(t0)
        rt = math.sqrt(t0)
        self.support = (params.p * rt, params.q * rt)

    def __call__(self, x):
        return nwave_exact(self.params, self.t0, x)

    def cdf(self, x):
        lo, hi = self.support
        x = np.clip(np.asarray(x, dtype=float), lo, hi)
        return (x * x - lo * lo) / (2.0 * self.t0)

    @property
    def sup(self) -> float:
        return max(abs(self.support[0]), abs(self.support[1])) / self.t0


# ---------------------------------------------------------------------------
# Profiles on the vertical axis (the g of a line measure) and mollifiers.

class _PowerTailFactor(_Factor):
    """g(x) = height (1 + x - lo)^(-a) on [lo, inf); integrable for a > 1."""

    def __init__(self, lo: float, a: float, height: float = 1.0):
        if a <= 1:
            raise ValueError(f"tail exponent must exceed 1 for integrability, got {a}")
        self.lo = float(lo)
        self.a = float(a)
        self.height = float(height)
        self.support = (self.lo, math.inf)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        y = x - self.lo
        return np.where(y >= 0.0, self.height * (1.0 + np.maximum(y, 0.0)) ** (-self.a), 0.0)

    def cdf(self, x):
        y = np.maximum(np.asarray(x, dtype=float) - self.lo, 0.0)
        return self.height * (1.0 - (1.0 + y) ** (1.0 - self.a)) / (self.a - 1.0)

    @property
    def mass(self) -> float:
        return self.height / (self.a - 1.0)

    @property
    def sup(self) -> float:
        return abs(self.height)


class Profile1D:
    """1-D density g with computable L^1, L^2 and sup norms.

    kinds: "indicator" (interval and height), "kernel" (bump of given mass,
    width, center), "cells" (piecewise constant on given edges, the form
    extract_profile returns), "power_tail" (unbounded support, algebraic
    decay).
    """

    def __init__(self, kind: str, *, lo=None, hi=None, height=1.0,
                 kernel="cosine", eps=None, center=0.0, mass=1.0,
                 edges=None, values=None, a=None):
        self.kind = kind
        if kind == "indicator":
            self._f = _IndicatorFactor(lo, hi, height)
        elif kind == "kernel":
            self._f = _KernelFactor(kernel, eps, center, mass)
        elif kind == "power_tail":
            self._f = _PowerTailFactor(lo if lo is not None else 0.0, a, height)
        elif kind == "cells":
            edges = np.asarray(edges, dtype=float)
            values = np.asarray(values, dtype=float)
            if edges.ndim != 1 or values.shape != (edges.size - 1,):
                raise ValueError("cells profile needs len(edges) == len(values) + 1")
            self.edges = edges
            self.values = values
            self._f = None
        else:
            raise ValueError(f"unknown profile kind {kind!r}")

    @property
    def support(self) -> tuple:
        if self._f is not None:
            return self._f.support
        nz = np.nonzero(self.values)[0]
        if nz.size == 0:
            return (float(self.edges[0]), float(self.edges[0]))
        return (float(self.edges[nz[0]]), float(self.edges[nz[-1] + 1]))

    def __call__(self, x):
        if self._f is not None:
            return self._f(x)
        x = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(self.edges, x, side="right") - 1, 0, self.values.size - 1)
        out = np.where((x >= self.edges[0]) & (x < self.edges[-1]), self.values[idx], 0.0)
        return out

    def cell_integrals(self, edges: np.ndarray) -> np.ndarray:
        if self._f is not None:
            return self._f.cell_integrals(edges)
        # piecewise-constant exact overlap
        cum = np.concatenate(([0.0], np.cumsum(self.values * np.diff(self.edges))))
        c = np.interp(np.asarray(edges, dtype=float), self.edges, cum,
                      left=0.0, right=cum[-1])
        return np.diff(c)

    def mass(self) -> float:
        if self._f is not None:
            return self._f.mass
        return float(np.sum(self.values * np.diff(self.edges)))

    def norm(self, p) -> float:
        if self._f is None:
            w = np.diff(self.edges)
            if p == np.inf or p == "inf":
                return float(np.max(np.abs(self.values))) if self.values.size else 0.0
            return float(np.sum(np.abs(self.values) ** p * w) ** (1.0 / p))
        f = self._f
        if p == np.inf or p == "inf":
            return f.sup
        if p == 1:
            if isinstance(f, _IndicatorFactor):
                return abs(f.height) * (f.hi - f.lo)
            return abs(f.mass)
        if p == 2:
            if isinstance(f, _IndicatorFactor):
                return abs(f.height) * math.sqrt(f.hi - f.lo)
            if isinstance(f, _PowerTailFactor):
                return abs(f.height) / math.sqrt(2.0 * f.a - 1.0)
            # int K^2 over [-1,1]: triangle 2/3, cosine 3/4
            k2 = 2.0 / 3.0 if f.kernel == "triangle" else 0.75
            return abs(f._mass) / math.sqrt(f.eps) * math.sqrt(k2)
        raise ValueError(f"norms available for p in {{1, 2, inf}}, got {p}")


@dataclass(frozen=True)
class MollifierSpec:
    """Compactly supported unit-mass kernel, width eps, smearing direction.

    Only the axis directions are implemented; xi = (1, 0) smears in x1,
    which is the configuration every vertical line measure needs.
    """

    kernel: str = "cosine"
    eps: float = 0.1
    xi: tuple = (1.0, 0.0)

    def __post_init__(self):
        if self.kernel not in KERNELS:
            raise ValueError(f"kernel must be one of {KERNELS}, got {self.kernel!r}")
        if self.eps <= 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        n = math.hypot(*self.xi)
        if abs(n - 1.0) > 1e-12:
            raise ValueError(f"xi must be a unit vector, got {self.xi}")
        if tuple(self.xi) != (1.0, 0.0):
            raise NotImplementedError("only xi = e1 (smearing in x1) is implemented")


# ---------------------------------------------------------------------------
# 2-D initial data.

DATUM_KINDS = ("function", "mollified_line_measure", "mollified_dirac", "nwave_slice")


class InitialDatum:
    """A 2-D initial datum with declared mass and horizontal support.

    Separable data (factor in x1 times factor in x2) expose exact cell
    averages through per-axis antiderivatives; a plain callable payload
    falls back to Gauss quadrature inside discretize.
    """

    def __init__(self, kind: str, factors=None, fn=None, mass=None,
                 x_support=None, support_box=None, payload=None):
        if kind not in DATUM_KINDS:
            raise ValueError(f"kind must be one of {DATUM_KINDS}, got {kind!r}")
        if factors is None and fn is None:
            raise ValueError("need either separable factors or a callable payload")
        self.kind = kind
        self.factors = factors
        self.fn = fn
        self.payload = payload or {}
        if mass is None:
            if factors is None:
                raise ValueError("mass metadata is required for callable payloads")
            mass = factors[0].mass * (1.0 if isinstance(factors[1], _ConstFactor)
                                      else factors[1].mass)
        self.mass = float(mass)
        if x_support is None and factors is not None:
            x_support = factors[0].support
        self.x_support = tuple(x_support) if x_support is not None else None
        self._support_box = support_box

    @property
    def support_box(self):
        """((x1lo, x1hi), (x2lo, x2hi)) when bounded in both axes, else None."""
        if self._support_box is not None:
            return self._support_box
        if self.factors is None:
            return None
        s1 = self.factors[0].support
        s2 = self.factors[1].support
        if not all(map(math.isfinite, (*s1, *s2))):
            return None
        return (s1, s2)

    def __call__(self, x1, x2):
        if self.factors is not None:
            f1 = self.factors[0](np.asarray(x1, dtype=float))
            f2 = self.factors[1](np.asarray(x2, dtype=float))
            return f1 * f2
        return self.fn(x1, x2)

    def cell_averages(self, grid: Grid2D) -> np.ndarray:
        if self.factors is None:
            from .core import gauss_cell_averages
            return gauss_cell_averages(self.fn, grid, order=5)
        i1 = self.factors[0].cell_integrals(grid.x1_edges()) / grid.h1
        i2 = self.factors[1].cell_integrals(grid.x2_edges()) / grid.h2
        return np.outer(i1, i2)

    def linf(self) -> float:
        """Exact sup norm for separable payloads."""
        if self.factors is None:
            raise ValueError("sup norm only available for separable payloads")
        return self.factors[0].sup * self.factors[1].sup


def mollified_line_measure(g: Profile1D, spec: MollifierSpec) -> InitialDatum:
    """a_eps(x) = theta_eps(x1) g(x2): the vertical line measure with density
    g smeared over width eps in x1.  Mass equals the mass of g."""
    f1 = _KernelFactor(spec.kernel, spec.eps, 0.0, 1.0)
    f2 = _profile_factor(g)
    return InitialDatum("mollified_line_measure", factors=(f1, f2),
                        mass=g.mass(), payload={"eps": spec.eps, "kernel": spec.kernel, "g": g})


class _ProfileFactor(_Factor):
    def __init__(self, profile: Profile1D):
        self.profile = profile
        self.support = profile.support

    def __call__(self, x):
        return self.profile(x)

    def cell_integrals(self, edges):
        return self.profile.cell_integrals(edges)

    @property
    def mass(self):
        return self.profile.mass()

    @property
    def sup(self):
        return self.profile.norm(np.inf)


def _profile_factor(g: Profile1D) -> _Factor:
    return g._f if g._f is not None else _ProfileFactor(g)


def dirac_family(M: float, m: int, kernel: str = "cosine") -> InitialDatum:
    """Tensor-product bump of mass M supported in [-1/m, 1/m]^2.

    As m grows this concentrates toward M delta_0: the sup norm is M m^2
    (kernel peak 1 in both axes), so doubling m quadruples the peak.
    """
    if M <= 0:
        raise ValueError(f"mass must be positive, got {M}")
    if not (isinstance(m, (int, np.integer)) and m >= 1):
        raise ValueError(f"m must be a positive integer, got {m!r}")
    eps = 1.0 / float(m)
    f1 = _KernelFactor(kernel, eps, 0.0, M)
    f2 = _KernelFactor(kernel, eps, 0.0, 1.0)
    return InitialDatum("mollified_dirac", factors=(f1, f2), mass=M,
                        payload={"M": M, "m": int(m), "kernel": kernel})


def nwave_slice(params: NWaveParams, t0: float) -> InitialDatum:
    """1-D N-wave at time t0 embedded as x2-independent 2-D data.

    The vertical flux u^3/3 of an x2-constant field has zero divergence, so
    the 2-D evolution reproduces the 1-D dynamics exactly; declared mass is
    per unit x2-height."""
    f1 = _NWaveFactor(params, t0)
    return InitialDatum("nwave_slice", factors=(f1, _ConstFactor()),
                        mass=params.mass, x_support=f1.support,
                        payload={"params": params, "t0": t0})


def bump_datum(M: float, center=(0.0, 0.0), widths=(1.0, 1.0), kernel: str = "cosine") -> InitialDatum:
    """Separable translated bump with exact cell averages; the workhorse for
    randomized contraction and comparison sweeps."""
    if M == 0:
        raise ValueError("mass must be nonzero")
    f1 = _KernelFactor(kernel, widths[0], center[0], M)
    f2 = _KernelFactor(kernel, widths[1], center[1], 1.0)
    return InitialDatum("function", factors=(f1, f2), mass=M,
                        payload={"M": M, "center": tuple(center), "widths": tuple(widths),
                                 "kernel": kernel})


def scale_datum(a: InitialDatum, rho: float) -> InitialDatum:
    """Horizontal concentration a_rho(x) = rho a(rho x1, x2): mass invariant,
    x1-support shrinks by 1/rho.  Exact on payload parameters."""
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    if a.kind == "nwave_slice":
        raise ValueError("nwave_slice does not scale within its family")
    if rho == 1.0:
        return a
    if a.factors is not None:
        f1 = a.factors[0]
        if not hasattr(f1, "scaled"):
            raise ValueError(f"x1 factor {type(f1).__name__} has no exact scaling")
        return InitialDatum(a.kind, factors=(f1.scaled(rho), a.factors[1]),
                            mass=a.mass, payload={**a.payload, "rho": rho * a.payload.get("rho", 1.0)})
    fn = a.fn
    new = InitialDatum(a.kind, fn=lambda x1, x2: rho * fn(rho * x1, x2), mass=a.mass,
                       x_support=None if a.x_support is None
                       else (a.x_support[0] / rho, a.x_support[1] / rho),
                       payload={**a.payload, "rho": rho * a.payload.get("rho", 1.0)})
    return new


def scale_solution(field: CellField, mu: float, target: Grid2D) -> CellField:
    """The scaling group u^mu(t, x) = sqrt(mu) u(mu t, sqrt(mu) x1, x2),
    resampled conservatively onto the target grid.

    Each target cell receives the exact integral of the piecewise-constant
    source over its preimage, so mass is preserved to rounding whenever the
    scaled target window covers the source support.  The returned time is
    field.time / mu."""
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    src = field.grid
    rmu = math.sqrt(mu)
    # target-cell integral in x1 = source integral over sqrt(mu) * [a, b]
    o1 = _overlap_matrix(target.x1_edges() * rmu, src.x1_edges())
    o2 = _overlap_matrix(target.x2_edges(), src.x2_edges())
    covered_1 = target.x1_edges()[0] * rmu <= src.x1_edges()[0] and target.x1_edges()[-1] * rmu >= src.x1_edges()[-1]
    vals = (o1 @ field.values @ o2.T) / (target.h1 * target.h2)
    out = CellField(target, vals, field.time / mu,
                    dict(field.meta, scaled_by=mu))
    if not covered_1:
        import warnings as _w
        from .core import SupportEscapeWarning
        _w.warn("target grid does not cover the scaled support in x1",
                SupportEscapeWarning, stacklevel=2)
    return out


def _overlap_matrix(tgt_edges: np.ndarray, src_edges: np.ndarray) -> np.ndarray:
    """O[i, j] = measure of overlap between target cell i and source cell j."""
    lo = np.maximum.outer(tgt_edges[:-1], src_edges[:-1])
    hi = np.minimum.outer(tgt_edges[1:], src_edges[1:])
    return np.maximum(hi - lo, 0.0)
