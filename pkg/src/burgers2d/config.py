"""Declarative experiment configs: a small sectioned key=value format.

Example::

    [experiment]
    name = run
    seed = 7

    [grid]
    x1_min = -2.5
    x1_max = 2.5
    n1 = 512

    [datum]
    kind = dirac
    M = 1
    m = 16

Unknown sections or keys are rejected with their line number; every value
is validated by constructing the corresponding domain object before any
experiment starts.  parse_config(render(cfg)) round-trips exactly.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field as dc_field

from .core import build_grid
from .data import (InitialDatum, MollifierSpec, NWaveParams, Profile1D,
                   bump_datum, dirac_family, mollified_line_measure, nwave_slice)
from .diagnostics import DiagnosticSpec
from .scheme import SchemeConfig

EXPERIMENTS = ("run", "sweep", "semigroup", "selfsim", "calibrate", "validate")

ENV_PREFIX = "BURG2D_"

# section -> key -> (type tag, default-as-string)
_SCHEMA = {
    "experiment": {
        "name": ("str", "run"),
        "seed": ("int", "0"),
    },
    "grid": {
        "x1_min": ("float", "-1"),
        "x1_max": ("float", "1"),
        "x2_min": ("float", "-1"),
        "x2_max": ("float", "1"),
        "n1": ("int", "128"),
        "n2": ("int", "128"),
        "boundary": ("str", "outflow"),
    },
    "datum": {
        "kind": ("str", "dirac"),
        "M": ("float", "1"),
        "m": ("int", "16"),
        "kernel": ("str", "cosine"),
        "eps": ("float", "0.1"),
        "g": ("str", "indicator"),
        "g_lo": ("float", "0"),
        "g_hi": ("float", "1"),
        "g_height": ("float", "1"),
        "p": ("float", "0"),
        "q": ("float", "1"),
        "t0": ("float", "0.25"),
        "c1": ("float", "0"),
        "c2": ("float", "0"),
        "w1": ("float", "0.5"),
        "w2": ("float", "0.5"),
    },
    "scheme": {
        "cfl": ("float", "0.5"),
        "splitting": ("str", "unsplit"),
        "t_end": ("float", "1"),
        "dt_max": ("float", "0.1"),
        "snapshots": ("floats", ""),  # empty = initial and final states only
    },
    "diagnostics": {
        "q_list": ("floats", "2"),
        "alpha_list": ("floats", "4"),
        "support_threshold": ("optfloat", ""),
    },
    "sweep": {
        "m_list": ("ints", "8,16,32"),
    },
    "selfsim": {
        "c": ("float", "1"),
        "kappa": ("float", "0.3333333333333333"),
        "n_starts": ("int", "100"),
        "span": ("float", "2"),
        "tol": ("float", "1e-10"),
    },
    "output": {
        "format": ("str", "csv"),
    },
}


class ConfigError(ValueError):
    """Config text rejected; message carries the offending line number."""


def _convert(tag: str, raw: str, where: str):
    try:
        if tag == "int":
            return int(raw)
        if tag == "float":
            v = float(raw)
            if not math.isfinite(v):
                raise ValueError("non-finite")
            return v
        if tag == "optfloat":
            return None if raw == "" else float(raw)
        if tag == "floats":
            return tuple(float(p) for p in raw.split(",") if p.strip() != "")
        if tag == "ints":
            return tuple(int(p) for p in raw.split(",") if p.strip() != "")
        return raw
    except ValueError as exc:
        raise ConfigError(f"{where}: cannot parse {raw!r} as {tag}: {exc}") from None


@dataclass
class ExperimentConfig:
    experiment: str = "run"
    seed: int = 0
    grid: dict = dc_field(default_factory=dict)
    datum: dict = dc_field(default_factory=dict)
    scheme: dict = dc_field(default_factory=dict)
    diagnostics: dict = dc_field(default_factory=dict)
    sweep: dict = dc_field(default_factory=dict)
    selfsim: dict = dc_field(default_factory=dict)
    output: dict = dc_field(default_factory=dict)

    def build_grid(self):
        g = self.grid
        return build_grid(((g["x1_min"], g["x1_max"]), (g["x2_min"], g["x2_max"])),
                          (g["n1"], g["n2"]), g["boundary"])

    def build_datum(self) -> InitialDatum:
        d = self.datum
        kind = d["kind"]
        if kind == "dirac":
            return dirac_family(d["M"], d["m"], d["kernel"])
        if kind == "line_measure":
            if d["g"] == "indicator":
                g = Profile1D("indicator", lo=d["g_lo"], hi=d["g_hi"], height=d["g_height"])
            elif d["g"] == "kernel":
                g = Profile1D("kernel", kernel=d["kernel"], eps=d["g_hi"] - d["g_lo"],
                              center=0.5 * (d["g_lo"] + d["g_hi"]), mass=d["M"])
            else:
                raise ConfigError(f"datum.g: unknown profile {d['g']!r} (use indicator|kernel)")
            return mollified_line_measure(g, MollifierSpec(kernel=d["kernel"], eps=d["eps"]))
        if kind == "nwave":
            return nwave_slice(NWaveParams(d["p"], d["q"]), d["t0"])
        if kind == "bump":
            return bump_datum(d["M"], (d["c1"], d["c2"]), (d["w1"], d["w2"]), d["kernel"])
        raise ConfigError(f"datum.kind: unknown kind {kind!r} "
                          "(use dirac|line_measure|nwave|bump)")

    def build_scheme(self) -> SchemeConfig:
        s = self.scheme
        return SchemeConfig(t_end=s["t_end"], cfl=s["cfl"], splitting=s["splitting"],
                            snapshot_times=s["snapshots"], dt_max=s["dt_max"])

    def build_diag_spec(self) -> DiagnosticSpec:
        d = self.diagnostics
        return DiagnosticSpec(q_list=d["q_list"], alpha_list=d["alpha_list"],
                              support_threshold=d["support_threshold"])


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate; the first problem is reported with its line."""
    values: dict = {sec: dict((k, _convert(t, dflt, f"default {sec}.{k}"))
                              for k, (t, dflt) in keys.items())
                    for sec, keys in _SCHEMA.items()}
    lines_of: dict = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SCHEMA:
                raise ConfigError(f"line {lineno}: unknown section [{section}]; "
                                  f"known: {', '.join(sorted(_SCHEMA))}")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw.strip()!r}")
        if section is None:
            raise ConfigError(f"line {lineno}: key outside any [section]")
        key, _, rawval = line.partition("=")
        key = key.strip()
        rawval = rawval.strip()
        if key not in _SCHEMA[section]:
            raise ConfigError(f"line {lineno}: unknown key {key!r} in [{section}]; "
                              f"known: {', '.join(sorted(_SCHEMA[section]))}")
        tag = _SCHEMA[section][key][0]
        values[section][key] = _convert(tag, rawval, f"line {lineno}: {section}.{key}")
        lines_of[(section, key)] = lineno

    cfg = ExperimentConfig(
        experiment=values["experiment"]["name"],
        seed=values["experiment"]["seed"],
        grid=values["grid"], datum=values["datum"], scheme=values["scheme"],
        diagnostics=values["diagnostics"], sweep=values["sweep"],
        selfsim=values["selfsim"], output=values["output"],
    )
    _validate(cfg, lines_of)
    return cfg


def _validate(cfg: ExperimentConfig, lines_of: dict) -> None:
    def where(sec, key):
        ln = lines_of.get((sec, key))
        return f"line {ln}: " if ln else ""

    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"{where('experiment', 'name')}unknown experiment "
                          f"{cfg.experiment!r}; did you mean one of: {', '.join(EXPERIMENTS)}")
    if cfg.output["format"] not in ("csv", "raw"):
        raise ConfigError(f"{where('output', 'format')}format must be csv|raw, "
                          f"got {cfg.output['format']!r}")
    checks = (("grid", cfg.build_grid), ("datum", cfg.build_datum),
              ("scheme", cfg.build_scheme), ("diagnostics", cfg.build_diag_spec))
    for sec, build in checks:
        try:
            build()
        except ConfigError:
            raise
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"invalid [{sec}] section: {exc}") from None


def render(cfg: ExperimentConfig) -> str:
    """Canonical text form; parse_config(render(cfg)) == cfg."""
    def fmt(v):
        if isinstance(v, tuple):
            return ",".join(fmt(p) for p in v)
        if v is None:
            return ""
        if isinstance(v, float):
            return repr(v)
        return str(v)

    out = ["[experiment]", f"name = {cfg.experiment}", f"seed = {cfg.seed}", ""]
    for sec in ("grid", "datum", "scheme", "diagnostics", "sweep", "selfsim", "output"):
        out.append(f"[{sec}]")
        for key in _SCHEMA[sec]:
            out.append(f"{key} = {fmt(getattr(cfg, sec)[key])}")
        out.append("")
    return "\n".join(out)


def apply_env_overrides(cfg: ExperimentConfig, environ=None) -> list:
    """Apply BURG2D_<SECTION>_<KEY> environment overrides (documented knob
    for sweeping without editing configs).  Returns the applied (section,
    key, value) triples so callers can log them."""
    env = os.environ if environ is None else environ
    applied = []
    for sec, keys in _SCHEMA.items():
        for key, (tag, _) in keys.items():
            name = f"{ENV_PREFIX}{sec.upper()}_{key.upper()}"
            if name in env:
                val = _convert(tag, env[name], f"env {name}")
                if sec == "experiment":
                    if key == "name":
                        cfg.experiment = val
                    else:
                        cfg.seed = val
                else:
                    getattr(cfg, sec)[key] = val
                applied.append((sec, key, val))
    _validate(cfg, {})
    return applied
