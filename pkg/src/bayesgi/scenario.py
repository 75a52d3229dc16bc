"""Scenario files: a small TOML schema, validated in one pass.

Example::

    mode = "repeated"
    seed = 42

    [params]
    power_budget = 1.0
    noise_density = 0.01
    power_cost_coeff = 2.0

    [gains]
    g12 = 0.6
    g21 = 0.5

    [priors]
    g21 = "uniform(0,1)"

    [repeated]
    horizon = 10

Validation never stops at the first problem: every error is collected with
the dotted path of the offending key.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, fields

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import numpy as np

from .core_model import GameParams, share_rate
from .distributions import GainDistribution, parse_distribution, prob_below
from .sequential_games import g12_tilde

MODES = ("static-br", "bgi-verify", "sbgi", "sbgie", "two-sided", "repeated", "sweep")
GAIN_KEYS = ("g11", "g12", "g21", "g22")
SWEEP_VARIABLES = ("power_budget", "noise_density", "power_cost_coeff", "g12", "g21", "horizon")
SWEEP_TARGETS = ("thresholds", "sbgi", "sbgie", "two-sided", "repeated")


@dataclass
class ScenarioError:
    path: str
    message: str

    def as_dict(self) -> dict:
        return {"path": self.path, "message": self.message}


class ValidationError(ValueError):
    def __init__(self, errors: list[ScenarioError]):
        self.errors = errors
        super().__init__("; ".join(f"{e.path}: {e.message}" for e in errors))


@dataclass(frozen=True)
class StaticBrOptions:
    init1: float = 1.0
    init2: float = 0.0
    max_iter: int = 100
    tol: float = 1e-10
    simultaneous: bool = True


@dataclass(frozen=True)
class BgiOptions:
    candidate: str = "spread"
    n_check: int = 1000
    n_strategy: int = 10_000


@dataclass(frozen=True)
class NumericOptions:
    quadrature_order: int = 32
    mc_samples: int = 100_000
    tol: float = 1e-10
    damping: float = 0.5
    max_iter: int = 10_000


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    target: str = "thresholds"
    scale: str = "linear"
    start: float | None = None
    stop: float | None = None
    num: int | None = None
    values: tuple[float, ...] | None = None

    def grid(self) -> list[float]:
        if self.values is not None:
            return list(self.values)
        make = np.geomspace if self.scale == "log" else np.linspace
        return [float(x) for x in make(self.start, self.stop, self.num)]


@dataclass(frozen=True)
class Scenario:
    mode: str
    params: GameParams
    seed: int = 0
    gains: dict = field(default_factory=dict)
    priors: dict = field(default_factory=dict)
    horizon: int | None = None
    static_br: StaticBrOptions = StaticBrOptions()
    bgi: BgiOptions = BgiOptions()
    numerics: NumericOptions = NumericOptions()
    sweep: SweepSpec | None = None
    output_dir: str = "."

    def prior(self, key: str) -> GainDistribution:
        return self.priors[key]


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


class _Checker:
    def __init__(self):
        self.errors: list[ScenarioError] = []

    def err(self, path, msg):
        self.errors.append(ScenarioError(path, msg))

    def section(self, doc, name, allowed, required=False):
        if name not in doc:
            if required:
                self.err(name, "missing required section")
            return {}
        sec = doc[name]
        if not isinstance(sec, dict):
            self.err(name, "must be a table")
            return {}
        for k in sec:
            if k not in allowed:
                self.err(f"{name}.{k}", "unknown key")
        return sec

    def number(self, sec, prefix, key, default, lo=None, hi=None, lo_open=False, integer=False):
        if key not in sec:
            return default
        v = sec[key]
        path = f"{prefix}.{key}" if prefix else key
        if integer and not _is_int(v):
            self.err(path, f"must be an integer, got {v!r}")
            return default
        if not _is_number(v):
            self.err(path, f"must be a number, got {v!r}")
            return default
        if math.isnan(v):
            self.err(path, "must not be NaN")
            return default
        if lo is not None and (v <= lo if lo_open else v < lo):
            self.err(path, f"must be {'>' if lo_open else '>='} {lo}, got {v!r}")
            return default
        if hi is not None and v > hi:
            self.err(path, f"must be <= {hi}, got {v!r}")
            return default
        return int(v) if integer else float(v)


def _validate(doc: dict) -> Scenario:
    c = _Checker()
    top_allowed = {"mode", "seed", "params", "gains", "priors", "repeated", "static_br",
                   "bgi_verify", "numerics", "sweep", "output"}
    for k in doc:
        if k not in top_allowed:
            c.err(k, "unknown key")

    mode = doc.get("mode")
    if mode is None:
        c.err("mode", "missing required key")
    elif mode not in MODES:
        c.err("mode", f"must be one of {list(MODES)}, got {mode!r}")
        mode = None
    seed = c.number(doc, "", "seed", 0, lo=0, integer=True)
    if seed >= 2**64:
        c.err("seed", "must fit in 64 bits")
        seed = 0

    p = c.section(doc, "params", {"power_budget", "noise_density", "subchannels",
                                  "power_cost_coeff"})
    P = c.number(p, "params", "power_budget", 1.0, lo=0, lo_open=True)
    N0 = c.number(p, "params", "noise_density", 0.01, lo=0, lo_open=True)
    K = c.number(p, "params", "subchannels", 2, lo=1, integer=True)
    k = c.number(p, "params", "power_cost_coeff", 0.0, lo=0)
    params = GameParams(P, N0, K, k)

    g = c.section(doc, "gains", set(GAIN_KEYS))
    gains = {}
    for key in GAIN_KEYS:
        if key in g:
            v = c.number(g, "gains", key, None, lo=0)
            if v is not None:
                if key in ("g11", "g22") and v == 0:
                    c.err(f"gains.{key}", "self gain must be > 0")
                else:
                    gains[key] = v

    pr = c.section(doc, "priors", set(GAIN_KEYS))
    priors = {}
    for key in GAIN_KEYS:
        if key in pr:
            v = pr[key]
            if not isinstance(v, str):
                c.err(f"priors.{key}", f"must be a distribution literal string, got {v!r}")
                continue
            try:
                priors[key] = parse_distribution(v)
            except ValueError as e:
                c.err(f"priors.{key}", str(e))

    rep = c.section(doc, "repeated", {"horizon"})
    horizon = c.number(rep, "repeated", "horizon", None, lo=1, integer=True)

    sb = c.section(doc, "static_br", {f.name for f in fields(StaticBrOptions)})
    sb_opts = StaticBrOptions(
        c.number(sb, "static_br", "init1", 1.0 * P, lo=0, hi=P),
        c.number(sb, "static_br", "init2", 0.0, lo=0, hi=P),
        c.number(sb, "static_br", "max_iter", 100, lo=1, integer=True),
        c.number(sb, "static_br", "tol", 1e-10, lo=0, lo_open=True),
        sb.get("simultaneous", True))
    if not isinstance(sb_opts.simultaneous, bool):
        c.err("static_br.simultaneous", "must be true or false")

    bg = c.section(doc, "bgi_verify", {f.name for f in fields(BgiOptions)})
    bgi = BgiOptions(bg.get("candidate", "spread"),
                     c.number(bg, "bgi_verify", "n_check", 1000, lo=1, integer=True),
                     c.number(bg, "bgi_verify", "n_strategy", 10_000, lo=1, integer=True))
    if not isinstance(bgi.candidate, str) or not _candidate_ok(bgi.candidate, K):
        c.err("bgi_verify.candidate",
              f"must be 'spread' or 'concentrate:k' with 1 <= k <= {K}, got {bgi.candidate!r}")

    nu = c.section(doc, "numerics", {f.name for f in fields(NumericOptions)})
    numerics = NumericOptions(
        c.number(nu, "numerics", "quadrature_order", 32, lo=1, integer=True),
        c.number(nu, "numerics", "mc_samples", 100_000, lo=1, integer=True),
        c.number(nu, "numerics", "tol", 1e-10, lo=0, lo_open=True),
        c.number(nu, "numerics", "damping", 0.5, lo=0, hi=1, lo_open=True),
        c.number(nu, "numerics", "max_iter", 10_000, lo=1, integer=True))

    sweep = None
    sw = c.section(doc, "sweep", {f.name for f in fields(SweepSpec)}, required=mode == "sweep")
    if mode == "sweep" and sw:
        sweep = _validate_sweep(c, sw)
    elif sw and mode != "sweep":
        c.err("sweep", "only allowed when mode = 'sweep'")

    out = c.section(doc, "output", {"dir"})
    out_dir = out.get("dir", ".")
    if not isinstance(out_dir, str) or not out_dir:
        c.err("output.dir", "must be a non-empty string")
        out_dir = "."

    if mode is not None:
        present = {"gains": set(g), "priors": set(pr), "horizon": "horizon" in rep}
        _mode_requirements(c, mode, sweep, params, gains, priors, horizon, present)

    if c.errors:
        raise ValidationError(c.errors)
    return Scenario(mode, params, seed, gains, priors, horizon, sb_opts, bgi, numerics, sweep,
                    out_dir)


def _candidate_ok(text: str, K: int) -> bool:
    if text == "spread":
        return True
    if text.startswith("concentrate:"):
        tail = text.split(":", 1)[1]
        return tail.isdigit() and 1 <= int(tail) <= K
    return False


def _validate_sweep(c: _Checker, sw: dict) -> SweepSpec | None:
    ok = True
    var = sw.get("variable")
    if var is None:
        c.err("sweep.variable", "missing required key")
        ok = False
    elif isinstance(var, (list, tuple)):
        c.err("sweep.variable", "multi-variable sweeps are not supported; give one variable")
        ok = False
    elif var not in SWEEP_VARIABLES:
        c.err("sweep.variable", f"must be one of {list(SWEEP_VARIABLES)}, got {var!r}")
        ok = False
    target = sw.get("target", "thresholds")
    if target not in SWEEP_TARGETS:
        c.err("sweep.target", f"must be one of {list(SWEEP_TARGETS)}, got {target!r}")
        ok = False
    scale = sw.get("scale", "linear")
    if scale not in ("linear", "log"):
        c.err("sweep.scale", f"must be 'linear' or 'log', got {scale!r}")
        ok = False
    values = sw.get("values")
    start = stop = num = None
    if values is not None:
        if any(k in sw for k in ("start", "stop", "num")):
            c.err("sweep.values", "give either values or start/stop/num, not both")
            ok = False
        if not isinstance(values, list) or not values or not all(_is_number(v) for v in values):
            c.err("sweep.values", "must be a non-empty list of numbers")
            ok = False
        else:
            values = tuple(float(v) for v in values)
    else:
        for key in ("start", "stop", "num"):
            if key not in sw:
                c.err(f"sweep.{key}", "missing required key (or give values)")
                ok = False
        n_errors = len(c.errors)
        start = c.number(sw, "sweep", "start", None)
        stop = c.number(sw, "sweep", "stop", None)
        num = c.number(sw, "sweep", "num", None, lo=1, integer=True)
        if len(c.errors) > n_errors:
            ok = False
        if ok and scale == "log" and not (start > 0 and stop > 0):
            c.err("sweep.start", "log grids need positive start and stop")
            ok = False
    if not ok:
        return None
    spec = SweepSpec(var, target, scale, start, stop, num, values)
    if var == "horizon" and any(v != int(v) or v < 1 for v in spec.grid()):
        c.err("sweep", "horizon grid points must be integers >= 1")
        return None
    return spec


def _need(c: _Checker, present: set, section: str, keys, why: str):
    for key in keys:
        if key not in present:
            c.err(f"{section}.{key}", f"required for {why}")


def _mode_requirements(c, mode, sweep, params, gains, priors, horizon, present):
    """Keys a mode needs; keys given but invalid were already reported."""
    swept = sweep.variable if sweep else None
    target = sweep.target if sweep else mode
    why = f"mode '{mode}'" + (f" (sweep target '{target}')" if sweep else "")
    gain_keys = [key for key in ("g12", "g21") if key != swept]

    if mode == "static-br":
        _need(c, present["priors"], "priors", GAIN_KEYS, why)
        if params.subchannels != 2:
            c.err("params.subchannels", "static-br is defined for 2 subchannels")
        return
    if mode == "bgi-verify":
        _need(c, present["priors"], "priors", ("g11", "g21"), why)
        return

    if target in ("sbgi", "sbgie", "repeated"):
        _need(c, present["gains"], "gains", gain_keys, why)
    if target in ("sbgie", "repeated"):
        _need(c, present["priors"], "priors", ("g21",), why)
    if target == "two-sided":
        _need(c, present["priors"], "priors", ("g12", "g21"), why)
    if target == "repeated" and swept != "horizon" and not present["horizon"]:
        c.err("repeated.horizon", f"required for {why}")
    if target in ("sbgie", "two-sided", "repeated") and swept not in ("power_budget",
                                                                       "noise_density",
                                                                       "power_cost_coeff"):
        if not share_rate(params) > params.entry_cost:
            c.err("params.power_cost_coeff",
                  f"entry cost kP={params.entry_cost!r} must be below the share rate "
                  f"{share_rate(params)!r}")
    if target == "repeated" and swept is None:
        g12, g21 = gains.get("g12"), gains.get("g21")
        prior = priors.get("g21")
        for key in ("g12", "g21"):
            if gains.get(key) == 0:
                c.err(f"gains.{key}", "must be > 0 in the repeated game")
        if g12 is not None and g12 > 0.5 and g12 > g12_tilde(params):
            if prior is not None and prob_below(prior, 1.0) < 1.0:
                c.err("priors.g21", "must put all its mass below 1 in the reputation regime")
            if g21 is not None and not g21 < 1:
                c.err("gains.g21", "must be < 1 in the reputation regime")


def parse_scenario(text: str) -> Scenario:
    """Parse and validate a scenario document; raises ValidationError."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ValidationError([ScenarioError("<document>", f"not valid TOML: {e}")]) from None
    return _validate(doc)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return '"' + str(v).replace("\\", "\\\\").replace('"', '\\"') + '"'


def serialize_scenario(s: Scenario) -> str:
    """TOML text that parses back to an equal Scenario."""
    lines = [f"mode = {_fmt(s.mode)}", f"seed = {_fmt(s.seed)}", "", "[params]"]
    for f in fields(GameParams):
        lines.append(f"{f.name} = {_fmt(getattr(s.params, f.name))}")
    if s.gains:
        lines += ["", "[gains]"] + [f"{k} = {_fmt(v)}" for k, v in sorted(s.gains.items())]
    if s.priors:
        lines += ["", "[priors]"] + [f"{k} = {_fmt(v.literal())}"
                                     for k, v in sorted(s.priors.items())]
    if s.horizon is not None:
        lines += ["", "[repeated]", f"horizon = {s.horizon}"]
    for name, opts in (("static_br", s.static_br), ("bgi_verify", s.bgi),
                       ("numerics", s.numerics)):
        lines += ["", f"[{name}]"]
        lines += [f"{f.name} = {_fmt(getattr(opts, f.name))}" for f in fields(opts)]
    if s.sweep is not None:
        lines += ["", "[sweep]"]
        for f in fields(s.sweep):
            v = getattr(s.sweep, f.name)
            if v is not None:
                lines.append(f"{f.name} = {_fmt(v)}")
    lines += ["", "[output]", f"dir = {_fmt(s.output_dir)}", ""]
    return "\n".join(lines)
