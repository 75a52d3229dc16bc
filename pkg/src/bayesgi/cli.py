"""Command-line front end: ``bayesgi run <scenario.toml> [--out DIR] [--seed N] [--quiet]``.

Exit codes: 0 success, 2 invalid scenario or input, 3 solver did not
converge. Failures print one JSON object on stderr.

Artifacts are deterministic: a scenario and seed always produce the same
bytes. Wall time therefore goes to stdout only, never into a file.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from .core_model import RestrictedAction
from .distributions import GainPriors, Quadrature, cdf
from .repeated_game import RepeatedConfig, simulate
from .scenario import Scenario, ValidationError, parse_scenario
from .sequential_games import (entry_cutoff_d, g12_tilde, g_star, sbgi_equilibrium,
                               sbgie_equilibrium)
from .static_games import bgi_verify_symmetric_bne, ucgi_br_dynamics
from .two_sided import solve_two_sided

EXIT_OK, EXIT_INVALID, EXIT_NO_CONVERGENCE, EXIT_INTERNAL = 0, 2, 3, 1


class NonConvergence(RuntimeError):
    def __init__(self, message: str, details: dict):
        super().__init__(message)
        self.details = details


@dataclass
class RunReport:
    mode: str
    parameters: dict
    thresholds: dict
    results: dict
    outputs: list[str] = field(default_factory=list)
    wall_time: float = 0.0

    def record(self) -> dict:
        """Everything but wall time, which would break byte-identical reruns."""
        return {"mode": self.mode, "parameters": self.parameters, "thresholds": self.thresholds,
                "results": self.results, "outputs": self.outputs}


def jsonable(x):
    """Plain JSON types; non-finite floats become strings."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, float) and not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if hasattr(x, "value") and isinstance(getattr(x, "value"), str):
        return x.value
    return x


def dump_json(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(jsonable(v))


def _csv(header: list[str], rows: list[dict]) -> str:
    lines = [",".join(header)]
    lines += [",".join(_csv_cell(r.get(h)) for h in header) for r in rows]
    return "\n".join(lines) + "\n"


def resolved_parameters(s: Scenario) -> dict:
    out = {"seed": s.seed, "params": dataclasses.asdict(s.params), "gains": dict(s.gains),
           "priors": {k: v.literal() for k, v in s.priors.items()}}
    if s.horizon is not None:
        out["horizon"] = s.horizon
    return out


def thresholds(params, g12=None, prior_g21=None, horizon=None) -> dict:
    """Derived thresholds, each with the inputs used to compute it."""
    P, N0, kP = params.power_budget, params.noise_density, params.entry_cost
    gs = g_star(params)
    out = {"g_star": {"value": gs, "inputs": {"P": P, "N0": N0}},
           "g12_tilde": {"value": g12_tilde(params), "inputs": {"P": P, "N0": N0, "kP": kP}}}
    d = None
    if g12 is not None:
        try:
            d = entry_cutoff_d(params, g12)
        except ValueError:
            d = None
        out["d"] = {"value": d, "inputs": {"P": P, "N0": N0, "kP": kP, "g12": g12}}
    if prior_g21 is not None:
        rho = cdf(prior_g21, gs)
        out["rho"] = {"value": rho, "inputs": {"prior_g21": prior_g21.literal(), "g_star": gs}}
        if d is not None:
            t_star = math.log(rho) / math.log(d) if 0 < rho < 1 and 0 < d < 1 else None
            out["t_star"] = {"value": t_star, "inputs": {"rho": rho, "d": d}}
    return out


def _priors(s: Scenario) -> GainPriors:
    return GainPriors(*(s.priors[k] for k in ("g11", "g12", "g21", "g22")))


def _candidate(text: str):
    action = (RestrictedAction.spread() if text == "spread"
              else RestrictedAction.concentrate(int(text.split(":")[1])))
    return lambda g, h: action


def _run_static_br(s: Scenario, out: Path, report: RunReport):
    o = s.static_br
    traj = ucgi_br_dynamics(s.params, _priors(s), o.init1, o.init2, o.max_iter, o.tol,
                            o.simultaneous, Quadrature(s.numerics.quadrature_order))
    _write(out / "trajectory.csv", traj.to_csv(), report)
    report.results = {"converged": traj.converged, "iterations": traj.iterations,
                      "final": list(traj.final), "final_gap": traj.final_gap}
    if not traj.converged:
        raise NonConvergence("best-response dynamics did not converge", report.results)


def _run_bgi_verify(s: Scenario, out: Path, report: RunReport):
    b = s.bgi
    check = bgi_verify_symmetric_bne(s.params, _candidate(b.candidate), s.priors["g11"],
                                     s.priors["g21"], b.n_check, b.n_strategy, s.seed)
    report.results = {"candidate": b.candidate, "verified": check.verified,
                      "max_gain": check.max_gain, "witness": check.witness,
                      "strategy": {"alphas": list(check.strategy.alphas),
                                   "gamma": check.strategy.gamma}}


def _run_two_sided(s: Scenario, out: Path, report: RunReport):
    n = s.numerics
    eq = solve_two_sided(s.params, s.priors["g12"], s.priors["g21"], n.damping, n.tol,
                         n.max_iter)
    report.results = eq.record()
    if not eq.converged:
        raise NonConvergence("two-sided fixed point did not converge", report.results)


def _run_repeated(s: Scenario, out: Path, report: RunReport):
    cfg = RepeatedConfig(s.horizon, s.params, s.gains["g12"], s.gains["g21"],
                         s.priors["g21"], s.seed)
    trace = simulate(cfg)
    _write(out / "trace.csv", trace.to_csv(), report)
    summary = trace.summary()
    _write(out / "summary.json", dump_json(summary), report)
    report.results = {k: v for k, v in summary.items() if k != "draws"}


def _write(path: Path, text: str, report: RunReport):
    path.write_text(text, encoding="utf-8", newline="")
    report.outputs.append(path.name)


SWEEP_MONOTONE = {
    # swept variable -> (column, direction, strict)
    "power_budget": [("g_star", -1, True)],
    "power_cost_coeff": [("d", -1, False), ("g12_tilde", -1, False)],
    "horizon": [("deterrence_count", 1, False)],
}


def _sweep_point(s: Scenario, value: float) -> dict:
    var, target = s.sweep.variable, s.sweep.target
    params, gains, horizon = s.params, dict(s.gains), s.horizon
    if var in ("power_budget", "noise_density", "power_cost_coeff"):
        params = dataclasses.replace(params, **{var: value})
    elif var in ("g12", "g21"):
        gains[var] = value
    else:
        horizon = int(value)
    prior = s.priors.get("g21")
    row = {var: value}
    th = thresholds(params, gains.get("g12"), prior)
    row.update({k: v["value"] for k, v in th.items()})
    if target == "sbgi":
        eq = sbgi_equilibrium(params, gains["g12"], gains["g21"])
        row.update(primary_action=eq.primary_action.value,
                   secondary_action=eq.secondary_action.value,
                   primary_payoff=eq.primary_payoff, secondary_payoff=eq.secondary_payoff)
    elif target == "sbgie":
        eq = sbgie_equilibrium(params, gains["g12"], gains["g21"], prior)
        row.update({k: v for k, v in eq.record().items() if k not in ("rho", "d")})
    elif target == "two-sided":
        n = s.numerics
        eq = solve_two_sided(params, s.priors["g12"], prior, n.damping, n.tol, n.max_iter)
        row.update(eq.record())
    elif target == "repeated":
        trace = simulate(RepeatedConfig(horizon, params, gains["g12"], gains["g21"], prior,
                                        s.seed))
        summ = trace.summary()
        row.update(horizon=horizon, regime=summ["regime"],
                   deterrence_count=summ["deterrence_count"],
                   first_entry_period=summ["first_entry_period"],
                   total_primary=summ["total_primary"],
                   total_secondary=summ["total_secondary"],
                   efficiency_ratio=summ["efficiency_ratio"])
    return row


def monotone_checks(variable: str, rows: list[dict]) -> dict:
    """Post-hoc checks that threshold columns move the expected way along the grid."""
    out = {}
    for col, direction, strict in SWEEP_MONOTONE.get(variable, []):
        vals = [r.get(col) for r in rows]
        if any(v is None for v in vals):
            continue
        steps = [direction * (b - a) for a, b in zip(vals, vals[1:])]
        out[col] = all(x > 0 for x in steps) if strict else all(x >= 0 for x in steps)
    for col in ("primary_action", "entry"):
        vals = [r.get(col) for r in rows if col in r]
        if vals:
            out[f"{col}_single_crossover"] = sum(a != b for a, b in zip(vals, vals[1:])) <= 1
    return out


def sweep(s: Scenario) -> tuple[str, dict]:
    """Evaluate every grid point in order; returns (csv text, checks)."""
    grid = s.sweep.grid()
    rows = [_sweep_point(s, v) for v in grid]
    header = []
    for r in rows:
        header += [k for k in r if k not in header]
    checks = monotone_checks(s.sweep.variable, rows)
    return _csv(header, rows), checks


def _run_sweep(s: Scenario, out: Path, report: RunReport):
    text, checks = sweep(s)
    _write(out / "sweep.csv", text, report)
    report.results = {"variable": s.sweep.variable, "target": s.sweep.target,
                      "points": len(s.sweep.grid()), "monotone_checks": checks}


def _run_record(kind):
    def runner(s: Scenario, out: Path, report: RunReport):
        g12, g21 = s.gains["g12"], s.gains["g21"]
        if kind == "sbgi":
            report.results = sbgi_equilibrium(s.params, g12, g21).record()
        else:
            report.results = sbgie_equilibrium(s.params, g12, g21, s.priors["g21"]).record()
    return runner


RUNNERS = {
    "static-br": _run_static_br,
    "bgi-verify": _run_bgi_verify,
    "sbgi": _run_record("sbgi"),
    "sbgie": _run_record("sbgie"),
    "two-sided": _run_two_sided,
    "repeated": _run_repeated,
    "sweep": _run_sweep,
}


def run(scenario: Scenario, out_dir: str | Path | None = None) -> RunReport:
    """Run a validated scenario and write its artifacts plus report.json.

    Raises NonConvergence (after writing what was computed) when a solver
    fails to converge, and ValueError on inputs a solver rejects.
    """
    start = time.perf_counter()
    out = Path(out_dir if out_dir is not None else scenario.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    prior = scenario.priors.get("g21") if scenario.mode in ("sbgie", "repeated", "sweep") else None
    report = RunReport(scenario.mode, resolved_parameters(scenario),
                       thresholds(scenario.params, scenario.gains.get("g12"), prior), {})
    try:
        RUNNERS[scenario.mode](scenario, out, report)
    finally:
        report.outputs.append("report.json")
        (out / "report.json").write_text(dump_json(report.record()), encoding="utf-8")
        report.wall_time = time.perf_counter() - start
    return report


def _fail(code: int, payload: dict) -> int:
    sys.stderr.write(json.dumps(jsonable(payload), sort_keys=True) + "\n")
    return code


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="bayesgi",
                                     description="Spectrum-sharing game solvers and simulators.")
    sub = parser.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one scenario file")
    r.add_argument("scenario", help="path to a TOML scenario file")
    r.add_argument("--out", help="output directory (overrides [output] dir)")
    r.add_argument("--seed", type=int, help="seed (overrides the scenario's seed)")
    r.add_argument("--quiet", action="store_true", help="print nothing on success")
    args = parser.parse_args(argv)

    try:
        text = Path(args.scenario).read_text(encoding="utf-8")
    except OSError as e:
        return _fail(EXIT_INVALID, {"error": "validation",
                                    "errors": [{"path": "<file>", "message": str(e)}]})
    try:
        scenario = parse_scenario(text)
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                raise ValidationError([])
            scenario = dataclasses.replace(scenario, seed=args.seed)
    except ValidationError as e:
        errors = [x.as_dict() for x in e.errors] or [
            {"path": "--seed", "message": "must be an unsigned 64-bit integer"}]
        return _fail(EXIT_INVALID, {"error": "validation", "errors": errors})

    try:
        report = run(scenario, args.out)
    except NonConvergence as e:
        return _fail(EXIT_NO_CONVERGENCE, {"error": "non_convergence", "message": str(e),
                                           "details": e.details})
    except ValueError as e:
        return _fail(EXIT_INVALID, {"error": "invalid_input", "message": str(e)})
    except Exception as e:  # keep the machine-readable contract for anything unexpected
        return _fail(EXIT_INTERNAL, {"error": "internal", "message": f"{type(e).__name__}: {e}"})

    if not args.quiet:
        print(f"{scenario.mode}: wrote {', '.join(report.outputs)} "
              f"to {args.out or scenario.output_dir} in {report.wall_time:.3f} s")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
