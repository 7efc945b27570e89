"""Command-line entry point.

    fraclab <command> --config run.json [--out DIR]

Every command writes ``report.json`` into DIR; ``verify-weight`` adds
``ratios.csv`` and ``simulate`` adds ``series.csv``.  Exit status: 0 when all
checks pass, 1 when an invariant is violated (named in the report together
with the module that owns it), 2 for configuration or I/O errors.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config, with_overrides
from .errors import FraclabError, OperatorError
from .lemmas import flat_closed_form, run_case
from .manifold import check_assumptions, make_model
from .operator import QuadratureScheme, apply_fractional, assemble, subordination_apply
from .solver import (
    FieldState,
    NonlinearitySpec,
    SimulationThresholds,
    bump,
    choose_shift_N,
    lifespan_upper_bound,
    ode_blowup_oracle,
    run_simulation,
)
from .weight import WeightParams, eval_h, gold_identity_error, h_norm_scaling, verify_frac_bound

EXIT_PASS, EXIT_VIOLATION, EXIT_ERROR = 0, 1, 2
COMMANDS = ("check-manifold", "verify-lemmas", "verify-weight", "simulate", "lifespan", "sweep")


@dataclass
class Outcome:
    result: dict
    violations: list = field(default_factory=list)
    files: dict = field(default_factory=dict)

    def flag(self, invariant, module, detail=""):
        self.violations.append({"invariant": invariant, "module": module, "detail": detail})

    @property
    def code(self):
        return EXIT_VIOLATION if self.violations else EXIT_PASS


def _clean(obj):
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats -> null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def dumps(report):
    return json.dumps(_clean(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


# -- builders ----------------------------------------------------------------

def _model(cfg, nodes=None):
    mc = cfg.manifold
    return make_model(mc.n, mc.warping, mc.r_max, nodes or mc.nodes, mc.core_spacing)


def _weight(cfg, m, N=1.0):
    return WeightParams(cfg.weight.alpha, m.n, N, model=m)


# -- commands ----------------------------------------------------------------

def cmd_check_manifold(cfg):
    m = _model(cfg)
    rep = check_assumptions(m)
    out = Outcome({"model": m.to_dict(), "assumptions": rep.to_dict()})
    for name in rep.failures:
        out.flag(name, "manifold")
    return out


def _default_cases(n, alpha):
    small = np.geomspace(1e-3, 1e-1, 9).tolist()
    return [
        {"case": "case1", "gamma": n / 2.0 + 0.5, "alpha": alpha, "scales": small},
        {"case": "case2", "gamma": n / 2.0, "alpha": alpha, "scales": small},
        {"case": "case3", "gamma": n + 1.0, "alpha": alpha, "scales": small},
    ]


def cmd_verify_lemmas(cfg):
    m = _model(cfg)
    lc = cfg.lemmas
    out = Outcome({"model": m.to_dict(), "tol": lc.tol, "spot_tol": lc.spot_tol, "fits": []})
    if m.warping.kind != "flat":
        rep = check_assumptions(m)
        out.result["assumptions"] = rep.to_dict()
        if not rep.passes:
            out.flag(rep.failures[0], "manifold", "model outside the scope of the scaling checks")
            return out
    if lc.cases is None:
        cases = _default_cases(m.n, cfg.weight.alpha)
    else:
        cases = [{"case": c.case, "gamma": c.gamma, "alpha": c.alpha, "scales": c.scales} for c in lc.cases]
    flat = m.warping.kind == "flat"
    for c in cases:
        fit = run_case(m, c["case"], c["gamma"], c["scales"], alpha=c["alpha"], check=False)
        entry = fit.to_dict()
        entry["deviation"] = fit.deviation
        if not fit.within(lc.tol):
            out.flag(f"{c['case']}_exponent", "lemmas",
                     f"fitted {fit.fitted_exponent:.4f} vs {fit.predicted_exponent:.4f}")
        if flat:
            rel = [v / flat_closed_form(c["case"], m.n, c["gamma"], s, c["alpha"]) - 1.0
                   for s, v in fit.sample_points]
            entry["closed_form_rel_error"] = rel
            if max(abs(x) for x in rel) > lc.spot_tol:
                out.flag(f"{c['case']}_closed_form", "lemmas", f"max rel error {max(map(abs, rel)):.3g}")
        out.result["fits"].append(entry)
    return out


def _gold_expected_sup(n):
    # sup_r t|L h|/h for alpha = 1 on flat R^n is attained at r = 0
    return {1: 1.0, 2: 2.0}[n]


def cmd_verify_weight(cfg):
    wc = cfg.weight
    m = _model(cfg)
    op = assemble(m, cfg.operator.bc)
    wp = _weight(cfg, m)
    rep = verify_frac_bound(op, wp, wc.t_values, spread_tol=wc.spread_tol, interior=wc.interior)
    out = Outcome({"model": m.to_dict(), "bc": op.bc, "frac_bound": rep.to_dict()},
                  files={"ratios.csv": rep.write_ratios_csv})
    if rep.asserted and not rep.ok:
        out.flag("sup_ratio_spread", "weight", f"spread {rep.spread:.4g} > {wc.spread_tol}")
    if wc.refine_check:
        nodes = min(2 * m.nodes, 4096)
        m2 = _model(cfg, nodes)
        rep2 = verify_frac_bound(assemble(m2, cfg.operator.bc), _weight(cfg, m2), wc.t_values,
                                 spread_tol=wc.spread_tol, interior=wc.interior)
        change = max(abs(a / b - 1.0) for a, b in zip(rep.sup_ratio, rep2.sup_ratio))
        out.result["refinement"] = {"nodes": nodes, "sup_ratio": rep2.sup_ratio, "max_rel_change": change}
        if rep.asserted and change >= wc.refine_tol:
            out.flag("refinement_stability", "weight", f"sup ratio moved by {change:.3g}")
    if wp.alpha < 2:
        qc = cfg.operator.quadrature
        q = QuadratureScheme(qc.s_min, qc.s_max, qc.panels, qc.rule, qc.points_per_panel)
        h = eval_h(wc.t_values[0], m.grid, wp)
        ref = apply_fractional(op, wp.alpha, h)
        err = float(np.linalg.norm(subordination_apply(op, wp.alpha, h, q) - ref) / np.linalg.norm(ref))
        out.result["subordination_rel_error"] = err
        if err > 1e-4:
            out.flag("subordination_agreement", "operator", f"relative L2 error {err:.3g}")
    flat = m.warping.kind == "flat"
    if flat and wp.alpha == 1.0 and m.n in (1, 2):
        gold_t = list(wc.gold_t_values or wc.t_values)
        errs = [gold_identity_error(op, wp, t, interior=wc.gold_interior) for t in gold_t]
        expected = _gold_expected_sup(m.n)
        sup_rel = [s / expected for s in rep.sup_ratio]
        out.result["gold_identity"] = {"t_values": gold_t, "max_error": errs, "tol": wc.gold_tol,
                                       "interior": wc.gold_interior, "expected_sup_ratio": expected,
                                       "sup_ratio_over_expected": sup_rel}
        if max(errs) > wc.gold_tol:
            out.flag("gold_identity", "weight", f"max error {max(errs):.3g} > {wc.gold_tol}")
        elif any(not 0.9 <= s <= 1.1 for s in sup_rel):
            out.flag("gold_sup_ratio", "weight", "sup ratio off its closed-form value by more than 10%")
    if flat:
        scaling = h_norm_scaling(wp)
        out.result["h_norm_scaling"] = scaling
        if abs(scaling["fitted_exponent"] - scaling["predicted_exponent"]) > 0.05:
            out.flag("h_norm_exponent", "weight", f"slope {scaling['fitted_exponent']:.4f}")
    return out


def cmd_simulate(cfg):
    sc, nc = cfg.simulation, cfg.nonlinearity
    m = _model(cfg)
    op = assemble(m, cfg.operator.bc)
    f0 = bump(m, sc.rho, amplitude=sc.amplitude, mass=sc.mass)
    f1 = np.zeros_like(f0)
    if sc.f1_amplitude != 0.0:
        f1 = bump(m, sc.f1_rho or sc.rho, amplitude=sc.f1_amplitude)
    wp = _weight(cfg, m)
    trace = []
    if cfg.weight.N == "auto":
        N, trace = choose_shift_N(m, f0, wp)
    else:
        N = float(cfg.weight.N)
    wp = wp.with_shift(N)
    nl = NonlinearitySpec(nc.p, nc.form)
    th = SimulationThresholds(**vars(sc.thresholds))
    rep = run_simulation(op, nl, wp, FieldState(f0 + 1j * f1, 0.0, m), sc.dt, sc.t_end, th)
    rep.N_trace = trace
    out = Outcome({"model": m.to_dict(), "blowup": rep.to_dict()}, files={"series.csv": rep.write_series_csv})
    positive_data = bool(np.all(f0 >= 0) and not np.any(f1))
    if nl.form == "forcing" and positive_data and not rep.monotone:
        out.flag("phi_monotone", "solver", "phi(t) not strictly increasing along the run")
    if not rep.holder_ok:
        out.flag("holder_inequality", "solver", "||w|| < phi / ||h|| at some sample")
    if nl.form == "forcing" and rep.C_emp is not None and not rep.C_emp > 0:
        out.flag("integral_inequality", "solver", f"C_emp = {rep.C_emp}")
    return out


def cmd_lifespan(cfg):
    lc = cfg.lifespan
    p, alpha, n = cfg.nonlinearity.p, cfg.weight.alpha, cfg.manifold.n
    est = lifespan_upper_bound(lc.N, lc.phi0, p, alpha, n)
    normalized = lc.C is None
    C = (1.0 - est.beta) / (p - 1.0) if normalized else lc.C
    t_ode = ode_blowup_oracle(lc.N, lc.phi0, p, alpha, n, C)
    sweep = sorted(lc.sweep_phi0)
    t_sweep = [lifespan_upper_bound(lc.N, x, p, alpha, n).t_star for x in sweep]
    out = Outcome({
        "lifespan": est.to_dict(), "C": C, "C_normalized": normalized,
        "t_ode": t_ode, "ratio_ode_over_closed_form": t_ode / est.t_star,
        "sweep": {"phi0": sweep, "t_star": t_sweep},
    })
    if normalized and abs(t_ode / est.t_star - 1.0) > lc.tol:
        out.flag("lifespan_ode_agreement", "solver", f"ODE {t_ode:.6g} vs closed form {est.t_star:.6g}")
    if any(b >= a for a, b in zip(t_sweep, t_sweep[1:])):
        out.flag("lifespan_monotone", "solver", "t* not strictly decreasing in phi0")
    print(f"t_star={est.t_star:.10g} t_ode={t_ode:.10g} ratio={t_ode / est.t_star:.10g}")
    return out


_RUNNERS = {
    "check-manifold": cmd_check_manifold,
    "verify-lemmas": cmd_verify_lemmas,
    "verify-weight": cmd_verify_weight,
    "simulate": cmd_simulate,
    "lifespan": cmd_lifespan,
}


_MODULES = ("manifold", "operator", "weight", "lemmas", "solver")
_PKG_DIR = os.path.dirname(os.path.abspath(__file__))


def _error_module(exc):
    """Owning module of an error: its class tag, else the innermost package frame."""
    if exc.module != "fraclab":
        return exc.module
    owner = "cli"
    tb = exc.__traceback__
    while tb is not None:
        stem = os.path.splitext(os.path.basename(tb.tb_frame.f_code.co_filename))[0]
        if stem in _MODULES and os.path.dirname(tb.tb_frame.f_code.co_filename) == _PKG_DIR:
            owner = stem
        tb = tb.tb_next
    return owner


def _report(command, cfg, outcome=None, error=None):
    rep = {"version": __version__, "command": command}
    if cfg is not None:
        rep["config"] = cfg.to_dict()
    if error is not None:
        rep.update(status="error", exit_code=EXIT_ERROR, violation=None,
                   error={"type": type(error).__name__, "module": _error_module(error),
                          "message": str(error)})
        if isinstance(error, OperatorError):
            rep["error"]["residual"] = error.residual
        return rep
    rep.update(status="pass" if outcome.code == EXIT_PASS else "violation", exit_code=outcome.code,
               violation=outcome.violations[0] if outcome.violations else None,
               violations=outcome.violations, result=outcome.result)
    return rep


def run_command(command, raw):
    """Run one non-sweep command on a raw config dict; returns (code, report, files)."""
    cfg = None
    try:
        cfg = RunConfig.from_dict(raw)
        outcome = _RUNNERS[command](cfg)
    except OperatorError as exc:
        out = Outcome({"residual": exc.residual})
        out.flag("eigen_residual", "operator", str(exc))
        return out.code, _report(command, cfg, out), {}
    except FraclabError as exc:
        return EXIT_ERROR, _report(command, cfg, error=exc), {}
    return outcome.code, _report(command, cfg, outcome), outcome.files


def _sweep_job(args):
    command, raw, overrides = args
    code, rep, _ = run_command(command, raw)
    return {"overrides": overrides, "exit_code": code, "report": rep}


def _thread_cap():
    env = os.environ.get("FRACLAB_THREADS")
    if env is None or env == "":
        return os.cpu_count() or 1
    try:
        cap = int(env)
    except ValueError as exc:
        raise ConfigError(f"FRACLAB_THREADS must be a positive integer, got {env!r}") from exc
    if cap < 1:
        raise ConfigError(f"FRACLAB_THREADS must be a positive integer, got {env!r}")
    return cap


def cmd_sweep(cfg, raw):
    grid = cfg.sweep.grid
    keys = list(grid)
    base = {k: v for k, v in raw.items() if k != "sweep"}
    jobs = []
    for combo in itertools.product(*(grid[k] for k in keys)):
        overrides = dict(zip(keys, combo))
        jobs.append((cfg.sweep.command, with_overrides(base, overrides), overrides))
    workers = min(_thread_cap(), max(1, len(jobs)))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_sweep_job, jobs))
    else:
        runs = [_sweep_job(j) for j in jobs]
    codes = [r["exit_code"] for r in runs]
    code = EXIT_ERROR if EXIT_ERROR in codes else (EXIT_VIOLATION if EXIT_VIOLATION in codes else EXIT_PASS)
    first = next((r for r in runs if r["exit_code"] == EXIT_VIOLATION), None)
    violation = None
    if first is not None:
        violation = dict(first["report"]["violation"], overrides=first["overrides"])
    rep = {
        "version": __version__, "command": "sweep", "config": cfg.to_dict(),
        "status": {EXIT_PASS: "pass", EXIT_VIOLATION: "violation", EXIT_ERROR: "error"}[code],
        "exit_code": code, "violation": violation, "workers": workers, "runs": runs,
    }
    return code, rep


def _write(out_dir, report, files):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        fh.write(dumps(report))
    for name, writer in files.items():
        writer(os.path.join(out_dir, name))


def build_parser():
    ap = argparse.ArgumentParser(prog="fraclab", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--out", default=".", help="output directory (default: current)")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        with open(args.config, encoding="utf-8") as fh:
            raw = json.load(fh)
    except FraclabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        _safe_write(args.out, _report(args.command, None, error=exc), {})
        return EXIT_ERROR
    try:
        if args.command == "sweep":
            code, report = cmd_sweep(cfg, raw)
            files = {}
        else:
            code, report, files = run_command(args.command, raw)
    except FraclabError as exc:
        code, report, files = EXIT_ERROR, _report(args.command, cfg, error=exc), {}
    if not _safe_write(args.out, report, files):
        return EXIT_ERROR
    status = report["status"]
    line = f"{args.command}: {status}"
    if report.get("violation"):
        v = report["violation"]
        line += f" ({v['module']}: {v['invariant']})"
    elif report.get("error"):
        line += f" ({report['error']['type']}: {report['error']['message']})"
    print(line, file=sys.stderr if code == EXIT_ERROR else sys.stdout)
    return code


def _safe_write(out_dir, report, files):
    try:
        _write(out_dir, report, files)
    except OSError as exc:
        print(f"error: cannot write outputs to {out_dir}: {exc}", file=sys.stderr)
        return False
    return True


if __name__ == "__main__":
    sys.exit(main())
