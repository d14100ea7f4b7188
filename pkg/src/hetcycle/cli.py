"""Command-line experiments.

Subcommands: simulate, return-map, converge-omega, period-scan,
compare-maps, calibrate-a, validate. Every run writes <name>.csv,
<name>.summary.json, and <name>.plot into --out-dir, then renders
<name>.png by executing the plot script in place.

Parameters resolve in layers: built-in defaults, per-experiment defaults,
the [common] and [<experiment>] sections of a flat key=value config file
(--config), and finally explicit flags. Exit codes: 0 success, 1 runtime
failure, 2 at least one experiment check failed, 3 bad configuration.
"""
from __future__ import annotations

import argparse
import configparser
import math
import sys
from pathlib import Path

import numpy as np

from . import analysis, integrator, maps, model, report, sections
from .errors import ConfigError, DomainError, HetcycleError

PARAM_KEYS = ("alpha", "beta", "nu", "mu", "omega", "a", "epsilon")

_BUILTIN_DEFAULTS = {
    "alpha": 1.0,
    "beta": -0.2,
    "nu": 0.0,
    "mu": 0.0,
    "omega": 1.0,
    "a": 1.0,
    "epsilon": 0.1,
    "out_dir": "out",
}

# defaults layered per experiment (still overridable by config and flags)
_EXPERIMENT_DEFAULTS = {
    "simulate": {},
    "return-map": {"mu": 1e-3},
    "converge-omega": {"nu": 0.01, "mu": 0.005, "epsilon": 1.0},
    "period-scan": {},
    "compare-maps": {"epsilon": 0.05},
    "calibrate-a": {},
    "validate": {},
}

_EXTRA_KEYS = {
    "simulate": {"x2": None, "w2": None, "s": 0.0, "t_end": 100.0, "max_rows": 4000},
    "return-map": {"x2": None, "w2": None, "s": 0.0, "iterations": 8},
    "converge-omega": {"omegas": "10,20,40,80,160,320,640,1280"},
    "period-scan": {"mus": "1e-2,1e-3,1e-4,1e-5"},
    "compare-maps": {"points": 7, "w2": 0.0, "s": 0.0},
    "calibrate-a": {"mus": "1e-4,1e-3,1e-2", "x1h": "1e-8,1e-7,1e-6"},
    "validate": {},
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); config problems are exit 3
        raise ConfigError(message)


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(tok) for tok in str(text).split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"expected a comma-separated number list, got {text!r}") from exc
    if not vals:
        raise ConfigError(f"empty number list {text!r}")
    return vals


def build_parser() -> _Parser:
    parser = _Parser(prog="hetcycle", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd in _EXPERIMENT_DEFAULTS:
        sp = sub.add_parser(cmd, help=f"run the {cmd} experiment")
        for key in PARAM_KEYS:
            sp.add_argument(f"--{key}", type=float, default=None)
        sp.add_argument("--out-dir", dest="out_dir", default=None)
        sp.add_argument("--config", default=None, help="flat key=value INI file")
        for extra, default in _EXTRA_KEYS[cmd].items():
            flag = "--" + extra.replace("_", "-")
            if isinstance(default, int) and not isinstance(default, bool):
                sp.add_argument(flag, dest=extra, type=int, default=None)
            elif isinstance(default, float) or default is None:
                sp.add_argument(flag, dest=extra, type=float, default=None)
            else:
                sp.add_argument(flag, dest=extra, default=None)
    return parser


def _load_config(path: str | None, command: str) -> dict:
    if path is None:
        return {}
    cfg = configparser.ConfigParser()
    read = cfg.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    merged: dict = {}
    known = set(PARAM_KEYS) | {"out_dir"} | set(_EXTRA_KEYS[command])
    for section in ("common", command):
        if cfg.has_section(section):
            for key, val in cfg.items(section):
                key = key.replace("-", "_")
                if key not in known:
                    raise ConfigError(f"unknown key {key!r} in [{section}] of {path}")
                merged[key] = val
    return merged


def _resolve(args) -> tuple[model.Params, dict, Path]:
    cmd = args.command
    merged = dict(_BUILTIN_DEFAULTS)
    merged.update(_EXTRA_KEYS[cmd])
    merged.update(_EXPERIMENT_DEFAULTS[cmd])
    merged.update(_load_config(args.config, cmd))
    for key in list(merged):
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            merged[key] = flag_val
    try:
        p = model.Params(**{k: float(merged[k]) for k in PARAM_KEYS})
    except (DomainError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad parameters: {exc}") from exc
    out_dir = Path(merged["out_dir"])
    extras = {k: merged[k] for k in _EXTRA_KEYS[cmd]}
    return p, extras, out_dir


def _emit(out_dir: Path, name: str, header, rows, script: str, p: model.Params,
          results: dict, checks) -> None:
    csv_path = report.write_csv(out_dir / f"{name}.csv", header, rows)
    report.write_summary(out_dir / f"{name}.summary.json", name, p, results, checks)
    plot_path = report.write_plot_script(out_dir / f"{name}.plot", script)
    report.render_plot(plot_path)
    print(f"wrote {csv_path} (+ .summary.json, .plot, .png)")
    for c in checks:
        mark = "PASS" if c.passed else "FAIL"
        print(f"  [{mark}] {c.name}: {c.value:.6g} {c.comparator} {c.threshold:.6g}")


def _start_point(p: model.Params, x2, w2, s) -> sections.SectionPoint:
    x2 = 0.5 * p.epsilon if x2 is None else float(x2)
    if w2 is None:
        # default start on the invariant sphere
        w2 = -math.sqrt(max(1.0 - x2 * x2 - p.epsilon * p.epsilon, 0.0)) + 1.0
    return sections.SectionPoint(sections.SectionId.IN_VMINUS, x2, float(w2), float(s))


def _run_simulate(p, extras, out_dir):
    f = model.sine_forcing()
    pt = _start_point(p, extras["x2"], extras["w2"], extras["s"])
    u0 = sections.to_ambient(pt, p)
    traj = integrator.integrate(u0, p, f, t_end=float(extras["t_end"]))
    stride = max(1, len(traj.t) // int(extras["max_rows"]))
    t, states = traj.t[::stride], traj.states[::stride]
    r = np.sqrt((states[:, :3] ** 2).sum(axis=1))
    rows = [(ti, *ui, ri - 1.0) for ti, ui, ri in zip(t, states, r)]
    checks = []
    r0 = math.sqrt(float((np.asarray(u0[:3]) ** 2).sum()))
    if p.nu == 0.0 and p.mu == 0.0 and abs(r0 - 1.0) < 1e-12:
        checks.append(report.Check.compare(
            "sphere_drift", float(np.abs(r - 1.0).max()), "<=", 1e-8,
            "unperturbed flow must keep the invariant sphere"))
    results = {
        "start": list(map(float, u0)),
        "final": list(map(float, traj.final_state)),
        "samples": int(len(t)),
        "max_abs_r_minus_1": float(np.abs(r - 1.0).max()),
    }
    script = report.line_plot_script(
        "simulate.csv", "simulate.png", "t", ("x", "y", "z"),
        "trajectory coordinates", "t", "coordinate")
    _emit(out_dir, "simulate", ("t", "x", "y", "z", "s", "r_minus_1"), rows, script, p, results, checks)
    return checks


def _run_return_map(p, extras, out_dir):
    f = model.sine_forcing()
    pt = _start_point(p, extras["x2"], extras["w2"], extras["s"])
    rows = []
    for k in range(int(extras["iterations"])):
        res = integrator.numerical_return_map(pt, p, f)
        rows.append((k, pt.s, pt.c1, pt.c2, res.return_time,
                     res.point.s, res.point.c1, res.point.c2))
        pt = res.point
    results = {
        "iterations": len(rows),
        "final_x2": rows[-1][6],
        "final_w2": rows[-1][7],
        "final_return_time": rows[-1][4],
    }
    script = report.line_plot_script(
        "return-map.csv", "return-map.png", "iteration", ("x2_out",),
        "return map iterates", "iteration", "x2", scale="semilogy", style="o-")
    _emit(out_dir, "return-map",
          ("iteration", "s_in", "x2_in", "w2_in", "return_time", "s_out", "x2_out", "w2_out"),
          rows, script, p, results, [])
    return []


def _run_converge_omega(p, extras, out_dir):
    f = model.sine_forcing()
    omegas = _float_list(extras["omegas"])
    rep = analysis.convergence_study(p, f, omegas)
    rows = list(zip(rep.omegas, rep.sup_distances))
    checks = []
    results: dict = {"grid_size": rep.grid_size}
    if rep.fit is not None:
        results["fit"] = rep.fit
        checks.append(report.Check.compare(
            "slope_error", abs(rep.fit.slope - (-1.0)), "<=", 0.15,
            "sup distance must decay like 1/omega"))
        checks.append(report.Check.compare("fit_r2", rep.fit.r2, ">", 0.98))
        if max(omegas) >= 1280.0:
            checks.append(report.Check.compare(
                "distance_at_top_omega", rep.sup_distances[int(np.argmax(omegas))], "<", 2e-5))
    script = report.line_plot_script(
        "converge-omega.csv", "converge-omega.png", "omega", ("sup_distance",),
        "high-frequency collapse onto the averaged map", "omega", "sup distance",
        scale="loglog", style="o-")
    _emit(out_dir, "converge-omega", ("omega", "sup_distance"), rows, script, p, results, checks)
    return checks


def _run_period_scan(p, extras, out_dir):
    mus = _float_list(extras["mus"])
    scan = analysis.period_scan(p, mus)
    rows = [(m, x, per, x / m) for m, x, per in zip(scan.mus, scan.x_stars, scan.periods)]
    target = (1.0 + p.delta) / (p.alpha + p.beta)
    checks = [report.Check.compare(
        "slope_error_vs_target", abs(scan.fit.slope - target), "<=", 0.05 * target,
        f"P vs ln(1/mu) slope must be (1+delta)/(alpha+beta) = {target:g} within 5%")]
    if (p.alpha, p.beta, p.a) == (1.0, -0.2, 1.0):
        ratios = [x / m for m, x in zip(scan.mus, scan.x_stars)]
        checks.append(report.Check.compare("x_star_over_mu_min", min(ratios), ">=", 0.166))
        checks.append(report.Check.compare("x_star_over_mu_max", max(ratios), "<=", 0.167))
    results = {"fit": scan.fit, "slope_target": target}
    script = report.line_plot_script(
        "period-scan.csv", "period-scan.png", "mu", ("period",),
        "logarithmic period growth", "mu", "period", scale="semilogx", style="o-")
    _emit(out_dir, "period-scan", ("mu", "x_star", "period", "x_star_over_mu"),
          rows, script, p, results, checks)
    return checks


def _run_compare_maps(p, extras, out_dir):
    f = model.sine_forcing()
    n = int(extras["points"])
    if n < 1:
        raise ConfigError("--points must be >= 1")
    x2s = np.linspace(0.2 * p.epsilon, 0.8 * p.epsilon, n)
    pts = [sections.SectionPoint(sections.SectionId.IN_VMINUS, float(x2),
                                 float(extras["w2"]), float(extras["s"])) for x2 in x2s]
    comp = analysis.analytic_vs_numeric(p, f, pts)
    rows = [(r.start.c1, r.x_numeric, r.x_analytic, r.rel_dx,
             r.w_numeric, r.w_analytic, r.time_numeric, r.time_analytic, r.abs_dt)
            for r in comp.rows]
    checks = [report.Check.compare(
        "max_relative_dx", comp.max_rel_dx, "<=", 0.10,
        "analytic and integrated x-returns should agree to 10%")]
    results = {"max_rel_dx": comp.max_rel_dx, "max_abs_dt": comp.max_abs_dt}
    script = report.line_plot_script(
        "compare-maps.csv", "compare-maps.png", "x2_start", ("rel_dx",),
        "analytic vs integrated return discrepancy", "x2 start", "relative dx",
        scale="semilogy", style="o-")
    _emit(out_dir, "compare-maps",
          ("x2_start", "x2_numeric", "x2_analytic", "rel_dx", "w2_numeric",
           "w2_analytic", "time_numeric", "time_analytic", "abs_dt"),
          rows, script, p, results, checks)
    return checks


def _run_calibrate_a(p, extras, out_dir):
    f = model.sine_forcing()
    mus = _float_list(extras["mus"])
    x1hs = _float_list(extras["x1h"])
    cal = analysis.calibrate_a(p, f, mus=mus, x1h_values=x1hs)
    per_start = len(x1hs)
    rows = [(cal.mus[i], x1hs[i % per_start], cal.offsets[i]) for i in range(len(cal.mus))]
    checks = [
        report.Check.compare("a_positive", cal.a, ">", 0.0),
        report.Check.compare("fit_r2", cal.r2, ">", 0.99),
    ]
    results = {"a": cal.a, "intercept": cal.intercept, "r2": cal.r2}
    script = report.line_plot_script(
        "calibrate-a.csv", "calibrate-a.png", "mu", ("offset",),
        "global transition offset vs mu", "mu", "arrival offset",
        scale="loglog", style="o")
    _emit(out_dir, "calibrate-a", ("mu", "x1h", "offset"), rows, script, p, results, checks)
    return checks


def _run_validate(p, extras, out_dir):
    f = model.sine_forcing()
    rng = np.random.default_rng(20260822)
    checks: list[report.Check] = []

    # invariant sphere under the unperturbed flow
    drift = 0.0
    for _ in range(5):
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        traj = integrator.integrate(np.array([*v, 0.0]), p.with_(nu=0.0, mu=0.0), t_end=10.0)
        r = np.sqrt((traj.states[:, :3] ** 2).sum(axis=1))
        drift = max(drift, float(np.abs(r - 1.0).max()))
    checks.append(report.Check.compare("sphere_drift_t10", drift, "<=", 1e-8))

    # equivariance of the unperturbed field, and kappa2 with forcing on
    p0 = p.with_(nu=0.0, mu=0.0)
    pf = p.with_(nu=0.01, mu=0.01)
    res1 = res2 = 0.0
    for _ in range(20):
        u = np.append(rng.normal(size=3), rng.uniform(0.0, 3.0))
        for which in ("kappa1", "kappa2"):
            fu = model.eval_field(u, p0)
            fku = model.eval_field(model.apply_symmetry(u, which), p0)
            res1 = max(res1, float(np.abs(fku[:3] - model.apply_symmetry(fu[:3], which)).max()))
        fu = model.eval_field(u, pf, f)
        fku = model.eval_field(model.apply_symmetry(u, "kappa2"), pf, f)
        res2 = max(res2, float(np.abs(fku[:3] - model.apply_symmetry(fu[:3], "kappa2")).max()))
    checks.append(report.Check.compare("equivariance_unperturbed", res1, "<=", 1e-12))
    checks.append(report.Check.compare("equivariance_kappa2_forced", res2, "<=", 1e-12))

    # invariant planes x=0 and y=0 of the unperturbed field
    res = 0.0
    for _ in range(20):
        b, c, s = rng.normal(), rng.normal(), rng.uniform(0.0, 3.0)
        res = max(res, abs(float(model.eval_field(np.array([0.0, b, c, s]), p0)[0])))
        res = max(res, abs(float(model.eval_field(np.array([b, 0.0, c, s]), p0)[1])))
    checks.append(report.Check.compare("plane_invariance", res, "<=", 1e-12))

    # closed-form forcing integrals against quadrature
    pk = p.with_(nu=0.01, mu=0.005, epsilon=1.0)
    worst = 0.0
    for om in (1.0, 100.0, 10000.0):
        pko = pk.with_(omega=om)
        for c1 in (0.1, 0.5, 0.9):
            for s in (0.0, 1.0, 2.5):
                k1 = maps.K1_closed_form(c1, s, pko, f).value
                k2 = maps.K2_closed_form(c1, s, pko, f).value
                worst = max(worst, abs(k1 - maps.K_quadrature("vplus", c1, s, pko, f)))
                worst = max(worst, abs(k2 - maps.K_quadrature("vminus", c1, s, pko, f)))
    checks.append(report.Check.compare("k_integral_oracle", worst, "<=", 1e-9))

    # averaged return map: composition equals the closed form
    pr = p.with_(nu=0.0, mu=1e-3, epsilon=1.0)
    worst = 0.0
    for s in (0.0, 1.0, 2.0):
        for x2 in (0.1, 0.4, 0.8):
            for w2 in (-0.5, 0.0, 0.5):
                pt = sections.SectionPoint(sections.SectionId.IN_VMINUS, x2, w2, s)
                ret = maps.compose_return(pt, pr, f)
                h1, h2, h3 = maps.reduced_h(s, x2, w2, pr)
                worst = max(worst, abs(s + ret.return_time - h1),
                            abs(ret.point.c1 - h2), abs(ret.point.c2 - h3))
    checks.append(report.Check.compare("composition_identity", worst, "<=", 1e-12))

    # fixed point dichotomy and contraction
    fp = analysis.find_fixed_point_h2(pr.with_(a=1.0))
    checks.append(report.Check.compare("fixed_point_positive", fp.x, ">", 0.0))
    checks.append(report.Check.compare("fixed_point_multiplier", abs(fp.derivative), "<", 1.0))
    try:
        analysis.find_fixed_point_h2(pr.with_(a=0.5))
        dichotomy = 0.0
    except HetcycleError:
        dichotomy = 1.0
    checks.append(report.Check.compare("small_a_has_no_fixed_point", dichotomy, ">=", 1.0))
    grid = np.linspace(1e-3, 1.0 - 1e-3, 100)
    c2_max = max(maps.contraction_coefficient(float(x), pr) for x in grid)
    checks.append(report.Check.compare("w_contraction", c2_max, "<", 1.0))

    rows = [(c.name, c.value, c.threshold, int(c.passed)) for c in checks]
    results = {"n_checks": len(checks), "n_passed": sum(c.passed for c in checks)}
    script = report.validate_plot_script("validate.csv", "validate.png", "validation residuals")
    _emit(out_dir, "validate", ("check", "value", "threshold", "passed"), rows, script, p, results, checks)
    return checks


_RUNNERS = {
    "simulate": _run_simulate,
    "return-map": _run_return_map,
    "converge-omega": _run_converge_omega,
    "period-scan": _run_period_scan,
    "compare-maps": _run_compare_maps,
    "calibrate-a": _run_calibrate_a,
    "validate": _run_validate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        p, extras, out_dir = _resolve(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 3
    try:
        checks = _RUNNERS[args.command](p, extras, out_dir)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 3
    except HetcycleError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if checks and not all(c.passed for c in checks):
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
