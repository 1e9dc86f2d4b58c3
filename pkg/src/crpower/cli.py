"""Command-line interface: single solves, sweeps, figure presets, validation.

Scenario files are line-based ``key = value`` text with ``#`` comments.
Unknown keys and malformed lines are rejected with their line number.  dB
fields convert as ``linear = 10**(db/10)``.  Output is plain CSV (fixed
column order, C locale formatting) so identical invocations produce
byte-identical bytes.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from .allocation import (
    AvgTxAvgInt,
    AvgTxPeakInt,
    ConstantRule,
    ImperfectBoth,
    PeakTxAvgInt,
    PerfectBoth,
    PerfectTxImperfectInt,
    StatisticalBoth,
)
from .errors import CrPowerError, ScenarioParseError
from .fading import FadingLink, sample_links
from .metrics import LinkBudget, exact_mi_mc, expected_rate, gap_upper_bound
from .presets import FIGURE_PRESETS
from .sensing import SensingSpec, derive_sensing
from .solver import Scenario, SolverConfig, dinkelbach_solve

SWEEP_HEADER = "sweep_value,ee,rate,p0_avg,p1_avg,p_tot,lambda,nu,outer_iters,status"

DEFAULTS = {
    "n0": 0.1,
    "sigma_s2": 1.0,
    "prior_idle": 0.4,
    "T": 100,
    "tau": 10,
    "p_c": 0.1,
    "p_d": 0.8,
    "p_f": 0.1,
    "csi": "perfect",
    "sigma_h2": 0.0,
    "sigma_g2": 0.0,
    "regime": "avg_avg",
    "p_avg_db": 0.0,
    "q_avg_db": -8.0,
    "p_pk_db": -4.0,
    "q_pk_db": -10.0,
    "xi": 0.1,
    "mc_count": 100000,
    "seed": 1234,
    "eps": 1e-6,
    "delta": 1e-3,
    "step": 0.1,
}
_INT_KEYS = {"T", "tau", "mc_count", "seed"}
_STR_KEYS = {"csi", "regime"}
_CSI_NAMES = ("perfect", "imp_int", "imp_both", "statistical")
_REGIME_NAMES = ("avg_avg", "peak_avg", "avg_peak")


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def from_db(db: float) -> float:
    return 10.0 ** (db / 10.0)


def parse_scenario_file(path) -> dict:
    """Read a key=value scenario file into a parameter dict over DEFAULTS."""
    params = dict(DEFAULTS)
    text = Path(path).read_text()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioParseError(f"expected 'key = value', got {raw!r}", line_no)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in DEFAULTS:
            raise ScenarioParseError(f"unknown key {key!r}", line_no)
        try:
            params[key] = _coerce(key, value)
        except ValueError as exc:
            raise ScenarioParseError(str(exc), line_no) from None
    return params


def _coerce(key: str, value: str):
    if key in _STR_KEYS:
        allowed = _CSI_NAMES if key == "csi" else _REGIME_NAMES
        if value not in allowed:
            raise ValueError(f"{key} must be one of {allowed}, got {value!r}")
        return value
    if key in _INT_KEYS:
        return int(value)
    return float(value)


def build_problem(params: dict):
    """Materialize (Scenario, SolverConfig) from a parameter dict."""
    sensing = SensingSpec(
        p_d=params["p_d"],
        p_f=params["p_f"],
        prior_idle=params["prior_idle"],
        prior_busy=1.0 - params["prior_idle"],
    )
    budget = LinkBudget(
        n0=params["n0"],
        sigma_s2=params["sigma_s2"],
        frame_len=params["T"],
        sense_len=params["tau"],
        p_c=params["p_c"],
    )
    csi_name = params["csi"]
    if csi_name == "perfect":
        csi = PerfectBoth()
    elif csi_name == "imp_int":
        csi = PerfectTxImperfectInt(sigma_g2=params["sigma_g2"])
    elif csi_name == "imp_both":
        csi = ImperfectBoth(sigma_h2=params["sigma_h2"], sigma_g2=params["sigma_g2"])
    else:
        csi = StatisticalBoth()
    regime_name = params["regime"]
    if regime_name == "avg_avg":
        regime = AvgTxAvgInt(p_avg=from_db(params["p_avg_db"]), q_avg=from_db(params["q_avg_db"]))
    elif regime_name == "peak_avg":
        regime = PeakTxAvgInt(
            p_pk0=from_db(params["p_pk_db"]),
            p_pk1=from_db(params["p_pk_db"]),
            q_avg=from_db(params["q_avg_db"]),
        )
    else:
        regime = AvgTxPeakInt(
            p_avg=from_db(params["p_avg_db"]),
            q_pk0=from_db(params["q_pk_db"]),
            q_pk1=from_db(params["q_pk_db"]),
            xi0=params["xi"],
            xi1=params["xi"],
        )
    scenario = Scenario(sensing=sensing, budget=budget, csi=csi, regime=regime)
    config = SolverConfig(
        eps=params["eps"],
        delta=params["delta"],
        step=params["step"],
        mc_count=params["mc_count"],
        seed=params["seed"],
    )
    return scenario, config


def _solve_params(params: dict):
    scenario, config = build_problem(params)
    return dinkelbach_solve(scenario, config)


def cmd_solve(path, out=None) -> int:
    """Solve one scenario file; print the report as key=value lines."""
    out = out if out is not None else sys.stdout
    params = parse_scenario_file(path)
    report = _solve_params(params)
    lines = [
        ("ee_star", report.ee_star),
        ("rate", report.rate),
        ("p0_avg", report.avg_p0),
        ("p1_avg", report.avg_p1),
        ("p_tot", report.p_tot),
        ("lambda", report.lambda_),
        ("nu", report.nu),
        ("alpha_star", report.alpha_star),
        ("ee_se", report.ee_se),
        ("outer_iters", report.outer_iters),
        ("inner_iters", report.inner_iters),
        ("status", report.status),
    ]
    for name in sorted(report.residuals):
        lines.append((f"resid_{name}", report.residuals[name]))
    for key, val in lines:
        print(f"{key} = {_fmt(val)}", file=out)
    return 0 if report.status == "ok" else 1


def sweep_rows(params: dict, key: str, values) -> list:
    """One SweepResultRow per value, as dicts in sweep order.

    ``key="noop"`` re-solves the unchanged scenario at every point (used for
    flat baseline curves in figure presets).
    """
    if key != "noop" and (key not in DEFAULTS or key in _STR_KEYS):
        raise ValueError(f"unknown or non-sweepable key {key!r}")
    rows = []
    for v in values:
        p = dict(params)
        if key != "noop":
            p[key] = int(v) if key in _INT_KEYS else float(v)
        try:
            rep = _solve_params(p)
            rows.append({
                "sweep_value": float(v),
                "ee": rep.ee_star,
                "rate": rep.rate,
                "p0_avg": rep.avg_p0,
                "p1_avg": rep.avg_p1,
                "p_tot": rep.p_tot,
                "lambda": rep.lambda_,
                "nu": rep.nu,
                "outer_iters": rep.outer_iters,
                "status": rep.status,
                "ee_se": rep.ee_se,
            })
        except CrPowerError:
            rows.append({
                "sweep_value": float(v), "ee": 0.0, "rate": 0.0, "p0_avg": 0.0,
                "p1_avg": 0.0, "p_tot": 0.0, "lambda": 0.0, "nu": 0.0,
                "outer_iters": 0, "status": "maxiter", "ee_se": 0.0,
            })
    return rows


def _rows_to_csv(rows) -> str:
    out = [SWEEP_HEADER]
    for r in rows:
        out.append(",".join(_fmt(r[c]) for c in SWEEP_HEADER.split(",")))
    return "\n".join(out) + "\n"


def cmd_sweep(path, key: str, values, out=None) -> int:
    """Sweep one scalar key over values; print CSV."""
    out = out if out is not None else sys.stdout
    params = parse_scenario_file(path)
    out.write(_rows_to_csv(sweep_rows(params, key, values)))
    return 0


def _figure_bound(preset, params, out_dir):
    """Gap-bound curve: fixed powers, shared draws, one row per noise level."""
    sd = derive_sensing(SensingSpec(params["p_d"], params["p_f"],
                                    params["prior_idle"], 1.0 - params["prior_idle"]))
    samples = sample_links(FadingLink(), FadingLink(), params["seed"], params["mc_count"])
    rule = ConstantRule(params["fixed_p0"], params["fixed_p1"])
    lines = ["sweep_value,bound"]
    for n0 in preset.values:
        lb = LinkBudget(n0=n0, sigma_s2=params["sigma_s2"], frame_len=params["T"],
                        sense_len=params["tau"], p_c=params["p_c"])
        lines.append(f"{_fmt(float(n0))},{_fmt(gap_upper_bound(rule, samples, sd, lb))}")
    (out_dir / "fig2_bound.csv").write_text("\n".join(lines) + "\n")
    return ["fig2_bound.csv"]


def _figure_mi(preset, params, out_dir):
    """Efficiency vs rate: closed-form bound and exact-mixture Monte Carlo."""
    written = []
    for curve in preset.curves:
        p = {**params, **curve.overrides}
        sd = derive_sensing(SensingSpec(p["p_d"], p["p_f"], p["prior_idle"],
                                        1.0 - p["prior_idle"]))
        lb = LinkBudget(n0=p["n0"], sigma_s2=p["sigma_s2"], frame_len=p["T"],
                        sense_len=p["tau"], p_c=p["p_c"])
        samples = sample_links(FadingLink(), FadingLink(), p["seed"], p["mc_count"])
        lines = ["sweep_value,rate,ee_bound,ee_exact,ee_exact_se"]
        for power in preset.values:
            rule = ConstantRule(power, power)
            rate = expected_rate(rule, samples, sd, lb)
            denom = power + lb.p_c
            est, se = exact_mi_mc(rule, samples, sd, lb, p["mi_samples"], p["seed"] + 1)
            lines.append(",".join(_fmt(v) for v in
                                  (float(power), rate, rate / denom, est / denom, se / denom)))
        name = f"fig3_{curve.name}.csv"
        (out_dir / name).write_text("\n".join(lines) + "\n")
        written.append(name)
    return written


def _figure_solve(preset, params, out_dir):
    written = []
    for curve in preset.curves:
        p = {**params, **curve.overrides}
        key = curve.sweep_key or preset.sweep_key
        rows = sweep_rows(p, key, preset.values)
        name = f"fig{preset.fid}_{curve.name}.csv"
        (out_dir / name).write_text(_rows_to_csv(rows))
        written.append(name)
    return written


def cmd_figure(fid: int, out_dir, out=None) -> int:
    """Materialize one figure preset: CSV per curve plus a manifest."""
    out = out if out is not None else sys.stdout
    if fid not in FIGURE_PRESETS:
        raise ValueError(f"figure id must be one of {sorted(FIGURE_PRESETS)}")
    preset = FIGURE_PRESETS[fid]
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    params = {**DEFAULTS, **preset.base}

    if preset.kind == "bound":
        written = _figure_bound(preset, params, out_dir)
    elif preset.kind == "mi":
        written = _figure_mi(preset, params, out_dir)
    else:
        written = _figure_solve(preset, params, out_dir)

    manifest = [f"figure = {preset.fid}", f"title = {preset.title}",
                f"kind = {preset.kind}", f"sweep_key = {preset.sweep_key}",
                "sweep_values = " + ",".join(_fmt(float(v)) for v in preset.values)]
    for k in sorted(params):
        manifest.append(f"base.{k} = {_fmt(params[k])}")
    for curve in preset.curves:
        for k in sorted(curve.overrides):
            manifest.append(f"curve.{curve.name}.{k} = {_fmt(curve.overrides[k])}")
        if curve.sweep_key:
            manifest.append(f"curve.{curve.name}.sweep_key = {curve.sweep_key}")
    manifest_name = f"fig{preset.fid}_manifest.txt"
    (out_dir / manifest_name).write_text("\n".join(manifest) + "\n")
    for name in written + [manifest_name]:
        print(name, file=out)
    return 0


def cmd_validate(seed: int = 1234, eps: float = 1e-6, out=None) -> int:
    """Run the oracle/reduction/normalization/bound checks; 0 iff all pass."""
    from .checks import run_checks

    out = out if out is not None else sys.stdout
    results = run_checks(seed=seed, eps=eps)
    ok = True
    for name, passed, detail in results:
        ok &= passed
        print(f"[{'ok' if passed else 'FAIL'}] {name}: {detail}", file=out)
    print(f"{'all checks passed' if ok else 'CHECKS FAILED'}", file=out)
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="crpower",
        description="energy-efficient power policies for sensing-based spectrum sharing",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one scenario file")
    p_solve.add_argument("scenario", help="path to key=value scenario file")

    p_sweep = sub.add_parser("sweep", help="sweep a scalar key, print CSV")
    p_sweep.add_argument("scenario")
    p_sweep.add_argument("--key", required=True)
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated numeric values")

    p_fig = sub.add_parser("figure", help="reproduce a trend-figure preset")
    p_fig.add_argument("id", type=int, choices=sorted(FIGURE_PRESETS))
    p_fig.add_argument("--out", required=True, help="output directory")

    p_val = sub.add_parser("validate", help="run the self-check suite")
    p_val.add_argument("--seed", type=int, default=1234)
    p_val.add_argument("--eps", type=float, default=1e-6,
                       help="solver tolerance used by the self-consistency check")

    args = parser.parse_args(argv)
    try:
        if args.command == "solve":
            return cmd_solve(args.scenario)
        if args.command == "sweep":
            values = [float(v) for v in args.values.split(",") if v.strip()]
            return cmd_sweep(args.scenario, args.key, values)
        if args.command == "figure":
            return cmd_figure(args.id, args.out)
        return cmd_validate(seed=args.seed, eps=args.eps)
    except (CrPowerError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
