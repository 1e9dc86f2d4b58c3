"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line with its measured margin.  Tolerances are fixed here, not
configurable."""

import time

import numpy as np
from scipy import integrate, stats

from crpower.allocation import (
    AvgTxAvgInt,
    AvgTxPeakInt,
    ConstantRule,
    ImperfectBoth,
    Multipliers,
    PeakTxAvgInt,
    PerfectBoth,
    PerfectTxImperfectInt,
    alloc_avg_avg,
)
from crpower.cli import DEFAULTS, build_problem, sweep_rows
from crpower.fading import ChannelDraw, FadingLink, cond_cdf_g2, cond_pdf_h2, cond_quantile_g2, sample_links
from crpower.metrics import LOG2E, LinkBudget, exact_mi_mc, expected_rate, gap_upper_bound
from crpower.presets import FIGURE_PRESETS
from crpower.refopt import rule_vs_oracle
from crpower.sensing import SensingSpec, derive_sensing
from crpower.solver import dinkelbach_solve

LB = LinkBudget(n0=0.1, sigma_s2=1.0, frame_len=100, sense_len=10, p_c=0.1)
IMPERFECT = derive_sensing(SensingSpec(0.8, 0.1, 0.4, 0.6))
PERFECT = derive_sensing(SensingSpec(1.0, 0.0, 0.4, 0.6))


def _report(criterion, ok, detail):
    print(f"[ACCEPTANCE] criterion {criterion}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, detail


def _preset_rows(fid, curve_names=None, value_filter=None):
    preset = FIGURE_PRESETS[fid]
    params = {**DEFAULTS, **preset.base}
    values = [v for v in preset.values if value_filter is None or value_filter(v)]
    out = {}
    for curve in preset.curves:
        if curve_names is not None and curve.name not in curve_names:
            continue
        p = {**params, **curve.overrides}
        key = curve.sweep_key or preset.sweep_key
        out[curve.name] = sweep_rows(p, key, values)
    return out


def test_criterion_1_oracle_equivalence():
    """Each of the 9 allocation rules matches golden-section maximization of
    the per-draw parametrized objective on 100 random instances."""
    regimes = [
        AvgTxAvgInt(p_avg=1.0, q_avg=1.0),
        PeakTxAvgInt(p_pk0=0.8, p_pk1=0.5, q_avg=1.0),
        AvgTxPeakInt(p_avg=1.0, q_pk0=0.3, q_pk1=0.2, xi0=0.1, xi1=0.15),
    ]
    csis = [PerfectBoth(), PerfectTxImperfectInt(0.3), ImperfectBoth(0.3, 0.2)]
    t0 = time.time()
    worst = 0.0
    for regime in regimes:
        for csi in csis:
            worst = max(worst, rule_vs_oracle(regime, csi, IMPERFECT, LB,
                                              n_instances=100, seed=202))
    elapsed = time.time() - t0
    ok = worst <= 1e-6 and elapsed < 10.0
    _report(1, ok, f"worst |closed-form - oracle| = {worst:.2e} (tol 1e-6), "
                   f"runtime {elapsed:.1f}s (< 10s)")


def test_criterion_2_dinkelbach_self_consistency():
    """Every solve of the average-budget preset terminates with |F| <= 1e-6
    in <= 30 outer rounds, a nondecreasing ratio trace, and slackness
    residuals <= 1e-3, within 2 minutes at 1e5 draws."""
    preset = FIGURE_PRESETS[4]
    base = {**DEFAULTS, **preset.base}
    assert base["mc_count"] == 100_000
    t0 = time.time()
    n_solved = 0
    worst_f = 0.0
    worst_cs = 0.0
    worst_dip = 0.0
    max_outer = 0
    for curve in preset.curves:
        params = {**base, **curve.overrides}
        for v in preset.values:
            p = dict(params)
            p[preset.sweep_key] = float(v)
            scenario, config = build_problem(p)
            rep = dinkelbach_solve(scenario, config)
            assert rep.status == "ok", f"{curve.name} @ {v} did not converge"
            f_res = abs(rep.rate - rep.alpha_star * (rep.p_tot + LB.p_c))
            worst_f = max(worst_f, f_res)
            max_outer = max(max_outer, rep.outer_iters)
            diffs = np.diff(rep.alpha_trace)
            if diffs.size:
                worst_dip = max(worst_dip, float(-diffs.min()))
            worst_cs = max(worst_cs,
                           rep.residuals.get("cs_lambda", 0.0),
                           rep.residuals.get("cs_nu", 0.0))
            n_solved += 1
    elapsed = time.time() - t0
    ok = (worst_f <= 1e-6 and max_outer <= 30 and worst_dip <= 1e-12
          and worst_cs <= 1e-3 and elapsed < 120.0)
    _report(2, ok, f"{n_solved} solves, worst |F(alpha*)| = {worst_f:.2e} (tol 1e-6), "
                   f"max outer = {max_outer} (<= 30), worst trace dip = {worst_dip:.1e}, "
                   f"worst cs residual = {worst_cs:.2e} (tol 1e-3), runtime {elapsed:.0f}s (< 120s)")


def test_criterion_3_bound_suite():
    """Mixture-gap bound over the noise grid: nonnegative, nonincreasing,
    and above the Monte Carlo gap estimate minus 3 standard errors."""
    samples = sample_links(FadingLink(), FadingLink(), 91, 16)
    rule = ConstantRule(1.0, 1.0)
    grid = np.linspace(0.1, 2.0, 20)
    bounds = []
    margins = []
    for i, n0 in enumerate(grid):
        lb = LinkBudget(n0=float(n0), sigma_s2=1.0, frame_len=100, sense_len=10)
        bound = gap_upper_bound(rule, samples, IMPERFECT, lb)
        est, se = exact_mi_mc(rule, samples, IMPERFECT, lb, mc_n=80_000, seed=300 + i)
        gap = est - expected_rate(rule, samples, IMPERFECT, lb)
        bounds.append(bound)
        margins.append(bound - (gap - 3.0 * se))
    bounds = np.asarray(bounds)
    margins = np.asarray(margins)
    ok = (np.all(bounds >= 0.0) and np.all(np.diff(bounds) <= 1e-12)
          and np.all(margins >= 0.0))
    _report(3, ok, f"bound range [{bounds[-1]:.4f}, {bounds[0]:.4f}], "
                   f"min margin over MC gap = {margins.min():.4f}")


def test_criterion_4_exact_mi_agreement():
    """Perfect sensing: the mixture MC matches the closed form within 3
    standard errors at 2e5 samples; with sensing errors the measured gap
    shrinks as the noise level grows."""
    link = FadingLink()
    one = sample_links(link, link, 17, 1)
    rule = ConstantRule(1.0, 1.0)
    est, se = exact_mi_mc(rule, one, PERFECT, LB, mc_n=200_000, seed=41)
    closed = expected_rate(rule, one, PERFECT, LB)
    match = abs(est - closed) <= 3.0 * se

    noisy = derive_sensing(SensingSpec(0.8, 0.2, 0.4, 0.6))
    gaps = []
    for i, n0 in enumerate((0.1, 0.5, 1.0)):
        lb = LinkBudget(n0=n0, sigma_s2=1.0, frame_len=100, sense_len=10)
        est_i, _ = exact_mi_mc(rule, one, noisy, lb, mc_n=200_000, seed=50 + i)
        gaps.append(est_i - expected_rate(rule, one, noisy, lb))
    shrinking = gaps[0] > gaps[1] > gaps[2]
    ok = match and shrinking
    _report(4, ok, f"perfect-sensing |MC - closed| = {abs(est - closed):.2e} "
                   f"vs 3se = {3*se:.2e}; gaps over noise grid = "
                   f"{[round(g, 4) for g in gaps]}")


def test_criterion_5_trend_suite():
    """(a) efficiency rises with detection and falls with false alarm;
    (b) CSI knowledge ordering under common random numbers;
    (c) average transmit budgets beat equal peak budgets;
    (d) efficiency saturates past the constraint knee;
    (e) efficiency falls with interference estimation error."""
    fig5 = _preset_rows(5)
    fig6 = _preset_rows(6)
    order5 = ("perfect_both", "imperfect_interference", "imperfect_both", "statistical")

    rising = all(
        all(b["ee"] >= a["ee"] - 1e-9 for a, b in zip(rows, rows[1:]))
        for rows in fig5.values()
    )
    falling = all(
        all(b["ee"] <= a["ee"] + 1e-9 for a, b in zip(rows, rows[1:]))
        for rows in fig6.values()
    )

    def ordered(rows_by_curve):
        for i in range(len(next(iter(rows_by_curve.values())))):
            for strong, weak in zip(order5, order5[1:]):
                s, w = rows_by_curve[strong][i], rows_by_curve[weak][i]
                tol = 3.0 * np.hypot(s["ee_se"], w["ee_se"])
                if w["ee"] > s["ee"] + tol:
                    return False
        return True

    ordering = ordered(fig5) and ordered(fig6)

    # adaptive vs statistical knowledge on the average-budget preset
    fig4 = _preset_rows(
        4,
        curve_names=("perfect_csi_imperfect_sensing", "statistical_csi_imperfect_sensing"),
        value_filter=lambda v: v in (-20.0, -10.0, 0.0),
    )
    adaptive_dominates = all(
        p["ee"] >= s["ee"] - 3.0 * np.hypot(p["ee_se"], s["ee_se"])
        for p, s in zip(fig4["perfect_csi_imperfect_sensing"],
                        fig4["statistical_csi_imperfect_sensing"])
    )
    ordering = ordering and adaptive_dominates

    fig10 = _preset_rows(10)
    avg_beats_peak = all(
        a["ee"] >= p["ee"] - 1e-9
        for a, p in zip(fig10["avg_tx_imperfect_sensing"], fig10["peak_tx_imperfect_sensing"])
    ) and all(
        a["ee"] >= p["ee"] - 1e-9
        for a, p in zip(fig10["avg_tx_perfect_sensing"], fig10["peak_tx_perfect_sensing"])
    )

    def saturated(rows):
        tail = np.array([r["ee"] for r in rows[-3:]])
        return (tail.max() - tail.min()) <= 0.01 * tail[-1]

    fig9 = _preset_rows(9, curve_names=("perfect_both",))
    saturation = (saturated(fig10["avg_tx_imperfect_sensing"])
                  and saturated(fig10["peak_tx_imperfect_sensing"])
                  and saturated(fig9["perfect_both"]))

    fig7 = _preset_rows(7, curve_names=("imperfect_interference", "imperfect_both_h03"))
    err_falling = all(
        all(b["ee"] <= a["ee"] + 1e-9 for a, b in zip(rows, rows[1:]))
        for rows in fig7.values()
    )

    ok = rising and falling and ordering and avg_beats_peak and saturation and err_falling
    _report(5, ok, f"detection-trend={rising}, false-alarm-trend={falling}, "
                   f"csi-ordering={ordering}, avg>=peak={avg_beats_peak}, "
                   f"saturation={saturation}, error-variance-trend={err_falling}")


def test_criterion_6_distribution_suite():
    """Conditional density integrates to one, has the right mean, inverts
    its CDF, and matches the sampler in KS distance."""
    worst_norm = 0.0
    for h_hat2 in (0.5, 2.0):
        for err_var in (0.1, 0.5):
            total, _ = integrate.quad(lambda g: cond_pdf_h2(g, h_hat2, err_var),
                                      0.0, np.inf, limit=200)
            worst_norm = max(worst_norm, abs(total - 1.0))

    h_hat2, err_var = 0.8, 0.3
    rng = np.random.default_rng(5)
    err = (rng.standard_normal(100_000) + 1j * rng.standard_normal(100_000)) * np.sqrt(err_var / 2)
    emp = np.abs(np.sqrt(h_hat2) + err) ** 2
    mean_quad, _ = integrate.quad(lambda g: g * cond_pdf_h2(g, h_hat2, err_var),
                                  0.0, np.inf, limit=200)
    mc_tol = 3.0 * np.std(emp) / np.sqrt(emp.size)
    mean_ok = (abs(mean_quad - (h_hat2 + err_var)) <= 1e-9
               and abs(np.mean(emp) - (h_hat2 + err_var)) <= mc_tol)

    worst_inv = 0.0
    for p in (0.05, 0.5, 0.95):
        q = cond_quantile_g2(p, 0.4, 0.2)
        worst_inv = max(worst_inv, abs(cond_cdf_g2(q, 0.4, 0.2) - p))

    s = sample_links(FadingLink(1.0, 0.25), FadingLink(), 17, 100_000)
    ks = stats.kstest(cond_cdf_g2(s.h2, s.h_hat2, 0.25), "uniform").statistic

    ok = worst_norm <= 1e-6 and mean_ok and worst_inv <= 1e-6 and ks <= 0.01
    _report(6, ok, f"normalization {worst_norm:.1e} (tol 1e-6), mean ok={mean_ok} "
                   f"(MC tol {mc_tol:.1e}), inversion {worst_inv:.1e} (tol 1e-6), "
                   f"KS {ks:.4f} (tol 0.01)")


def test_criterion_7_reductions():
    """Vanishing estimation error collapses the estimated-CSI rules onto the
    exact-CSI rules; perfect sensing at zero ratio parameter reproduces
    classical throughput water-filling."""
    rng = np.random.default_rng(8)
    m = Multipliers(lambda_=0.3, nu=0.4, alpha=0.2)
    worst_g = worst_h = 0.0
    for _ in range(25):
        e = rng.exponential(1.0, 2)
        d = ChannelDraw(h2=e[0], g2=e[1], h_hat2=e[0], g_hat2=e[1])
        ref = alloc_avg_avg(d, m, PerfectBoth(), IMPERFECT, LB)
        a = alloc_avg_avg(d, m, PerfectTxImperfectInt(0.0), IMPERFECT, LB)
        worst_g = max(worst_g, abs(a.p0 - ref.p0), abs(a.p1 - ref.p1))
        b = alloc_avg_avg(d, m, ImperfectBoth(1e-6, 0.0), IMPERFECT, LB)
        worst_h = max(worst_h, abs(b.p0 - ref.p0), abs(b.p1 - ref.p1))

    m_wf = Multipliers(lambda_=0.8, nu=0.0, alpha=0.0)
    worst_wf = 0.0
    for h2 in rng.exponential(1.0, 50):
        d = ChannelDraw(h2=h2, g2=1.0, h_hat2=h2, g_hat2=1.0)
        got = alloc_avg_avg(d, m_wf, PerfectBoth(), PERFECT, LB).p0
        ref = max(LB.duty * LOG2E / 0.8 - LB.n0 / h2, 0.0)
        worst_wf = max(worst_wf, abs(got - ref))

    ok = worst_g <= 1e-3 and worst_h <= 1e-3 and worst_wf <= 1e-9
    _report(7, ok, f"interference-error collapse {worst_g:.1e} (tol 1e-3), "
                   f"transmission-error collapse {worst_h:.1e} (tol 1e-3), "
                   f"throughput water-filling {worst_wf:.1e} (tol 1e-9)")
