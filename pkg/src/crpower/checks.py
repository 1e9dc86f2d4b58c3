"""Self-check suite behind ``crpower validate``.

Each check reruns one of the package's independent audits at a reduced but
meaningful size: closed-form rules against numerical maximization,
degenerate-parameter reductions, distribution normalizations, the
mixture-gap bound against a Monte Carlo gap estimate, and the ratio
iteration's fixed-point identity.
"""

import numpy as np
from scipy import integrate, stats

from .allocation import (
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
from .fading import ChannelDraw, FadingLink, cond_cdf_g2, cond_pdf_h2, cond_quantile_g2, sample_links
from .metrics import LOG2E, LinkBudget, exact_mi_mc, expected_rate, gap_upper_bound
from .refopt import rule_vs_oracle
from .sensing import SensingSpec, derive_sensing
from .solver import Scenario, SolverConfig, dinkelbach_solve

__all__ = ["run_checks"]

_LB = LinkBudget(n0=0.1, sigma_s2=1.0, frame_len=100, sense_len=10, p_c=0.1)
_IMPERFECT = derive_sensing(SensingSpec(0.8, 0.1, 0.4, 0.6))
_PERFECT = derive_sensing(SensingSpec(1.0, 0.0, 0.4, 0.6))


def _check_sensing(seed, eps):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(100):
        busy = rng.uniform(0.05, 0.95)
        sd = derive_sensing(SensingSpec(rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95),
                                        1.0 - busy, busy))
        total = (sd.pr_idle_decision * sd.post_busy_given_idle
                 + sd.pr_busy_decision * sd.post_busy_given_busy)
        worst = max(worst, abs(total - busy))
    return worst <= 1e-12, f"total-probability residual {worst:.2e} (tol 1e-12)"


def _check_pdf_normalization(seed, eps):
    worst = 0.0
    for h_hat2 in (0.5, 2.0):
        for err_var in (0.1, 0.5):
            total, _ = integrate.quad(lambda g: cond_pdf_h2(g, h_hat2, err_var),
                                      0.0, np.inf, limit=200)
            worst = max(worst, abs(total - 1.0))
    return worst <= 1e-6, f"normalization residual {worst:.2e} (tol 1e-6)"


def _check_quantile(seed, eps):
    worst = 0.0
    for p in (0.05, 0.5, 0.95):
        q = cond_quantile_g2(p, 0.4, 0.2)
        worst = max(worst, abs(cond_cdf_g2(q, 0.4, 0.2) - p))
    ref = stats.ncx2.ppf(0.9, df=2, nc=2.0 * 0.9 / 0.25) * 0.25 / 2.0
    worst_ref = abs(cond_quantile_g2(0.9, 0.9, 0.25) - ref)
    ok = worst <= 1e-6 and worst_ref <= 1e-6
    return ok, f"inversion residual {worst:.2e}, reference deviation {worst_ref:.2e}"


def _check_sampler_ks(seed, eps):
    link = FadingLink(1.0, 0.25)
    s = sample_links(link, FadingLink(), seed, 100_000)
    pit = cond_cdf_g2(s.h2, s.h_hat2, 0.25)
    ks = stats.kstest(pit, "uniform").statistic
    return ks <= 0.01, f"conditional-law KS distance {ks:.4f} (tol 0.01)"


def _check_oracles(seed, eps):
    regimes = [
        AvgTxAvgInt(p_avg=1.0, q_avg=1.0),
        PeakTxAvgInt(p_pk0=0.8, p_pk1=0.5, q_avg=1.0),
        AvgTxPeakInt(p_avg=1.0, q_pk0=0.3, q_pk1=0.2, xi0=0.1, xi1=0.15),
    ]
    csis = [PerfectBoth(), PerfectTxImperfectInt(0.3), ImperfectBoth(0.3, 0.2)]
    worst = 0.0
    for regime in regimes:
        for csi in csis:
            worst = max(worst, rule_vs_oracle(regime, csi, _IMPERFECT, _LB,
                                              n_instances=15, seed=seed))
    return worst <= 1e-6, f"worst rule-vs-oracle deviation {worst:.2e} (tol 1e-6)"


def _check_reductions(seed, eps):
    rng = np.random.default_rng(seed)
    m = Multipliers(lambda_=0.3, nu=0.4, alpha=0.2)
    worst_collapse = 0.0
    for _ in range(10):
        e = rng.exponential(1.0, 2)
        d = ChannelDraw(h2=e[0], g2=e[1], h_hat2=e[0], g_hat2=e[1])
        a = alloc_avg_avg(d, m, ImperfectBoth(1e-6, 0.0), _IMPERFECT, _LB)
        b = alloc_avg_avg(d, m, PerfectBoth(), _IMPERFECT, _LB)
        worst_collapse = max(worst_collapse, abs(a.p0 - b.p0), abs(a.p1 - b.p1))
    m_wf = Multipliers(lambda_=0.8, nu=0.0, alpha=0.0)
    worst_wf = 0.0
    for h2 in rng.exponential(1.0, 20):
        d = ChannelDraw(h2=h2, g2=1.0, h_hat2=h2, g_hat2=1.0)
        got = alloc_avg_avg(d, m_wf, PerfectBoth(), _PERFECT, _LB).p0
        ref = max(_LB.duty * LOG2E / 0.8 - _LB.n0 / h2, 0.0)
        worst_wf = max(worst_wf, abs(got - ref))
    ok = worst_collapse <= 1e-3 and worst_wf <= 1e-9
    return ok, (f"error-variance collapse {worst_collapse:.2e} (tol 1e-3), "
                f"throughput water-filling {worst_wf:.2e} (tol 1e-9)")


def _check_bound(seed, eps):
    samples = sample_links(FadingLink(), FadingLink(), seed, 400)
    rule = ConstantRule(1.0, 1.0)
    grid = np.linspace(0.1, 2.0, 8)
    vals = []
    for n0 in grid:
        lb = LinkBudget(n0=n0, sigma_s2=1.0, frame_len=100, sense_len=10)
        vals.append(gap_upper_bound(rule, samples, _IMPERFECT, lb))
    vals = np.asarray(vals)
    monotone = bool(np.all(np.diff(vals) <= 1e-12)) and bool(np.all(vals >= 0.0))

    one = sample_links(FadingLink(), FadingLink(), seed + 1, 1)
    bound = gap_upper_bound(rule, one, _IMPERFECT, _LB)
    est, se = exact_mi_mc(rule, one, _IMPERFECT, _LB, mc_n=100_000, seed=seed + 2)
    gap = est - expected_rate(rule, one, _IMPERFECT, _LB)
    dominates = bound >= gap - 3.0 * se
    ok = monotone and dominates
    return ok, (f"nonneg+nonincreasing={monotone}, bound {bound:.4f} vs "
                f"MC gap {gap:.4f} (+3se {3*se:.4f})")


def _check_exact_mi(seed, eps):
    samples = sample_links(FadingLink(), FadingLink(), seed, 8)
    rule = ConstantRule(1.0, 0.6)
    est, se = exact_mi_mc(rule, samples, _PERFECT, _LB, mc_n=150_000, seed=seed)
    closed = expected_rate(rule, samples, _PERFECT, _LB)
    ok = abs(est - closed) <= 3.0 * se
    return ok, f"|MC - closed form| = {abs(est - closed):.2e} vs 3se {3*se:.2e}"


def _check_dinkelbach(seed, eps):
    scenario = Scenario(
        sensing=SensingSpec(0.8, 0.1, 0.4, 0.6),
        budget=_LB,
        csi=PerfectBoth(),
        regime=AvgTxAvgInt(p_avg=1.0, q_avg=10.0 ** (-0.8)),
    )
    config = SolverConfig(eps=eps, mc_count=4000, seed=seed)
    rep = dinkelbach_solve(scenario, config)
    f_res = abs(rep.rate - rep.alpha_star * (rep.p_tot + _LB.p_c))
    ratio = rep.rate / (rep.p_tot + _LB.p_c)
    self_consistent = abs(rep.ee_star - ratio) <= 1e-9
    monotone = bool(np.all(np.diff(rep.alpha_trace) >= -1e-12))
    ok = rep.status == "ok" and f_res <= 1e-6 and self_consistent and monotone
    return ok, (f"status={rep.status}, |F(alpha*)|={f_res:.2e} (tol 1e-6), "
                f"ratio residual {abs(rep.ee_star - ratio):.2e}, monotone={monotone}")


_CHECKS = [
    ("sensing-total-probability", _check_sensing),
    ("conditional-pdf-normalization", _check_pdf_normalization),
    ("conditional-quantile-inversion", _check_quantile),
    ("sampler-conditional-ks", _check_sampler_ks),
    ("rule-oracle-equivalence", _check_oracles),
    ("perfect-csi-reductions", _check_reductions),
    ("gap-bound-suite", _check_bound),
    ("exact-mi-perfect-sensing", _check_exact_mi),
    ("dinkelbach-self-consistency", _check_dinkelbach),
]


def run_checks(seed: int = 1234, eps: float = 1e-6):
    """Run every check; returns a list of (name, passed, detail)."""
    results = []
    for name, fn in _CHECKS:
        try:
            ok, detail = fn(seed, eps)
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append((name, ok, detail))
    return results
