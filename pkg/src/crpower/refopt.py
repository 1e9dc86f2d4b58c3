"""Reference optimizers used to audit the closed-form rules.

Everything here solves the same per-draw problems as :mod:`crpower.allocation`
but numerically, from the Lagrangian definition: golden-section maximization
of the parametrized per-draw objective over its box, with conditional
expectations integrated by composite Simpson rather than the allocator's
Gauss-Legendre tables.  The validation command and the acceptance suite
compare rule outputs against these maximizers.
"""

from dataclasses import dataclass

import numpy as np

from .allocation import (
    AvgTxAvgInt,
    AvgTxPeakInt,
    ImperfectBoth,
    Multipliers,
    PeakTxAvgInt,
    PerfectBoth,
    PerfectTxImperfectInt,
    RuleEngine,
    interference_gain,
)
from .fading import ChannelDraw, _amp_pdf, cond_quantile_g2
from .metrics import LinkBudget
from .sensing import SensingDerived

__all__ = [
    "golden_max",
    "oracle_power",
    "rule_vs_oracle",
    "grid_search_statistical",
]

_INV_PHI = (np.sqrt(5.0) - 1.0) / 2.0


def golden_max(f, lo: float, hi: float, tol: float = 1e-8):
    """Golden-section maximization of a unimodal function on [lo, hi]."""
    a, b = float(lo), float(hi)
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = f(x1)
    x = 0.5 * (a + b)
    return x, f(x)


def _expand_bracket(f, hi0: float = 1.0):
    """Grow an upper bound until the unimodal maximum is enclosed."""
    hi = hi0
    val = f(hi)
    for _ in range(200):
        nxt = f(2.0 * hi)
        if nxt <= val:
            return 2.0 * hi
        hi, val = 2.0 * hi, nxt
    return hi


def _simpson_cond_table(h_hat2: float, sigma_h2: float, n_panels: int = 2000):
    """Composite-Simpson nodes (squared) and density weights for conditional
    rate expectations; precomputed once so objective evaluations are dots."""
    sig = np.sqrt(sigma_h2)
    amp = np.sqrt(h_hat2)
    lo = max(amp - 12.0 * sig, 0.0)
    hi = amp + 12.0 * sig
    u = np.linspace(lo, hi, 2 * n_panels + 1)
    w = np.ones(u.size)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    weights = (hi - lo) / (6.0 * n_panels) * w * _amp_pdf(u, amp, sigma_h2)
    return u**2, weights


def _per_draw_objective(regime, csi, draw: ChannelDraw, m: Multipliers,
                        sd: SensingDerived, lb: LinkBudget, k: int):
    """The parametrized per-draw Lagrangian term for decision k and its box."""
    pr = sd.decision_prob(k)
    rho = sd.interference_weight(k)
    c_eff = lb.noise_floor(sd, k)
    if isinstance(csi, (PerfectTxImperfectInt, ImperfectBoth)):
        gain = draw.g_hat2 + csi.sigma_g2
    else:
        gain = draw.g2

    if isinstance(regime, AvgTxAvgInt):
        price = (m.lambda_ + m.alpha) * pr + m.nu * rho * gain
        cap = None
    elif isinstance(regime, PeakTxAvgInt):
        price = m.alpha * pr + m.nu * rho * gain
        cap = regime.peak(k)
    elif isinstance(regime, AvgTxPeakInt):
        price = (m.lambda_ + m.alpha) * pr
        if isinstance(csi, PerfectBoth):
            cap = regime.q_pk(k) / draw.g2 if draw.g2 > 0.0 else None
        else:
            quant = cond_quantile_g2(1.0 - regime.xi(k), draw.g_hat2, csi.sigma_g2)
            cap = regime.q_pk(k) / quant if quant > 0.0 else None
    else:
        raise TypeError(f"unknown regime {regime!r}")

    if isinstance(csi, ImperfectBoth) and csi.sigma_h2 > 0.0:
        power_nodes, weights = _simpson_cond_table(draw.h_hat2, csi.sigma_h2)

        def rate(p):
            return float(weights @ np.log2(1.0 + p * power_nodes / c_eff))
    else:
        h2 = draw.h_hat2 if isinstance(csi, ImperfectBoth) else draw.h2

        def rate(p):
            return float(np.log2(1.0 + p * h2 / c_eff))

    def objective(p):
        return lb.duty * pr * rate(p) - price * p

    return objective, cap


def oracle_power(regime, csi, draw: ChannelDraw, m: Multipliers,
                 sd: SensingDerived, lb: LinkBudget, k: int,
                 tol: float = 1e-8) -> float:
    """Numerically maximize the per-draw objective for decision k."""
    objective, cap = _per_draw_objective(regime, csi, draw, m, sd, lb, k)
    hi = _expand_bracket(objective) if cap is None else cap
    return golden_max(objective, 0.0, hi, tol)[0]


@dataclass(frozen=True)
class OracleCase:
    """One random audit instance: a draw plus multipliers."""

    draw: ChannelDraw
    m: Multipliers


def _random_cases(n: int, seed: int):
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(n):
        e = rng.exponential(1.0, size=4)
        draw = ChannelDraw(h2=e[0], g2=e[1], h_hat2=e[2], g_hat2=e[3])
        m = Multipliers(
            lambda_=rng.uniform(0.0, 1.0),
            nu=rng.uniform(0.0, 2.0),
            alpha=0.05 + rng.uniform(0.0, 1.0),
        )
        cases.append(OracleCase(draw=draw, m=m))
    return cases


def rule_vs_oracle(regime, csi, sd: SensingDerived, lb: LinkBudget,
                   n_instances: int, seed: int) -> float:
    """Worst deviation between a rule and its golden-section oracle.

    Evaluates both power levels on ``n_instances`` random draw/multiplier
    pairs and returns the largest absolute difference.
    """
    from .allocation import _single_draw_samples

    worst = 0.0
    for case in _random_cases(n_instances, seed):
        engine = RuleEngine(regime, csi, sd, lb, _single_draw_samples(case.draw))
        p0, p1 = engine.power_pairs(case.m)
        for k, p in ((0, float(p0[0])), (1, float(p1[0]))):
            ref = oracle_power(regime, csi, case.draw, case.m, sd, lb, k)
            worst = max(worst, abs(p - ref))
    return worst


def grid_search_statistical(regime, sd: SensingDerived, lb: LinkBudget,
                            samples, n_grid: int = 200):
    """Brute-force efficiency maximization over constant power pairs.

    Scans an ``n_grid`` x ``n_grid`` grid of feasible (p0, p1), evaluating the
    exact sample-averaged efficiency.  Returns ``(ee, p0, p1)`` at the best
    grid point.  Rate separability in (p0, p1) keeps this cheap.
    """
    pr0, pr1 = sd.decision_prob(0), sd.decision_prob(1)
    rho0, rho1 = sd.interference_weight(0), sd.interference_weight(1)
    mean_gain = float(np.mean(interference_gain(PerfectBoth(), samples)))

    if isinstance(regime, AvgTxAvgInt):
        ub0 = regime.p_avg / pr0
        ub1 = regime.p_avg / pr1
        if rho0 > 0.0:
            ub0 = min(ub0, regime.q_avg / (rho0 * mean_gain))
        if rho1 > 0.0:
            ub1 = min(ub1, regime.q_avg / (rho1 * mean_gain))
    elif isinstance(regime, PeakTxAvgInt):
        ub0, ub1 = regime.p_pk0, regime.p_pk1
    else:
        raise TypeError("grid search supports the average-interference regimes")

    p0s = np.linspace(0.0, ub0, n_grid)
    p1s = np.linspace(0.0, ub1, n_grid)
    r0 = np.array([np.mean(np.log2(1.0 + p * samples.h2 / lb.noise_floor(sd, 0)))
                   for p in p0s])
    r1 = np.array([np.mean(np.log2(1.0 + p * samples.h2 / lb.noise_floor(sd, 1)))
                   for p in p1s])
    rate = lb.duty * (pr0 * r0[:, None] + pr1 * r1[None, :])
    ptot = pr0 * p0s[:, None] + pr1 * p1s[None, :]
    inter = (rho0 * p0s[:, None] + rho1 * p1s[None, :]) * mean_gain

    feasible = np.ones_like(rate, dtype=bool)
    if isinstance(regime, AvgTxAvgInt):
        feasible &= ptot <= regime.p_avg + 1e-12
        feasible &= inter <= regime.q_avg + 1e-12
    else:
        feasible &= inter <= regime.q_avg + 1e-12

    ee = np.where(feasible, rate / (ptot + lb.p_c), -np.inf)
    idx = np.unravel_index(np.argmax(ee), ee.shape)
    return float(ee[idx]), float(p0s[idx[0]]), float(p1s[idx[1]])
