"""Per-realization optimal power rules for every regime / CSI combination.

Every rule is a water-filling variant: power is the gap between a water
level set by the multipliers and the effective noise floor scaled by the
transmission gain, clipped below at zero and above at whatever cap the
regime imposes (a peak transmit limit, or a peak-interference cap divided by
the interference gain or its conditional quantile).  With an estimated
transmission link the first-order condition holds in conditional expectation
and the power solves a scalar fixed-point equation instead.

The vectorized :class:`RuleEngine` drives whole sample sets through the
backend kernels; the module-level ``alloc_*`` functions are the one-draw
entry points built on the same dispatch.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import _backend as kern
from .errors import QuadratureError, UnboundedWaterLevelError, UnsupportedCombinationError
from .fading import (
    QUAD_NODES,
    ChannelDraw,
    FadingLink,
    SampleSet,
    cond_quantile_g2,
    conditional_nodes,
)
from .metrics import LOG2E, LinkBudget, PowerPair
from .sensing import SensingDerived

__all__ = [
    "AvgTxAvgInt",
    "PeakTxAvgInt",
    "AvgTxPeakInt",
    "ConstraintRegime",
    "PerfectBoth",
    "PerfectTxImperfectInt",
    "ImperfectBoth",
    "StatisticalBoth",
    "CsiLevel",
    "Multipliers",
    "RuleEngine",
    "PowerRule",
    "ConstantRule",
    "alloc_avg_avg",
    "alloc_peak_avg",
    "alloc_avg_peak",
    "solve_fixed_point",
    "interference_cutoffs",
]

FIXED_POINT_TOL = 1e-10


@dataclass(frozen=True)
class AvgTxAvgInt:
    """Average transmit power and average interference power limits."""

    p_avg: float
    q_avg: float

    def __post_init__(self):
        if self.p_avg < 0.0 or self.q_avg < 0.0:
            raise ValueError("limits must be nonnegative")


@dataclass(frozen=True)
class PeakTxAvgInt:
    """Per-decision peak transmit limits with an average interference limit."""

    p_pk0: float
    p_pk1: float
    q_avg: float

    def __post_init__(self):
        if min(self.p_pk0, self.p_pk1, self.q_avg) < 0.0:
            raise ValueError("limits must be nonnegative")

    def peak(self, k: int) -> float:
        return self.p_pk1 if k else self.p_pk0


@dataclass(frozen=True)
class AvgTxPeakInt:
    """Average transmit limit with per-decision peak interference limits.

    With imperfect interference CSI the peak constraints hold as outage
    constraints at thresholds ``xi0``/``xi1``.
    """

    p_avg: float
    q_pk0: float
    q_pk1: float
    xi0: float = 0.1
    xi1: float = 0.1

    def __post_init__(self):
        if min(self.p_avg, self.q_pk0, self.q_pk1) < 0.0:
            raise ValueError("limits must be nonnegative")
        for xi in (self.xi0, self.xi1):
            if not 0.0 < xi < 1.0:
                raise ValueError("outage thresholds must lie in (0, 1)")

    def q_pk(self, k: int) -> float:
        return self.q_pk1 if k else self.q_pk0

    def xi(self, k: int) -> float:
        return self.xi1 if k else self.xi0


ConstraintRegime = Union[AvgTxAvgInt, PeakTxAvgInt, AvgTxPeakInt]


def _check_var(v, name):
    if not 0.0 <= v < 1.0:
        raise ValueError(f"{name}={v} must lie in [0, 1)")


@dataclass(frozen=True)
class PerfectBoth:
    """Exact instantaneous CSI of both links."""


@dataclass(frozen=True)
class PerfectTxImperfectInt:
    """Exact transmission-link CSI, estimated interference link."""

    sigma_g2: float

    def __post_init__(self):
        _check_var(self.sigma_g2, "sigma_g2")


@dataclass(frozen=True)
class ImperfectBoth:
    """Both links known only through estimates."""

    sigma_h2: float
    sigma_g2: float

    def __post_init__(self):
        _check_var(self.sigma_h2, "sigma_h2")
        _check_var(self.sigma_g2, "sigma_g2")


@dataclass(frozen=True)
class StatisticalBoth:
    """Only the fading distributions are known; powers cannot adapt."""


CsiLevel = Union[PerfectBoth, PerfectTxImperfectInt, ImperfectBoth, StatisticalBoth]


@dataclass(frozen=True)
class Multipliers:
    """Dual prices for the average constraints plus the efficiency parameter."""

    lambda_: float = 0.0
    nu: float = 0.0
    alpha: float = 0.0

    def __post_init__(self):
        if min(self.lambda_, self.nu, self.alpha) < 0.0:
            raise ValueError("multipliers must be nonnegative")


# Known (estimated) interference power gain entering rules and constraints.
def interference_gain(csi: CsiLevel, samples: SampleSet) -> np.ndarray:
    if isinstance(csi, (PerfectBoth, StatisticalBoth)):
        return samples.g2
    return samples.g_hat2 + csi.sigma_g2


def _coeffs(regime, m: Multipliers, sd: SensingDerived, lb: LinkBudget, k: int):
    """(num, a, b) of the interior water level num / (a + b * gain)."""
    pr = sd.decision_prob(k)
    rho = sd.interference_weight(k)
    if isinstance(regime, AvgTxAvgInt):
        return lb.duty * pr * LOG2E, (m.lambda_ + m.alpha) * pr, m.nu * rho
    if isinstance(regime, PeakTxAvgInt):
        return lb.duty * pr * LOG2E, m.alpha * pr, m.nu * rho
    if isinstance(regime, AvgTxPeakInt):
        # the decision probability scales rate and price alike; carrying it on
        # both keeps the pair consistent with the fixed-point prefactor
        return lb.duty * pr * LOG2E, (m.lambda_ + m.alpha) * pr, 0.0
    raise TypeError(f"unknown regime {regime!r}")


_quantile_memo: dict = {}


def _quantile_caps(q_pk: float, xi: float, g_hat2: np.ndarray, sigma_g2: float, key):
    """Peak-interference caps from the conditional quantile, memoized per sample set.

    ``key=None`` (ad-hoc sample sets) disables memoization.
    """
    quant = None
    memo_key = None
    if key is not None:
        memo_key = (key, float(sigma_g2), float(xi))
        quant = _quantile_memo.get(memo_key)
    if quant is None:
        quant = np.asarray(cond_quantile_g2(1.0 - xi, g_hat2, sigma_g2))
        if memo_key is not None:
            if len(_quantile_memo) > 16:
                _quantile_memo.clear()
            _quantile_memo[memo_key] = quant
    return _ratio_cap(q_pk, quant)


def _ratio_cap(q_pk: float, gain: np.ndarray) -> np.ndarray:
    """q_pk / gain with zero gain meaning no cap (+inf, comparisons only)."""
    caps = np.full(gain.shape, np.inf)
    pos = gain > 0.0
    caps[pos] = q_pk / gain[pos]
    return caps


class RuleEngine:
    """Vectorized power-rule evaluator bound to one sample set.

    Precomputes everything that does not depend on the multipliers (known
    interference gains, peak caps, conditional quadrature tables) so the
    per-iteration work inside a solve reduces to the backend kernels.
    """

    def __init__(
        self,
        regime: ConstraintRegime,
        csi: CsiLevel,
        sd: SensingDerived,
        lb: LinkBudget,
        samples: SampleSet,
        n_nodes: int = QUAD_NODES,
    ):
        if isinstance(csi, StatisticalBoth):
            raise UnsupportedCombinationError(
                "statistical CSI has scalar powers; use the statistical solver"
            )
        self.regime = regime
        self.csi = csi
        self.sd = sd
        self.lb = lb
        self.samples = samples
        self.uses_estimated_tx = isinstance(csi, ImperfectBoth)
        self.gain = interference_gain(csi, samples)
        self.h2 = samples.h_hat2 if self.uses_estimated_tx else samples.h2

        self._tables = None
        if self.uses_estimated_tx:
            self._tables = conditional_nodes(samples.h_hat2, csi.sigma_h2, n_nodes)

        self.caps = []
        for k in (0, 1):
            if isinstance(regime, PeakTxAvgInt):
                self.caps.append(float(regime.peak(k)))
            elif isinstance(regime, AvgTxPeakInt):
                if isinstance(csi, PerfectBoth):
                    self.caps.append(_ratio_cap(regime.q_pk(k), samples.g2))
                else:
                    key = None
                    if samples.seed >= 0:
                        key = (samples.seed, samples.count, samples.int_link)
                    self.caps.append(
                        _quantile_caps(
                            regime.q_pk(k), regime.xi(k), samples.g_hat2,
                            csi.sigma_g2, key,
                        )
                    )
            else:
                self.caps.append(np.inf)

    def tx_quad_tables(self, samples: SampleSet):
        if samples is not self.samples:
            raise ValueError("engine is bound to a different sample set")
        return self._tables

    def _check_bounded(self, zero_mask, cap):
        if not np.any(zero_mask):
            return
        cap_arr = np.broadcast_to(np.asarray(cap, dtype=float), zero_mask.shape)
        if np.any(np.isinf(cap_arr[zero_mask])):
            raise UnboundedWaterLevelError(
                "multiplier denominator vanished with no finite cap; "
                "water level would be infinite"
            )

    def decision_power(self, m: Multipliers, k: int) -> np.ndarray:
        num, a, b = _coeffs(self.regime, m, self.sd, self.lb, k)
        c_eff = self.lb.noise_floor(self.sd, k)
        cap = self.caps[k]
        if not self.uses_estimated_tx:
            self._check_bounded(a + b * self.gain <= 0.0, cap)
            return kern.closed_form_power(self.h2, self.gain, num, a, b, c_eff, cap)
        rhs = a + b * self.gain
        self._check_bounded(rhs <= 0.0, cap)
        pref = self.lb.duty * self.sd.decision_prob(k) * LOG2E
        gamma, wts = self._tables
        try:
            return kern.fixed_point_power(
                gamma, wts, pref, c_eff, np.ascontiguousarray(rhs, dtype=float),
                cap, FIXED_POINT_TOL,
            )
        except FloatingPointError as exc:
            raise QuadratureError(str(exc)) from exc

    def power_pairs(self, m: Multipliers):
        return self.decision_power(m, 0), self.decision_power(m, 1)

    def interference_terms(self, p0: np.ndarray, p1: np.ndarray) -> np.ndarray:
        """Per-draw received interference against the known gain."""
        sd = self.sd
        return (sd.interference_weight(0) * p0 + sd.interference_weight(1) * p1) * self.gain


@dataclass(frozen=True)
class PowerRule:
    """A rule engine frozen at specific multipliers; the per-draw power map."""

    engine: RuleEngine
    m: Multipliers

    @property
    def uses_estimated_tx(self) -> bool:
        return self.engine.uses_estimated_tx

    def power_pairs(self, samples: SampleSet):
        if samples is not self.engine.samples:
            raise ValueError("rule is bound to a different sample set")
        return self.engine.power_pairs(self.m)

    def tx_quad_tables(self, samples: SampleSet):
        return self.engine.tx_quad_tables(samples)

    def power_pair(self, i: int) -> PowerPair:
        p0, p1 = self.power_pairs(self.engine.samples)
        return PowerPair(float(p0[i]), float(p1[i]))


@dataclass(frozen=True)
class ConstantRule:
    """Fixed powers regardless of the draw; handy for audits and figures."""

    p0: float
    p1: float
    uses_estimated_tx: bool = False

    def power_pairs(self, samples: SampleSet):
        n = len(samples)
        return np.full(n, float(self.p0)), np.full(n, float(self.p1))

    def tx_quad_tables(self, samples: SampleSet):
        return None


def _single_draw_samples(draw: ChannelDraw) -> SampleSet:
    link = FadingLink()
    return SampleSet(
        h2=np.array([draw.h2]),
        g2=np.array([draw.g2]),
        h_hat2=np.array([draw.h_hat2]),
        g_hat2=np.array([draw.g_hat2]),
        seed=-1,
        count=1,
        tx_link=link,
        int_link=link,
    )


def _alloc_one(regime, csi, draw, m, sd, lb) -> PowerPair:
    engine = RuleEngine(regime, csi, sd, lb, _single_draw_samples(draw))
    p0, p1 = engine.power_pairs(m)
    return PowerPair(float(p0[0]), float(p1[0]))


def alloc_avg_avg(
    draw: ChannelDraw,
    m: Multipliers,
    csi: CsiLevel,
    sd: SensingDerived,
    lb: LinkBudget,
) -> PowerPair:
    """Optimal powers under average transmit and average interference limits."""
    return _alloc_one(AvgTxAvgInt(p_avg=1.0, q_avg=1.0), csi, draw, m, sd, lb)


def alloc_peak_avg(
    draw: ChannelDraw,
    m: Multipliers,
    csi: CsiLevel,
    regime: PeakTxAvgInt,
    sd: SensingDerived,
    lb: LinkBudget,
) -> PowerPair:
    """Optimal powers under peak transmit and average interference limits."""
    return _alloc_one(regime, csi, draw, m, sd, lb)


def alloc_avg_peak(
    draw: ChannelDraw,
    m: Multipliers,
    csi: CsiLevel,
    regime: AvgTxPeakInt,
    sd: SensingDerived,
    lb: LinkBudget,
) -> PowerPair:
    """Optimal powers under an average transmit and peak interference limits."""
    return _alloc_one(regime, csi, draw, m, sd, lb)


def solve_fixed_point(
    g_hat2: float,
    h_hat2: float,
    m: Multipliers,
    k: int,
    sd: SensingDerived,
    lb: LinkBudget,
    csi: ImperfectBoth,
) -> float:
    """Power solving the conditional-expectation optimality equation.

    This is the average/average rule for decision ``k`` with an estimated
    transmission link: the conditional expectation of the marginal rate gain
    equals the multiplier price.  Returns 0 when even zero power cannot reach
    the price (no positive root).
    """
    pr = sd.decision_prob(k)
    rho = sd.interference_weight(k)
    rhs = (m.lambda_ + m.alpha) * pr + m.nu * rho * (g_hat2 + csi.sigma_g2)
    if rhs <= 0.0:
        raise UnboundedWaterLevelError("zero price; water level would be infinite")
    pref = lb.duty * pr * LOG2E
    gamma, wts = conditional_nodes(np.array([h_hat2]), csi.sigma_h2)
    try:
        out = kern.fixed_point_power(
            gamma, wts, pref, lb.noise_floor(sd, k), np.array([rhs]),
            np.inf, FIXED_POINT_TOL,
        )
    except FloatingPointError as exc:
        raise QuadratureError(str(exc)) from exc
    return float(out[0])


def interference_cutoffs(
    h2: float,
    m: Multipliers,
    k: int,
    regime: PeakTxAvgInt,
    csi: CsiLevel,
    sd: SensingDerived,
    lb: LinkBudget,
):
    """Interference-gain cutoffs of the peak-transmit piecewise rule.

    Returns ``(zero_above, peak_below)``: the rule transmits nothing when the
    known interference gain exceeds the first value and clips at the peak
    limit below the second.  Values may be negative, meaning the branch is
    never active.  Requires a positive interference price.
    """
    pr = sd.decision_prob(k)
    rho = sd.interference_weight(k)
    if m.nu <= 0.0 or rho <= 0.0:
        raise ValueError("cutoffs require a positive interference price")
    c_eff = lb.noise_floor(sd, k)
    gain_num = lb.duty * pr * LOG2E * h2
    zero_above = (gain_num / c_eff - m.alpha * pr) / (m.nu * rho)
    peak_below = (
        gain_num / (regime.peak(k) * h2 + c_eff) - m.alpha * pr
    ) / (m.nu * rho)
    if isinstance(csi, (PerfectTxImperfectInt, ImperfectBoth)):
        zero_above -= csi.sigma_g2
        peak_below -= csi.sigma_g2
    return zero_above, peak_below
