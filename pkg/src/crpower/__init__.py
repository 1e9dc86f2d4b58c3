"""Energy-efficient power allocation for sensing-based spectrum sharing.

Library + CLI computing transmit-power policies that maximize the energy
efficiency of a secondary link under imperfect spectrum sensing, three
transmit/interference constraint regimes, and four channel-knowledge levels,
with CSV sweep tooling for trend reproduction.
"""

from ._backend import BACKEND
from .allocation import (
    AvgTxAvgInt,
    AvgTxPeakInt,
    ConstantRule,
    CsiLevel,
    ImperfectBoth,
    Multipliers,
    PeakTxAvgInt,
    PerfectBoth,
    PerfectTxImperfectInt,
    PowerRule,
    RuleEngine,
    StatisticalBoth,
    alloc_avg_avg,
    alloc_avg_peak,
    alloc_peak_avg,
    solve_fixed_point,
)
from .fading import FadingLink, ChannelDraw, SampleSet, sample_links
from .metrics import (
    LinkBudget,
    PowerPair,
    energy_efficiency,
    exact_mi_mc,
    expected_rate,
    gap_upper_bound,
    rate_realization,
)
from .sensing import SensingDerived, SensingSpec, derive_sensing
from .solver import (
    Scenario,
    SolveReport,
    SolverConfig,
    dinkelbach_solve,
    eval_F,
    solve_statistical,
    subgradient_inner,
)

__version__ = "0.1.0"
