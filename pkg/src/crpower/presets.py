"""Trend-figure presets: scenario parameter sets behind ``figure <id>``.

Each preset pins every parameter of one reference trend plot, organized as
one CSV per curve plus a manifest.  Where the reference experiment leaves a
knob unstated (sweep endpoints, estimation-error variances of secondary
curves), the preset fixes a value and the manifest records it.

Figure ids:

* 2  - mixture-gap upper bound vs noise variance (fixed powers)
* 3  - efficiency vs rate, closed-form lower bound vs exact mixture MC
* 4  - efficiency vs average transmit budget, adaptive vs statistical CSI
* 5  - efficiency vs detection probability, four CSI levels
* 6  - efficiency vs false-alarm probability, four CSI levels
* 7  - efficiency vs interference-link estimation error variance
* 8  - efficiency vs peak transmit budget, perfect vs doubly-imperfect CSI
* 9  - efficiency vs peak interference budget (outage-capped when estimated)
* 10 - efficiency vs transmit budget, average- vs peak-constrained
"""

from dataclasses import dataclass, field

__all__ = ["FigurePreset", "CurveSpec", "FIGURE_PRESETS"]


@dataclass(frozen=True)
class CurveSpec:
    name: str
    overrides: dict = field(default_factory=dict)
    sweep_key: str = ""  # empty = use the figure-level key


@dataclass(frozen=True)
class FigurePreset:
    fid: int
    title: str
    kind: str  # "bound" | "mi" | "solve"
    sweep_key: str
    values: tuple
    base: dict = field(default_factory=dict)
    curves: tuple = ()


def _steps(lo, hi, n):
    step = (hi - lo) / (n - 1)
    return tuple(round(lo + i * step, 10) for i in range(n))


FIGURE_PRESETS = {
    2: FigurePreset(
        fid=2,
        title="gap upper bound vs noise variance",
        kind="bound",
        sweep_key="n0",
        values=_steps(0.1, 2.0, 20),
        base={"p_d": 0.8, "p_f": 0.1, "sigma_s2": 1.0, "mc_count": 20000,
              "fixed_p0": 1.0, "fixed_p1": 1.0},
        curves=(CurveSpec("bound"),),
    ),
    3: FigurePreset(
        fid=3,
        title="efficiency vs rate: closed form lower bound vs exact mixture",
        kind="mi",
        sweep_key="power",
        values=tuple(round(10.0 ** e, 6) for e in _steps(-2.0, 1.2, 13)),
        base={"mc_count": 200, "mi_samples": 200000},
        curves=(
            CurveSpec("perfect_sensing", {"p_d": 1.0, "p_f": 0.0}),
            CurveSpec("imperfect_sensing", {"p_d": 0.8, "p_f": 0.2}),
        ),
    ),
    4: FigurePreset(
        fid=4,
        title="efficiency vs average transmit budget",
        kind="solve",
        sweep_key="p_avg_db",
        values=_steps(-20.0, 0.0, 9),
        base={"regime": "avg_avg", "q_avg_db": -25.0, "mc_count": 100000},
        curves=(
            CurveSpec("perfect_csi_perfect_sensing", {"csi": "perfect", "p_d": 1.0, "p_f": 0.0}),
            CurveSpec("perfect_csi_imperfect_sensing", {"csi": "perfect", "p_d": 0.8, "p_f": 0.1}),
            CurveSpec("statistical_csi_perfect_sensing", {"csi": "statistical", "p_d": 1.0, "p_f": 0.0}),
            CurveSpec("statistical_csi_imperfect_sensing", {"csi": "statistical", "p_d": 0.8, "p_f": 0.1}),
        ),
    ),
    5: FigurePreset(
        fid=5,
        title="efficiency vs detection probability",
        kind="solve",
        sweep_key="p_d",
        values=_steps(0.5, 1.0, 6),
        base={"regime": "peak_avg", "p_pk_db": -4.0, "q_avg_db": -25.0,
              "p_f": 0.1, "mc_count": 10000},
        curves=(
            CurveSpec("perfect_both", {"csi": "perfect"}),
            CurveSpec("imperfect_interference", {"csi": "imp_int", "sigma_g2": 0.1}),
            CurveSpec("imperfect_both", {"csi": "imp_both", "sigma_h2": 0.1, "sigma_g2": 0.1}),
            CurveSpec("statistical", {"csi": "statistical"}),
        ),
    ),
    6: FigurePreset(
        fid=6,
        title="efficiency vs false-alarm probability",
        kind="solve",
        sweep_key="p_f",
        values=_steps(0.0, 0.5, 6),
        base={"regime": "peak_avg", "p_pk_db": -4.0, "q_avg_db": -8.0,
              "p_d": 0.8, "mc_count": 10000},
        curves=(
            CurveSpec("perfect_both", {"csi": "perfect"}),
            CurveSpec("imperfect_interference", {"csi": "imp_int", "sigma_g2": 0.1}),
            CurveSpec("imperfect_both", {"csi": "imp_both", "sigma_h2": 0.1, "sigma_g2": 0.1}),
            CurveSpec("statistical", {"csi": "statistical"}),
        ),
    ),
    7: FigurePreset(
        fid=7,
        title="efficiency vs interference estimation error variance",
        kind="solve",
        sweep_key="sigma_g2",
        values=_steps(0.0, 0.5, 6),
        base={"regime": "peak_avg", "p_pk_db": -4.0, "q_avg_db": -25.0,
              "p_d": 0.8, "p_f": 0.1, "mc_count": 10000},
        curves=(
            CurveSpec("perfect_both_baseline", {"csi": "perfect"}, sweep_key="noop"),
            CurveSpec("imperfect_interference", {"csi": "imp_int"}),
            CurveSpec("imperfect_both_h03", {"csi": "imp_both", "sigma_h2": 0.3}),
            CurveSpec("imperfect_both_h05", {"csi": "imp_both", "sigma_h2": 0.5}),
        ),
    ),
    8: FigurePreset(
        fid=8,
        title="efficiency vs peak transmit budget",
        kind="solve",
        sweep_key="p_pk_db",
        values=_steps(-10.0, 8.0, 10),
        base={"regime": "peak_avg", "q_avg_db": -10.0, "p_d": 0.8, "p_f": 0.1,
              "mc_count": 4000},
        curves=(
            CurveSpec("perfect_both", {"csi": "perfect"}),
            CurveSpec("imp_h01_g02", {"csi": "imp_both", "sigma_h2": 0.1, "sigma_g2": 0.2}),
            CurveSpec("imp_h01_g05", {"csi": "imp_both", "sigma_h2": 0.1, "sigma_g2": 0.5}),
            CurveSpec("imp_h03_g02", {"csi": "imp_both", "sigma_h2": 0.3, "sigma_g2": 0.2}),
        ),
    ),
    9: FigurePreset(
        fid=9,
        title="efficiency vs peak interference budget",
        kind="solve",
        sweep_key="q_pk_db",
        values=_steps(-20.0, 5.0, 11),
        base={"regime": "avg_peak", "p_avg_db": -10.0, "xi": 0.1,
              "p_d": 0.8, "p_f": 0.1, "mc_count": 10000},
        curves=(
            CurveSpec("perfect_both", {"csi": "perfect"}),
            CurveSpec("imperfect_interference", {"csi": "imp_int", "sigma_g2": 0.1}),
        ),
    ),
    10: FigurePreset(
        fid=10,
        title="efficiency vs transmit budget: average vs peak constraint",
        kind="solve",
        sweep_key="p_avg_db",
        values=_steps(-10.0, 14.0, 9),
        base={"q_avg_db": -8.0, "csi": "perfect", "mc_count": 20000},
        curves=(
            CurveSpec("avg_tx_perfect_sensing",
                      {"regime": "avg_avg", "p_d": 1.0, "p_f": 0.0}),
            CurveSpec("avg_tx_imperfect_sensing",
                      {"regime": "avg_avg", "p_d": 0.8, "p_f": 0.1}),
            CurveSpec("peak_tx_perfect_sensing",
                      {"regime": "peak_avg", "p_d": 1.0, "p_f": 0.0},
                      sweep_key="p_pk_db"),
            CurveSpec("peak_tx_imperfect_sensing",
                      {"regime": "peak_avg", "p_d": 0.8, "p_f": 0.1},
                      sweep_key="p_pk_db"),
        ),
    ),
}
