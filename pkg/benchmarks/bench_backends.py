"""Benchmark the compiled kernels against the numpy fallback.

Times the four hot per-draw kernels on solver-scale inputs and one full
solve per backend.  Run as ``python benchmarks/bench_backends.py``.
"""

import time

import numpy as np

from crpower import _kernels_py
from crpower.fading import conditional_nodes

try:
    from crpower import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def _time(fn, *args, repeat=5):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(n_draws=100_000, n_nodes=256):
    rng = np.random.default_rng(0)
    h2 = rng.exponential(1.0, n_draws)
    gw = rng.exponential(1.0, n_draws)
    p = rng.uniform(0.0, 2.0, n_draws)
    cap = np.where(gw > 1.0, 0.5, np.inf)

    quad_draws = n_draws // 10  # quadrature tables are used at reduced scale
    gamma, wts = conditional_nodes(rng.exponential(1.0, quad_draws), 0.3, n_nodes)
    rhs = rng.uniform(0.01, 2.0, quad_draws)

    cases = [
        ("closed_form_power", lambda k: k.closed_form_power(h2, gw, 0.9, 0.2, 0.7, 0.4, cap)),
        ("rate_direct", lambda k: k.rate_direct(p, h2, 0.3)),
        ("fixed_point_power", lambda k: k.fixed_point_power(gamma, wts, 0.55, 0.3, rhs, np.inf, 1e-10)),
        ("rate_quad", lambda k: k.rate_quad(p[:quad_draws], gamma, wts, 0.3)),
    ]
    backends = [("numpy", _kernels_py)]
    if _kernels_c is not None:
        backends.append(("cython", _kernels_c))

    print(f"kernel benchmarks ({n_draws} draws, {quad_draws} quadrature rows x {n_nodes} nodes)")
    print(f"{'kernel':22s}" + "".join(f"{name:>12s}" for name, _ in backends) + f"{'speedup':>10s}")
    for label, call in cases:
        times = [_time(call, mod) for _, mod in backends]
        row = f"{label:22s}" + "".join(f"{t*1e3:10.2f}ms" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:9.1f}x"
        print(row)


_SOLVE_SNIPPET = """
import time
from crpower.allocation import ImperfectBoth, PeakTxAvgInt
from crpower.metrics import LinkBudget
from crpower.sensing import SensingSpec
from crpower.solver import Scenario, SolverConfig, dinkelbach_solve
import crpower._backend as backend

scenario = Scenario(
    sensing=SensingSpec(0.8, 0.1, 0.4, 0.6),
    budget=LinkBudget(n0=0.1, sigma_s2=1.0, frame_len=100, sense_len=10, p_c=0.1),
    csi=ImperfectBoth(sigma_h2=0.1, sigma_g2=0.1),
    regime=PeakTxAvgInt(p_pk0=10 ** -0.4, p_pk1=10 ** -0.4, q_avg=10 ** -2.5),
)
config = SolverConfig(mc_count=10_000, seed=7)
t0 = time.perf_counter()
rep = dinkelbach_solve(scenario, config)
print(f"  {backend.BACKEND:8s} {time.perf_counter()-t0:6.2f}s  ee={rep.ee_star:.6f}  {rep.status}")
"""


def bench_solve():
    # fresh interpreter per backend; the selection happens at import time
    import os
    import subprocess
    import sys

    print("\nfull solve (imperfect-both CSI, peak/average regime, 1e4 draws)", flush=True)
    names = ["python"] + (["cython"] if _kernels_c is not None else [])
    for name in names:
        env = dict(os.environ, CRPOWER_BACKEND=name)
        subprocess.run([sys.executable, "-c", _SOLVE_SNIPPET], env=env, check=True)


if __name__ == "__main__":
    bench_kernels()
    bench_solve()
