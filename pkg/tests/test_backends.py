import importlib

import numpy as np
import pytest

from crpower import _backend
from crpower import _kernels_py as kpy
from crpower.fading import conditional_nodes

cython_kernels = pytest.importorskip(
    "crpower._kernels", reason="compiled kernel extension not built"
)

BACKENDS = [("numpy", kpy), ("cython", cython_kernels)]


def _case(seed=0, n=257):
    rng = np.random.default_rng(seed)
    h2 = rng.exponential(1.0, n)
    h2[0] = 0.0  # zero-gain draw must yield zero power
    gw = rng.exponential(1.0, n)
    gw[1] = 0.0
    return h2, gw


@pytest.mark.parametrize("name,mod", BACKENDS)
class TestKernelSemantics:
    def test_closed_form_basic(self, name, mod):
        h2, gw = _case()
        p = mod.closed_form_power(h2, gw, 1.3, 0.4, 0.6, 0.35, np.inf)
        ref = np.minimum(np.inf, np.maximum(
            np.where(h2 > 0, 1.3 / (0.4 + 0.6 * gw) - 0.35 / np.where(h2 > 0, h2, 1), -np.inf),
            0.0))
        assert p == pytest.approx(ref, abs=1e-14)
        assert p[0] == 0.0

    def test_closed_form_cap_and_vanishing_denominator(self, name, mod):
        h2, gw = _case(3)
        cap = np.full(h2.size, 0.25)
        p = mod.closed_form_power(h2, gw, 1.3, 0.0, 0.6, 0.35, cap)
        assert np.all(p <= 0.25 + 1e-15)
        assert p[1] == 0.25  # gw == 0 with a == 0: infinite water, capped

    def test_fixed_point_solves_equation(self, name, mod):
        gamma, wts = conditional_nodes(np.array([0.8, 1.5, 0.2]), 0.3)
        rhs = np.array([0.3, 0.05, 5.0])
        p = mod.fixed_point_power(gamma, wts, 0.5, 0.35, rhs, np.inf, 1e-10)
        f = 0.5 * np.sum(wts * gamma / (0.35 + p[:, None] * gamma), axis=1)
        # active roots hit the equation; the large price admits no root
        assert f[0] == pytest.approx(rhs[0], abs=1e-8)
        assert f[1] == pytest.approx(rhs[1], abs=1e-8)
        assert p[2] == 0.0

    def test_fixed_point_zero_rhs_returns_cap(self, name, mod):
        gamma, wts = conditional_nodes(np.array([0.8]), 0.3)
        p = mod.fixed_point_power(gamma, wts, 0.5, 0.35, np.array([0.0]), 1.75, 1e-10)
        assert p[0] == 1.75

    def test_rate_direct(self, name, mod):
        h2, _ = _case(5)
        p = np.abs(np.sin(h2)) + 0.1
        assert mod.rate_direct(p, h2, 0.35) == pytest.approx(
            np.log2(1.0 + p * h2 / 0.35), rel=1e-14
        )

    def test_rate_quad_matches_direct_on_point_mass(self, name, mod):
        gamma, wts = conditional_nodes(np.array([0.7, 1.1]), 0.0)
        p = np.array([0.5, 2.0])
        got = mod.rate_quad(p, gamma, wts, 0.35)
        assert got == pytest.approx(np.log2(1.0 + p * np.array([0.7, 1.1]) / 0.35), rel=1e-14)


class TestBackendParity:
    def test_closed_form(self):
        h2, gw = _case(11)
        cap = np.where(gw > 1.0, 0.5, np.inf)
        a = kpy.closed_form_power(h2, gw, 0.9, 0.2, 0.7, 0.4, cap)
        b = cython_kernels.closed_form_power(h2, gw, 0.9, 0.2, 0.7, 0.4, cap)
        assert a == pytest.approx(b, abs=1e-12)

    def test_fixed_point(self):
        rng = np.random.default_rng(13)
        gamma, wts = conditional_nodes(rng.exponential(1.0, 64), 0.25)
        rhs = rng.uniform(0.01, 2.0, 64)
        cap = rng.uniform(0.1, 3.0, 64)
        a = kpy.fixed_point_power(gamma, wts, 0.55, 0.3, rhs, cap, 1e-10)
        b = cython_kernels.fixed_point_power(gamma, wts, 0.55, 0.3, rhs, cap, 1e-10)
        assert a == pytest.approx(b, abs=1e-9)

    def test_rates(self):
        rng = np.random.default_rng(17)
        h2 = rng.exponential(1.0, 128)
        p = rng.uniform(0.0, 2.0, 128)
        assert kpy.rate_direct(p, h2, 0.3) == pytest.approx(
            cython_kernels.rate_direct(p, h2, 0.3), rel=1e-14)
        gamma, wts = conditional_nodes(h2, 0.2)
        assert kpy.rate_quad(p, gamma, wts, 0.3) == pytest.approx(
            cython_kernels.rate_quad(p, gamma, wts, 0.3), rel=1e-12)


def test_backend_module_selected():
    assert _backend.BACKEND in ("numpy", "cython")


def test_forced_python_backend(monkeypatch):
    monkeypatch.setenv("CRPOWER_BACKEND", "python")
    import crpower._backend as bk

    fresh = importlib.reload(bk)
    try:
        assert fresh.BACKEND == "numpy"
        assert fresh.closed_form_power is kpy.closed_form_power
    finally:
        monkeypatch.delenv("CRPOWER_BACKEND")
        importlib.reload(bk)
