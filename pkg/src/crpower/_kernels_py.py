"""Pure-numpy implementations of the per-draw power kernels.

This is the fallback backend; the compiled extension in ``_kernels.pyx``
implements the same four functions with identical semantics.  All kernels
take float64 arrays, are vectorized over draws, and never mutate inputs.

Conventions shared by both backends:

* ``cap`` entries of +inf mean "no cap"; infinities only ever enter
  comparisons, never arithmetic.
* A vanishing multiplier denominator means an infinite water level; the
  kernel returns the cap there, and callers must pre-check that a finite cap
  exists.
* Draws with zero channel gain get zero power.
"""

import numpy as np

_LOG2E = float(np.log2(np.e))


def closed_form_power(h2, gw, num, a, b, c_eff, cap):
    """Water-filling power ``min(cap, [num/(a + b*gw) - c_eff/h2]^+)``.

    ``h2`` and ``gw`` are per-draw arrays; ``num``, ``a``, ``b``, ``c_eff``
    are scalars; ``cap`` is a scalar or per-draw array (+inf allowed).
    """
    h2 = np.asarray(h2, dtype=float)
    gw = np.asarray(gw, dtype=float)
    den = a + b * gw
    with np.errstate(divide="ignore"):
        water = np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), np.inf)
        floor = np.where(h2 > 0.0, c_eff / np.where(h2 > 0.0, h2, 1.0), np.inf)
    p = np.where(np.isfinite(floor), water - floor, -np.inf)
    p = np.maximum(p, 0.0)
    return np.minimum(p, cap)


def fixed_point_power(gamma, wts, pref, c_eff, rhs, cap, tol=1e-10):
    """Root of the conditional-expectation optimality equation, per draw.

    Solves ``pref * sum_j w[i,j]*gamma[i,j]/(c_eff + P*gamma[i,j]) = rhs[i]``
    for P >= 0.  The left side strictly decreases from its value at 0, so the
    root is bracketed by doubling and then bisected to absolute tolerance
    ``tol``.  Rows with no positive root get 0; rows with ``rhs <= 0`` have an
    infinite water level and return the cap.  The result is clipped at
    ``cap``.
    """
    gamma = np.asarray(gamma, dtype=float)
    wts = np.asarray(wts, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    n = rhs.shape[0]

    def f(p, rows):
        g = gamma[rows]
        return pref * np.sum(wts[rows] * g / (c_eff + p[:, None] * g), axis=1)

    out = np.zeros(n)
    unbounded = rhs <= 0.0
    f0 = f(np.zeros(n), slice(None))
    if not np.all(np.isfinite(f0)):
        raise FloatingPointError("non-finite quadrature in fixed-point kernel")
    active = (~unbounded) & (f0 > rhs)

    idx = np.flatnonzero(active)
    if idx.size:
        lo = np.zeros(idx.size)
        hi = np.ones(idx.size)
        need = f(hi, idx) >= rhs[idx]
        for _ in range(200):
            if not np.any(need):
                break
            hi[need] *= 2.0
            need[need] = f(hi[need], idx[need]) >= rhs[idx[need]]
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            below = f(mid, idx) > rhs[idx]
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.max(hi - lo) <= tol:
                break
        out[idx] = 0.5 * (lo + hi)

    if np.any(unbounded):
        out = np.where(unbounded, np.inf, out)
    return np.minimum(out, cap)


def rate_direct(p, h2, c_eff):
    """Per-draw spectral terms ``log2(1 + p*h2/c_eff)``."""
    return np.log2(1.0 + np.asarray(p, dtype=float) * np.asarray(h2, dtype=float) / c_eff)


def rate_quad(p, gamma, wts, c_eff):
    """Per-draw conditional expectation of ``log2(1 + p*power/c_eff)``.

    ``gamma``/``wts`` are the node tables from
    :func:`crpower.fading.conditional_nodes`.
    """
    p = np.asarray(p, dtype=float)
    return np.sum(wts * np.log2(1.0 + p[:, None] * gamma / c_eff), axis=1)
