"""Fading links, channel-estimation error, and conditional distributions.

Links are Rayleigh: the channel coefficient is circularly-symmetric complex
Gaussian, split into an estimate and an independent estimation error with
variances ``mean_power - est_error_var`` and ``est_error_var``.  Given the
estimate, the true channel power follows a scaled noncentral chi-square law
with two degrees of freedom whose density involves the modified Bessel
function I0.  This module provides

* deterministic sample-set generation for common-random-number expectations,
* the conditional pdf of the true power given the estimate power,
* its conditional CDF and quantile (bracketing + bisection), and
* fixed Gauss-Legendre node/weight tables for conditional expectations.

All densities are evaluated through the exponentially scaled Bessel function
so large arguments cannot overflow.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import i0e

from .errors import DegenerateDistributionError

__all__ = [
    "FadingLink",
    "ChannelDraw",
    "SampleSet",
    "sample_links",
    "cond_pdf_h2",
    "cond_cdf_g2",
    "cond_quantile_g2",
    "conditional_nodes",
]

# Half-width of the support interval in amplitude (sqrt-power) space, in
# units of sqrt(err_var).  The conditional amplitude is Rician with
# per-component sd sqrt(err_var/2); 12 amplitude-sigmas leave tail mass
# below 1e-60.
_SPAN = 12.0

QUAD_NODES = 256


@dataclass(frozen=True)
class FadingLink:
    """Second-order description of one Rayleigh link.

    ``mean_power`` is E[|coefficient|^2]; ``est_error_var`` is the variance of
    the estimation error (0 means perfect CSI).  The estimate then has
    variance ``mean_power - est_error_var``, which must be nonnegative.
    """

    mean_power: float = 1.0
    est_error_var: float = 0.0

    def __post_init__(self):
        if self.mean_power < 0.0:
            raise ValueError(f"mean_power={self.mean_power} must be nonnegative")
        if self.est_error_var < 0.0:
            raise ValueError(f"est_error_var={self.est_error_var} must be nonnegative")
        if self.est_error_var > self.mean_power:
            raise ValueError(
                "est_error_var exceeds mean_power; estimate variance would be negative"
            )


@dataclass(frozen=True)
class ChannelDraw:
    """One joint realization of both links (true and estimated powers)."""

    h2: float
    g2: float
    h_hat2: float
    g_hat2: float


@dataclass(frozen=True)
class SampleSet:
    """Ordered i.i.d. channel draws, reproducible bit-for-bit from the seed."""

    h2: np.ndarray
    g2: np.ndarray
    h_hat2: np.ndarray
    g_hat2: np.ndarray
    seed: int
    count: int
    tx_link: FadingLink
    int_link: FadingLink

    def __len__(self) -> int:
        return self.count

    def draw(self, i: int) -> ChannelDraw:
        return ChannelDraw(
            h2=float(self.h2[i]),
            g2=float(self.g2[i]),
            h_hat2=float(self.h_hat2[i]),
            g_hat2=float(self.g_hat2[i]),
        )


def sample_links(tx_link: FadingLink, int_link: FadingLink, seed: int, count: int) -> SampleSet:
    """Draw ``count`` joint channel realizations of both links.

    The variates come from a single ``standard_normal`` call with a fixed
    column layout, so the ordered output depends only on (seed, count, link
    specs) and regeneration is bit-identical.  True powers are exponential
    with the configured mean; estimates satisfy coefficient = estimate +
    error with the configured variance split.
    """
    if count < 1:
        raise ValueError(f"count={count} must be at least 1")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((int(count), 8))

    def _powers(link: FadingLink, cols: np.ndarray):
        s_est = np.sqrt((link.mean_power - link.est_error_var) / 2.0)
        s_err = np.sqrt(link.est_error_var / 2.0)
        est_re = s_est * cols[:, 0]
        est_im = s_est * cols[:, 1]
        true_re = est_re + s_err * cols[:, 2]
        true_im = est_im + s_err * cols[:, 3]
        return true_re**2 + true_im**2, est_re**2 + est_im**2

    h2, h_hat2 = _powers(tx_link, z[:, 0:4])
    g2, g_hat2 = _powers(int_link, z[:, 4:8])
    return SampleSet(
        h2=h2, g2=g2, h_hat2=h_hat2, g_hat2=g_hat2,
        seed=int(seed), count=int(count), tx_link=tx_link, int_link=int_link,
    )


def cond_pdf_h2(gamma, h_hat2, err_var):
    """Conditional pdf of the true channel power given the estimate power.

    Evaluates (1/s2) * exp(-(gamma + a2)/s2) * I0(2*sqrt(a2*gamma)/s2) with
    s2 = err_var and a2 = h_hat2, rewritten through the exponentially scaled
    Bessel function as exp(-(sqrt(gamma)-sqrt(a2))^2/s2) * i0e(...) / s2 so
    that large gamma*a2 cannot overflow.  Vectorized in ``gamma``.
    """
    if err_var <= 0.0:
        raise DegenerateDistributionError(
            "err_var must be positive; use the point-mass branch for perfect CSI"
        )
    gamma = np.asarray(gamma, dtype=float)
    if np.any(gamma < 0.0):
        raise ValueError("gamma must be nonnegative")
    root = np.sqrt(gamma * h_hat2)
    expo = -(gamma + h_hat2 - 2.0 * root) / err_var
    return np.exp(expo) * i0e(2.0 * root / err_var) / err_var


@lru_cache(maxsize=8)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _amp_pdf(u, amp, err_var):
    # density of the conditional amplitude (Rician), u = sqrt(gamma)
    return 2.0 * u / err_var * np.exp(-((u - amp) ** 2) / err_var) * i0e(
        2.0 * amp * u / err_var
    )


def cond_cdf_g2(q, g_hat2, err_var, n_nodes: int = QUAD_NODES):
    """Conditional CDF Pr(true power <= q | estimate power).

    Quadrature of the conditional density in amplitude space over its
    effective support.  Vectorized over broadcastable ``q`` and ``g_hat2``.
    """
    if err_var < 0.0:
        raise ValueError("err_var must be nonnegative")
    q = np.asarray(q, dtype=float)
    a2 = np.asarray(g_hat2, dtype=float)
    if err_var == 0.0:
        return np.where(q >= a2, 1.0, 0.0)

    q, a2 = np.broadcast_arrays(q, a2)
    sig = np.sqrt(err_var)
    amp = np.sqrt(a2)
    lo = np.maximum(amp - _SPAN * sig, 0.0)
    hi = amp + _SPAN * sig
    ub = np.minimum(np.sqrt(np.maximum(q, 0.0)), hi)

    x, w = _leggauss(n_nodes)
    half = 0.5 * (ub - lo)
    mid = 0.5 * (ub + lo)
    u = mid[..., None] + half[..., None] * x
    vals = _amp_pdf(u, amp[..., None], err_var)
    cdf = np.einsum("...j,j->...", vals, w) * half
    cdf = np.where(ub <= lo, 0.0, np.clip(cdf, 0.0, 1.0))
    return cdf if cdf.shape else float(cdf)


def cond_quantile_g2(p, g_hat2, err_var, tol: float = 1e-8):
    """Conditional quantile of the true power given the estimate power.

    Inverts :func:`cond_cdf_g2` by bisection on a bracket that provably
    contains all mass; for ``err_var`` 0 the law is a point mass at the
    estimate and the quantile is the estimate for every p.
    """
    p = np.asarray(p, dtype=float)
    if np.any((p <= 0.0) | (p >= 1.0)):
        raise ValueError("p must lie strictly inside (0, 1)")
    a2 = np.asarray(g_hat2, dtype=float)
    if err_var < 0.0:
        raise ValueError("err_var must be nonnegative")
    if err_var == 0.0:
        out = np.broadcast_arrays(p, a2)[1].copy()
        return out if out.shape else float(out)

    p, a2 = np.broadcast_arrays(p, a2)
    shape = p.shape
    p = np.atleast_1d(p).ravel()
    a2 = np.atleast_1d(a2).ravel()
    sig = np.sqrt(err_var)
    amp = np.sqrt(a2)
    lo = np.maximum(amp - _SPAN * sig, 0.0) ** 2
    hi = (amp + _SPAN * sig) ** 2
    # bisect in power space; the CDF is strictly increasing on the bracket.
    # Only still-open rows are evaluated each sweep.
    open_rows = np.arange(p.size)
    for _ in range(200):
        mid = 0.5 * (lo[open_rows] + hi[open_rows])
        below = cond_cdf_g2(mid, a2[open_rows], err_var, n_nodes=96) < p[open_rows]
        lo[open_rows] = np.where(below, mid, lo[open_rows])
        hi[open_rows] = np.where(below, hi[open_rows], mid)
        still = (hi[open_rows] - lo[open_rows]) > tol
        open_rows = open_rows[still]
        if open_rows.size == 0:
            break
    out = 0.5 * (lo + hi)
    if shape == ():
        return float(out[0])
    return out.reshape(shape)


def conditional_nodes(h_hat2, err_var, n_nodes: int = QUAD_NODES):
    """Quadrature table for expectations against the conditional power law.

    Returns ``(gamma, w)`` with one row per entry of ``h_hat2`` such that
    ``sum_j w[i, j] * k(gamma[i, j])`` approximates E[k(power) | estimate i].
    Weights include the conditional density, so each row sums to 1 up to
    truncation error.  For ``err_var`` 0 the law is a point mass and a single
    unit-weight node at the estimate is returned.
    """
    a2 = np.atleast_1d(np.asarray(h_hat2, dtype=float))
    if err_var < 0.0:
        raise ValueError("err_var must be nonnegative")
    if err_var == 0.0:
        return a2[:, None].copy(), np.ones((a2.size, 1))

    sig = np.sqrt(err_var)
    amp = np.sqrt(a2)
    lo = np.maximum(amp - _SPAN * sig, 0.0)
    hi = amp + _SPAN * sig
    x, w = _leggauss(n_nodes)
    half = 0.5 * (hi - lo)
    u = 0.5 * (hi + lo)[:, None] + half[:, None] * x
    weights = _amp_pdf(u, amp[:, None], err_var) * (half[:, None] * w)
    return u**2, weights
