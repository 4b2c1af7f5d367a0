"""Independent reference computations for the test suite.

Everything here deliberately avoids the package's own numerics: expectations
run through QUADPACK, Gaussian conditioning through dense linear algebra (or
generalized least squares when the prior is flat), bin masses through the
stdlib error function, and schedule evaluation through direct recursion.
Agreement between these routes and the library is what the tests assert.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def pdf(mean: float, precision: float, x: float) -> float:
    sd = 1.0 / math.sqrt(precision)
    u = (x - mean) / sd
    return math.exp(-0.5 * u * u) / (sd * _SQRT_2PI)


def log_pdf(mean: float, precision: float, x: float) -> float:
    sd = 1.0 / math.sqrt(precision)
    u = (x - mean) / sd
    return -0.5 * u * u - math.log(sd * _SQRT_2PI)


def _span(p_mean, p_prec, q_mean, q_prec, sigmas=13.0):
    wide = max(1.0 / math.sqrt(p_prec), 1.0 / math.sqrt(q_prec))
    lo = min(p_mean, q_mean) - sigmas * wide
    hi = max(p_mean, q_mean) + sigmas * wide
    return lo, hi


def quad_selfdot(mean: float, precision: float) -> float:
    """integral of the squared density, by QUADPACK."""
    lo, hi = _span(mean, precision, mean, precision)
    val, _ = integrate.quad(lambda x: pdf(mean, precision, x) ** 2, lo, hi,
                            epsabs=1e-14, epsrel=1e-12, limit=200)
    return val


def quad_expected_score(rule: str, p_mean: float, p_prec: float,
                        q_mean: float, q_prec: float) -> float:
    """E_{x ~ q}[S(p, x)] by QUADPACK; rule is "logarithmic" or "quadratic"."""
    lo, hi = _span(p_mean, p_prec, q_mean, q_prec)
    pts = [p_mean, q_mean]
    if rule == "logarithmic":
        f = lambda x: pdf(q_mean, q_prec, x) * log_pdf(p_mean, p_prec, x)
        val, _ = integrate.quad(f, lo, hi, epsabs=1e-13, epsrel=1e-12,
                                limit=200, points=pts)
        return val
    if rule == "quadratic":
        f = lambda x: pdf(q_mean, q_prec, x) * 2.0 * pdf(p_mean, p_prec, x)
        val, _ = integrate.quad(f, lo, hi, epsabs=1e-13, epsrel=1e-12,
                                limit=200, points=pts)
        return val - quad_selfdot(p_mean, p_prec) - 1.0
    raise ValueError(rule)


def quad_divergence(rule: str, p_mean: float, p_prec: float,
                    q_mean: float, q_prec: float) -> float:
    """E_{x ~ q}[S(p, x) - S(q, x)] as a single integral.

    Integrating the difference directly keeps the relative accuracy of small
    divergences, which a difference of two O(1) expectations would destroy
    by cancellation. Resolution floor: values below ~1e-12 in magnitude are
    dominated by the quadrature's own error.
    """
    lo, hi = _span(p_mean, p_prec, q_mean, q_prec)
    pts = [p_mean, q_mean]
    if rule == "logarithmic":
        f = lambda x: pdf(q_mean, q_prec, x) * (
            log_pdf(p_mean, p_prec, x) - log_pdf(q_mean, q_prec, x))
        val, _ = integrate.quad(f, lo, hi, epsabs=1e-14, epsrel=1e-12,
                                limit=200, points=pts)
        return val
    if rule == "quadratic":
        f = lambda x: pdf(q_mean, q_prec, x) * 2.0 * (
            pdf(p_mean, p_prec, x) - pdf(q_mean, q_prec, x))
        val, _ = integrate.quad(f, lo, hi, epsabs=1e-14, epsrel=1e-12,
                                limit=200, points=pts)
        return val - quad_selfdot(p_mean, p_prec) + quad_selfdot(q_mean, q_prec)
    raise ValueError(rule)


def noise_covariance(tau_a: float, tau_b: float, rho: float) -> np.ndarray:
    cross = rho / math.sqrt(tau_a * tau_b)
    return np.array([[1.0 / tau_a, cross], [cross, 1.0 / tau_b]])


def gls_posterior(tau_a, tau_b, tau_c, rho, c0, a0, b0=None):
    """(mean, precision) of the outcome given the observations.

    Treats the observations as y = outcome + correlated noise and combines
    the generalized-least-squares estimate with the (possibly flat) prior.
    Valid for every tau_c >= 0.
    """
    if b0 is None:
        obs_prec = np.array([[tau_a]])
        y = np.array([a0])
    else:
        obs_prec = np.linalg.inv(noise_covariance(tau_a, tau_b, rho))
        y = np.array([a0, b0])
    ones = np.ones(len(y))
    info = float(ones @ obs_prec @ ones)
    precision = tau_c + info
    mean = (tau_c * c0 + float(ones @ obs_prec @ y)) / precision
    return mean, precision


def conditioned_posterior(tau_a, tau_b, tau_c, rho, c0, a0, b0=None):
    """(mean, precision) by dense covariance conditioning; needs tau_c > 0.

    Builds the joint covariance of (observations, outcome) and conditions
    the outcome on the observed block. A formulation independent of the
    precision-space route in gls_posterior.
    """
    if tau_c <= 0.0:
        raise ValueError("covariance conditioning needs a proper prior")
    v = 1.0 / tau_c
    if b0 is None:
        cov = np.array([[v + 1.0 / tau_a, v], [v, v]])
        y = np.array([a0])
    else:
        cross = rho / math.sqrt(tau_a * tau_b)
        cov = np.array([
            [v + 1.0 / tau_a, v + cross, v],
            [v + cross, v + 1.0 / tau_b, v],
            [v, v, v],
        ])
        y = np.array([a0, b0])
    k = len(y)
    s_oo = cov[:k, :k]
    s_lo = cov[k, :k]
    gain = np.linalg.solve(s_oo, s_lo)
    mean = c0 + float(gain @ (y - c0))
    var = cov[k, k] - float(gain @ s_lo)
    return mean, 1.0 / var


def recursive_schedule_level(kind, k0, decay, resets, t):
    """Discount level at integer t by direct recursion over t-1."""
    lookup = dict(resets)
    if t in lookup:
        return lookup[t]
    if t == 0:
        return k0
    prev = recursive_schedule_level(kind, k0, decay, resets, t - 1)
    return prev * decay if kind == "geometric_by_count" else prev


def enumerate_adjacent_pairs(slots):
    """Brute-force (expert, first, second, between-set) for every adjacent
    pair of same-expert slots in a forum schedule."""
    out = []
    for i, (t1, expert) in enumerate(slots):
        for t2, other in slots[i + 1:]:
            if other != expert:
                continue
            between = frozenset(
                name for tt, name in slots if t1 < tt < t2 and name != expert)
            out.append((expert, t1, t2, between))
            break
    return sorted(out)


def erf_bin_masses(mean, precision, edges):
    """Bin probabilities from the stdlib error function.

    Accurate for |z| up to ~5 on both sides; tails beyond that cancel to
    noise, so tests only compare bins with non-negligible mass.
    """
    sd = 1.0 / math.sqrt(precision)

    def cdf(x):
        return 0.5 * (1.0 + math.erf((x - mean) / (sd * math.sqrt(2.0))))

    return [cdf(b) - cdf(a) for a, b in zip(edges[:-1], edges[1:])]
