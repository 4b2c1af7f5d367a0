"""Adaptive Gauss-Legendre quadrature for smooth one-dimensional integrands.

Internal plumbing: panels are bisected until the 21-node estimate agrees with
the sum of the two half-panel estimates. All integrands in this package are
products of Gaussians and polynomials/logs of Gaussians, so convergence is
fast and the node count stays small.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import NumericError

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(21)

_MAX_PANELS = 4096


def _panel(f: Callable[[np.ndarray], np.ndarray], lo: float, hi: float) -> float:
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    vals = f(mid + half * _NODES)
    return float(half * np.dot(_WEIGHTS, vals))


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    tol: float = 1e-10,
) -> float:
    """Integrate a vectorized integrand over [lo, hi] to absolute/relative tol.

    Parameters
    ----------
    f : callable
        Maps a numpy array of abscissae to integrand values, elementwise.
    lo, hi : float
        Finite integration bounds.
    tol : float
        Per-panel acceptance tolerance; the panel error estimate is the
        difference between the whole-panel rule and its two-half refinement.

    Returns
    -------
    float
        The integral estimate.

    Raises
    ------
    NumericError
        If the panel budget is exhausted before every panel converges, or the
        integrand produces non-finite values.
    """
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise NumericError("quadrature bounds must be finite")
    total = 0.0
    stack = [(float(lo), float(hi), _panel(f, lo, hi))]
    panels = 0
    while stack:
        a, b, whole = stack.pop()
        panels += 1
        if panels > _MAX_PANELS:
            raise NumericError("quadrature did not converge within the panel budget")
        if not np.isfinite(whole):
            raise NumericError("integrand returned a non-finite value")
        mid = 0.5 * (a + b)
        left = _panel(f, a, mid)
        right = _panel(f, mid, b)
        refined = left + right
        if abs(refined - whole) <= max(tol, tol * abs(refined)):
            total += refined
        else:
            stack.append((a, mid, left))
            stack.append((mid, b, right))
    return total
