"""Proper scoring rules for one-dimensional normal beliefs.

A belief is a normal distribution N(mean, 1/precision). Two strictly proper
rules are provided:

* logarithmic: ``S(p, x) = log p(x)``
* quadratic (Brier): ``S(p, x) = 2 p(x) - p.p - 1`` where ``p.p`` is the
  squared L2 norm of the density.

Expected scores ``S(p, q) = E_{x~q} S(p, x)`` have closed forms when both
beliefs share one precision; otherwise they are computed by adaptive
quadrature over ten standard deviations of the integrating belief. The
divergence ``S(p, q) - S(q, q)`` is the propriety gap: non-positive, zero only
at p = q.

Equal-precision closed forms used throughout (tau = shared precision,
d = mean difference):

* logarithmic divergence: ``-(tau/2) d^2``
* quadratic divergence:  ``sqrt(tau/pi) (exp(-tau d^2 / 4) - 1)``

Realized scores are not non-positive for every belief: the log score is
positive wherever the density exceeds 1 (possible once tau > 2*pi) and the
quadratic score turns positive for tau above roughly 3.758. Layers that
require non-positive scores apply an affine shift; see the discounting module.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ._quadrature import integrate
from .errors import ValidationError

__all__ = [
    "NormalBelief",
    "ScoringRule",
    "density",
    "selfdot",
    "score",
    "expected_score",
    "divergence",
]

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class NormalBelief:
    """A normal belief N(mean, 1/precision) over a real outcome.

    Parameters
    ----------
    mean : float
        Location, in outcome units.
    precision : float
        Inverse variance; must be positive and finite.
    """

    mean: float
    precision: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.mean)):
            raise ValidationError(f"belief mean must be finite, got {self.mean}")
        if not (self.precision > 0.0 and math.isfinite(self.precision)):
            raise ValidationError(
                f"belief precision must be positive and finite, got {self.precision}"
            )

    @property
    def sigma(self) -> float:
        """Standard deviation, 1/sqrt(precision)."""
        return 1.0 / math.sqrt(self.precision)

    @property
    def variance(self) -> float:
        return 1.0 / self.precision


class ScoringRule(enum.Enum):
    """The two supported strictly proper scoring rules."""

    LOGARITHMIC = "logarithmic"
    QUADRATIC = "quadratic"


def density(belief: NormalBelief, x: float) -> float:
    """Density of the belief at x: sqrt(tau/2pi) exp(-tau (x-mu)^2 / 2)."""
    tau = belief.precision
    z = x - belief.mean
    return math.sqrt(tau / (2.0 * math.pi)) * math.exp(-0.5 * tau * z * z)


def _log_density(belief: NormalBelief, x: float) -> float:
    tau = belief.precision
    z = x - belief.mean
    return 0.5 * (math.log(tau) - _LOG_2PI) - 0.5 * tau * z * z


def selfdot(belief: NormalBelief) -> float:
    """Squared L2 norm of the density, ``integral of p(y)^2 dy``.

    For N(mu, 1/tau) this is the normal convolution identity
    ``sqrt(tau) / (2 sqrt(pi))``.
    """
    return 0.5 * math.sqrt(belief.precision / math.pi)


def score(rule: ScoringRule, p: NormalBelief, x: float) -> float:
    """Realized score of prediction p at outcome x.

    The logarithmic score is computed from the log-density directly, so it
    stays finite for any finite x and underflows to -inf only when the
    quadratic exponent overflows; -inf is propagated, never clamped.
    """
    if rule is ScoringRule.LOGARITHMIC:
        return _log_density(p, x)
    return 2.0 * density(p, x) - selfdot(p) - 1.0


def expected_score(
    rule: ScoringRule, predicted: NormalBelief, truth: NormalBelief
) -> float:
    """Score expectation ``E_{x~truth} score(rule, predicted, x)``.

    Closed form when the two precisions are equal; otherwise adaptive
    quadrature over truth.mean +/- 10 truth.sigma at tolerance 1e-10.

    Raises
    ------
    NumericError
        If the quadrature fails to converge.
    """
    if predicted.precision == truth.precision:
        return _self_score(rule, truth) + divergence(rule, predicted, truth)
    lo = truth.mean - 10.0 * truth.sigma
    hi = truth.mean + 10.0 * truth.sigma
    tq, mq = truth.precision, truth.mean
    tp, mp = predicted.precision, predicted.mean
    q_norm = math.sqrt(tq / (2.0 * math.pi))
    if rule is ScoringRule.LOGARITHMIC:
        lp_const = 0.5 * (math.log(tp) - _LOG_2PI)

        def integrand(xs: np.ndarray) -> np.ndarray:
            q = q_norm * np.exp(-0.5 * tq * (xs - mq) ** 2)
            logp = lp_const - 0.5 * tp * (xs - mp) ** 2
            return q * logp

    else:
        p_norm = math.sqrt(tp / (2.0 * math.pi))
        offset = selfdot(predicted) + 1.0

        def integrand(xs: np.ndarray) -> np.ndarray:
            q = q_norm * np.exp(-0.5 * tq * (xs - mq) ** 2)
            p = p_norm * np.exp(-0.5 * tp * (xs - mp) ** 2)
            return q * (2.0 * p - offset)

    return integrate(integrand, lo, hi, tol=1e-10)


def _self_score(rule: ScoringRule, belief: NormalBelief) -> float:
    """Closed-form S(p, p): the rule's expected score under truthful reporting."""
    tau = belief.precision
    if rule is ScoringRule.LOGARITHMIC:
        return 0.5 * (math.log(tau) - _LOG_2PI) - 0.5
    return 0.5 * math.sqrt(tau / math.pi) - 1.0


def divergence(
    rule: ScoringRule, predicted: NormalBelief, truth: NormalBelief
) -> float:
    """Propriety gap ``expected_score(p, q) - expected_score(q, q)``.

    Equal precisions use the closed forms quoted in the module docstring;
    unequal precisions fall back to the expected-score difference. Always
    <= 0, with equality iff the beliefs coincide.
    """
    if predicted.precision == truth.precision:
        tau = truth.precision
        d = predicted.mean - truth.mean
        if rule is ScoringRule.LOGARITHMIC:
            return -0.5 * tau * d * d
        return math.sqrt(tau / math.pi) * (math.expm1(-0.25 * tau * d * d))
    return expected_score(rule, predicted, truth) - expected_score(rule, truth, truth)
