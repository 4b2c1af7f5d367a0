"""Discount schedules and the discount ratios that restore prompt truthfulness.

A discounted mechanism pays k(t) * S(p, x) for the prediction made at
counter t, with k positive and weakly decreasing between resets. Sliding
the payment weight between a player's early and late slots changes the
deviation calculus: Alice's gain from shifting her report by c becomes

    k(t1) * [forfeited first-slot accuracy] - k(t2) * [harvested influence
    on the pooled report],

so truth-telling is restored exactly when k(t1)/k(t2) is at least the
supremum over shifts of the influence/forfeit ratio. ``required_ratio_log``
evaluates the closed form of that supremum for the logarithmic rule;
``required_ratio_numeric`` computes it by search for either rule.

``loss_bound`` gives the market-maker exposure of a discounted scoring
market: each reset opens a fresh epoch whose worst-case cost is
-k(epoch start) * S(prior, prior).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .beliefs import SignalModel, signal_shift_coefficients
from .errors import DiscountIneffectiveError, ValidationError
from .scoring import NormalBelief, ScoringRule, expected_score

__all__ = [
    "DiscountSchedule",
    "SearchGrid",
    "schedule_eval",
    "required_ratio_log",
    "required_ratio_numeric",
    "loss_bound",
    "nonpositivity_shift",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)

# Loss bounds scale with the number of epochs, so runaway reset lists are a
# configuration error, not a modeling choice.
_MAX_RESETS = 64

_KINDS = ("constant", "geometric_by_count", "piecewise")

# Relative growth between the last two grid decades that flags an unbounded
# deviation-ratio and hence an ineffective discount.
_GROWTH_RTOL = 1e-9

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class DiscountSchedule:
    """Payment weight k(t) on a prediction counter t = 0, 1, 2, ...

    kind:
        ``constant``            k stays at its level between resets.
        ``geometric_by_count``  k decays by ``decay`` per prediction.
        ``piecewise``           level steps only at the configured resets.
    k0:
        Level at t = 0.
    decay:
        Per-prediction factor in (0, 1]; must be 1 for the non-geometric
        kinds.
    resets:
        Ordered (counter, new_k) pairs; at each counter the level restarts
        at new_k. Counters are >= 1 and strictly increasing.
    """

    kind: str
    k0: float
    decay: float = 1.0
    resets: tuple[tuple[int, float], ...] = field(default=())

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValidationError(f"unknown schedule kind {self.kind!r}")
        if not (isinstance(self.k0, (int, float)) and math.isfinite(self.k0) and self.k0 > 0):
            raise ValidationError("k0 must be a positive finite real")
        if not (isinstance(self.decay, (int, float)) and 0.0 < self.decay <= 1.0):
            raise ValidationError("decay must lie in (0, 1]")
        if self.kind != "geometric_by_count" and self.decay != 1.0:
            raise ValidationError(f"kind {self.kind!r} does not decay; set decay=1")
        resets = tuple((int(c), float(k)) for c, k in self.resets)
        object.__setattr__(self, "resets", resets)
        if len(resets) > _MAX_RESETS:
            raise ValidationError(f"at most {_MAX_RESETS} resets are supported")
        last = 0
        for counter, new_k in resets:
            if counter <= last:
                raise ValidationError("reset counters must be >= 1 and strictly increasing")
            if not (math.isfinite(new_k) and new_k > 0):
                raise ValidationError("reset levels must be positive finite reals")
            last = counter

    def to_config(self) -> dict:
        """Plain-data form for embedding in market configs and trade logs."""
        return {
            "kind": self.kind,
            "k0": self.k0,
            "decay": self.decay,
            "resets": [[c, k] for c, k in self.resets],
        }

    @classmethod
    def from_config(cls, record: Mapping) -> "DiscountSchedule":
        try:
            return cls(
                kind=record["kind"],
                k0=record["k0"],
                decay=record.get("decay", 1.0),
                resets=tuple((c, k) for c, k in record.get("resets", ())),
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed schedule record: {exc}") from exc


def schedule_eval(schedule: DiscountSchedule, t: int) -> float:
    """k(t) for an integer prediction counter t >= 0."""
    if not isinstance(t, int) or isinstance(t, bool):
        raise ValidationError("counter t must be an integer")
    if t < 0:
        raise ValidationError("counter t must be non-negative")
    level, anchor = schedule.k0, 0
    for counter, new_k in schedule.resets:
        if counter > t:
            break
        level, anchor = new_k, counter
    if schedule.kind == "geometric_by_count":
        return level * schedule.decay ** (t - anchor)
    return level


def required_ratio_log(model: SignalModel) -> float:
    """Minimal early/late payment ratio making the log-rule game truthful.

    Closed form

        K_min = (tau_A + tau_C) g^2
                / ( tau_A [ (1-rho^2) g^2 + (1-rho^2)^2 (tau_B + tau_C) ] ),
        g = sqrt(tau_A) - rho sqrt(tau_B),

    the supremum over shifts of the influence/forfeit ratio (which for the
    log rule is shift-independent). Values <= 1 mean the undiscounted game
    is already truthful. On the locus g = 0 the shift cannot move the
    pooled report and K_min = 0.

    Raises
    ------
    DiscountIneffectiveError
        If |rho| = 1: no finite ratio restores truthfulness.
    """
    if model.degenerate:
        raise DiscountIneffectiveError(
            "|rho| = 1: no finite discount ratio restores truthfulness"
        )
    ta, tb, tc, rho = model.tau_a, model.tau_b, model.tau_c, model.rho
    gap = math.sqrt(ta) - rho * math.sqrt(tb)
    one_minus_r2 = 1.0 - rho * rho
    numer = (ta + tc) * gap * gap
    denom = ta * (one_minus_r2 * gap * gap + one_minus_r2 * one_minus_r2 * (tb + tc))
    return numer / denom


@dataclass(frozen=True)
class SearchGrid:
    """Log-spaced search domain for the deviation-ratio supremum."""

    c_min: float = 1e-6
    c_max: float = 1e3
    points_per_decade: int = 12
    refine_iters: int = 80

    def __post_init__(self) -> None:
        if not (0.0 < self.c_min < self.c_max and math.isfinite(self.c_max)):
            raise ValidationError("require 0 < c_min < c_max < inf")
        if self.points_per_decade < 2:
            raise ValidationError("points_per_decade must be at least 2")
        if self.refine_iters < 0:
            raise ValidationError("refine_iters must be non-negative")

    def magnitudes(self) -> list[float]:
        lo, hi = math.log10(self.c_min), math.log10(self.c_max)
        n = max(2, int(round((hi - lo) * self.points_per_decade)) + 1)
        step = (hi - lo) / (n - 1)
        return [10.0 ** (lo + i * step) for i in range(n)]


def _sup_ratio(
    ratio_fn: Callable[[float], float],
    grid: SearchGrid,
    limit_candidates: Sequence[float],
) -> float:
    """Supremum of an even, smooth ratio over +/- the grid magnitudes.

    Explicit limit values (c -> 0 and c -> inf) enter as candidates beside
    the grid; the best grid point is polished by golden-section search on
    the log-magnitude axis. Sustained growth across the last two decades
    of the grid means the ratio is unbounded.
    """
    mags = grid.magnitudes()
    best_val = -math.inf
    best_sign, best_idx = 1.0, 0
    values: dict[tuple[float, int], float] = {}
    for sign in (1.0, -1.0):
        for i, m in enumerate(mags):
            v = ratio_fn(sign * m)
            values[(sign, i)] = v
            if v > best_val:
                best_val, best_sign, best_idx = v, sign, i

    hi_exp = math.log10(grid.c_max)
    for sign in (1.0, -1.0):
        last = max(
            v for (s, i), v in values.items()
            if s == sign and mags[i] > 10.0 ** (hi_exp - 1)
        )
        prev = max(
            v
            for (s, i), v in values.items()
            if s == sign and 10.0 ** (hi_exp - 2) < mags[i] <= 10.0 ** (hi_exp - 1)
        )
        if last > prev * (1.0 + _GROWTH_RTOL) and last > prev + _GROWTH_RTOL:
            raise DiscountIneffectiveError(
                "deviation ratio keeps growing at the top of the search grid; "
                "no finite discount ratio restores truthfulness"
            )

    # Golden-section polish on x = log10|c| between the best point's neighbors.
    lo_i, hi_i = max(best_idx - 1, 0), min(best_idx + 1, len(mags) - 1)
    a, b = math.log10(mags[lo_i]), math.log10(mags[hi_i])
    f = lambda x: ratio_fn(best_sign * 10.0**x)
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(grid.refine_iters):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
    polished = max(f1, f2)

    return max([best_val, polished, *limit_candidates])


def required_ratio_numeric(
    rule: ScoringRule, model: SignalModel, search: SearchGrid | None = None
) -> float:
    """Minimal early/late ratio by direct search over the deviation shift.

    The ratio at shift c is (pooled-report divergence caused by the shift)
    / (first-slot divergence forfeited by it). For the log rule the ratio
    is shift-free. For the quadratic rule the c -> 0 limit is the curvature
    quotient (tau_pool a_h)^2 / (tau_single a_g)^2 and the c -> inf tail is
    tau_pool/tau_single; the grid is swept in units of the ratio's
    saturation scale, so the default grid covers the knee for any model.
    The supremum over the search grid plus the applicable limits is
    returned.

    Raises
    ------
    DiscountIneffectiveError
        If |rho| = 1, or the ratio is still growing at the top of the grid.
    """
    if model.degenerate:
        raise DiscountIneffectiveError(
            "|rho| = 1: no finite discount ratio restores truthfulness"
        )
    if search is None:
        search = SearchGrid()
    alpha_g, alpha_h = signal_shift_coefficients(model)
    ta, tb, tc, rho = model.tau_a, model.tau_b, model.tau_c, model.rho
    cross = rho * math.sqrt(ta * tb)
    tau_single = ta + tc
    tau_pool = (ta - 2.0 * cross + tb) / (1.0 - rho * rho) + tc

    if alpha_h == 0.0:
        # The shift never reaches the pooled report: the ratio is
        # identically zero and no discount is needed.
        return 0.0

    zero_limit = (tau_pool * alpha_h) ** 2 / (tau_single * alpha_g) ** 2

    if rule is ScoringRule.LOGARITHMIC:

        def ratio(c: float) -> float:
            num = 0.5 * tau_pool * (c * alpha_h) ** 2
            den = 0.5 * tau_single * (c * alpha_g) ** 2
            return num / den

        # The quotient is shift-free; the limit candidate equals it and the
        # grid sweep is a consistency pass.
        const = tau_pool * alpha_h**2 / (tau_single * alpha_g**2)
        return _sup_ratio(ratio, search, (const,))

    def ratio(c: float) -> float:
        num = tau_pool * -math.expm1(-0.25 * tau_pool * (c * alpha_h) ** 2)
        den = tau_single * -math.expm1(-0.25 * tau_single * (c * alpha_g) ** 2)
        return num / den

    tail_limit = tau_pool / tau_single
    # Sweep shifts in units of the slower saturation scale: with tiny shift
    # coefficients the exponential knee sits far beyond any fixed raw-c
    # grid, and the climb toward the finite tail would otherwise trip the
    # unbounded-growth check.
    c_unit = max(
        2.0 / (math.sqrt(tau_pool) * abs(alpha_h)),
        2.0 / (math.sqrt(tau_single) * abs(alpha_g)),
    )
    return _sup_ratio(lambda u: ratio(u * c_unit), search, (zero_limit, tail_limit))


def loss_bound(
    schedule: DiscountSchedule, prior: NormalBelief, rule: ScoringRule
) -> float:
    """Worst-case expected market-maker loss under the schedule.

    Each epoch (start plus every reset) contributes
    -k(epoch start) * S(prior, prior); within an epoch k only falls, so the
    epoch's exposure is set by its opening weight.

    Raises
    ------
    ValidationError
        If S(prior, prior) > 0: the rule is not non-positive at this prior
        and the bound is void; apply ``nonpositivity_shift`` first.
    """
    base = expected_score(rule, prior, prior)
    if base > 0.0:
        raise ValidationError(
            "scoring rule is positive at the prior; shift scores by "
            "nonpositivity_shift() before bounding losses"
        )
    weight = schedule.k0 + sum(new_k for _, new_k in schedule.resets)
    return -base * weight


def nonpositivity_shift(rule: ScoringRule, max_precision: float) -> float:
    """Smallest constant whose subtraction keeps scores <= 0.

    The score of a normal belief is maximized at its mean; over beliefs of
    precision up to ``max_precision`` the peak is

        log rule:        max(0, log sqrt(tau / (2 pi)))
        quadratic rule:  max(0, (sqrt(2) - 1/2) sqrt(tau / pi) - 1)

    both attained at tau = max_precision. Returns 0 when scores are already
    non-positive.
    """
    if not (math.isfinite(max_precision) and max_precision > 0):
        raise ValidationError("max_precision must be a positive finite real")
    tau = max_precision
    if rule is ScoringRule.LOGARITHMIC:
        peak = 0.5 * math.log(tau / (2.0 * math.pi))
    else:
        peak = (math.sqrt(2.0) - 0.5) * math.sqrt(tau / math.pi) - 1.0
    return max(0.0, peak)
