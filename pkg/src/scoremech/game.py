"""Alice-Bob-Alice game engine.

The scored timeline is: the market opens at the prior (counter 0), Alice
predicts (counter 1), Bob predicts (counter 2), Alice corrects (counter 3),
the outcome x = lambda is revealed. Each prediction at counter t is paid
the discounted increment k(t) S(p_t, x) - k(t') S(p_t', x) against the
standing prediction from counter t'. Alice's only deviation lever is a
scalar shift c added to the signal she pretends to have received; Bob
always updates truthfully on her announcement, and by default Alice's
correction pools her true signal with the one Bob's report reveals.

Monte-Carlo estimates use a counter-based generator keyed by (seed, rollout
index): rollout i of a batch reproduces the standalone rollout with that
index bit-for-bit, and paired designs reuse the same worlds across arms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.random import Generator, Philox

from .beliefs import (
    SignalModel,
    _pair_weights,
    posterior_pair,
    posterior_single,
    signal_shift_coefficients,
)
from .discounting import DiscountSchedule, schedule_eval
from .errors import ValidationError
from .scoring import NormalBelief, ScoringRule, score

__all__ = [
    "RewardBreakdown",
    "GameRollout",
    "ForumSchedule",
    "ABASubgame",
    "Scenario",
    "BestResponse",
    "BatchRewards",
    "draw_world",
    "draw_worlds",
    "rollout",
    "rollout_batch",
    "analytic_gain",
    "deviation_gain",
    "best_response",
    "reduce_schedule",
    "run_mechanism",
]

_SEED_LIMIT = 1 << 64

# Slot counters of the scored timeline (0 is the prior / market open).
_T_PRIOR, _T_FIRST, _T_POOL, _T_CORRECT = 0, 1, 2, 3

_MECHANISMS = ("discounted_msr", "group", "single")


@dataclass(frozen=True)
class RewardBreakdown:
    """Realized totals for one rollout.

    pi_a + pi_b always telescopes to k3 S(final, x) - k0 S(prior, x), which
    is free of Alice's pretended signal; ``zero_sum_residual`` is the
    float defect of that identity and stays below 1e-10.
    """

    pi_a: float
    pi_b: float
    zero_sum_residual: float


@dataclass(frozen=True)
class GameRollout:
    """One sampled play. ``lam`` is the latent variable and the revealed outcome."""

    lam: float
    a0: float
    b0: float
    deviation_c: float
    rewards: RewardBreakdown


@dataclass(frozen=True)
class ForumSchedule:
    """Fixed speaking order of a public forecasting forum on [0, horizon]."""

    slots: tuple[tuple[int, str], ...]
    horizon: int

    def __post_init__(self) -> None:
        slots = tuple((int(t), str(e)) for t, e in self.slots)
        object.__setattr__(self, "slots", slots)
        if not slots:
            raise ValidationError("a forum schedule needs at least one slot")
        times = [t for t, _ in slots]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValidationError("slot times must be strictly increasing")
        if times[0] < 0 or times[-1] > self.horizon:
            raise ValidationError("slot times must lie in [0, horizon]")


@dataclass(frozen=True)
class ABASubgame:
    """A repeated speaker's adjacent slot pair, with the interim speakers
    rolled into a single composite opponent."""

    expert: str
    first_slot: int
    second_slot: int
    bob_set: frozenset[str]


class BestResponse(NamedTuple):
    c_star: float
    gain: float
    bound_hit: bool


@dataclass(frozen=True)
class Scenario:
    """Model, payment schedule, and strategy profile for ``run_mechanism``.

    deviation_c shifts Alice's pretended first-slot signal. With
    ``correct_at_end`` she pools her true signal at the correction slot;
    otherwise she stands by the pretended one. ``freeloader`` appends an
    expert who repeats the standing prediction after the correction.
    """

    model: SignalModel
    rule: ScoringRule
    schedule: DiscountSchedule
    deviation_c: float = 0.0
    correct_at_end: bool = True
    freeloader: bool = False

    def __post_init__(self) -> None:
        if not math.isfinite(self.deviation_c):
            raise ValidationError("deviation_c must be finite")


def _normalize_seed(seed: int) -> int:
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ValidationError("seed must be an integer")
    if not (0 <= seed < _SEED_LIMIT):
        raise ValidationError("seed must lie in [0, 2^64)")
    return seed


def _require_sampleable(model: SignalModel) -> None:
    if model.tau_c <= 0.0:
        raise ValidationError(
            "tau_c must be positive to sample the latent outcome; use a "
            "small positive tau_c to approximate an uninformative prior"
        )


def draw_world(model: SignalModel, seed: int, index: int = 0) -> tuple[float, float, float]:
    """Sample (lambda, a0, b0) for rollout ``index`` of stream ``seed``."""
    _require_sampleable(model)
    seed = _normalize_seed(seed)
    if index < 0:
        raise ValidationError("index must be non-negative")
    z = Generator(Philox(key=[seed, index])).standard_normal(3)
    lam, a0, b0 = _world_from_noise(model, z[0], z[1], z[2])
    return float(lam), float(a0), float(b0)


def _world_from_noise(model: SignalModel, z0, z1, z2):
    lam = model.c0 + z0 / math.sqrt(model.tau_c)
    a0 = lam + z1 / math.sqrt(model.tau_a)
    rho = model.rho
    b0 = lam + (rho * z1 + math.sqrt(1.0 - rho * rho) * z2) / math.sqrt(model.tau_b)
    return lam, a0, b0


def draw_worlds(
    model: SignalModel, seed: int, n: int, start_index: int = 0
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized worlds for indices start_index .. start_index + n - 1.

    Row i agrees bit-for-bit with draw_world(model, seed, start_index + i).
    """
    _require_sampleable(model)
    seed = _normalize_seed(seed)
    if n <= 0:
        raise ValidationError("n must be positive")
    z = np.empty((n, 3))
    for i in range(n):
        z[i] = Generator(Philox(key=[seed, start_index + i])).standard_normal(3)
    return _world_from_noise(model, z[:, 0], z[:, 1], z[:, 2])


def _score_array(rule: ScoringRule, mu, tau: float, x):
    """Score of N(mu, 1/tau) at x, vectorized over mu and x.

    Mirrors the scalar ``scoring.score`` expressions op for op; the log
    rule reproduces it bit-for-bit, the quadratic rule to exp roundoff.
    """
    z = x - mu
    if rule is ScoringRule.LOGARITHMIC:
        return 0.5 * (math.log(tau) - math.log(2.0 * math.pi)) - 0.5 * tau * z * z
    dens = math.sqrt(tau / (2.0 * math.pi)) * np.exp(-0.5 * tau * z * z)
    return 2.0 * dens - 0.5 * math.sqrt(tau / math.pi) - 1.0


def _slot_weights(schedule: DiscountSchedule) -> tuple[float, float, float, float]:
    return tuple(schedule_eval(schedule, t) for t in (_T_PRIOR, _T_FIRST, _T_POOL, _T_CORRECT))


def _batch_rewards_from_worlds(model, rule, schedule, c, lam, a0, b0):
    """Vectorized reward arrays given world arrays; the deviation enters
    only through Alice's pretended signal a0 + c."""
    k0, k1, k2, k3 = _slot_weights(schedule)
    ta, tc, c0 = model.tau_a, model.tau_c, model.c0
    tau_single = ta + tc
    wa, wb, wc, denom = _pair_weights(model)
    # Mirror posterior_pair's float expression exactly so batch and scalar
    # rollouts agree bit for bit, not just to rounding.
    cross = model.rho * math.sqrt(ta * model.tau_b)
    tau_pool = (ta - 2.0 * cross + model.tau_b) / (1.0 - model.rho**2) + tc

    a_hat = a0 + c
    g_mu = (ta * a_hat + tc * c0) / tau_single
    h_hat_mu = (wa * a_hat + wb * b0 + wc * c0) / denom
    h_mu = (wa * a0 + wb * b0 + wc * c0) / denom

    s_prior = _score_array(rule, c0, tc, lam)
    s_first = _score_array(rule, g_mu, tau_single, lam)
    s_pool = _score_array(rule, h_hat_mu, tau_pool, lam)
    s_final = _score_array(rule, h_mu, tau_pool, lam)

    pi_a = k1 * s_first - k0 * s_prior + k3 * s_final - k2 * s_pool
    pi_b = k2 * s_pool - k1 * s_first
    return pi_a, pi_b, s_prior, s_final


@dataclass(frozen=True)
class BatchRewards:
    """Per-rollout reward arrays plus the prior/final score arrays the
    zero-sum identity telescopes to."""

    pi_a: np.ndarray
    pi_b: np.ndarray
    s_prior: np.ndarray
    s_final: np.ndarray


def rollout(
    model: SignalModel,
    rule: ScoringRule,
    schedule: DiscountSchedule,
    c: float,
    seed: int,
    index: int = 0,
) -> GameRollout:
    """Play one sampled game with Alice's first-slot signal shifted by c."""
    lam, a0, b0 = draw_world(model, seed, index)
    k0, k1, k2, k3 = _slot_weights(schedule)

    prior = NormalBelief(model.c0, model.tau_c)
    first = posterior_single(model, a0 + c)
    pooled = posterior_pair(model, a0 + c, b0)
    final = posterior_pair(model, a0, b0)

    s_prior = score(rule, prior, lam)
    s_first = score(rule, first, lam)
    s_pool = score(rule, pooled, lam)
    s_final = score(rule, final, lam)

    pi_a = k1 * s_first - k0 * s_prior + k3 * s_final - k2 * s_pool
    pi_b = k2 * s_pool - k1 * s_first
    residual = abs((pi_a + pi_b) - (k3 * s_final - k0 * s_prior))
    rewards = RewardBreakdown(pi_a=pi_a, pi_b=pi_b, zero_sum_residual=residual)
    return GameRollout(lam=lam, a0=a0, b0=b0, deviation_c=c, rewards=rewards)


def rollout_batch(
    model: SignalModel,
    rule: ScoringRule,
    schedule: DiscountSchedule,
    c: float,
    n: int,
    seed: int,
) -> BatchRewards:
    """Vectorized rewards for rollout indices 0 .. n-1 of stream ``seed``."""
    lam, a0, b0 = draw_worlds(model, seed, n)
    pi_a, pi_b, s_prior, s_final = _batch_rewards_from_worlds(
        model, rule, schedule, c, lam, a0, b0
    )
    return BatchRewards(pi_a=pi_a, pi_b=pi_b, s_prior=s_prior, s_final=s_final)


def analytic_gain(
    model: SignalModel, rule: ScoringRule, schedule: DiscountSchedule, c: float
) -> float:
    """Exact expected gain from shifting the first-slot signal by c.

    E[pi_a(c) - pi_a(0)] = k1 D(first) - k2 D(pooled), where D are the
    rule's divergences of the shifted posteriors from the truthful ones:
    the shift moves the first-slot mean by c a_g (forfeiting accuracy
    weighted k1) and the pooled mean by c a_h (degrading Bob's scored
    report, weighted k2). Positive values mean the lie profits.
    """
    alpha_g, alpha_h = signal_shift_coefficients(model)
    ta, tb, tc, rho = model.tau_a, model.tau_b, model.tau_c, model.rho
    cross = rho * math.sqrt(ta * tb)
    tau_single = ta + tc
    tau_pool = (ta - 2.0 * cross + tb) / (1.0 - rho * rho) + tc
    k1 = schedule_eval(schedule, _T_FIRST)
    k2 = schedule_eval(schedule, _T_POOL)
    div_first = _equal_precision_divergence(rule, tau_single, c * alpha_g)
    div_pool = _equal_precision_divergence(rule, tau_pool, c * alpha_h)
    return k1 * div_first - k2 * div_pool


def _equal_precision_divergence(rule: ScoringRule, tau: float, shift: float) -> float:
    if rule is ScoringRule.LOGARITHMIC:
        return -0.5 * tau * shift * shift
    return math.sqrt(tau / math.pi) * math.expm1(-0.25 * tau * shift * shift)


def deviation_gain(
    model: SignalModel,
    rule: ScoringRule,
    schedule: DiscountSchedule,
    c: float,
    n: int,
    seed: int,
) -> tuple[float, float]:
    """Paired Monte-Carlo estimate of E[pi_a(c) - pi_a(0)].

    Both arms replay identical (lambda, a0, b0) worlds, so at c = 0 the
    estimate is exactly (0, 0) and elsewhere the common noise cancels.
    Returns (mean, standard error).
    """
    if n < 2:
        raise ValidationError("n must be at least 2")
    lam, a0, b0 = draw_worlds(model, seed, n)
    pi_a_c, _, _, _ = _batch_rewards_from_worlds(model, rule, schedule, c, lam, a0, b0)
    pi_a_0, _, _, _ = _batch_rewards_from_worlds(model, rule, schedule, 0.0, lam, a0, b0)
    diff = pi_a_c - pi_a_0
    mean = float(diff.mean())
    std_error = float(diff.std(ddof=1) / math.sqrt(n))
    return mean, std_error


# Relative curvature below which the log rule's quadratic gain coefficient
# counts as zero (boundary settings where float residue could fake a sign).
_CURV_RTOL = 1e-12

_REFINE_ITERS = 80
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def best_response(
    model: SignalModel,
    rule: ScoringRule,
    schedule: DiscountSchedule,
    c_bound: float = 1e3,
) -> BestResponse:
    """Maximize the analytic deviation gain over shifts |c| <= c_bound.

    The gain is even in c, so the search covers c >= 0 and c_star is
    reported non-negative. For the log rule the gain is exactly quadratic:
    the optimum is 0 or the bound, decided by the sign of the curvature
    (with a relative floor against float residue at boundary settings).
    For the quadratic rule a log-spaced grid plus golden-section refinement
    finds the interior optimum; ``bound_hit`` flags a maximizer at the
    bound, where the analytic gain is still non-decreasing in |c|.
    """
    if not (math.isfinite(c_bound) and c_bound > 0):
        raise ValidationError("c_bound must be a positive finite real")

    if rule is ScoringRule.LOGARITHMIC:
        alpha_g, alpha_h = signal_shift_coefficients(model)
        ta, tb, tc, rho = model.tau_a, model.tau_b, model.tau_c, model.rho
        cross = rho * math.sqrt(ta * tb)
        tau_single = ta + tc
        tau_pool = (ta - 2.0 * cross + tb) / (1.0 - rho * rho) + tc
        k1 = schedule_eval(schedule, _T_FIRST)
        k2 = schedule_eval(schedule, _T_POOL)
        curv = 0.5 * (k2 * tau_pool * alpha_h**2 - k1 * tau_single * alpha_g**2)
        scale = 0.5 * (k2 * tau_pool * alpha_h**2 + k1 * tau_single * alpha_g**2)
        if curv <= _CURV_RTOL * scale:
            return BestResponse(c_star=0.0, gain=0.0, bound_hit=False)
        return BestResponse(
            c_star=c_bound, gain=curv * c_bound * c_bound, bound_hit=True
        )

    gain = lambda c: analytic_gain(model, rule, schedule, c)
    cs = [0.0] + [10.0**e for e in np.linspace(-6, math.log10(c_bound), 160)]
    vals = [gain(c) for c in cs]
    best = int(np.argmax(vals))
    lo = cs[max(best - 1, 0)]
    hi = cs[min(best + 1, len(cs) - 1)]
    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = gain(x1), gain(x2)
    for _ in range(_REFINE_ITERS):
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = gain(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = gain(x1)
    candidates = [(vals[best], cs[best]), (f1, x1), (f2, x2)]
    best_gain, c_star = max(candidates)
    if best_gain <= 0.0:
        return BestResponse(c_star=0.0, gain=0.0, bound_hit=False)
    return BestResponse(
        c_star=float(c_star), gain=float(best_gain), bound_hit=bool(c_star >= cs[-2])
    )


def reduce_schedule(schedule: ForumSchedule) -> tuple[ABASubgame, ...]:
    """Decompose a forum into its repeated-speaker subgames.

    For each expert, every adjacent pair of her speaking slots yields one
    descriptor whose composite opponent is the set of experts speaking
    strictly between them. The forum is prompt-truthful iff every
    descriptor's three-slot subgame is.
    """
    by_expert: dict[str, list[int]] = {}
    for t, expert in schedule.slots:
        by_expert.setdefault(expert, []).append(t)
    out = []
    for expert, times in by_expert.items():
        for t1, t2 in zip(times, times[1:]):
            between = frozenset(
                e for t, e in schedule.slots if t1 < t < t2 and e != expert
            )
            out.append(
                ABASubgame(expert=expert, first_slot=t1, second_slot=t2, bob_set=between)
            )
    out.sort(key=lambda d: (d.first_slot, d.second_slot))
    return tuple(out)


def _scenario_sequence(scenario: Scenario, seed: int, index: int = 0):
    """The realized prediction sequence [(counter, expert, belief), ...] and
    the outcome, starting from the prior at counter 0."""
    model = scenario.model
    lam, a0, b0 = draw_world(model, seed, index)
    prior = NormalBelief(model.c0, model.tau_c)
    a_hat = a0 + scenario.deviation_c
    first = posterior_single(model, a_hat)
    pooled = posterior_pair(model, a_hat, b0)
    final = posterior_pair(model, a0, b0) if scenario.correct_at_end else pooled
    seq = [
        (_T_PRIOR, None, prior),
        (_T_FIRST, "alice", first),
        (_T_POOL, "bob", pooled),
        (_T_CORRECT, "alice", final),
    ]
    if scenario.freeloader:
        seq.append((_T_CORRECT + 1, "freeloader", final))
    return seq, lam


def run_mechanism(
    mechanism: str, scenario: Scenario, seed: int, index: int = 0
) -> dict[str, float]:
    """Realized per-expert payoffs for one seeded play.

    group:          everyone is paid the final prediction's plain score.
    single:         each expert is paid the minimum of her incremental
                    scores S(p_t, x) - S(p_prev, x).
    discounted_msr: each prediction pays its discounted increment
                    k(t) S(p_t, x) - k(t') S(p_t', x).

    ``index`` selects the rollout within the seed's stream, as in
    ``draw_world``.
    """
    if mechanism not in _MECHANISMS:
        raise ValidationError(f"unknown mechanism {mechanism!r}")
    seq, lam = _scenario_sequence(scenario, seed, index)
    if len(seq) < 2:
        raise ValidationError("the scenario produced an empty prediction sequence")
    rule = scenario.rule
    experts = {e for _, e, _ in seq if e is not None}
    scores = [(t, e, score(rule, p, lam)) for t, e, p in seq]

    if mechanism == "group":
        final_score = scores[-1][2]
        return {e: final_score for e in experts}

    payoffs: dict[str, float] = {}
    if mechanism == "single":
        for i in range(1, len(scores)):
            t, e, s = scores[i]
            inc = s - scores[i - 1][2]
            payoffs[e] = min(payoffs[e], inc) if e in payoffs else inc
        return payoffs

    for e in experts:
        payoffs[e] = 0.0
    for i in range(1, len(scores)):
        t, e, s = scores[i]
        t_prev, _, s_prev = scores[i - 1]
        k_t = schedule_eval(scenario.schedule, t)
        k_prev = schedule_eval(scenario.schedule, t_prev)
        payoffs[e] += k_t * s - k_prev * s_prev
    return payoffs
