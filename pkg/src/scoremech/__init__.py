"""Strategy-proof prediction mechanisms for Gaussian information settings.

Proper scoring rules over normal beliefs, posterior aggregation of
correlated signals, analytic truthfulness classification of the
Alice-Bob-Alice prediction game, discount schedules that restore prompt
truthfulness, a Monte-Carlo game engine, and a discounted logarithmic
market scoring rule run as an automated market maker.
"""

from .amm import (
    MarketState,
    OutcomeGrid,
    SettlementReport,
    TradeRecord,
    binned_density,
    binned_self_score,
    cost_function,
    open_market,
    price,
    prices,
    replay,
    settle,
    trade,
    write_log,
)
from .beliefs import (
    PlayerSignal,
    SignalModel,
    deprior_signal,
    lognormal_to_normal,
    posterior_pair,
    posterior_single,
    signal_shift_coefficients,
)
from .discounting import (
    DiscountSchedule,
    SearchGrid,
    loss_bound,
    nonpositivity_shift,
    required_ratio_log,
    required_ratio_numeric,
    schedule_eval,
)
from .errors import (
    DegenerateCorrelationError,
    DiscountIneffectiveError,
    LogConsistencyError,
    MechanismError,
    NumericError,
    UninformativeSignalError,
    ValidationError,
)
from .game import (
    ABASubgame,
    BestResponse,
    ForumSchedule,
    GameRollout,
    RewardBreakdown,
    Scenario,
    analytic_gain,
    best_response,
    deviation_gain,
    draw_world,
    draw_worlds,
    reduce_schedule,
    rollout,
    rollout_batch,
    run_mechanism,
)
from .scoring import (
    NormalBelief,
    ScoringRule,
    density,
    divergence,
    expected_score,
    score,
    selfdot,
)
from .truthfulness import (
    TruthfulnessVerdict,
    classify_log,
    classify_quadratic,
    delta_log,
    delta_quadratic,
    local_truthfulness_fd,
)

__version__ = "0.1.0"

__all__ = [
    "ABASubgame",
    "BestResponse",
    "DegenerateCorrelationError",
    "DiscountIneffectiveError",
    "DiscountSchedule",
    "ForumSchedule",
    "GameRollout",
    "LogConsistencyError",
    "MarketState",
    "MechanismError",
    "NormalBelief",
    "NumericError",
    "OutcomeGrid",
    "PlayerSignal",
    "RewardBreakdown",
    "Scenario",
    "ScoringRule",
    "SearchGrid",
    "SettlementReport",
    "SignalModel",
    "TradeRecord",
    "TruthfulnessVerdict",
    "UninformativeSignalError",
    "ValidationError",
    "analytic_gain",
    "best_response",
    "binned_density",
    "binned_self_score",
    "classify_log",
    "classify_quadratic",
    "cost_function",
    "delta_log",
    "delta_quadratic",
    "density",
    "deprior_signal",
    "deviation_gain",
    "divergence",
    "draw_world",
    "draw_worlds",
    "expected_score",
    "local_truthfulness_fd",
    "lognormal_to_normal",
    "loss_bound",
    "nonpositivity_shift",
    "open_market",
    "posterior_pair",
    "posterior_single",
    "price",
    "prices",
    "reduce_schedule",
    "replay",
    "required_ratio_log",
    "required_ratio_numeric",
    "rollout",
    "rollout_batch",
    "run_mechanism",
    "schedule_eval",
    "score",
    "selfdot",
    "settle",
    "signal_shift_coefficients",
    "trade",
    "write_log",
    "__version__",
]
