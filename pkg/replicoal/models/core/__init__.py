from replicoal.models.core.rates import (
    Matrix,
    PayoffMatrix,
    RateMatrix,
    channel_rate,
    channel_rates,
    check_rate_bounds,
    payoff_from_rates,
    rate_bounds,
    total_rate,
    total_rate_payoff_form,
    victim_rates,
)
from replicoal.models.core.state import (
    ATOL,
    SIMPLEX_ATOL,
    BlockState,
    Counts,
    MergeChannel,
    SimplexPoint,
    apply_channel,
    build_simplex_point,
    check_simplex,
    largest_remainder_round,
    vertex,
)

__all__ = [
    "apply_channel",
    "ATOL",
    "BlockState",
    "build_simplex_point",
    "channel_rate",
    "channel_rates",
    "check_rate_bounds",
    "check_simplex",
    "Counts",
    "largest_remainder_round",
    "Matrix",
    "MergeChannel",
    "PayoffMatrix",
    "payoff_from_rates",
    "RateMatrix",
    "rate_bounds",
    "SIMPLEX_ATOL",
    "SimplexPoint",
    "total_rate",
    "total_rate_payoff_form",
    "vertex",
    "victim_rates",
]

for name in ("BlockState", "MergeChannel", "PayoffMatrix", "RateMatrix"):
    globals()[name].__module__ = __name__
