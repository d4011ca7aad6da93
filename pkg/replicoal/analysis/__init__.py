from replicoal.analysis.clock import ClockFunction, TimeChangedPath, clock, frequencies_at, time_change
from replicoal.analysis.compensator import (
    TauMartingale,
    clock_mass_at,
    compensator,
    compensator_density,
    martingale_residual,
    observable_at,
    path_integral,
    quadratic_variation_density,
    tau_martingale,
)
from replicoal.analysis.ensemble import (
    DEFAULT_SIGMA_CUTOFF,
    BottleneckStat,
    EnsembleSummary,
    MartingaleMeanReport,
    SecondMomentReport,
    bottleneck_curve,
    bottleneck_stat,
    ensemble_vs_ode,
    initial_state,
    martingale_mean_check,
    second_moment_check,
)
from replicoal.analysis.moments import RunningMoments

__all__ = [
    "bottleneck_curve",
    "bottleneck_stat",
    "BottleneckStat",
    "clock",
    "clock_mass_at",
    "ClockFunction",
    "compensator",
    "compensator_density",
    "DEFAULT_SIGMA_CUTOFF",
    "ensemble_vs_ode",
    "EnsembleSummary",
    "frequencies_at",
    "initial_state",
    "martingale_mean_check",
    "martingale_residual",
    "MartingaleMeanReport",
    "observable_at",
    "path_integral",
    "quadratic_variation_density",
    "RunningMoments",
    "second_moment_check",
    "SecondMomentReport",
    "tau_martingale",
    "TauMartingale",
    "time_change",
    "TimeChangedPath",
]

for name in (
    "BottleneckStat",
    "ClockFunction",
    "EnsembleSummary",
    "MartingaleMeanReport",
    "RunningMoments",
    "SecondMomentReport",
    "TauMartingale",
    "TimeChangedPath",
):
    globals()[name].__module__ = __name__
