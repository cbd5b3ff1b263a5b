"""Bertrand price competition among unorganized, organized and online pharmacies."""

__version__ = "0.1.0"

from .equilibrium import (  # noqa: E402
    ConcavityReport,
    EquilibriumResult,
    closed_form_prices,
    concavity_check,
    foc_residuals,
    solve_equilibrium,
    solve_foc_system,
)
from .market_model import (  # noqa: E402
    BASE_CASE,
    DemandSplit,
    IndifferencePoints,
    MarketParams,
    PriceVector,
    ProfitVector,
    Regime,
    classify_regime,
    demand,
    indifference_points,
    profits,
    utilities,
)
from .oracle import best_response, envelope_demand, monte_carlo_demand, nash_deviation_check  # noqa: E402
from .sensitivity import SweepSpec, ofat_sweep, sign_summary  # noqa: E402
