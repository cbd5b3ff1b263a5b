"""Bertrand-Nash prices: closed form, stationarity checks and a linear-solve cross-check."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConditionViolated, DegenerateDenominator, SingularDenominator, SingularSystem, TieCase
from .market_model import (
    Check,
    DemandSplit,
    IndifferencePoints,
    MarketParams,
    PriceVector,
    ProfitVector,
    Regime,
    demand,
    demand_checks,
    indifference_points,
    interior_split,
    profits,
)

COND_LIMIT = 1e8
DENOM_TOL = 1e-12


@dataclass(frozen=True)
class ConcavityReport:
    cond_main: bool
    cond_aux: bool
    second_derivatives: tuple

    @property
    def concave(self) -> bool:
        return all(d < 0.0 for d in self.second_derivatives)


@dataclass(frozen=True)
class EquilibriumResult:
    params: MarketParams
    prices: PriceVector
    points: IndifferencePoints
    split: DemandSplit
    profits: ProfitVector
    regime: Regime | None
    foc_residuals: tuple
    concavity: ConcavityReport
    feasibility: tuple
    regime_notes: tuple = ()

    @property
    def feasible(self) -> bool:
        return all(c.ok for c in self.feasibility)

    def failed_checks(self) -> list:
        return [c for c in self.feasibility if not c.ok]


def price_denominator(params: MarketParams) -> float:
    a, th = params.alpha, params.theta
    return params.m * (2.0 + 4.0 * a * (-4.0 + th) + 11.0 * th - th * th)


def closed_form_prices(params: MarketParams, *, warn=True) -> PriceVector:
    """Equilibrium prices from the closed-form solution; beta does not enter.

    Raises SingularDenominator when the shared denominator vanishes (this
    includes m = 0). Emits ConditionViolated when alpha <= (1 + theta)/2, in
    which case the returned point is stationary but not a maximum.
    """
    den = price_denominator(params)
    if abs(den) < DENOM_TOL:
        raise SingularDenominator(den)
    if warn and not params.model_valid:
        warnings.warn(
            f"alpha={params.alpha} <= (1+theta)/2={(1 + params.theta) / 2}: profits are not concave",
            ConditionViolated,
            stacklevel=2,
        )
    p = params
    return PriceVector(*(float(v) for v in _kernels.closed_form_kernel(
        p.alpha, p.theta, p.m, p.tx, p.c1, p.c2, p.c3, p.mu1, p.mu2
    )))


def _foc_denominators(params):
    th = params.theta
    d = 2.0 * params.alpha - th - 1.0
    for name, value in (("2alpha-theta-1", d), ("1-theta", 1.0 - th), ("theta", th)):
        if abs(value) < DENOM_TOL:
            raise DegenerateDenominator(name, value)
    return d, 1.0 - th, th


def foc_residuals(params: MarketParams, prices) -> tuple:
    """Own-price profit gradients divided by beta, (d pi_i / d p_i) / beta.

    The unorganized condition is oriented as a gradient (1 - ...), so the sign
    of each residual is the sign of the own-price profit slope.
    """
    d, one_th, th = _foc_denominators(params)
    p1, p2, p3 = prices
    m, tx, mu1, mu2 = params.m, params.tx, params.mu1, params.mu2
    c1, c2, c3 = params.c1, params.c2, params.c3
    r1 = 1.0 - (4.0 * m * p1 / d - m * p2 / d - m * p3 / d + (2.0 * tx - mu1 - mu2 - 2.0 * m * c1) / d)
    r2 = (
        2.0 * m * p1 / d
        - (1.0 / d + 1.0 / one_th) * 2.0 * m * p2
        - (1.0 / d - 1.0 / one_th) * m * p3
        + (2.0 * tx - mu1 - mu2 + m * c2) / d
        + (m * c2 - mu1 + mu2) / one_th
    )
    r3 = (
        m / one_th * p2
        - (1.0 / one_th + 1.0 / th) * 2.0 * m * p3
        + (mu1 - mu2 + m * c3) / one_th
        + (m * c3 - mu2) / th
    )
    return (r1, r2, r3)


def foc_system(params: MarketParams):
    """Matrix form ``A @ p + b`` of the three stationarity conditions."""
    d, one_th, th = _foc_denominators(params)
    m, tx, mu1, mu2 = params.m, params.tx, params.mu1, params.mu2
    c1, c2, c3 = params.c1, params.c2, params.c3
    A = np.array([
        [-4.0 * m / d, m / d, m / d],
        [2.0 * m / d, -2.0 * m * (1.0 / d + 1.0 / one_th), -m * (1.0 / d - 1.0 / one_th)],
        [0.0, m / one_th, -2.0 * m * (1.0 / one_th + 1.0 / th)],
    ])
    b = np.array([
        1.0 - (2.0 * tx - mu1 - mu2 - 2.0 * m * c1) / d,
        (2.0 * tx - mu1 - mu2 + m * c2) / d + (m * c2 - mu1 + mu2) / one_th,
        (mu1 - mu2 + m * c3) / one_th + (m * c3 - mu2) / th,
    ])
    return A, b


def foc_condition(params: MarketParams) -> float:
    A, _ = foc_system(params)
    return float(np.linalg.cond(A))


def solve_foc_system(params: MarketParams) -> PriceVector:
    """Stationary point of the three profit functions by a direct 3x3 solve."""
    A, b = foc_system(params)
    cond = float(np.linalg.cond(A))
    if not np.isfinite(cond) or cond >= COND_LIMIT:
        raise SingularSystem(cond)
    return PriceVector(*(float(v) for v in np.linalg.solve(A, -b)))


def concavity_check(params: MarketParams) -> ConcavityReport:
    a, th, m, b = params.alpha, params.theta, params.m, params.beta
    d = 2.0 * a - th - 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_d = np.float64(1.0) / d
        inv_1th = np.float64(1.0) / (1.0 - th)
        inv_th = np.float64(1.0) / th
    second = (
        float(-4.0 * m * b * inv_d),
        float(-2.0 * m * b * (inv_d + inv_1th)),
        float(-2.0 * m * b * (inv_1th + inv_th)),
    )
    return ConcavityReport(cond_main=a > (1.0 + th) / 2.0, cond_aux=a > th, second_derivatives=second)


def _ordering_check(pts, names):
    values = [getattr(pts, n) for n in names]
    ok = all(lo < hi for lo, hi in zip(values, values[1:]))
    label = " < ".join(names)
    note = "" if ok else "violated: " + ", ".join(f"{n}={v:.6g}" for n, v in zip(names, values))
    return Check(label, ok, note)


def feasibility_checks(params, prices, pts, split, concavity) -> tuple:
    checks = [
        _ordering_check(pts, ("v_e", "v_o", "v_u")),
        _ordering_check(pts, ("v_e", "v_o", "v_u", "v_ue", "v_uoe")),
        _ordering_check(pts, ("v_oe", "v_uoe")),
    ]
    checks.extend(demand_checks(split))
    for i, (p, c) in enumerate(zip(prices, (params.c1, params.c2, params.c3)), start=1):
        ok = p >= c
        checks.append(Check(f"p{i} >= c{i}", ok, "" if ok else f"p{i} < c{i}: negative margin {p - c:.6g}"))
    checks.append(Check(
        "alpha > (1+theta)/2",
        concavity.cond_main,
        "" if concavity.cond_main else "profits not concave: stationary point is not a maximum",
    ))
    return tuple(checks)


def solve_equilibrium(params: MarketParams) -> EquilibriumResult:
    """Closed-form prices plus demands, profits and the full feasibility checklist.

    Failed checks are findings stored on the result; only degenerate
    denominators raise. A classified regime other than all-active is noted
    in ``regime_notes`` and does not count against feasibility.
    """
    prices = closed_form_prices(params, warn=False)
    pts = indifference_points(params, prices)
    try:
        outcome = demand(params, prices, "uoe", interior=True)
        split, regime = outcome.split, outcome.regime
        regime_checks = tuple(c for c in outcome.diagnostics if c.name.startswith("regime"))
    except TieCase as exc:
        split, regime = interior_split(pts), None
        regime_checks = (Check("regime classified", False, str(exc)),)
    concavity = concavity_check(params)
    return EquilibriumResult(
        params=params,
        prices=prices,
        points=pts,
        split=split,
        profits=profits(params, prices, split),
        regime=regime,
        foc_residuals=foc_residuals(params, prices),
        concavity=concavity,
        feasibility=feasibility_checks(params, prices, pts, split, concavity),
        regime_notes=regime_checks,
    )
