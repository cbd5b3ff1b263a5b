"""Consumer utilities, indifference thresholds, demand regimes and profits.

Valuations ``v`` are uniform on [0, 1] with unit density. Thresholds are
never clamped to [0, 1]; out-of-range demand is reported through
diagnostics so the raw formulas can always be evaluated.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from typing import NamedTuple

from .errors import DegenerateDenominator, TieCase

TIE_TOL = 1e-12
DENOM_TOL = 1e-12

CHANNELS = ("u", "o", "e")
PARAM_NAMES = ("alpha", "theta", "beta", "m", "t", "x", "mu1", "mu2", "c1", "c2", "c3")


@dataclass(frozen=True)
class MarketParams:
    """Exogenous market parameters.

    alpha, theta: acceptance of the unorganized and online channels.
    beta: probability of category-level demand. m: marginal utility of money.
    t, x: transport cost (Rs/km) and distance (km) to the nearest unorganized store.
    mu1, mu2: disutility (Rs) of buying from the organized and online channels.
    c1, c2, c3: marginal costs (Rs) of the three channels.
    """

    alpha: float
    theta: float
    beta: float
    m: float
    t: float
    x: float
    mu1: float
    mu2: float
    c1: float
    c2: float
    c3: float

    @property
    def tx(self) -> float:
        return self.t * self.x

    @property
    def model_valid(self) -> bool:
        """True when alpha > (1 + theta)/2."""
        return self.alpha > (1.0 + self.theta) / 2.0

    def replace(self, **changes) -> MarketParams:
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return asdict(self)

    def validate(self) -> None:
        """Raise ValueError if any parameter is outside its admissible range.

        Kept separate from construction so raw formulas can be evaluated on
        any finite input.
        """
        for f in fields(self):
            value = getattr(self, f.name)
            if not math.isfinite(value):
                raise ValueError(f"{f.name} must be finite, got {value!r}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0.0 < self.theta < 1.0:
            raise ValueError(f"theta must lie in (0, 1), got {self.theta}")
        if not 0.0 < self.beta <= 1.0:
            raise ValueError(f"beta must lie in (0, 1], got {self.beta}")
        if not 0.0 < self.m <= 1.0:
            raise ValueError(f"m must lie in (0, 1], got {self.m}")
        for name in ("t", "x", "mu1", "mu2", "c1", "c2", "c3"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")


BASE_CASE = MarketParams(
    alpha=0.9, theta=0.6, beta=1.0, m=1.0, t=10.0, x=0.86,
    mu1=20.0, mu2=20.0, c1=175.0, c2=140.0, c3=140.0,
)


class PriceVector(NamedTuple):
    p1: float
    p2: float
    p3: float


@dataclass(frozen=True)
class IndifferencePoints:
    v_u: float
    v_o: float
    v_e: float
    v_uo: float
    v_oe: float
    v_ue: float
    v_uoe: float


class DemandSplit(NamedTuple):
    d_u: float
    d_o: float
    d_e: float

    @property
    def total(self) -> float:
        return self.d_u + self.d_o + self.d_e


class ProfitVector(NamedTuple):
    pi1: float
    pi2: float
    pi3: float


@dataclass(frozen=True)
class Regime:
    channel_set: frozenset
    active_set: frozenset
    case_label: str


@dataclass(frozen=True)
class Check:
    """One named diagnostic; ``ok`` False marks a finding, not an error."""

    name: str
    ok: bool
    note: str = ""


class DemandOutcome(NamedTuple):
    split: DemandSplit
    regime: Regime
    diagnostics: tuple


def channel_set(spec) -> frozenset:
    """Normalize ``"uoe"``, ``("o", "e")`` and the like to a frozenset of channel codes."""
    chans = frozenset(spec)
    if not chans <= set(CHANNELS) or len(chans) < 2:
        raise ValueError(f"channel set must be two or three of u, o, e; got {spec!r}")
    return chans


ALL_CHANNELS = channel_set("uoe")


def utilities(v, params: MarketParams, prices):
    """Utilities (U_u, U_o, U_e) of a consumer with valuation ``v``; ``v`` may be an array."""
    p1, p2, p3 = prices
    m = params.m
    u_u = params.alpha * v - m * p1 - params.tx
    u_o = v - m * p2 - params.mu1
    u_e = params.theta * v - m * p3 - params.mu2
    return u_u, u_o, u_e


def _check_denominator(name, value):
    if abs(value) < DENOM_TOL:
        raise DegenerateDenominator(name, value)
    return value


def indifference_points(params: MarketParams, prices) -> IndifferencePoints:
    p1, p2, p3 = prices
    a, th, m, tx = params.alpha, params.theta, params.m, params.tx
    mu1, mu2 = params.mu1, params.mu2
    d_theta = _check_denominator("theta", th)
    d_a1 = _check_denominator("alpha-1", a - 1.0)
    d_ath = _check_denominator("alpha-theta", a - th)
    d_1th = _check_denominator("1-theta", 1.0 - th)
    d_triple = _check_denominator("2alpha-theta-1", 2.0 * a - th - 1.0)
    if a == 0.0:
        raise DegenerateDenominator("alpha", a)
    return IndifferencePoints(
        v_u=(m * p1 + tx) / a,
        v_o=m * p2 + mu1,
        v_e=(m * p3 + mu2) / d_theta,
        v_uo=(m * (p1 - p2) + tx - mu1) / d_a1,
        v_oe=(m * (p2 - p3) + mu1 - mu2) / d_1th,
        v_ue=(m * (p1 - p3) + tx - mu2) / d_ath,
        v_uoe=(m * (2.0 * p1 - p2 - p3) + 2.0 * tx - mu1 - mu2) / d_triple,
    )


def _below(pts, left, right) -> bool:
    a, b = getattr(pts, left), getattr(pts, right)
    if abs(a - b) <= TIE_TOL:
        raise TieCase(left, right, a)
    return a < b


def classify_regime(points: IndifferencePoints, channels="uoe") -> Regime:
    """Demand case for an offered channel set, keyed on threshold comparisons.

    Labels: ``"oe:1"``/``"oe:2"`` (v_e below/above v_o), ``"uo:1"``/``"uo:2"``
    (v_o below/above v_u), ``"ue:1"``/``"ue:2"`` (v_e below/above v_u) and
    ``"uoe:1"``/``"uoe:2"`` (v_ue below/above v_uo). Case 2 of each set leaves
    one channel without demand.
    """
    chans = channel_set(channels)
    if chans == ALL_CHANNELS:
        if _below(points, "v_ue", "v_uo"):
            return Regime(chans, ALL_CHANNELS, "uoe:1")
        return Regime(chans, frozenset("ue"), "uoe:2")
    if chans == frozenset("oe"):
        if _below(points, "v_e", "v_o"):
            return Regime(chans, chans, "oe:1")
        return Regime(chans, frozenset("o"), "oe:2")
    if chans == frozenset("uo"):
        if _below(points, "v_o", "v_u"):
            return Regime(chans, chans, "uo:1")
        return Regime(chans, frozenset("u"), "uo:2")
    if _below(points, "v_e", "v_u"):
        return Regime(chans, chans, "ue:1")
    return Regime(chans, frozenset("u"), "ue:2")


def interior_split(pts: IndifferencePoints) -> DemandSplit:
    """Three-channel demands when every channel is active (case 1)."""
    return DemandSplit(1.0 - pts.v_uoe, pts.v_uoe - pts.v_oe, pts.v_oe - pts.v_e)


def _split_for_case(pts: IndifferencePoints, label: str) -> DemandSplit:
    if label == "uoe:1":
        return interior_split(pts)
    if label == "uoe:2":
        return DemandSplit(1.0 - pts.v_uoe, 0.0, pts.v_uoe - pts.v_e)
    if label == "oe:1":
        return DemandSplit(0.0, 1.0 - pts.v_oe, pts.v_oe - pts.v_e)
    if label == "oe:2":
        return DemandSplit(0.0, 1.0 - pts.v_o, 0.0)
    if label == "uo:1":
        return DemandSplit(1.0 - pts.v_uo, pts.v_uo - pts.v_o, 0.0)
    if label == "uo:2":
        return DemandSplit(1.0 - pts.v_u, 0.0, 0.0)
    if label == "ue:1":
        return DemandSplit(1.0 - pts.v_ue, 0.0, pts.v_ue - pts.v_e)
    if label == "ue:2":
        return DemandSplit(1.0 - pts.v_u, 0.0, 0.0)
    raise ValueError(f"unknown case label {label!r}")


def demand_checks(split: DemandSplit) -> tuple:
    checks = []
    for name, value in zip(("d_u", "d_o", "d_e"), split):
        ok = 0.0 <= value <= 1.0
        if ok:
            note = ""
        elif value < 0.0:
            note = f"{name} < 0: interior-solution condition violated"
        else:
            note = f"{name} > 1: demand exceeds the consumer population"
        checks.append(Check(f"{name} in [0,1]", ok, note))
    total = split.total
    checks.append(Check("sum <= 1", total <= 1.0, "" if total <= 1.0 else f"total demand {total:.6g} > 1"))
    return tuple(checks)


def demand(params: MarketParams, prices, channels="uoe", *, interior=False) -> DemandOutcome:
    """Per-channel demand, the classified regime and bound diagnostics.

    With ``interior=True`` the three-channel set always uses the all-active
    formulas (1 - v_uoe, v_uoe - v_oe, v_oe - v_e), which the equilibrium
    prices are built on; the classified regime is still returned and a note
    is added when it disagrees.
    """
    chans = channel_set(channels)
    pts = indifference_points(params, prices)
    regime = classify_regime(pts, chans)
    diagnostics = []
    if interior and chans == ALL_CHANNELS:
        split = interior_split(pts)
        if regime.case_label != "uoe:1":
            diagnostics.append(Check(
                "regime uoe:1", False,
                f"thresholds classify as {regime.case_label}; all-active formulas applied anyway",
            ))
    else:
        split = _split_for_case(pts, regime.case_label)
    diagnostics.extend(demand_checks(split))
    return DemandOutcome(split, regime, tuple(diagnostics))


def profits(params: MarketParams, prices, split) -> ProfitVector:
    p1, p2, p3 = prices
    b = params.beta
    return ProfitVector(
        b * (p1 - params.c1) * split[0],
        b * (p2 - params.c2) * split[1],
        b * (p3 - params.c3) * split[2],
    )
