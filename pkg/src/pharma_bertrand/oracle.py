"""Independent checks on the analytic model.

Monte Carlo consumer sampling estimates channel demand from the utility
choice rule directly. ``envelope_demand`` computes the same quantity exactly
from the piecewise-linear utility envelope. Grid scans and best responses
certify the Nash property of candidate prices.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from . import _kernels
from .errors import BracketMiss, TieCase
from .market_model import (
    CHANNELS,
    DemandSplit,
    MarketParams,
    channel_set,
    demand,
    indifference_points,
    interior_split,
)

BLOCK = 1 << 16
GENERATOR = f"numpy.PCG64 via SeedSequence(seed, spawn_key=(block,)), block={BLOCK}"
_COSTS = ("c1", "c2", "c3")


@dataclass(frozen=True)
class McDemandEstimate:
    d_hat: tuple
    std_err: tuple
    n: int
    seed: int
    generator: str = GENERATOR
    backend: str = ""


@dataclass(frozen=True)
class McComparison:
    valid: bool
    reason: str
    analytic: tuple
    estimate: McDemandEstimate
    z: tuple = ()

    def within(self, k=3.0) -> bool:
        return self.valid and all(abs(z) <= k for z in self.z)


@dataclass(frozen=True)
class DeviationReport:
    channel: str
    incumbent_price: float
    best_deviation_price: float
    profit_gain: float
    grid: tuple


def _channel_index(channel) -> int:
    if isinstance(channel, str):
        return CHANNELS.index(channel)
    if channel in (1, 2, 3):
        return channel - 1
    raise ValueError(f"channel must be one of u, o, e or 1, 2, 3; got {channel!r}")


def _lines(params: MarketParams, prices):
    p1, p2, p3 = prices
    m = params.m
    slopes = (params.alpha, 1.0, params.theta)
    costs = (m * p1 + params.tx, m * p2 + params.mu1, m * p3 + params.mu2)
    return slopes, costs


def _offered(channels):
    chans = channel_set(channels)
    return tuple(c in chans for c in CHANNELS)


def _block_counts(seed, blocks, n, v_slopes, v_costs, offered, backend):
    total = np.zeros(3, dtype=np.int64)
    for b in blocks:
        size = min(BLOCK, n - b * BLOCK)
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(b,))))
        total += _kernels.count_choices(rng.random(size), v_slopes, v_costs, offered, backend=backend)
    return total


def monte_carlo_demand(params: MarketParams, prices, channels="uoe", n=1_000_000, seed=0,
                       workers=1, backend=None) -> McDemandEstimate:
    """Estimate demand by sampling valuations v ~ U(0, 1).

    Each consumer buys from the offered channel with the highest utility if
    that utility is positive. Ties go to the online channel first, then
    organized, then unorganized. Draws come in fixed blocks with their own
    seeded streams, so the result does not depend on ``workers``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    slopes, costs = _lines(params, prices)
    offered = _offered(channels)
    backend = backend or _kernels.BACKEND
    nblocks = -(-n // BLOCK)
    if workers <= 1 or nblocks == 1:
        counts = _block_counts(seed, range(nblocks), n, slopes, costs, offered, backend)
    else:
        parts = [range(k, nblocks, workers) for k in range(workers)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = sum(pool.map(
                lambda blocks: _block_counts(seed, blocks, n, slopes, costs, offered, backend), parts
            ))
    d_hat = tuple(float(c) / n for c in counts)
    std_err = tuple(float(np.sqrt(d * (1.0 - d) / n)) for d in d_hat)
    return McDemandEstimate(d_hat=d_hat, std_err=std_err, n=n, seed=seed, backend=backend)


def envelope_demand(params: MarketParams, prices, channels="uoe") -> DemandSplit:
    """Exact demand under the sampling choice rule, from the utility envelope."""
    slopes, costs = _lines(params, prices)
    offered = _offered(channels)
    live = [i for i in range(3) if offered[i]]
    cuts = {0.0, 1.0}
    for i in live:
        if slopes[i] != 0.0:
            cuts.add(costs[i] / slopes[i])
        for j in live:
            if j > i and slopes[i] != slopes[j]:
                cuts.add((costs[i] - costs[j]) / (slopes[i] - slopes[j]))
    edges = sorted(c for c in cuts if 0.0 <= c <= 1.0)
    shares = [0.0, 0.0, 0.0]
    for lo, hi in zip(edges, edges[1:]):
        if hi <= lo:
            continue
        mid = np.array([0.5 * (lo + hi)])
        counts = _kernels.count_choices(mid, slopes, costs, offered, backend="numpy")
        for ch in range(3):
            if counts[ch]:
                shares[ch] += hi - lo
    return DemandSplit(*shares)


def compare_with_analytic(params: MarketParams, prices, estimate: McDemandEstimate,
                          channels="uoe", *, interior=False) -> McComparison:
    """z-scores of the Monte Carlo estimate against the analytic demand.

    Only defined when every analytic demand lies in [0, 1]; otherwise the
    formulas extrapolate beyond the population and the comparison is skipped.
    """
    try:
        analytic = demand(params, prices, channels, interior=interior).split
    except TieCase as exc:
        return McComparison(False, f"threshold tie: {exc}", (), estimate)
    if not all(0.0 <= d <= 1.0 for d in analytic):
        return McComparison(False, "analytic demand outside [0, 1]; comparison undefined", tuple(analytic), estimate)
    z = []
    for a, d, se in zip(analytic, estimate.d_hat, estimate.std_err):
        diff = d - a
        if se > 0.0:
            z.append(diff / se)
        else:
            # zero standard error: only an exact match counts as agreement
            z.append(0.0 if diff == 0.0 else float("inf") * np.sign(diff))
    return McComparison(True, "", tuple(analytic), estimate, tuple(z))


def own_demand_line(params: MarketParams, prices, channel):
    """Intercept and slope of a channel's all-active demand in its own price."""
    i = _channel_index(channel)
    p1, p2, p3 = prices
    m, tx, mu1, mu2, th = params.m, params.tx, params.mu1, params.mu2, params.theta
    d = 2.0 * params.alpha - th - 1.0
    if i == 0:
        return 1.0 - (m * (-p2 - p3) + 2.0 * tx - mu1 - mu2) / d, -2.0 * m / d
    if i == 1:
        k0 = (m * (2.0 * p1 - p3) + 2.0 * tx - mu1 - mu2) / d - (-m * p3 + mu1 - mu2) / (1.0 - th)
        return k0, -m / d - m / (1.0 - th)
    return (m * p2 + mu1 - mu2) / (1.0 - th) - mu2 / th, -m / (1.0 - th) - m / th


def own_profit(params: MarketParams, prices, channel, own_price):
    """Profit of ``channel`` at ``own_price`` (scalar or array), rivals fixed."""
    i = _channel_index(channel)
    trial = list(prices)
    trial[i] = np.asarray(own_price, dtype=np.float64)
    split = interior_split(indifference_points(params, trial))
    return params.beta * (trial[i] - getattr(params, _COSTS[i])) * split[i]


def _full_prices(rival_prices, i, own):
    rivals = list(rival_prices)
    rivals.insert(i, own)
    return tuple(rivals)


def _grid_refine(f, lo, hi, tol, steps=1001):
    grid = np.linspace(lo, hi, steps)
    values = f(grid)
    j = int(np.argmax(values))
    best_p, best_v = float(grid[j]), float(values[j])
    a, b = float(grid[max(j - 1, 0)]), float(grid[min(j + 1, steps - 1)])
    if b > a:
        res = minimize_scalar(lambda p: -float(f(p)), bounds=(a, b), method="bounded",
                              options={"xatol": tol})
        if -res.fun > best_v:
            best_p, best_v = float(res.x), float(-res.fun)
    return best_p, best_v


def best_response(params: MarketParams, rival_prices, channel, bracket, tol=1e-9) -> float:
    """Profit-maximizing own price against fixed rival prices.

    Under concavity the own first-order condition is affine in the own price
    and is solved exactly; BracketMiss is raised if its root is outside
    ``bracket``. Without concavity the maximum is located by a grid scan of
    the bracket refined with bounded golden-section search.
    """
    lo, hi = bracket
    if not hi > lo:
        raise ValueError(f"bracket must have positive width, got {bracket!r}")
    i = _channel_index(channel)
    cost = getattr(params, _COSTS[i])
    k0, k1 = own_demand_line(params, _full_prices(rival_prices, i, 0.0), CHANNELS[i])
    if k1 < 0.0 and params.beta > 0.0:
        root = (k1 * cost - k0) / (2.0 * k1)
        if not lo <= root <= hi:
            raise BracketMiss(root, bracket)
        return float(root)
    f = lambda p: own_profit(params, _full_prices(rival_prices, i, 0.0), CHANNELS[i], p)  # noqa: E731
    return _grid_refine(f, lo, hi, tol)[0]


def nash_deviation_check(params: MarketParams, prices, rel_range=0.5, steps=1001, tol=1e-9) -> tuple:
    """Largest unilateral profit gain found on a price grid around each incumbent price.

    The grid spans p_i * (1 -/+ rel_range) and contains p_i itself; the best
    grid point is refined by bounded search down to ``tol``.
    """
    if steps < 3:
        raise ValueError("steps must be >= 3")
    reports = []
    for i, ch in enumerate(CHANNELS):
        p = float(prices[i])
        lo, hi = sorted((p * (1.0 - rel_range), p * (1.0 + rel_range)))
        if hi == lo:
            lo, hi = p - rel_range, p + rel_range
        grid = np.linspace(lo, hi, steps)
        grid[int(np.argmin(np.abs(grid - p)))] = p
        f = lambda q, ch=ch: own_profit(params, prices, ch, q)  # noqa: E731
        values = f(grid)
        base = float(f(np.array([p]))[0])
        j = int(np.argmax(values))
        best_p, best_v = float(grid[j]), float(values[j])
        if best_v > base:
            a, b = float(grid[max(j - 1, 0)]), float(grid[min(j + 1, steps - 1)])
            res = minimize_scalar(lambda q: -float(f(np.array([q]))[0]), bounds=(a, b),
                                  method="bounded", options={"xatol": tol})
            if -res.fun > best_v:
                best_p, best_v = float(res.x), float(-res.fun)
        else:
            best_p, best_v = p, base
        reports.append(DeviationReport(ch, p, best_p, best_v - base, (lo, hi, steps)))
    return tuple(reports)

