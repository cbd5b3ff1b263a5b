"""One-factor-at-a-time sweeps of the equilibrium over a single parameter."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .equilibrium import solve_equilibrium
from .errors import DegenerateDenominator, InsufficientData, InvalidSpec, ModelError, SingularDenominator
from .market_model import PARAM_NAMES, MarketParams

# name -> (lo, hi, lo_closed, hi_closed)
SENSITIVITY_RANGES = {
    "alpha": (0.8, 1.0, False, True),
    "theta": (0.0, 0.8, False, False),
    "t": (0.0, 20.0, True, True),
    "x": (0.0, 10.0, True, True),
    "beta": (0.0, 1.0, False, True),
    "m": (0.0, 1.0, False, True),
    "mu1": (0.0, 200.0, True, True),
    "mu2": (0.0, 200.0, True, True),
    "c1": (119.0, 231.0, True, True),
    "c2": (49.0, 231.0, True, True),
    "c3": (49.0, 231.0, True, True),
}

COLUMNS = ("p1", "p2", "p3", "pi1", "pi2", "pi3", "du", "do", "de")
FLAT_TOL = 1e-9


@dataclass(frozen=True)
class SweepSpec:
    """A single-parameter sweep around ``base``.

    ``lo``/``hi`` default to the parameter's sensitivity range, whose open
    endpoints are approached to half a grid step. Explicit bounds are closed.
    """

    base: MarketParams
    param: str
    lo: float | None = None
    hi: float | None = None
    steps: int = 50
    mode: str = "grid"
    seed: int | None = None
    strict: bool = False

    def bounds(self):
        if self.param not in SENSITIVITY_RANGES:
            raise InvalidSpec(f"unknown parameter {self.param!r}; expected one of {', '.join(PARAM_NAMES)}")
        t_lo, t_hi, t_lo_closed, t_hi_closed = SENSITIVITY_RANGES[self.param]
        lo = t_lo if self.lo is None else float(self.lo)
        hi = t_hi if self.hi is None else float(self.hi)
        lo_closed = t_lo_closed if self.lo is None else True
        hi_closed = t_hi_closed if self.hi is None else True
        return lo, hi, lo_closed, hi_closed

    def validate(self):
        lo, hi, _, _ = self.bounds()
        if self.mode not in ("grid", "uniform"):
            raise InvalidSpec(f"mode must be 'grid' or 'uniform', got {self.mode!r}")
        if self.steps < 1:
            raise InvalidSpec("steps must be >= 1")
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise InvalidSpec("sweep bounds must be finite")
        if lo > hi or (lo == hi and self.steps > 1):
            raise InvalidSpec(f"need lo < hi, got [{lo}, {hi}]")
        if self.mode == "uniform" and self.seed is None:
            raise InvalidSpec("uniform mode needs a seed")
        if self.strict:
            t_lo, t_hi, t_lo_closed, t_hi_closed = SENSITIVITY_RANGES[self.param]
            below = lo < t_lo or (lo == t_lo and not t_lo_closed)
            above = hi > t_hi or (hi == t_hi and not t_hi_closed)
            if below or above:
                raise InvalidSpec(
                    f"[{lo}, {hi}] leaves the admissible range of {self.param} "
                    f"{'[' if t_lo_closed else '('}{t_lo}, {t_hi}{']' if t_hi_closed else ')'}"
                )

    def points(self) -> np.ndarray:
        self.validate()
        lo, hi, lo_closed, hi_closed = self.bounds()
        if self.mode == "uniform":
            rng = np.random.Generator(np.random.PCG64(self.seed))
            return np.sort(rng.uniform(lo, hi, self.steps))
        if self.steps == 1:
            return np.array([lo if lo == hi else 0.5 * (lo + hi)])
        gaps = (self.steps - 1) + 0.5 * (not lo_closed) + 0.5 * (not hi_closed)
        h = (hi - lo) / gaps
        start = lo + (0.0 if lo_closed else 0.5 * h)
        pts = start + h * np.arange(self.steps)
        if hi_closed:
            pts[-1] = hi
        return pts


@dataclass(frozen=True)
class SweepRow:
    param_value: float
    p1: float
    p2: float
    p3: float
    pi1: float
    pi2: float
    pi3: float
    du: float
    do: float
    de: float
    concavity_ok: bool
    feasible: bool
    error: str | None = None
    failed_checks: tuple = ()


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    rows: tuple = field(default_factory=tuple)

    def column(self, name) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=np.float64)

    def ok_rows(self) -> list:
        return [r for r in self.rows if r.error is None]


def _error_code(exc: ModelError) -> str:
    if isinstance(exc, SingularDenominator):
        return "singular_denominator"
    if isinstance(exc, DegenerateDenominator):
        return f"degenerate_denominator:{exc.name}"
    return type(exc).__name__


def evaluate_point(base: MarketParams, param: str, value: float) -> SweepRow:
    params = base.replace(**{param: float(value)})
    concavity_ok = params.model_valid
    try:
        eq = solve_equilibrium(params)
    except ModelError as exc:
        nan = float("nan")
        return SweepRow(float(value), nan, nan, nan, nan, nan, nan, nan, nan, nan,
                        concavity_ok, False, _error_code(exc))
    failed = tuple(c.name for c in eq.failed_checks())
    return SweepRow(
        float(value), *eq.prices, *eq.profits, *eq.split,
        concavity_ok=concavity_ok and eq.concavity.concave,
        feasible=not failed,
        failed_checks=failed,
    )


def ofat_sweep(spec: SweepSpec) -> SweepResult:
    """Vary ``spec.param`` over its points with every other parameter at base.

    Every point yields a row: numerical failures carry an error code and
    concavity violations are annotated rather than dropped.
    """
    pts = spec.points()
    rows = tuple(evaluate_point(spec.base, spec.param, v) for v in pts)
    return SweepResult(spec, rows)


def _label(values: np.ndarray, flat_tol: float) -> str:
    diffs = np.diff(values)
    scale = np.maximum(np.abs(values[:-1]), np.abs(values[1:]))
    flat = np.abs(diffs) <= flat_tol * scale
    if flat.all():
        return "flat"
    moving = diffs[~flat]
    if (moving > 0).all():
        return "increasing"
    if (moving < 0).all():
        return "decreasing"
    return "non-monotone"


def sign_summary(result: SweepResult, columns=COLUMNS, flat_tol=FLAT_TOL) -> dict:
    """Monotonicity label per column over consecutive rows that evaluated cleanly.

    Labels are ``increasing``, ``decreasing``, ``flat`` or ``non-monotone``;
    steps within ``flat_tol`` relative are ignored.
    """
    rows = result.ok_rows()
    if len(rows) < 2:
        raise InsufficientData(f"need at least 2 evaluated rows, got {len(rows)}")
    return {c: _label(np.array([getattr(r, c) for r in rows]), flat_tol) for c in columns}
