"""Command-line front end.

    pharma-bertrand solve  --scenario base_case
    pharma-bertrand demand --scenario base_case --p1 158.26 --p2 149.56 --p3 110.87
    pharma-bertrand verify --scenario feasible
    pharma-bertrand mc     --scenario feasible --n 1000000 --seed 42
    pharma-bertrand sweep  --scenario base_case --param beta --min 0.05 --max 1.0 --steps 20 --out beta.csv

``--scenario`` takes a JSON file path or the name of a bundled scenario.
Exit status: 0 success, 1 input error, 2 numerical degeneracy. Failed
feasibility checks are findings and do not change the exit status.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from . import __version__, _kernels
from .equilibrium import closed_form_prices, foc_residuals, solve_equilibrium, solve_foc_system
from .errors import InvalidSpec, MissingField, ModelError, FieldTypeError, ScenarioError, UnknownField
from .market_model import PARAM_NAMES, MarketParams, PriceVector, demand, profits
from .oracle import compare_with_analytic, monte_carlo_demand, nash_deviation_check
from .sensitivity import SweepSpec, ofat_sweep, sign_summary

SWEEP_HEADER = ("param_value", "p1", "p2", "p3", "pi1", "pi2", "pi3", "du", "do", "de",
                "concavity_ok", "feasible", "error")
PRICE_KEYS = ("p1", "p2", "p3")
META_KEYS = ("label", "notes")


@dataclass(frozen=True)
class ScenarioFile:
    params: MarketParams
    prices: PriceVector | None = None
    label: str = ""
    notes: str = ""

    def to_dict(self) -> dict:
        out = {"label": self.label, "notes": self.notes} if (self.label or self.notes) else {}
        out.update(self.params.as_dict())
        if self.prices is not None:
            out["prices"] = dict(zip(PRICE_KEYS, self.prices))
        return out


def _number(name, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise FieldTypeError(name, value)
    return float(value)


def scenario_from_dict(data: dict, strict=False) -> ScenarioFile:
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a JSON object")
    for key in data:
        if key not in PARAM_NAMES and key != "prices" and key not in META_KEYS:
            if strict:
                raise UnknownField(key)
            warnings.warn(f"ignoring unknown scenario field {key!r}", stacklevel=2)
    values = {}
    for name in PARAM_NAMES:
        if name not in data:
            raise MissingField(name)
        values[name] = _number(name, data[name])
    prices = None
    if "prices" in data:
        block = data["prices"]
        if not isinstance(block, dict):
            raise FieldTypeError("prices", block)
        for key in block:
            if key not in PRICE_KEYS:
                if strict:
                    raise UnknownField(f"prices.{key}")
                warnings.warn(f"ignoring unknown price field {key!r}", stacklevel=2)
        for key in PRICE_KEYS:
            if key not in block:
                raise MissingField(f"prices.{key}")
        prices = PriceVector(*(_number(f"prices.{k}", block[k]) for k in PRICE_KEYS))
    return ScenarioFile(MarketParams(**values), prices, str(data.get("label", "")), str(data.get("notes", "")))


def bundled_scenarios() -> list:
    return sorted(p.name[:-5] for p in resources.files("pharma_bertrand.data").iterdir() if p.name.endswith(".json"))


def parse_scenario(path, strict=False) -> ScenarioFile:
    """Read a scenario JSON file, or a bundled scenario by name."""
    p = Path(path)
    if p.is_file():
        text = p.read_text(encoding="utf-8")
    elif str(path) in bundled_scenarios():
        text = resources.files("pharma_bertrand.data").joinpath(f"{path}.json").read_text(encoding="utf-8")
    else:
        raise FileNotFoundError(f"no scenario file or bundled scenario named {str(path)!r}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON ({exc})") from exc
    return scenario_from_dict(data, strict=strict)


def write_scenario(scenario: ScenarioFile, path) -> None:
    Path(path).write_text(json.dumps(scenario.to_dict(), indent=2) + "\n", encoding="utf-8")


def scenario_hash(params: MarketParams) -> str:
    blob = json.dumps(params.as_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def _meta(params, command, **extra) -> dict:
    meta = {"tool": "pharma-bertrand", "version": __version__, "command": command,
            "scenario_sha256": scenario_hash(params), "backend": _kernels.BACKEND}
    meta.update(extra)
    return meta


def _num(v):
    # repr keeps full double precision; NaN/inf are not JSON, so emit them as strings
    return v if math.isfinite(v) else repr(v)


def _checks(checks) -> list:
    return [{"name": c.name, "ok": c.ok, "note": c.note} for c in checks]


def _table(rows, header) -> str:
    widths = [max(len(str(x)) for x in col) for col in zip(header, *rows)]
    lines = ["  ".join(str(x).ljust(w) for x, w in zip(header, widths))]
    lines += ["  ".join(str(x).ljust(w) for x, w in zip(r, widths)) for r in rows]
    return "\n".join(lines)


def _findings(checks) -> str:
    bad = [c for c in checks if not c.ok]
    if not bad:
        return "feasibility: all checks pass"
    return "feasibility findings:\n" + "\n".join(f"  [FAIL] {c.name}: {c.note}" for c in bad)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in r])
    return buf.getvalue()


def _resolve_prices(args, scenario):
    given = [getattr(args, k) for k in PRICE_KEYS]
    if all(v is not None for v in given):
        return PriceVector(*given)
    if any(v is not None for v in given):
        raise ValueError("give all of --p1, --p2, --p3 or none")
    return scenario.prices


def cmd_solve(args, scenario):
    params = scenario.params
    eq = solve_equilibrium(params)
    meta = _meta(params, "solve")
    if args.format == "structured":
        doc = {
            "meta": meta,
            "params": params.as_dict(),
            "prices": dict(zip(PRICE_KEYS, eq.prices)),
            "demands": dict(zip(("du", "do", "de"), eq.split)),
            "profits": dict(zip(("pi1", "pi2", "pi3"), eq.profits)),
            "thresholds": eq.points.__dict__,
            "regime": eq.regime.case_label if eq.regime else None,
            "regime_notes": _checks(eq.regime_notes),
            "foc_residuals": list(eq.foc_residuals),
            "concavity": {"cond_main": eq.concavity.cond_main, "cond_aux": eq.concavity.cond_aux,
                          "second_derivatives": [_num(v) for v in eq.concavity.second_derivatives]},
            "feasible": eq.feasible,
            "feasibility": _checks(eq.feasibility),
        }
        return json.dumps(doc, indent=2) + "\n"
    rows = [(ch, *vals) for ch, vals in zip(
        ("unorganized", "organized", "online"), zip(eq.prices, eq.split, eq.profits))]
    if args.format == "csv":
        return _csv_text(("channel", "price", "demand", "profit"), rows)
    shown = [(ch, f"{p:.2f}", f"{d:.4f}", f"{pi:.2f}") for ch, p, d, pi in rows]
    return "\n".join([
        f"scenario {scenario.label or '-'}  sha256 {meta['scenario_sha256'][:12]}  version {__version__}",
        _table(shown, ("channel", "price", "demand", "profit")),
        f"regime: {eq.regime.case_label if eq.regime else 'tie'}",
        *(f"  note: {c.note}" for c in eq.regime_notes),
        "FOC residuals: " + ", ".join(f"{r:.3e}" for r in eq.foc_residuals),
        _findings(eq.feasibility),
    ]) + "\n"


def cmd_demand(args, scenario):
    params = scenario.params
    prices = _resolve_prices(args, scenario) or closed_form_prices(params, warn=False)
    out = demand(params, prices, args.channels, interior=args.interior)
    pis = profits(params, prices, out.split)
    meta = _meta(params, "demand")
    if args.format == "structured":
        return json.dumps({
            "meta": meta,
            "prices": dict(zip(PRICE_KEYS, prices)),
            "channels": "".join(c for c in "uoe" if c in out.regime.channel_set),
            "regime": out.regime.case_label,
            "active": "".join(c for c in "uoe" if c in out.regime.active_set),
            "demands": dict(zip(("du", "do", "de"), out.split)),
            "profits": dict(zip(("pi1", "pi2", "pi3"), pis)),
            "diagnostics": _checks(out.diagnostics),
        }, indent=2) + "\n"
    rows = list(zip(("unorganized", "organized", "online"), prices, out.split, pis))
    if args.format == "csv":
        return _csv_text(("channel", "price", "demand", "profit"), rows)
    shown = [(ch, f"{p:.2f}", f"{d:.4f}", f"{pi:.2f}") for ch, p, d, pi in rows]
    return "\n".join([_table(shown, ("channel", "price", "demand", "profit")),
                      f"regime: {out.regime.case_label}", _findings(out.diagnostics)]) + "\n"


def _relative(gain, pi):
    if pi:
        return gain / abs(pi)
    return 0.0 if gain == 0.0 else _num(math.inf)


def cmd_verify(args, scenario):
    params = scenario.params
    closed = closed_form_prices(params, warn=False)
    prices = _resolve_prices(args, scenario) or closed
    residuals = foc_residuals(params, prices)
    linear = solve_foc_system(params)
    delta = max(abs(a - b) / max(1.0, abs(b)) for a, b in zip(closed, linear))
    reports = nash_deviation_check(params, prices, args.rel_range, args.grid_steps)
    pis = profits(params, prices, demand(params, prices, interior=True).split)
    est = monte_carlo_demand(params, prices, n=args.n, seed=args.seed)
    cmp = compare_with_analytic(params, prices, est, interior=True)
    doc = {
        "meta": _meta(params, "verify", seed=args.seed, generator=est.generator),
        "prices": dict(zip(PRICE_KEYS, prices)),
        "foc_residuals": list(residuals),
        "closed_form": list(closed),
        "linear_solve": list(linear),
        "closed_vs_linear_max_rel": delta,
        "deviation": [{"channel": r.channel, "incumbent": r.incumbent_price,
                       "best_price": r.best_deviation_price, "profit_gain": r.profit_gain,
                       "relative_gain": _relative(r.profit_gain, pi),
                       "grid": list(r.grid)} for r, pi in zip(reports, pis)],
        "monte_carlo": {"valid": cmp.valid, "reason": cmp.reason, "n": est.n,
                        "estimate": list(est.d_hat), "std_err": list(est.std_err),
                        "analytic": list(cmp.analytic), "z": [_num(z) for z in cmp.z],
                        "within_3se": cmp.within(3.0)},
    }
    if args.format == "structured":
        return json.dumps(doc, indent=2) + "\n"
    if args.format == "csv":
        rows = [(r.channel, r.incumbent_price, f, r.best_deviation_price, r.profit_gain)
                for r, f in zip(reports, residuals)]
        return _csv_text(("channel", "price", "foc_residual", "best_deviation_price", "profit_gain"), rows)
    lines = [
        "FOC residuals: " + ", ".join(f"{r:.3e}" for r in residuals),
        f"closed form vs linear solve: max relative difference {delta:.3e}",
        _table([(r.channel, f"{r.incumbent_price:.4f}", f"{r.best_deviation_price:.4f}", f"{r.profit_gain:.3e}")
                for r in reports], ("channel", "price", "best deviation", "profit gain")),
    ]
    if cmp.valid:
        lines.append(_table(
            [(ch, f"{a:.5f}", f"{d:.5f}", f"{z:+.2f}") for ch, a, d, z in zip("uoe", cmp.analytic, est.d_hat, cmp.z)],
            ("channel", "analytic", "monte carlo", "z")))
        lines.append("monte carlo within 3 s.e.: " + ("yes" if cmp.within(3.0) else "NO"))
    else:
        lines.append(f"monte carlo comparison skipped: {cmp.reason}")
    return "\n".join(lines) + "\n"


def cmd_mc(args, scenario):
    params = scenario.params
    prices = _resolve_prices(args, scenario) or closed_form_prices(params, warn=False)
    est = monte_carlo_demand(params, prices, args.channels, n=args.n, seed=args.seed, workers=args.workers)
    meta = _meta(params, "mc", seed=args.seed, generator=est.generator)
    if args.format == "structured":
        return json.dumps({"meta": meta, "prices": dict(zip(PRICE_KEYS, prices)), "n": est.n,
                           "d_hat": dict(zip(("du", "do", "de"), est.d_hat)),
                           "std_err": dict(zip(("du", "do", "de"), est.std_err))}, indent=2) + "\n"
    rows = list(zip("uoe", est.d_hat, est.std_err))
    if args.format == "csv":
        return _csv_text(("channel", "d_hat", "std_err"), rows)
    return f"n={est.n} seed={est.seed}\n" + _table(
        [(c, f"{d:.6f}", f"{s:.2e}") for c, d, s in rows], ("channel", "d_hat", "std_err")) + "\n"


def cmd_sweep(args, scenario):
    spec = SweepSpec(scenario.params, args.param, args.min, args.max, args.steps,
                     mode=args.mode, seed=args.seed, strict=args.strict)
    result = ofat_sweep(spec)
    rows = [(r.param_value, r.p1, r.p2, r.p3, r.pi1, r.pi2, r.pi3, r.du, r.do, r.de,
             r.concavity_ok, r.feasible, r.error or "") for r in result.rows]
    if args.format == "structured":
        try:
            labels = sign_summary(result)
        except ValueError:
            labels = {}
        return json.dumps({
            "meta": _meta(scenario.params, "sweep", param=args.param, seed=args.seed),
            "columns": list(SWEEP_HEADER),
            "rows": [[_num(v) if isinstance(v, float) else v for v in r] for r in rows],
            "sign_summary": labels,
        }, indent=2) + "\n"
    return _csv_text(SWEEP_HEADER, rows)


COMMANDS = {"solve": cmd_solve, "demand": cmd_demand, "verify": cmd_verify, "mc": cmd_mc, "sweep": cmd_sweep}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pharma-bertrand", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, default_format="table"):
        p.add_argument("--scenario", required=True, help="scenario JSON path or bundled name")
        p.add_argument("--out", default=None, help="write output here instead of stdout")
        p.add_argument("--format", choices=("table", "csv", "structured"), default=default_format)
        p.add_argument("--strict", action="store_true", help="reject unknown fields and out-of-range sweeps")

    def price_flags(p):
        for k in PRICE_KEYS:
            p.add_argument(f"--{k}", type=float, default=None)

    common(sub.add_parser("solve", help="equilibrium prices, profits and feasibility"))
    p = sub.add_parser("demand", help="demand split and regime at given prices")
    common(p)
    price_flags(p)
    p.add_argument("--channels", default="uoe", help="offered channels, e.g. uoe, oe, uo, ue")
    p.add_argument("--interior", action="store_true", help="force the all-active three-channel formulas")
    p = sub.add_parser("verify", help="FOC residuals, linear-solve cross-check, deviation scan, Monte Carlo")
    common(p)
    price_flags(p)
    p.add_argument("--rel-range", type=float, default=0.5)
    p.add_argument("--grid-steps", type=int, default=1001)
    p.add_argument("--n", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p = sub.add_parser("mc", help="Monte Carlo demand estimate")
    common(p)
    price_flags(p)
    p.add_argument("--channels", default="uoe")
    p.add_argument("--n", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p = sub.add_parser("sweep", help="one-factor-at-a-time sweep as CSV")
    common(p, default_format="csv")
    p.add_argument("--param", required=True, choices=PARAM_NAMES)
    p.add_argument("--min", type=float, default=None)
    p.add_argument("--max", type=float, default=None)
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--mode", choices=("grid", "uniform"), default="grid")
    p.add_argument("--seed", type=int, default=None)
    return ap


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        scenario = parse_scenario(args.scenario, strict=args.strict)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", category=UserWarning)
            text = COMMANDS[args.command](args, scenario)
    except ModelError as exc:
        print(f"error: numerical degeneracy: {exc}", file=sys.stderr)
        return 2
    except (ScenarioError, InvalidSpec, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        if args.format == "csv":
            meta = _meta(scenario.params, args.command, seed=getattr(args, "seed", None))
            Path(f"{args.out}.meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    else:
        stdout.write(text)
    return 0


def main() -> None:
    raise SystemExit(run())
