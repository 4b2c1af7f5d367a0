"""Command-line front end.

Subcommands::

    scoremech classify  --rule log|quadratic [--grid SPEC] [--out PATH]
    scoremech discount  --rule log|quadratic --config MODEL.json [--out PATH]
    scoremech simulate  --config SCENARIO.json [--samples N] [--seed N] [--out PATH]
    scoremech market simulate --config MARKET.json [--samples N] [--seed N]
                              [--log PATH] [--out PATH]
    scoremech market replay   --log PATH [--out PATH]

Config files are JSON mirroring the domain types (model, schedule, prior).
Every command is deterministic given (config, seed); reports print floats
with 12 significant digits. Trade logs keep full-precision floats because
replay re-verifies costs to 1e-10, which rounding would break.

Exit codes: 0 success, 2 config error, 3 numeric failure, 4 consistency
failure (tampered logs, Monte-Carlo disagreement with the analytic curve).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass

from . import amm, game
from .beliefs import SignalModel, posterior_pair, posterior_single
from .discounting import (
    DiscountSchedule,
    required_ratio_log,
    required_ratio_numeric,
)
from .errors import (
    DiscountIneffectiveError,
    LogConsistencyError,
    MechanismError,
    NumericError,
    ValidationError,
)
from .scoring import NormalBelief, ScoringRule
from .truthfulness import classify_log, classify_quadratic

__all__ = ["main", "SweepConfig", "cmd_classify", "cmd_simulate", "cmd_market"]

_EXIT_OK = 0
_EXIT_CONFIG = 2
_EXIT_NUMERIC = 3
_EXIT_CONSISTENCY = 4

_CSV_SCHEMA = "# scoremech-classify v1"

# Monte-Carlo curve points must match the analytic gain curve within this
# many standard errors for the simulate report's agreement flag.
_AGREEMENT_SIGMAS = 4.0

_DEFAULT_C_GRID = (-4.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 4.0)


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _round12(obj):
    """Recursively round floats to 12 significant digits for report JSON."""
    if isinstance(obj, float):
        return float(_fmt(obj)) if math.isfinite(obj) else obj
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    return obj


def _emit(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _emit_report(report: dict, out_path: str | None) -> None:
    _emit(json.dumps(_round12(report), sort_keys=True, indent=2) + "\n", out_path)


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(
            f"config {path} is not valid JSON (line {exc.lineno}, column {exc.colno})"
        ) from exc


def _model_from(record: dict, where: str) -> SignalModel:
    try:
        return SignalModel(
            tau_a=record["tau_a"],
            tau_b=record["tau_b"],
            tau_c=record.get("tau_c", 0.0),
            rho=record.get("rho", 0.0),
            c0=record.get("c0", 0.0),
        )
    except KeyError as exc:
        raise ValidationError(f"{where}: missing model field {exc}") from exc
    except TypeError as exc:
        raise ValidationError(f"{where}: malformed model record: {exc}") from exc


def _rule_from(name: str) -> ScoringRule:
    aliases = {
        "log": ScoringRule.LOGARITHMIC,
        "logarithmic": ScoringRule.LOGARITHMIC,
        "quadratic": ScoringRule.QUADRATIC,
    }
    try:
        return aliases[name]
    except KeyError:
        raise ValidationError(f"unknown rule {name!r} (use log or quadratic)") from None


def _schedule_from(record: dict | None) -> DiscountSchedule:
    if record is None:
        return DiscountSchedule(kind="constant", k0=1.0)
    return DiscountSchedule.from_config(record)


# ---------------------------------------------------------------------------
# classify


@dataclass(frozen=True)
class SweepConfig:
    """Grid sweep over (rho, tau_A/tau_B ratio, tau_C) for one rule."""

    rule: ScoringRule
    rho_values: tuple[float, ...]
    ratio_values: tuple[float, ...]
    tau_c_values: tuple[float, ...]
    out: str | None = None

    def __post_init__(self) -> None:
        if not (self.rho_values and self.ratio_values and self.tau_c_values):
            raise ValidationError("sweep ranges must be non-empty")
        if any(not -1.0 <= r <= 1.0 for r in self.rho_values):
            raise ValidationError("rho values must lie in [-1, 1]")
        if any(r <= 0 for r in self.ratio_values):
            raise ValidationError("precision ratios must be positive")
        if any(c < 0 for c in self.tau_c_values):
            raise ValidationError("tau_c values must be non-negative")


def _parse_values(text: str, name: str) -> tuple[float, ...]:
    """Comma list ('0,1,100') or inclusive range ('-0.95:0.95:0.05')."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValidationError(f"{name}: range spec must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ValidationError(f"{name}: need positive step and stop >= start")
        count = int(round((stop - start) / step)) + 1
        return tuple(round(start + i * step, 12) for i in range(count))
    try:
        return tuple(float(p) for p in text.split(","))
    except ValueError as exc:
        raise ValidationError(f"{name}: {exc}") from exc


def _parse_grid_spec(spec: str | None) -> dict[str, tuple[float, ...]]:
    values = {
        "rho": _parse_values("-0.95:0.95:0.05", "rho"),
        "ratio": (0.25, 1.0, 4.0),
        "tau_c": (0.0, 1.0, 100.0),
    }
    if spec is None:
        return values
    for part in spec.split(";"):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ValidationError(f"grid spec segment {part!r} is not name=values")
        name, text = part.split("=", 1)
        name = name.strip()
        if name not in values:
            raise ValidationError(f"unknown grid dimension {name!r}")
        values[name] = _parse_values(text, name)
    return values


def cmd_classify(config: SweepConfig) -> str:
    """Sweep the grid and render the CSV (also written to config.out)."""
    buf = io.StringIO()
    buf.write(_CSV_SCHEMA + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        [
            "rule",
            "rho",
            "tau_a",
            "tau_b",
            "tau_c",
            "globally_truthful",
            "locally_truthful",
            "margin",
            "k_min",
        ]
    )
    rule_name = config.rule.value
    for rho in sorted(config.rho_values):
        for ratio in sorted(config.ratio_values):
            for tau_c in sorted(config.tau_c_values):
                model = SignalModel(tau_a=ratio, tau_b=1.0, tau_c=tau_c, rho=rho)
                if config.rule is ScoringRule.LOGARITHMIC:
                    verdict = classify_log(model)
                else:
                    verdict = classify_quadratic(model)
                try:
                    if config.rule is ScoringRule.LOGARITHMIC:
                        k_min = _fmt(required_ratio_log(model))
                    else:
                        k_min = _fmt(required_ratio_numeric(config.rule, model))
                except DiscountIneffectiveError:
                    k_min = "inf"
                writer.writerow(
                    [
                        rule_name,
                        _fmt(rho),
                        _fmt(model.tau_a),
                        _fmt(model.tau_b),
                        _fmt(tau_c),
                        str(verdict.globally_truthful).lower(),
                        str(verdict.locally_truthful).lower(),
                        _fmt(verdict.margin),
                        k_min,
                    ]
                )
    text = buf.getvalue()
    if config.out is not None:
        _emit(text, config.out)
    return text


# ---------------------------------------------------------------------------
# discount


def cmd_discount(rule: ScoringRule, model: SignalModel, out: str | None) -> dict:
    if rule is ScoringRule.LOGARITHMIC:
        verdict = classify_log(model)
    else:
        verdict = classify_quadratic(model)
    report: dict = {
        "schema": "scoremech-discount v1",
        "rule": rule.value,
        "model": {
            "tau_a": model.tau_a,
            "tau_b": model.tau_b,
            "tau_c": model.tau_c,
            "rho": model.rho,
        },
        "globally_truthful": verdict.globally_truthful,
        "locally_truthful": verdict.locally_truthful,
        "margin": verdict.margin,
    }
    try:
        k_numeric = required_ratio_numeric(rule, model)
        report["discount_effective"] = True
        report["k_min_numeric"] = k_numeric
        if rule is ScoringRule.LOGARITHMIC:
            report["k_min_analytic"] = required_ratio_log(model)
    except DiscountIneffectiveError as exc:
        report["discount_effective"] = False
        report["reason"] = str(exc)
    _emit_report(report, out)
    return report


# ---------------------------------------------------------------------------
# simulate


def _mechanism_comparison(scenario: game.Scenario, seeds: int, seed: int) -> dict:
    out: dict = {}
    for mech in ("group", "single", "discounted_msr"):
        totals: dict[str, float] = {}
        for i in range(seeds):
            for expert, pay in game.run_mechanism(mech, scenario, seed, index=i).items():
                totals[expert] = totals.get(expert, 0.0) + pay
        out[mech] = {e: v / seeds for e, v in sorted(totals.items())}
    return out


def cmd_simulate(config: dict, samples: int, seed: int, out: str | None) -> tuple[dict, bool]:
    """Run the scenario's Monte-Carlo checks; returns (report, agreement)."""
    model = _model_from(config.get("model", {}), "scenario")
    rule = _rule_from(config.get("rule", "log"))
    schedule = _schedule_from(config.get("schedule"))
    c_grid = tuple(float(c) for c in config.get("c_grid", _DEFAULT_C_GRID))
    if model.tau_c <= 0:
        raise ValidationError(
            "scenario model needs tau_c > 0 to sample outcomes; "
            "use a small positive tau_c to approximate an uninformative prior"
        )

    verdict = classify_log(model) if rule is ScoringRule.LOGARITHMIC else classify_quadratic(model)
    curve = []
    agreement = True
    for c in c_grid:
        mc_mean, mc_se = game.deviation_gain(model, rule, schedule, c, samples, seed)
        analytic = game.analytic_gain(model, rule, schedule, c)
        gap_scale = max(mc_se, 1e-12)
        z = (mc_mean - analytic) / gap_scale
        if abs(z) > _AGREEMENT_SIGMAS:
            agreement = False
        curve.append(
            {
                "c": c,
                "mc_mean": mc_mean,
                "mc_std_error": mc_se,
                "analytic": analytic,
                "z_vs_analytic": z,
            }
        )
    best = game.best_response(model, rule, schedule)
    scenario = game.Scenario(model=model, rule=rule, schedule=schedule)
    mech_seeds = min(samples, 2000)
    report = {
        "schema": "scoremech-simulate v1",
        "rule": rule.value,
        "model": {
            "tau_a": model.tau_a,
            "tau_b": model.tau_b,
            "tau_c": model.tau_c,
            "rho": model.rho,
            "c0": model.c0,
        },
        "schedule": schedule.to_config(),
        "samples": samples,
        "seed": seed,
        "analytic_verdict": {
            "globally_truthful": verdict.globally_truthful,
            "locally_truthful": verdict.locally_truthful,
            "margin": verdict.margin,
        },
        "gain_curve": curve,
        "best_response": {
            "c_star": best.c_star,
            "gain": best.gain,
            "bound_hit": best.bound_hit,
        },
        "mechanisms": _mechanism_comparison(scenario, mech_seeds, seed),
        "agreement": agreement,
    }
    _emit_report(report, out)
    return report, agreement


# ---------------------------------------------------------------------------
# market


def _truthful_session_loss(
    model: SignalModel,
    prior: NormalBelief,
    schedule: DiscountSchedule,
    n_bins: int,
    affine_shift: float,
    seed: int,
    index: int,
) -> tuple[float, float, "amm.MarketState", list]:
    lam, a0, b0 = game.draw_world(model, seed, index)
    state = amm.open_market(
        prior, schedule, n_bins=n_bins, affine_shift=affine_shift
    )
    records = []
    state, rec = amm.trade(state, posterior_single(model, a0), trader="alice", t=1)
    records.append(rec)
    state, rec = amm.trade(state, posterior_pair(model, a0, b0), trader="bob", t=2)
    records.append(rec)
    state, rec = amm.trade(state, posterior_pair(model, a0, b0), trader="alice", t=3)
    records.append(rec)
    report = amm.settle(state, lam, records)
    return report.maker_loss, lam, state, records


def cmd_market_simulate(
    config: dict, sessions: int, seed: int, out: str | None, log_path: str | None
) -> dict:
    model = _model_from(config.get("model", {}), "market config")
    prior_rec = config.get("prior")
    if prior_rec is None:
        prior = NormalBelief(model.c0, model.tau_c)
    else:
        prior = NormalBelief(prior_rec["mean"], prior_rec["precision"])
    schedule = _schedule_from(config.get("schedule"))
    n_bins = int(config.get("n_bins", 512))
    affine_shift = float(config.get("affine_shift", 0.0))
    if model.tau_c <= 0:
        raise ValidationError("market model needs tau_c > 0 to sample outcomes")
    if sessions < 1:
        raise ValidationError("need at least one session")

    losses = []
    exemplar = None
    for i in range(sessions):
        loss, lam, state, records = _truthful_session_loss(
            model, prior, schedule, n_bins, affine_shift, seed, i
        )
        losses.append(loss)
        if i == sessions - 1:
            exemplar = (state, records, lam)
    mean_loss = sum(losses) / sessions
    if sessions > 1:
        var = sum((x - mean_loss) ** 2 for x in losses) / (sessions - 1)
        se = math.sqrt(var / sessions)
    else:
        se = 0.0
    state, records, lam = exemplar
    settlement = amm.settle(state, lam, records)
    if log_path is not None:
        opening = amm.open_market(prior, schedule, n_bins=n_bins, affine_shift=affine_shift)
        amm.write_log(log_path, opening, records, settlement)
    report = {
        "schema": "scoremech-market v1",
        "sessions": sessions,
        "seed": seed,
        "n_bins": n_bins,
        "schedule": schedule.to_config(),
        "prior": {"mean": prior.mean, "precision": prior.precision},
        "mean_maker_loss": mean_loss,
        "maker_loss_std_error": se,
        "loss_bound": settlement.loss_bound,
        "bound_satisfied": mean_loss <= settlement.loss_bound,
    }
    _emit_report(report, out)
    return report


def cmd_market_replay(log_path: str, out: str | None) -> dict:
    try:
        with open(log_path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ValidationError(f"cannot read log {log_path}: {exc}") from exc
    state, records, settlement = amm.replay(lines)
    report: dict = {
        "schema": "scoremech-replay v1",
        "trades": len(records),
        "final_t": state.t,
        "total_collected": sum(r.cost for r in records),
    }
    if settlement is not None:
        report["settlement"] = amm.settlement_to_json(settlement)["settlement"]
    _emit_report(report, out)
    return report


def cmd_market(args: argparse.Namespace) -> int:
    if args.market_cmd == "replay":
        cmd_market_replay(args.log, args.out)
        return _EXIT_OK
    config = _load_json(args.config) if args.config else {}
    cmd_market_simulate(config, args.samples, args.seed, args.out, args.log)
    return _EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scoremech",
        description="Strategy-proof prediction mechanisms: classification, "
        "discounting, simulation, and a discounted log-score market maker.",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("classify", help="sweep truthfulness verdicts to CSV")
    p.add_argument("--rule", default="log")
    p.add_argument("--grid", default=None, help="rho=a:b:step;ratio=...;tau_c=...")
    p.add_argument("--out", default=None)

    p = sub.add_parser("discount", help="required discount ratio for one model")
    p.add_argument("--rule", default="log")
    p.add_argument("--config", required=True, help="JSON file with a model record")
    p.add_argument("--out", default=None)

    p = sub.add_parser("simulate", help="Monte-Carlo check of a scenario file")
    p.add_argument("--config", required=True)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("market", help="simulate or replay a market session")
    msub = p.add_subparsers(dest="market_cmd", required=True)
    ps = msub.add_parser("simulate")
    ps.add_argument("--config", default=None)
    ps.add_argument("--samples", type=int, default=1000, help="number of sessions")
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--log", default=None, help="write the last session's trade log")
    ps.add_argument("--out", default=None)
    pr = msub.add_parser("replay")
    pr.add_argument("--log", required=True)
    pr.add_argument("--out", default=None)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.cmd == "classify":
            grid = _parse_grid_spec(args.grid)
            config = SweepConfig(
                rule=_rule_from(args.rule),
                rho_values=grid["rho"],
                ratio_values=grid["ratio"],
                tau_c_values=grid["tau_c"],
                out=args.out,
            )
            text = cmd_classify(config)
            if args.out is None:
                sys.stdout.write(text)
            return _EXIT_OK
        if args.cmd == "discount":
            record = _load_json(args.config)
            model = _model_from(record.get("model", record), "discount config")
            cmd_discount(_rule_from(args.rule), model, args.out)
            return _EXIT_OK
        if args.cmd == "simulate":
            config = _load_json(args.config)
            _, agreement = cmd_simulate(config, args.samples, args.seed, args.out)
            return _EXIT_OK if agreement else _EXIT_CONSISTENCY
        if args.cmd == "market":
            return cmd_market(args)
        raise ValidationError(f"unknown command {args.cmd!r}")
    except LogConsistencyError as exc:
        print(f"consistency error: {exc}", file=sys.stderr)
        return _EXIT_CONSISTENCY
    except ValidationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return _EXIT_NUMERIC
    except MechanismError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
