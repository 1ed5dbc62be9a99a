"""Batch front-end: ingest a portfolio file, design and certify, report.

Two subcommands.  ``analyze`` runs the whole design pipeline and every
certificate (contract level and state level) and reports premia, benefit
shares, payoff schedule and certificate outcomes.  ``certify`` keeps the
designed contract as a baseline, applies the supplied premium or payoff
overrides, and re-runs the contract-level certificates against them.

Exit codes: 0 when every certificate passes, 1 on any input problem,
2 when at least one certificate fails.  Machine-readable output is
deterministic byte for byte given identical input and configuration.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings as warnings_module
from dataclasses import dataclass, replace
from typing import Sequence

from .certificates import Certificate
from .contracts import (
    ContractDesign,
    PayoffMatrix,
    PremiumAllocation,
    certificate_suite,
    design_contract,
    parse_portfolio,
)
from .errors import (
    DimensionMismatch,
    FaircoverError,
    InputParseError,
    ValidationError,
)
from .game import fuzzy_core_certificate, two_alternating_certificate
from .prob_space import expectation
from .state_payoffs import (
    PARTITION_BUDGET,
    alpha_star,
    fuzzy_fairness_certificate,
    state_fairness_certificate,
    state_maximality_certificate,
    state_price_allocation,
)

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_CERTIFICATE_FAILURE = 2

DEGENERATE_WARNING = "degenerate: no default risk"


@dataclass(frozen=True)
class RunConfig:
    """Configuration of one CLI run.

    ``tolerance`` of ``None`` means: take the portfolio file's tolerance
    if present, else 1e-9; the report echoes the effective value.
    """

    command: str
    input_path: str
    output_format: str = "text"
    tolerance: float | None = None
    fuzzy_samples: int = 10000
    seed: int = 42
    max_coalitions: int = 20
    max_events: int = 20
    partition_budget: int = PARTITION_BUDGET

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "input": self.input_path,
            "format": self.output_format,
            "tolerance": self.tolerance,
            "fuzzy_samples": self.fuzzy_samples,
            "seed": self.seed,
            "max_coalitions": self.max_coalitions,
            "max_events": self.max_events,
            "partition_budget": self.partition_budget,
        }


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # Usage problems are input errors: keep the 0/1/2 exit-code contract.
    def error(self, message):
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="faircover", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("input", help="portfolio file (JSON)")
        p.add_argument("--tolerance", type=float, default=None, help="slack tolerance (default 1e-9)")
        p.add_argument("--format", choices=("text", "json"), default="text", dest="output_format")
        p.add_argument("--fuzzy-samples", type=int, default=10000, dest="fuzzy_samples")
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--max-coalitions", type=int, default=20, dest="max_coalitions")
        p.add_argument("--max-events", type=int, default=20, dest="max_events")

    analyze = sub.add_parser("analyze", help="design a contract and run every certificate")
    add_common(analyze)

    certify = sub.add_parser("certify", help="certify supplied premia and/or payoffs")
    add_common(certify)
    certify.add_argument("--premia", type=float, nargs="+", default=None,
                         help="premium override, one value per player (insurer first)")
    certify.add_argument("--payoffs", default=None, dest="payoffs_path",
                         help="payoff override file: JSON {\"payoffs\": [[...per outcome] per player]}")
    return parser


def _load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as exc:
        raise InputParseError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputParseError(f"{path} is not valid JSON: {exc}") from None


def _effective_tolerance(cli_value: float | None, file_value: float | None) -> float:
    if cli_value is not None:
        if not math.isfinite(cli_value) or cli_value <= 0.0:
            raise ValidationError("tolerance", f"must be a positive number, got {cli_value!r}")
        return cli_value
    if file_value is not None:
        return file_value
    return 1e-9


def _state_certificates(design: ContractDesign, config: RunConfig) -> dict:
    """State-game certificates for the designed contract."""
    liability = design.liability
    w = design.distortion
    z = design.aggregate.total_loss + liability.k0
    q_star = design.q_star
    pi_star = state_price_allocation(z, q_star)
    tol = config.tolerance
    results: dict[str, object] = {}
    results["state_two_alternating"] = two_alternating_certificate(
        z, w, tol=tol, seed=config.seed
    )
    results["state_fuzzy_core"] = fuzzy_core_certificate(
        z,
        pi_star,
        w,
        sample_count=config.fuzzy_samples,
        seed=config.seed,
        q=q_star,
        tol=tol,
        max_outcomes=config.max_events,
    )
    excess_value = expectation(q_star, (z - design.aggregate.capital).positive_part())
    if excess_value <= tol:
        reason = {"skipped": DEGENERATE_WARNING}
        results["state_fairness"] = reason
        results["state_fuzzy_fairness"] = reason
        results["state_maximality"] = reason
        return results
    family = alpha_star(z, design.aggregate.capital, q_star, w, tol=tol)
    results["state_fairness"] = state_fairness_certificate(
        family, pi_star, w, tol=tol, max_outcomes=config.max_events
    )
    results["state_fuzzy_fairness"] = fuzzy_fairness_certificate(
        family,
        pi_star,
        w,
        sample_count=config.fuzzy_samples,
        seed=config.seed,
        tol=tol,
        max_outcomes=config.max_events,
    )
    results["state_maximality"] = state_maximality_certificate(
        family, w, partition_budget=config.partition_budget, seed=config.seed, tol=tol
    )
    return results


def _certificates_to_records(certificates: dict) -> dict:
    records = {}
    for name, cert in certificates.items():
        records[name] = cert.to_dict() if isinstance(cert, Certificate) else cert
    return records


def _all_passed(certificates: dict) -> bool:
    return all(
        cert.passed for cert in certificates.values() if isinstance(cert, Certificate)
    )


def _base_report(config: RunConfig, design: ContractDesign, names: Sequence[str]) -> dict:
    liability = design.liability
    agg = design.aggregate
    default_probability = liability.space.event_probability(agg.default_event)
    warnings_list = [DEGENERATE_WARNING] if agg.degenerate else []
    return {
        "schema": "faircover.report.v1",
        "config": config.to_dict(),
        "portfolio": {
            "probabilities": list(liability.space.probabilities),
            "k0": liability.k0,
            "agents": list(names),
            "distortion": design.distortion.to_dict(),
        },
        "players": ["insurer"] + list(names),
        "aggregate": {
            "total_loss": list(agg.total_loss.values),
            "premium_pool": agg.premium_pool,
            "capital": agg.capital,
            "default_outcomes": list(agg.default_event.indices),
            "default_probability": default_probability,
            "degenerate": agg.degenerate,
        },
        "scenario_measure": list(design.q_star.masses),
        "premia": list(design.premia.premia),
        "benefit_shares": list(design.shares.alpha),
        "payoffs": [list(row) for row in design.payoffs.rows],
        "benefits": [list(row) for row in design.benefits()],
        "warnings": warnings_list,
    }


def cmd_analyze(config: RunConfig) -> tuple[dict, int]:
    """Design, certify everything, and build the report."""
    data = _load_json(config.input_path)
    liability, distortion, names, file_tol = parse_portfolio(data)
    config = _with_tolerance(config, file_tol)
    with warnings_module.catch_warnings():
        warnings_module.simplefilter("ignore")
        design = design_contract(liability, distortion, tol=config.tolerance)
    certificates: dict[str, object] = dict(
        certificate_suite(
            liability,
            design.premia,
            design.payoffs,
            design.q_star,
            distortion,
            tol=config.tolerance,
            max_players=config.max_coalitions,
        )
    )
    certificates.update(_state_certificates(design, config))
    report = _base_report(config, design, names)
    report["command"] = "analyze"
    report["certificates"] = _certificates_to_records(certificates)
    passed = _all_passed(certificates)
    report["all_passed"] = passed
    return report, EXIT_OK if passed else EXIT_CERTIFICATE_FAILURE


def cmd_certify(
    config: RunConfig,
    premia_override: Sequence[float] | None = None,
    payoffs_path: str | None = None,
) -> tuple[dict, int]:
    """Certify supplied premia and/or payoffs against the portfolio."""
    data = _load_json(config.input_path)
    liability, distortion, names, file_tol = parse_portfolio(data)
    config = _with_tolerance(config, file_tol)
    with warnings_module.catch_warnings():
        warnings_module.simplefilter("ignore")
        design = design_contract(liability, distortion, tol=config.tolerance)

    n_players = liability.n_agents + 1
    premia = design.premia
    if premia_override is not None:
        if len(premia_override) != n_players:
            raise DimensionMismatch(
                f"{len(premia_override)} premia supplied for {n_players} players"
            )
        premia = PremiumAllocation(tuple(float(p) for p in premia_override))
    payoffs = design.payoffs
    if payoffs_path is not None:
        payoff_data = _load_json(payoffs_path)
        payoffs = _parse_payoff_override(payoff_data, liability, n_players)

    certificates = certificate_suite(
        liability,
        premia,
        payoffs,
        design.q_star,
        distortion,
        tol=config.tolerance,
        max_players=config.max_coalitions,
    )
    report = _base_report(config, design, names)
    report["command"] = "certify"
    report["overrides"] = {
        "premia": list(premia.premia) if premia_override is not None else None,
        "payoffs": [list(r) for r in payoffs.rows] if payoffs_path is not None else None,
    }
    report["certificates"] = _certificates_to_records(certificates)
    passed = _all_passed(certificates)
    report["all_passed"] = passed
    return report, EXIT_OK if passed else EXIT_CERTIFICATE_FAILURE


def _with_tolerance(config: RunConfig, file_tol: float | None) -> RunConfig:
    return replace(config, tolerance=_effective_tolerance(config.tolerance, file_tol))


def _parse_payoff_override(data: object, liability, n_players: int) -> PayoffMatrix:
    if not isinstance(data, dict) or "payoffs" not in data:
        raise ValidationError("payoffs", "override file must be an object with a 'payoffs' key")
    rows = data["payoffs"]
    if not isinstance(rows, list) or len(rows) != n_players:
        raise DimensionMismatch(
            f"payoff override has {len(rows) if isinstance(rows, list) else 'no'} rows "
            f"for {n_players} players"
        )
    m = liability.space.n_outcomes
    cleaned = []
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != m:
            raise DimensionMismatch(f"payoff row {i} must have {m} entries")
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in row):
            raise ValidationError(f"payoffs[{i}]", "entries must be numbers")
        cleaned.append(tuple(float(v) for v in row))
    return PayoffMatrix(liability.space, tuple(cleaned))


def _round5(x: float) -> str:
    return f"{x:.5f}"


def render_text(report: dict) -> str:
    """Human-readable rendering; numbers rounded to five decimals."""
    lines: list[str] = []
    portfolio = report["portfolio"]
    agg = report["aggregate"]
    lines.append(f"faircover {report['command']} report")
    lines.append("=" * len(lines[0]))
    lines.append(f"input: {report['config']['input']}")
    lines.append(f"distortion: {json.dumps(portfolio['distortion'], sort_keys=True)}")
    lines.append(f"tolerance: {report['config']['tolerance']:g}")
    lines.append("")
    lines.append(
        f"outcomes: {len(portfolio['probabilities'])}   agents: {len(portfolio['agents'])}   "
        f"equity k0: {_round5(portfolio['k0'])}"
    )
    lines.append(f"premium pool k: {_round5(agg['premium_pool'])}")
    lines.append(f"capital K:      {_round5(agg['capital'])}")
    lines.append(
        f"default outcomes: {agg['default_outcomes']}   "
        f"probability: {_round5(agg['default_probability'])}"
    )
    lines.append("pricing measure: [" + ", ".join(_round5(q) for q in report["scenario_measure"]) + "]")
    for warning in report["warnings"]:
        lines.append(f"warning: {warning}")
    lines.append("")
    header = f"{'player':<16}{'premium':>12}{'share':>10}  payoffs by outcome"
    lines.append(header)
    for i, player in enumerate(report["players"]):
        payoff_cells = ", ".join(_round5(v) for v in report["payoffs"][i])
        lines.append(
            f"{player:<16}{_round5(report['premia'][i]):>12}"
            f"{_round5(report['benefit_shares'][i]):>10}  [{payoff_cells}]"
        )
    lines.append("")
    lines.append("benefit participation by outcome")
    for i, player in enumerate(report["players"]):
        cells = ", ".join(_round5(v) for v in report["benefits"][i])
        lines.append(f"{player:<16}[{cells}]")
    if report.get("overrides"):
        lines.append("")
        lines.append(f"overrides: {json.dumps(report['overrides'], sort_keys=True)}")
    lines.append("")
    lines.append("certificates")
    for name in sorted(report["certificates"]):
        record = report["certificates"][name]
        if "skipped" in record:
            lines.append(f"  {name:<24}SKIPPED ({record['skipped']})")
            continue
        verdict = "PASS" if record["passed"] else "FAIL"
        lines.append(
            f"  {name:<24}{verdict}  worst {record['worst_label']} "
            f"slack {record['worst_slack']:.3e} (checked {record['checked_count']})"
        )
    lines.append("")
    lines.append("all certificates passed" if report["all_passed"] else "CERTIFICATE FAILURE")
    return "\n".join(lines) + "\n"


def render_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    if args.fuzzy_samples < 0:
        print("error: fuzzy-samples: must be nonnegative", file=sys.stderr)
        return EXIT_INPUT_ERROR
    config = RunConfig(
        command=args.command,
        input_path=args.input,
        output_format=args.output_format,
        tolerance=args.tolerance,
        fuzzy_samples=args.fuzzy_samples,
        seed=args.seed,
        max_coalitions=args.max_coalitions,
        max_events=args.max_events,
    )
    try:
        if args.command == "analyze":
            report, code = cmd_analyze(config)
        else:
            report, code = cmd_certify(
                config,
                premia_override=args.premia,
                payoffs_path=args.payoffs_path,
            )
    except FaircoverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    rendered = render_json(report) if config.output_format == "json" else render_text(report)
    sys.stdout.write(rendered)
    return code


def run() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    run()
