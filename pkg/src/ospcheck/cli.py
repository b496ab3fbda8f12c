"""Command-line surface: verify, ratio, analyze, fixtures, search.

Exit codes: 0 when everything passed (or the search found no
counterexample), 1 when a property failed or a counterexample was found or
the search budget ran out, 2 for usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from .checkers import check_dsic, check_ir, check_nnt, check_osp, welfare_ratio
from .mechanisms import (
    MechanismBundle,
    grand_bundle_ascending,
    second_price_single_item,
    serial_posted_price,
)
from .model import COMBINATORIAL, MULTI_UNIT, AuctionSetting, MechanismError
from .report import ReportDocument, audit_item, ratio_item, search_item, verdict_item
from .search import SearchSpace, default_payment_grid, falsify_impossibility
from .serialize import (
    ParseError,
    parse_domain,
    parse_mechanism,
    serialize_domain,
    serialize_mechanism,
)
from .structure import audit_ascending_structure
from .valuations import (
    Domain,
    ValuationError,
    adversarial_domain,
    restricted_additive_domain,
)

WORKERS_ENV = "OSPCHECK_WORKERS"

CHECKS = {"osp": check_osp, "dsic": check_dsic, "ir": check_ir, "nnt": check_nnt}


class UsageError(Exception):
    pass


def _workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}")
    if value < 1:
        raise UsageError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}")
    # verdicts are partition-independent by contract; the current engine
    # always evaluates in-process, so the count is accepted and ignored
    return value


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}")


def _load_bundle(report: ReportDocument, mechanism_path: str, domain_path=None) -> MechanismBundle:
    data = _read(mechanism_path)
    report.add_input(mechanism_path, data)
    parsed = parse_mechanism(data)
    domain = None
    if domain_path is not None:
        ddata = _read(domain_path)
        report.add_input(domain_path, ddata)
        domain = parse_domain(ddata)
    if isinstance(parsed, MechanismBundle):
        if domain is None:
            return parsed
        return MechanismBundle(tree=parsed.tree, strategies=parsed.strategies, domain=domain)
    raise UsageError(
        f"{mechanism_path} has no strategies section; verify/ratio need a full bundle"
    )


def _emit(report: ReportDocument, fmt: str) -> None:
    sys.stdout.write(report.to_json() if fmt == "machine" else report.to_text())


def _cmd_verify(args) -> int:
    report = ReportDocument(command="verify")
    names = [c.strip() for c in args.checks.split(",") if c.strip()]
    unknown = [c for c in names if c not in CHECKS]
    if unknown:
        raise UsageError(f"unknown checks: {', '.join(unknown)} (choose from {', '.join(CHECKS)})")
    bundle = _load_bundle(report, args.mechanism, args.domain)
    for name in names:
        report.add(verdict_item(CHECKS[name](*bundle.checker_args())))
    _emit(report, args.format)
    return 0 if report.ok else 1


def _cmd_ratio(args) -> int:
    report = ReportDocument(command="ratio")
    bundle = _load_bundle(report, args.mechanism, args.domain)
    report.add(ratio_item(welfare_ratio(*bundle.checker_args())))
    _emit(report, args.format)
    return 0 if report.ok else 1


def _cmd_analyze(args) -> int:
    report = ReportDocument(command="analyze")
    data = _read(args.mechanism)
    report.add_input(args.mechanism, data)
    parsed = parse_mechanism(data)
    tree = parsed.tree if isinstance(parsed, MechanismBundle) else parsed
    report.add(audit_item(audit_ascending_structure(tree)))
    _emit(report, args.format)
    return 0 if report.ok else 1


def _parse_fraction(raw: str, what: str) -> Fraction:
    try:
        return Fraction(raw)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad {what}: {raw!r} (expected an integer or P/Q)")


def _infer_grid_family(domain: Domain) -> str:
    tags = {v.tag for vs in domain.players for v in vs}
    if "single-minded-mu" in tags or "general-mu" in tags:
        return "mu-single-minded"
    if tags == {"additive"}:
        return "additive"
    if tags == {"unit-demand"}:
        return "unit-demand"
    return "ca-single-minded"


def _cmd_search(args) -> int:
    report = ReportDocument(command="search")
    config = {}
    if args.config:
        cdata = _read(args.config)
        report.add_input(args.config, cdata)
        try:
            config = json.loads(cdata)
        except json.JSONDecodeError as exc:
            raise ParseError(f"config syntax error at line {exc.lineno} column {exc.colno}: {exc.msg}")
        if not isinstance(config, dict):
            raise ParseError("search config must be a JSON object")

    domain_src = args.domain or config.get("domain")
    if domain_src is None:
        raise UsageError("search needs --domain FILE or a domain entry in the config")
    if isinstance(domain_src, str):
        ddata = _read(domain_src)
        report.add_input(domain_src, ddata)
        domain = parse_domain(ddata)
    else:
        domain = parse_domain(json.dumps(domain_src))

    if args.grid is not None:
        grid = tuple(_parse_fraction(g, "grid entry") for g in args.grid.split(","))
    elif "grid" in config:
        grid = tuple(_parse_fraction(str(g), "grid entry") for g in config["grid"])
    else:
        grid = default_payment_grid(domain.setting, _infer_grid_family(domain))

    target = args.target_ratio or config.get("target_ratio")
    if target is None:
        raise UsageError("search needs --target-ratio P/Q or a target_ratio config entry")
    target = _parse_fraction(str(target), "target ratio")

    depth = args.max_depth if args.max_depth is not None else config.get("max_depth")
    budget = args.budget if args.budget is not None else config.get("budget_seconds")
    prune = not args.no_prune and config.get("prune", True)

    _workers()
    space = SearchSpace(domain=domain, payment_grid=grid, max_depth=depth)
    try:
        verdict = falsify_impossibility(space, target, budget_seconds=budget, prune=prune)
    except ValueError as exc:
        raise UsageError(str(exc))
    report.add(search_item(verdict))
    _emit(report, args.format)
    return 0 if report.ok else 1


def _cmd_fixtures(args) -> int:
    report = ReportDocument(command="fixtures")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    m, n = args.m, args.n
    ca = AuctionSetting(kind=COMBINATORIAL, n=n, m=m)
    mu = AuctionSetting(kind=MULTI_UNIT, n=n, m=m)
    k = max(m, n)

    files = {
        "fig1_second_price.json": serialize_mechanism(
            second_price_single_item(2, tiebreak_winner=1)
        ),
        "mu_adversarial_domain.json": serialize_domain(adversarial_domain(mu, "mu-single-minded")),
        "ca_adversarial_domain.json": serialize_domain(adversarial_domain(ca, "ca-single-minded")),
        "additive_adversarial_domain.json": serialize_domain(adversarial_domain(ca, "additive")),
        "unit_demand_adversarial_domain.json": serialize_domain(
            adversarial_domain(ca, "unit-demand")
        ),
        "restricted_additive_domain.json": serialize_domain(
            restricted_additive_domain(1, 3, ca)
        ),
        "serial_posted_price.json": serialize_mechanism(serial_posted_price(1, 3, ca)),
        "grand_bundle_ascending_mu.json": serialize_mechanism(
            grand_bundle_ascending(mu, k**4, domain=adversarial_domain(mu, "mu-single-minded"))
        ),
    }
    written = []
    for name, text in files.items():
        path = out / name
        path.write_text(text, encoding="utf-8")
        written.append(str(path))
    report.add({"kind": "fixtures", "written": written})
    _emit(report, args.format)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ospcheck",
        description="Verify sequential auction mechanisms: incentive properties, "
        "welfare ratios, structural audits, and bounded counterexample search.",
        epilog=f"Environment: {WORKERS_ENV} sets the worker count for partitionable "
        "scans (accepted for forward compatibility; results never depend on it).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("text", "machine"), default="text",
                       help="report rendering (default: text)")

    p = sub.add_parser("verify", help="run property checks on a mechanism bundle")
    p.add_argument("--mechanism", required=True, help="mechanism file (with strategies)")
    p.add_argument("--domain", help="domain file overriding the bundle's domain")
    p.add_argument("--checks", default="osp,dsic,ir,nnt",
                   help="comma list from osp,dsic,ir,nnt (default: all)")
    common(p)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("ratio", help="exact welfare-approximation ratio over a domain")
    p.add_argument("--mechanism", required=True)
    p.add_argument("--domain", help="domain file overriding the bundle's domain")
    common(p)
    p.set_defaults(func=_cmd_ratio)

    p = sub.add_parser("analyze", help="structural audit (continue-or-quit classification)")
    p.add_argument("--mechanism", required=True)
    common(p)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("fixtures", help="write reference mechanisms and domains to files")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--m", type=int, default=2, help="item count (default 2)")
    p.add_argument("--n", type=int, default=2, help="player count (default 2)")
    common(p)
    p.set_defaults(func=_cmd_fixtures)

    p = sub.add_parser("search", help="exhaustive counterexample search at desk scale")
    p.add_argument("--config", help="JSON config block; flags override its entries")
    p.add_argument("--domain", help="domain file")
    p.add_argument("--target-ratio", help="scan for mechanisms strictly below this ratio (P/Q)")
    p.add_argument("--grid", help="comma list of payment levels (default: impossibility-argument thresholds)")
    p.add_argument("--max-depth", type=int, help="tree depth cap (default: total valuation count)")
    p.add_argument("--budget", type=float, help="time budget in seconds (default: unlimited)")
    p.add_argument("--no-prune", action="store_true", help="disable search pruning")
    common(p)
    p.set_defaults(func=_cmd_search)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, ParseError, MechanismError, ValuationError) as exc:
        print(f"ospcheck: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
