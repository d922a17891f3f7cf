"""Command-line front end.

Exit status: 0 for an affirmative outcome (found / feasible / pass), 2 for a
negative but valid one (none / infeasible / undetermined / fail), 1 on error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import certificate as cert_mod
from .certificate import (
    ExactificationError,
    build_moment_problem,
    solve_feasibility,
    truncated_gns,
    verify_certificate,
)
from .extraction import ExtractionError, PreconditionError, extract_classical, validate_strategy
from .formats import (
    FormatError,
    load_game,
    load_moments,
    load_strategy,
    save_certificate,
    save_classical,
    save_moments,
    save_strategy,
)
from .game import SearchBoundError, classical_value, search_classical

AFFIRMATIVE = {"found", "feasible", "pass"}
NEGATIVE = {"none", "infeasible", "undetermined", "fail"}


@dataclass
class RunReport:
    command: str
    inputs_digest: str
    outcome: str
    payloads: list = field(default_factory=list)
    residuals: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def exit_code(self) -> int:
        if self.outcome in AFFIRMATIVE:
            return 0
        if self.outcome in NEGATIVE:
            return 2
        return 1

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "inputs_digest": self.inputs_digest,
            "outcome": self.outcome,
            "payloads": self.payloads,
            "residuals": self.residuals,
            "details": self.details,
            "warnings": self.warnings,
            "wall_time": round(self.wall_time, 6),
        }

    def render(self, machine: bool = False) -> str:
        if machine:
            return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"
        lines = [
            f"command : {self.command}",
            f"inputs  : sha256:{self.inputs_digest}",
            f"outcome : {self.outcome}",
        ]
        for k, v in self.details.items():
            lines.append(f"{k:<8}: {v}" if len(k) <= 8 else f"{k}: {v}")
        for p in self.payloads:
            lines.append(f"wrote   : {p}")
        if self.residuals:
            lines.append("residuals:")
            width = max(len(k) for k in self.residuals)
            for k, v in self.residuals.items():
                lines.append(f"  {k:<{width}}  {v:.3e}")
        for w in self.warnings:
            lines.append(f"warning : {w}")
        lines.append(f"time    : {self.wall_time:.3f}s")
        return "\n".join(lines) + "\n"


def _digest(paths: Sequence[str]) -> str:
    h = hashlib.sha256()
    for p in paths:
        h.update(Path(p).read_bytes())
        h.update(b"\0")
    return h.hexdigest()


def _echo(argv: Sequence[str]) -> str:
    return "twoanswer " + " ".join(argv)


def _strategy_str(s) -> str:
    return "u=" + "".join(map(str, s.u)) + " v=" + "".join(map(str, s.v))


# ---------------------------------------------------------------------------
# commands


def cmd_classical(args, report: RunReport):
    g = load_game(args.game)
    s = search_classical(g)
    value = classical_value(g)
    report.outcome = "found" if s is not None else "none"
    report.details["strategy"] = _strategy_str(s) if s is not None else "none"
    report.details["value"] = f"{value.numerator}/{value.denominator}"
    if s is not None and args.out:
        report.payloads.append(str(save_classical(s, args.out)))


def cmd_validate(args, report: RunReport):
    g = load_game(args.game)
    s = load_strategy(args.strategy)
    rep = validate_strategy(s, g, args.tol)
    report.outcome = "pass" if rep.passed else "fail"
    report.residuals.update(rep.residuals())
    report.details["dim"] = s.dim


def cmd_extract(args, report: RunReport):
    g = load_game(args.game)
    s = load_strategy(args.strategy)
    rep = validate_strategy(s, g, args.tol)
    report.residuals.update(rep.residuals())
    if not rep.passed:
        report.outcome = "fail"
        report.details["reason"] = "strategy is not perfect at the given tolerance"
        return
    try:
        res = extract_classical(s, g, args.tol)
    except PreconditionError as exc:  # pragma: no cover - guarded above
        report.outcome = "fail"
        report.details["reason"] = str(exc)
        return
    report.outcome = "found"
    report.details["strategy"] = _strategy_str(res.strategy)
    report.details["margin"] = f"{res.margin:.6g}"
    out = args.out or f"{Path(args.strategy).stem}.classical.json"
    report.payloads.append(str(save_classical(res.strategy, out, res)))


def cmd_certify(args, report: RunReport):
    g = load_game(args.game)
    degrees = [args.degree] if args.degree else list(range(1, args.max_degree + 1))
    stem = Path(args.game).stem
    tried = []
    last = None
    for d in degrees:
        problem = build_moment_problem(g, d, max_side=args.max_side)
        res = solve_feasibility(problem, eps=args.eps, seed=args.seed)
        tried.append(f"d={d}:{res.status}")
        last = (d, problem, res)
        if res.status == "infeasible":
            break
    d, problem, res = last
    report.details["degrees"] = " ".join(tried)
    report.details["degree"] = d
    report.details["seed"] = args.seed
    report.outcome = res.status
    if res.status == "infeasible":
        c = res.certificate
        rep = verify_certificate(c, g, "float")
        report.residuals.update(rep.residuals())
        report.details["verified"] = "float"
        if args.exact:
            try:
                ex = verify_certificate(c, g, "exact")
            except ExactificationError as exc:
                report.warnings.append(f"exactification failed ({exc}); certificate is numerically verified only")
            else:
                if ex.passed:
                    c = ex.witness
                    report.details["verified"] = "exact"
                    report.residuals["exact_residual"] = 0.0
                else:  # pragma: no cover - float check passed above
                    report.warnings.append(ex.message)
        out = args.out or f"{stem}.d{d}.certificate.json"
        report.payloads.append(str(save_certificate(c, out)))
    elif res.status == "feasible":
        report.residuals.update(res.residuals)
        out = args.out or f"{stem}.d{d}.moments.json"
        report.payloads.append(str(save_moments(res.moments, out, g.x_count, g.y_count)))
    else:
        report.details["reason"] = res.message or "inconclusive at this degree"
        report.residuals.update(res.residuals)


def cmd_gns(args, report: RunReport):
    g = load_game(args.game)
    m, alphabet = load_moments(args.moments)
    if alphabet != (g.x_count, g.y_count):
        raise FormatError(f"moment file alphabet {alphabet} does not match game {(g.x_count, g.y_count)}")
    res = truncated_gns(m, g, tol=args.tol)
    report.residuals.update(res.residuals)
    report.residuals.update({f"validate_{k}": v for k, v in res.validation.residuals().items()})
    report.details["flat"] = res.flat
    report.details["rank"] = f"{res.rank} (lower block {res.rank_lower})"
    report.outcome = "pass" if res.passed else "fail"
    out = args.out or f"{Path(args.moments).stem}.gns.strategy"
    report.payloads.append(str(save_strategy(res.strategy, out)))
    if args.extract:
        if not res.passed:
            report.warnings.append("reconstruction not flat or residuals too large; extraction skipped")
            return
        ext = extract_classical(res.strategy, g, args.tol)
        report.details["strategy"] = _strategy_str(ext.strategy)
        cout = f"{Path(out).stem}.classical.json"
        report.payloads.append(str(save_classical(ext.strategy, cout, ext)))


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twoanswer", description="Perfect strategies and Nullstellensatz certificates for two-answer games."
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--machine", action="store_true", help="print the report as JSON")
    common.add_argument("--seed", type=int, default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classical", parents=[common], help="search for a perfect classical strategy")
    p.add_argument("game")
    p.add_argument("--out")
    p.set_defaults(func=cmd_classical, inputs=["game"])

    p = sub.add_parser("validate", parents=[common], help="check a finite strategy against a game")
    p.add_argument("game")
    p.add_argument("strategy")
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_validate, inputs=["game", "strategy"])

    p = sub.add_parser("extract", parents=[common], help="extract a perfect classical strategy")
    p.add_argument("game")
    p.add_argument("strategy")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--out")
    p.set_defaults(func=cmd_extract, inputs=["game", "strategy"])

    p = sub.add_parser("certify", parents=[common], help="solve the moment / certificate hierarchy")
    p.add_argument("game")
    p.add_argument("--degree", type=int, help="single degree (default: 1..--max-degree)")
    p.add_argument("--max-degree", type=int, default=3)
    p.add_argument("--max-side", type=int, default=cert_mod.MAX_MATRIX_SIDE)
    p.add_argument("--eps", type=float, default=cert_mod.DEFAULT_EPS)
    p.add_argument("--exact", action="store_true", help="exactify and verify the certificate in rationals")
    p.add_argument("--out")
    p.set_defaults(func=cmd_certify, inputs=["game"])

    p = sub.add_parser("gns", parents=[common], help="rebuild a strategy from a moment vector")
    p.add_argument("moments")
    p.add_argument("game")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--extract", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gns, inputs=["moments", "game"])
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    report = RunReport(_echo(argv), "", "error")
    try:
        report.inputs_digest = _digest([getattr(args, n) for n in args.inputs])
        args.func(args, report)
    except (FormatError, SearchBoundError, ExtractionError, ValueError, OSError) as exc:
        report.outcome = "error"
        report.details["error"] = f"{type(exc).__name__}: {exc}"
    report.wall_time = time.perf_counter() - start
    sys.stdout.write(report.render(args.machine))
    return report.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
