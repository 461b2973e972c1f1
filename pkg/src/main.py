"""
Command-line entry point.

    graded-identities verify thm21 --n 2 --gens 8 --trials 25 --seed 7 --json
    graded-identities emit thm23 --n 2 --format latex
    graded-identities selftest
    graded-identities charpoly --even A.json --odd B.json --check

Exit codes: 0 success, 1 failed identity or self-test, 2 usage error.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from config import get_settings
from src.algebra.grassmann import AlgebraConfig
from src.algebra.supermatrix import MatrixE, matrix_from_json
from src.core.errors import AlgebraError, IdentityViolationError
from src.core.logging_config import get_logger, setup_logging
from src.schemas.trial_schemas import TheoremSelector, TrialConfig
from src.services.charpoly_service import CharPolyService
from src.services.graded_identity_service import GradedIdentityService
from src.services.selftest_service import SelfTestService
from src.services.trace_symbolic_service import EmitFormat, SymbolicTheorem, TraceSymbolicService
from src.services.trial_service import TrialRunner, resolve_generator_count

logger = get_logger(__name__)

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graded-identities",
        description="Exact Grassmann-algebra verification of graded Cayley-Hamilton trace identities.",
    )
    parser.add_argument("--log-level", choices=LOG_LEVELS, default=None, help="Override the configured log level")
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="Run seeded randomized trials of one identity")
    verify.add_argument("theorem", choices=[t.value for t in TheoremSelector])
    verify.add_argument("--n", type=int, required=True, help="Matrix size")
    verify.add_argument("--gens", type=int, default=None, help="Generator count G")
    verify.add_argument("--trials", type=int, default=None)
    verify.add_argument("--seed", type=int, default=None)
    verify.add_argument("--degree", type=int, default=None, help="Max blade degree per entry term")
    verify.add_argument("--terms", type=int, default=None, help="Terms per matrix entry")
    verify.add_argument("--workers", type=int, default=None, help="Worker processes")
    verify.add_argument("--json", action="store_true", help="Print the JSON report")
    verify.add_argument("--no-timings", action="store_true", help="Drop timing fields from the JSON report")
    verify.add_argument("--output", type=Path, default=None, help="Also write the JSON report here")

    emit_cmd = sub.add_parser("emit", help="Print the symbolic identity for a given n")
    emit_cmd.add_argument("theorem", choices=[t.value for t in SymbolicTheorem])
    emit_cmd.add_argument("--n", type=int, required=True)
    emit_cmd.add_argument("--format", choices=[f.value for f in EmitFormat], default=EmitFormat.LATEX.value)
    emit_cmd.add_argument("--output", type=Path, default=None)

    selftest = sub.add_parser("selftest", help="Golden closed forms and hand-checked examples")
    selftest.add_argument("--json", action="store_true")

    charpoly = sub.add_parser("charpoly", help="Characteristic data of matrices read from JSON files")
    charpoly.add_argument("--even", type=Path, required=True, help="Even matrix A (or H)")
    charpoly.add_argument("--odd", type=Path, default=None, help="Odd matrix B; prints (alpha_k, beta_k)")
    charpoly.add_argument(
        "--check", action="store_true", help="Cross-check against the Leibniz expansion or the companion route"
    )
    charpoly.add_argument("--json", action="store_true")
    return parser


def _write(text: str, output: Optional[Path]) -> None:
    print(text)
    if output is not None:
        output.write_text(text + "\n")


def _run_verify(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    settings = get_settings()
    harness = settings.harness
    theorem = TheoremSelector(args.theorem)
    generator_count, source = resolve_generator_count(theorem, args.n, args.gens, settings)
    try:
        cfg = TrialConfig(
            theorem=theorem,
            n=args.n,
            generator_count=generator_count,
            generator_count_source=source,
            trials=args.trials if args.trials is not None else harness.default_trials,
            seed=args.seed if args.seed is not None else harness.default_seed,
            degree=args.degree if args.degree is not None else harness.default_degree,
            terms=args.terms if args.terms is not None else harness.default_terms,
            workers=args.workers if args.workers is not None else harness.worker_concurrency,
            numerator_bound=harness.coefficient_numerator_bound,
            denominator_max=harness.coefficient_denominator_max,
        )
    except ValidationError as e:
        parser.error("; ".join(err["msg"] for err in e.errors()))

    try:
        report = TrialRunner(settings).run_trials(cfg)
    except IdentityViolationError as e:
        failure = {"error": str(e), "witness": e.witness, "report": e.report}
        _write(json.dumps(failure, indent=2, sort_keys=True), args.output)
        return 1

    text = report.to_json(include_timings=not args.no_timings)
    if args.output is not None:
        args.output.write_text(text + "\n")
    if args.json:
        print(text)
    else:
        summary = report.summary
        print(
            f"{cfg.theorem.value} n={cfg.n} G={cfg.generator_count} ({source.value}) "
            f"trials={cfg.trials} seed={cfg.seed}: all zero"
        )
        print(
            f"non-vacuous: {summary.trials - summary.vacuous_count}/{summary.trials} "
            f"({summary.non_vacuous_fraction:.1%}), threshold {summary.non_vacuity_threshold:.0%} "
            f"{'met' if summary.meets_non_vacuity_threshold else 'NOT met'}"
        )
        if summary.hypothesis_unmet_count:
            print(f"hypothesis not satisfied in {summary.hypothesis_unmet_count} trial(s)")
    return 0


def _run_emit(args: argparse.Namespace) -> int:
    _write(TraceSymbolicService().render(args.theorem, args.n, args.format), args.output)
    return 0


def _run_selftest(args: argparse.Namespace) -> int:
    report = SelfTestService().run()
    if args.json:
        print(report.to_json())
    else:
        for check in report.checks:
            line = f"{'PASS' if check.passed else 'FAIL'} {check.name}"
            print(line + (f": {check.detail}" if check.detail else ""))
    return 0 if report.passed else 1


def _load_pair(even_path: Path, odd_path: Optional[Path]) -> List[MatrixE]:
    raw = [json.loads(even_path.read_text())]
    if odd_path is not None:
        raw.append(json.loads(odd_path.read_text()))
    inferred = [matrix_from_json(r) for r in raw]
    config = AlgebraConfig(max(m.config.generator_count for m in inferred))
    return [matrix_from_json(r, config) for r in raw]


def _run_charpoly(args: argparse.Namespace) -> int:
    matrices = _load_pair(args.even, args.odd)
    try:
        if len(matrices) == 1:
            p = CharPolyService().characteristic_polynomial(matrices[0], check=args.check)
            payload = {"n": p.n, "coeffs": [c.to_json() for c in p.coeffs]}
            lines = [f"lambda_{k} = {c}" for k, c in enumerate(p.coeffs)]
        else:
            data = GradedIdentityService().pair_data(*matrices, cross_check=args.check)
            payload = data.to_json()
            lines = []
            for k in range(data.n + 1):
                lines += [f"alpha_{k} = {data.alpha[k]}", f"beta_{k} = {data.beta[k]}"]
    except IdentityViolationError as e:
        print(f"check failed: {e}", file=sys.stderr)
        return 1
    print(json.dumps(payload, indent=2, sort_keys=True) if args.json else "\n".join(lines))
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = get_settings()
    except ValidationError as e:
        problems = "; ".join(f"{'.'.join(str(part) for part in err['loc'])}: {err['msg']}" for err in e.errors())
        print(f"error: invalid settings: {problems}", file=sys.stderr)
        return 2
    setup_logging(
        config_path=settings.logging_config_path,
        environment=settings.environment.value,
        log_level=args.log_level or settings.log_level,
    )
    try:
        if args.command == "verify":
            return _run_verify(args, parser)
        if args.command == "emit":
            return _run_emit(args)
        if args.command == "selftest":
            return _run_selftest(args)
        return _run_charpoly(args)
    except (AlgebraError, OSError, json.JSONDecodeError) as e:
        logger.error(f"{args.command} failed: {str(e)}")
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
