"""Command line front end.

Exit codes: 0 all assertions pass, 1 an assertion failed (or the machine
broke an invariant), 2 usage or input error, 3 inconclusive because the
state limit was hit.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence, TextIO

from .explorer import (
    ExploreConfig,
    ExploreReport,
    Exhaustive,
    ExplorerError,
    Outcome,
    RandomWalk,
    Verdict,
    compare_models,
    evaluate_assertions,
    explore,
    interleaving_oracle,
)
from .litmus import LitmusSyntaxError, LitmusTest, load_litmus
from .relaxation import (
    PRODUCTS,
    InvalidModel,
    MemoryModel,
    UnknownFeature,
    UnknownProduct,
    compose,
    parse_features,
    product_model,
)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_UNKNOWN = 3

BUNDLED_SUITE = Path(__file__).parent / "suite"


class UsageError(Exception):
    pass


def _model_from_selector(selector: str) -> MemoryModel:
    """``TSO`` style product names or ``features=WR,WW`` custom feature sets."""
    selector = selector.strip()
    if selector.lower().startswith("features="):
        return compose(parse_features(selector.split("=", 1)[1]))
    return product_model(selector)


def _load(path: str) -> LitmusTest:
    try:
        return load_litmus(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None
    except LitmusSyntaxError as exc:
        raise UsageError("\n".join(f"{path}:{e}" for e in exc.errors)) from None


def _config(args: argparse.Namespace) -> ExploreConfig:
    mode = Exhaustive()
    if getattr(args, "random", None):
        seed, sep, samples = args.random.partition(":")
        try:
            mode = RandomWalk(int(seed), int(samples))
        except ValueError:
            raise UsageError(f"--random expects SEED:SAMPLES, got {args.random!r}") from None
        if not sep or mode.samples < 0:
            raise UsageError(f"--random expects SEED:SAMPLES, got {args.random!r}")
    if args.max_states <= 0:
        raise UsageError("--max-states must be positive")
    return ExploreConfig(max_states=args.max_states, mode=mode)


def _model(args: argparse.Namespace) -> MemoryModel:
    if args.features is not None:
        return compose(parse_features(args.features))
    return product_model(args.model or "SC")


def _outcome_json(outcome: Outcome, test: LitmusTest) -> dict:
    return {
        "registers": {f"{test.thread_name(tid)}:{reg}": val for (tid, reg), val in outcome.registers},
        "memory": dict(outcome.memory),
    }


def _assertion_line(assertion, test: LitmusTest) -> str:
    return f"{assertion.kind.value} {test.describe_clause(assertion.clause)}"


def _stats(report: ExploreReport) -> dict:
    return {
        "statesVisited": report.states_visited,
        "dedupHits": report.dedup_hits,
        "limitExhausted": report.limit_exhausted,
        "exhaustive": report.exhaustive,
        "invariantViolations": [str(v) for v in report.invariant_violations],
    }


def _exit_code(verdicts: Sequence[Verdict], report: ExploreReport) -> int:
    if report.invariant_violations or Verdict.FAIL in verdicts:
        return EXIT_FAIL
    if Verdict.UNKNOWN in verdicts:
        return EXIT_UNKNOWN
    return EXIT_PASS


def run_file(test: LitmusTest, model: MemoryModel, config: ExploreConfig, fmt: str, out: TextIO) -> int:
    report = explore(test, model, config)
    results = evaluate_assertions(report, test)
    if fmt == "json":
        doc = {
            "test": test.name,
            "model": model.label,
            "outcomes": [_outcome_json(o, test) for o in report.outcomes],
            "assertions": [
                {"clause": _assertion_line(a, test), "verdict": v.value} for a, v in results
            ],
            "stats": _stats(report),
        }
        out.write(json.dumps(doc, indent=2) + "\n")
    else:
        kind = "exhaustive" if report.exhaustive else "random walk"
        out.write(
            f"{test.name} under {model.label}: {len(report.outcomes)} outcomes "
            f"({kind}, {report.states_visited} states, {report.dedup_hits} dedup hits)\n"
        )
        for outcome in report.outcomes:
            out.write(f"  {outcome.describe(test)}\n")
        for assertion, verdict in results:
            out.write(f"{verdict.value:<8} {_assertion_line(assertion, test)}\n")
        if report.limit_exhausted:
            out.write("state limit reached; outcome set may be incomplete\n")
        for violation in report.invariant_violations:
            out.write(f"invariant violated: {violation}\n")
    return _exit_code([v for _, v in results], report)


def cmd_run(args: argparse.Namespace, out: TextIO) -> int:
    test = _load(args.file)
    return run_file(test, _model(args), _config(args), args.format, out)


def cmd_compare(args: argparse.Namespace, out: TextIO) -> int:
    test = _load(args.file)
    names = [n for n in (args.models or ",".join(PRODUCTS)).split(",") if n.strip()]
    models = [product_model(n) for n in names]
    rows = compare_models(test, models, _config(args))
    if args.format == "json":
        doc = {
            "test": test.name,
            "assertions": [_assertion_line(a, test) for a in test.assertions],
            "rows": [
                {
                    "model": row.model.label,
                    "outcomeCount": row.outcome_count,
                    "witnesses": list(row.witnesses),
                    "statesVisited": row.states_visited,
                    "outcomes": [_outcome_json(o, test) for o in row.report.outcomes],
                }
                for row in rows
            ],
        }
        out.write(json.dumps(doc, indent=2) + "\n")
        return EXIT_PASS
    for k, assertion in enumerate(test.assertions, start=1):
        out.write(f"A{k}: {_assertion_line(assertion, test)}\n")
    header = f"{'model':<10} {'outcomes':>8} {'states':>8}"
    header += "".join(f" {'A' + str(k):>5}" for k in range(1, len(test.assertions) + 1))
    out.write(header + "\n")
    for row in rows:
        line = f"{row.model.label:<10} {row.outcome_count:>8} {row.states_visited:>8}"
        line += "".join(f" {'yes' if w else 'no':>5}" for w in row.witnesses)
        out.write(line + "\n")
    return EXIT_PASS


def suite_models(litmus_path: Path) -> list[MemoryModel]:
    """Models listed in the companion ``.models`` file, or all products."""
    companion = litmus_path.with_suffix(".models")
    if not companion.exists():
        return [product_model(name) for name in PRODUCTS]
    selectors = []
    for line in companion.read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        selectors.extend(line.split())
    return [_model_from_selector(s) for s in selectors]


def cmd_suite(args: argparse.Namespace, out: TextIO) -> int:
    directory = Path(args.directory) if args.directory else BUNDLED_SUITE
    try:
        files = sorted(p for p in directory.iterdir() if p.suffix == ".litmus")
    except OSError as exc:
        raise UsageError(f"cannot read directory {directory}: {exc.strerror or exc}") from None
    if not files:
        raise UsageError(f"no .litmus files in {directory}")
    config = _config(args)

    worst = EXIT_PASS
    counts = {"pass": 0, "fail": 0, "unknown": 0, "error": 0}
    failed = []
    for path in files:
        try:
            test = _load(str(path))
            models = suite_models(path)
        except (UsageError, UnknownProduct, UnknownFeature, InvalidModel) as exc:
            out.write(f"ERROR    {path.name}: {exc}\n")
            counts["error"] += 1
            failed.append(path.name)
            worst = EXIT_USAGE
            continue
        for model in models:
            report = explore(test, model, config)
            verdicts = [v for _, v in evaluate_assertions(report, test)]
            code = _exit_code(verdicts, report)
            label = {EXIT_PASS: "pass", EXIT_FAIL: "fail", EXIT_UNKNOWN: "unknown"}[code]
            counts[label] += 1
            detail = " ".join(v.value for v in verdicts) or "no assertions"
            if report.invariant_violations:
                detail += f" ({len(report.invariant_violations)} invariant violations)"
            out.write(f"{label.upper():<8} {path.name} [{model.label}] {detail}\n")
            if code != EXIT_PASS:
                failed.append(f"{path.name}[{model.label}]")
            if worst != EXIT_USAGE and (code == EXIT_FAIL or (code == EXIT_UNKNOWN and worst == EXIT_PASS)):
                worst = code
    summary = ", ".join(f"{n} {k}" for k, n in counts.items())
    out.write(f"{len(files)} files: {summary}\n")
    if failed:
        out.write("not passing: " + " ".join(failed) + "\n")
    return worst


def cmd_oracle(args: argparse.Namespace, out: TextIO) -> int:
    test = _load(args.file)
    outcomes = interleaving_oracle(test)
    if args.format == "json":
        doc = {
            "test": test.name,
            "model": "interleaving-oracle",
            "outcomes": [_outcome_json(o, test) for o in outcomes],
        }
        out.write(json.dumps(doc, indent=2) + "\n")
    else:
        out.write(f"{test.name}: {len(outcomes)} sequentially consistent outcomes\n")
        for outcome in outcomes:
            out.write(f"  {outcome.describe(test)}\n")
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wmlab", description="Explore litmus tests under weak memory models.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, random_mode: bool = True) -> None:
        p.add_argument("--max-states", type=int, default=ExploreConfig.max_states, metavar="N")
        if random_mode:
            p.add_argument("--random", metavar="SEED:SAMPLES", help="sample random schedules instead of exhaustive search")
        p.add_argument("--format", choices=("text", "json"), default="text")

    run = sub.add_parser("run", help="explore one litmus file under one model")
    run.add_argument("file")
    group = run.add_mutually_exclusive_group()
    group.add_argument("--model", metavar="NAME", help="one of " + ", ".join(PRODUCTS) + " (default SC)")
    group.add_argument("--features", metavar="LIST", help="comma separated features, e.g. WR,WW,ReadEarly")
    common(run)
    run.set_defaults(handler=cmd_run)

    compare = sub.add_parser("compare", help="explore one litmus file under several products")
    compare.add_argument("file")
    compare.add_argument("--models", metavar="LIST", help="comma separated product names (default all)")
    common(compare)
    compare.set_defaults(handler=cmd_compare)

    suite = sub.add_parser("suite", help="run every litmus file in a directory")
    suite.add_argument("directory", nargs="?", help="defaults to the bundled suite")
    common(suite)
    suite.set_defaults(handler=cmd_suite)

    oracle = sub.add_parser("oracle", help="print the sequentially consistent outcomes")
    oracle.add_argument("file")
    oracle.add_argument("--format", choices=("text", "json"), default="text")
    oracle.set_defaults(handler=cmd_oracle)
    return parser


def main(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args, out)
    except (UsageError, UnknownProduct, UnknownFeature, InvalidModel, ExplorerError) as exc:
        print(f"wmlab: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
