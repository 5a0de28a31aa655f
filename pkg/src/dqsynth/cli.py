"""Command-line interface.

Exit codes: 0 realizable / TRUE / valid, 20 unrealizable / FALSE /
counterexample, 1 other errors, 2 parse errors, 3 resource limits,
4 external solver failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys
import time
from pathlib import Path

from .bitblast import clause_stats
from .dqdimacs import parse_qdimacs, write_dqdimacs
from .errors import DimacsError, DqsynthError, ExternalSolverError, ParseError, ResourceLimitExceeded
from .frontend import format_problem, parse_definitions, parse_problem
from .generate import random_dqbf, random_problem
from .lift import verify_lifted
from .pipeline import SynthConfig, synthesize
from .qbf2sygus import convert
from .solver import DEFAULT_BOUND, solve, verify_solution, write_certificate

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PARSE = 2
EXIT_RESOURCE = 3
EXIT_EXTERNAL = 4
EXIT_NEGATIVE = 20


def _engine(value: str) -> str:
    if value in ("expansion", "2qbf", "auto") or (value.startswith("external:") and len(value) > 9):
        return value
    raise argparse.ArgumentTypeError("expected expansion, 2qbf, auto or external:<path>")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0)
    common.add_argument("--json", action="store_true", help="print a JSON result record")

    solving = argparse.ArgumentParser(add_help=False)
    solving.add_argument("--engine", type=_engine, default="auto",
                         help="expansion, 2qbf, auto or external:<path> (default: auto)")
    solving.add_argument("--expansion-bound", type=int, default=DEFAULT_BOUND, metavar="N")
    solving.add_argument("--expansion-strategy", choices=("lazy", "full"), default="lazy")
    solving.add_argument("--timeout", type=float, default=None, metavar="SECONDS")
    solving.add_argument("--conflict-budget", type=int, default=None, metavar="N")

    dumps = argparse.ArgumentParser(add_help=False)
    dumps.add_argument("--dump-callsigns", action="store_true")
    dumps.add_argument("--dump-ackermann", action="store_true")
    dumps.add_argument("--dump-dqf", action="store_true")

    parser = argparse.ArgumentParser(prog="dqsynth", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common, solving, dumps], help="synthesize definitions")
    p.add_argument("file")

    p = sub.add_parser("compile", parents=[common, dumps], help="emit the DQBF as DQDIMACS")
    p.add_argument("file")
    p.add_argument("-o", "--output")

    p = sub.add_parser("convert", parents=[common], help="QDIMACS/DQDIMACS to SyGuS")
    p.add_argument("file")
    p.add_argument("-o", "--output")

    p = sub.add_parser("solve", parents=[common, solving], help="solve a DQDIMACS file")
    p.add_argument("file")
    p.add_argument("--certificate", action="store_true", help="print the Henkin functions")

    p = sub.add_parser("verify", parents=[common], help="check definitions against a problem")
    p.add_argument("spec")
    p.add_argument("defs")

    p = sub.add_parser("gen-corpus", parents=[common], help="write a random test corpus")
    p.add_argument("--kind", choices=("sygus", "dqdimacs", "qdimacs"), default="sygus")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True, help="output directory")
    return parser


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _config(args) -> SynthConfig:
    return SynthConfig(engine=args.engine, bound=args.expansion_bound,
                       strategy=args.expansion_strategy, timeout=args.timeout,
                       conflict_budget=args.conflict_budget)


def _dump(args, run) -> None:
    if args.dump_callsigns and run.index is not None:
        sys.stderr.write(run.index.format())
    if args.dump_ackermann:
        sys.stderr.write(run.trace.format())
    if args.dump_dqf and run.dqf is not None:
        sys.stderr.write(run.dqf.format())


def cmd_synth(args) -> int:
    run = synthesize(_read(args.file), _config(args))
    _dump(args, run)
    if args.json:
        print(json.dumps(run.record(), indent=2))
    elif run.result.is_true:
        sys.stdout.write(run.output)
    else:
        print("unrealizable")
    return EXIT_OK if run.result.is_true else EXIT_NEGATIVE


def cmd_compile(args) -> int:
    run = synthesize(_read(args.file), stop_after="blast")
    _dump(args, run)
    t0 = time.perf_counter()
    text = write_dqdimacs(run.instance)
    _write(args.output, text)
    run.stage_times_ms["emit"] = (time.perf_counter() - t0) * 1000.0
    if args.json:
        print(json.dumps(run.record(), indent=2), file=sys.stderr if args.output is None else sys.stdout)
    return EXIT_OK


def cmd_convert(args) -> int:
    problem = convert(parse_qdimacs(_read(args.file)))
    _write(args.output, format_problem(problem))
    return EXIT_OK


def cmd_solve(args) -> int:
    times = {}
    t0 = time.perf_counter()
    instance = parse_qdimacs(_read(args.file))
    times["parse"] = (time.perf_counter() - t0) * 1000.0
    deadline = None if args.timeout is None else time.monotonic() + args.timeout
    t0 = time.perf_counter()
    result = solve(instance, args.engine, bound=args.expansion_bound, strategy=args.expansion_strategy,
                   deadline=deadline, conflict_budget=args.conflict_budget)
    times["solve"] = (time.perf_counter() - t0) * 1000.0
    t0 = time.perf_counter()
    if result.is_true and result.solution is not None:
        cex = verify_solution(instance, result.solution)
        if cex is not None:
            raise DqsynthError(f"solver certificate fails on {cex}")
    times["verify"] = (time.perf_counter() - t0) * 1000.0
    if args.json:
        nv, nc, _ = clause_stats(instance)
        print(json.dumps({
            "verdict": result.verdict,
            "stage_times_ms": {k: round(v, 3) for k, v in times.items()},
            "n_vars": nv,
            "n_clauses": nc,
            "n_functions": len(instance.existential_bits),
            "callsign_class": None,
            "engine": result.stats.engine,
        }, indent=2))
    else:
        print(result.verdict)
        if args.certificate and result.solution is not None:
            sys.stdout.write(write_certificate(result.solution))
    return EXIT_OK if result.is_true else EXIT_NEGATIVE


def cmd_verify(args) -> int:
    problem = parse_problem(_read(args.spec))
    defs = parse_definitions(_read(args.defs))
    cex = verify_lifted(defs, problem)
    if args.json:
        print(json.dumps({"verdict": "valid" if cex is None else "counterexample",
                          "counterexample": cex}, indent=2))
    elif cex is None:
        print("valid")
    else:
        print("counterexample: " + " ".join(f"{k}={v}" for k, v in cex.items()))
    return EXIT_OK if cex is None else EXIT_NEGATIVE


def cmd_gen_corpus(args) -> int:
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(args.seed)
    for i in range(args.count):
        if args.kind == "sygus":
            (out / f"problem{i:04d}.sl").write_text(format_problem(random_problem(rng)), encoding="utf-8")
        else:
            inst = random_dqbf(rng, two_qbf=args.kind == "qdimacs")
            suffix = "qdimacs" if args.kind == "qdimacs" else "dqdimacs"
            (out / f"instance{i:04d}.{suffix}").write_text(write_dqdimacs(inst), encoding="utf-8")
    return EXIT_OK


COMMANDS = {
    "synth": cmd_synth,
    "compile": cmd_compile,
    "convert": cmd_convert,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "gen-corpus": cmd_gen_corpus,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ParseError, DimacsError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ResourceLimitExceeded as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ExternalSolverError as exc:
        print(f"external solver: {exc}", file=sys.stderr)
        return EXIT_EXTERNAL
    except (DqsynthError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
