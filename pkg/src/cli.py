#!/usr/bin/env python3
"""
Command-line interface for the choose toolkit.

Subcommands:
  run        Execute a goal against a program (.ch, or .mj translated on the fly)
  translate  Convert mini-Java selection statements into choose form
  check      Run goals against two programs and compare outcomes and states

Exit codes: 0 success, 1 language-level failure or divergence,
2 parse error or bad arguments, 3 depth limit exceeded.
"""

import argparse
import logging
import sys
import traceback
from enum import IntEnum
from pathlib import Path
from typing import List, Optional, Sequence

from src import settings
from src.desugar import desugar_defn, parse_sugar_program, translate
from src.engine import DEFAULT_MAX_DEPTH, EvalError, ExecConfig, RunResult, eval_expr, run
from src.models import Failure, OutcomeKind, Program, ReservedCode, RunReport, Stmt
from src.parser import ParseError, parse_bindings, parse_goal, parse_program
from src.persist import JsonlTraceWriter, report_to_json
from src.state import State
from src.utils import (
    SourceKind, format_failure, read_source, setup_logging, source_kind, state_diff
)

logger = logging.getLogger(__name__)

DEFAULT_GOAL = "main()"


class ExitCode(IntEnum):
    SUCCESS = 0
    FAILURE = 1
    USAGE = 2
    DEPTH_EXCEEDED = 3


class CliError(Exception):
    """A user-facing error that ends the command with a usage exit code."""

    def __init__(self, message: str, exit_code: ExitCode = ExitCode.USAGE):
        self.exit_code = exit_code
        super().__init__(message)


def load_program(path: Path) -> Program:
    """
    Load a program from a `.ch` file, or translate a `.mj` file on the fly.

    Raises:
        CliError: If the file cannot be read or does not parse
    """
    try:
        text = read_source(path)
    except OSError as e:
        raise CliError(f"Cannot read {path}: {e.strerror or e}") from e

    kind = source_kind(path)
    if kind is None:
        logger.debug(f"Unknown extension for {path}; reading it as a choose program")
    try:
        if kind is SourceKind.MINI_JAVA:
            return Program([desugar_defn(d) for d in parse_sugar_program(text)])
        return parse_program(text)
    except ParseError as e:
        raise CliError(f"{path}:{e}") from e


def load_goal(text: str) -> Stmt:
    try:
        return parse_goal(text)
    except ParseError as e:
        raise CliError(f"--goal:{e}") from e


def seed_state(assignments: Optional[Sequence[str]]) -> State:
    """
    Build the initial state from --state flags.

    Each flag holds comma-separated `name=value` pairs; values are constant
    expressions such as 31, -3, "tom" or true.
    """
    state = State()
    if not assignments:
        return state
    try:
        bindings = parse_bindings(", ".join(assignments))
        for name, expr in bindings:
            state.set(name, eval_expr(State(), expr))
    except ParseError as e:
        raise CliError(f"--state:{e}") from e
    except EvalError as e:
        raise CliError(f"--state: value is not a constant ({e})") from e
    return state


def resolve_max_depth(flag: Optional[int]) -> int:
    """Pick the depth limit: the flag, then [engine].max_depth, then the default."""
    if flag is not None:
        return flag
    try:
        return settings.max_depth(DEFAULT_MAX_DEPTH)
    except ValueError as e:
        raise CliError(str(e)) from e


def exit_code_for(result: RunResult) -> ExitCode:
    outcome = result.outcome
    if outcome.succeeded:
        return ExitCode.SUCCESS
    if isinstance(outcome, Failure) and outcome.code_list == [ReservedCode.DEPTH_EXCEEDED.value]:
        return ExitCode.DEPTH_EXCEEDED
    return ExitCode.FAILURE


def cmd_run(args: argparse.Namespace) -> ExitCode:
    """Run a goal against a program file and print the resulting state."""
    path = Path(args.file)
    logger.info(f"Running {path}")
    program = load_program(path)
    program.state = seed_state(args.state)
    goal = load_goal(args.goal or DEFAULT_GOAL)
    max_depth = resolve_max_depth(args.max_depth)

    if args.trace:
        with JsonlTraceWriter(Path(args.trace)) as writer:
            result = run(program, goal, ExecConfig(max_depth=max_depth, trace_sink=writer))
    else:
        result = run(program, goal, ExecConfig(max_depth=max_depth))

    report = RunReport.from_run(*result)
    if args.json:
        print(report_to_json(report))
    else:
        if report.outcome is OutcomeKind.FAILURE:
            print(format_failure(report.error_codes))
        for line in report.state_lines():
            print(line)

    code = exit_code_for(result)
    if code is ExitCode.DEPTH_EXCEEDED:
        logger.warning(f"Depth limit of {max_depth} exceeded")
    return code


def cmd_translate(args: argparse.Namespace) -> ExitCode:
    """Translate a mini-Java file into a choose program."""
    source = Path(args.input)
    try:
        text = read_source(source)
    except OSError as e:
        raise CliError(f"Cannot read {source}: {e.strerror or e}") from e
    try:
        output_text = translate(text, flatten=args.flatten)
    except ParseError as e:
        raise CliError(f"{source}:{e}") from e

    # the canonical printer must produce a parseable program
    parse_program(output_text)

    if args.output == "-":
        sys.stdout.write(output_text)
        return ExitCode.SUCCESS
    target = Path(args.output) if args.output else source.with_suffix(".ch")
    with open(target, "w", encoding="utf-8", newline="\n") as f:
        f.write(output_text)
    logger.info(f"Translated {source} -> {target}")
    return ExitCode.SUCCESS


def _describe(result: RunResult) -> str:
    if isinstance(result.outcome, Failure):
        return f"failure [{', '.join(result.outcome.code_list)}]"
    return "success"


def cmd_check(args: argparse.Namespace) -> ExitCode:
    """Run every goal against two programs; report the first divergence."""
    path_a, path_b = Path(args.file_a), Path(args.file_b)
    program_a = load_program(path_a)
    program_b = load_program(path_b)
    initial = seed_state(args.state)
    program_a.state = initial
    program_b.state = initial.copy()
    config = ExecConfig(max_depth=resolve_max_depth(args.max_depth))
    goals: List[str] = args.goals or []

    for goal_text in goals:
        goal = load_goal(goal_text)
        result_a = run(program_a, goal, config)
        result_b = run(program_b, goal, config)
        lines_a = result_a.state.render()
        lines_b = result_b.state.render()
        if result_a.outcome.kind is result_b.outcome.kind and lines_a == lines_b:
            logger.debug(f"Goal {goal_text} agrees")
            continue
        print(f"DIVERGENCE on goal {goal_text}")
        print(f"  A {path_a}: {_describe(result_a)}")
        print(f"  B {path_b}: {_describe(result_b)}")
        diff = state_diff(lines_a, lines_b)
        if diff:
            print("  state diff (A -> B):")
            for line in diff:
                print(f"  {line}")
        return ExitCode.FAILURE

    print(f"OK: {len(goals)} goal(s) agree")
    return ExitCode.SUCCESS


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1: {value}")
    return value


def build_arg_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--verbose", "-v",
        action="store_true",
        help="Enable verbose logging"
    )
    common.add_argument(
        "--log-file",
        help="Path to log file (default: log to stderr only)"
    )

    parser = argparse.ArgumentParser(
        prog="choose",
        description="Run, translate and compare programs built on the choose statement"
    )
    subcommands = parser.add_subparsers(dest="command", required=True)

    run_parser = subcommands.add_parser("run", parents=[common], help="Execute a goal")
    run_parser.add_argument("file", help="Program file (.ch or .mj)")
    run_parser.add_argument("--goal", "-g", help=f"Goal statement (default: {DEFAULT_GOAL})")
    run_parser.add_argument(
        "--state", "-s",
        action="append",
        help='Initial bindings, e.g. emp="tom",n=3 (repeatable)'
    )
    run_parser.add_argument("--trace", help="Write a JSON Lines derivation trace to this file")
    run_parser.add_argument("--max-depth", type=positive_int, help="Maximum procedure-call nesting")
    run_parser.add_argument("--json", action="store_true", help="Print the run report as JSON")
    run_parser.set_defaults(handler=cmd_run)

    translate_parser = subcommands.add_parser(
        "translate", parents=[common], help="Translate mini-Java into choose form"
    )
    translate_parser.add_argument("input", help="Mini-Java file (.mj)")
    translate_parser.add_argument(
        "--output", "-o",
        help="Output file (default: input with .ch extension; '-' for stdout)"
    )
    translate_parser.add_argument(
        "--flatten",
        action="store_true",
        help="Merge nested choose statements into one"
    )
    translate_parser.set_defaults(handler=cmd_translate)

    check_parser = subcommands.add_parser(
        "check", parents=[common], help="Compare two programs on a list of goals"
    )
    check_parser.add_argument("file_a", help="First program (.ch or .mj)")
    check_parser.add_argument("file_b", help="Second program (.ch or .mj)")
    check_parser.add_argument(
        "--goal", "-g",
        dest="goals",
        action="append",
        help="Goal to run against both programs (repeatable)"
    )
    check_parser.add_argument("--state", "-s", action="append", help="Initial bindings")
    check_parser.add_argument("--max-depth", type=positive_int, help="Maximum procedure-call nesting")
    check_parser.set_defaults(handler=cmd_check)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main command-line interface."""
    parser = build_arg_parser()
    args = parser.parse_args(argv)

    log_level = logging.DEBUG if args.verbose else settings.log_level()
    setup_logging(level=log_level, log_file=args.log_file)

    try:
        return int(args.handler(args))
    except CliError as e:
        logger.warning(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return int(e.exit_code)
    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        return int(ExitCode.FAILURE)
    except Exception as e:
        logger.error(f"{args.command} failed: {e}")
        logger.debug(traceback.format_exc())
        print(f"error: {e}", file=sys.stderr)
        return int(ExitCode.USAGE)


if __name__ == "__main__":
    sys.exit(main())
