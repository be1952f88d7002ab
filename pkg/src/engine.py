"""
Execution engine for the choose language.

The engine alternates between executing statements and backchaining on
procedure definitions. Each derivation step is numbered after the rule it
applies (see `Rule`): backchaining into a body (1), argument passing (2),
procedure call (3), truth (4), condition (5), negated condition (6),
assignment (7), sequencing (8) and selection with choose (9).

Failures are values (`Failure`), never exceptions. A failed choose
alternative is rolled back through a state transaction before the next one
is tried; a fully failed choose reports the error codes of all alternatives
in order.
"""

import logging
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from datetime import datetime
from typing import Callable, List, NamedTuple, Optional, Sequence

from src.models import (
    INT_MAX, INT_MIN, GENERIC_FAILURE,
    Assign, Binary, BinaryOp, Call, Choose, Cond, Defn, ErrorCode, ExecStats,
    Expr, Fail, Failure, Literal, NegCond, Outcome, OutcomeKind, Program,
    ReservedCode, Rule, Seq, Stmt, Success, TraceEvent, TraceKind, Truth,
    Unary, UnaryOp, Value, ValueKind, Var, substitute, value_kind,
)
from src.parser import print_stmt
from src.state import UNBOUND, State

logger = logging.getLogger(__name__)

DEFAULT_MAX_DEPTH = 10000

# Python frames used per level of procedure-call nesting and per level of
# statement or expression nesting, with slack.
_FRAMES_PER_CALL = 40
_FRAMES_PER_LEVEL = 8

TraceSink = Callable[[TraceEvent], None]


class EvalError(Exception):
    """Expression evaluation failed with an engine error code."""

    def __init__(self, code: ReservedCode, message: str):
        self.code = ErrorCode.reserved(code)
        super().__init__(f"{code.value}: {message}")


class DepthExceeded(Exception):
    """Procedure-call nesting passed the configured maximum; aborts the whole run."""

    def __init__(self, depth: int):
        self.depth = depth
        super().__init__(f"Call depth {depth} exceeds the configured maximum")


@dataclass
class ExecConfig:
    max_depth: int = DEFAULT_MAX_DEPTH
    trace_sink: Optional[TraceSink] = None

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError(f"max_depth must be at least 1, got {self.max_depth}")


# Expression evaluation

def _type_error(message: str) -> EvalError:
    return EvalError(ReservedCode.TYPE_ERROR, message)


def _checked(result: int) -> int:
    if result < INT_MIN or result > INT_MAX:
        raise _type_error(f"integer overflow: {result}")
    return result


def _require(value: Value, kind: ValueKind, op: str) -> None:
    if value_kind(value) is not kind:
        raise _type_error(f"operator {op} expects {kind.value}, got {value_kind(value).value}")


def _divide(op: BinaryOp, left: int, right: int) -> int:
    if right == 0:
        raise EvalError(ReservedCode.DIVISION_BY_ZERO, f"{left} {op.value} 0")
    # truncate toward zero; the remainder takes the dividend's sign
    quotient = abs(left) // abs(right)
    if (left < 0) != (right < 0):
        quotient = -quotient
    if op is BinaryOp.DIV:
        return _checked(quotient)
    return left - right * quotient


def _apply_binary(op: BinaryOp, left: Value, right: Value) -> Value:
    if op in (BinaryOp.EQ, BinaryOp.NE):
        if value_kind(left) is not value_kind(right):
            raise _type_error(
                f"cannot compare {value_kind(left).value} with {value_kind(right).value}"
            )
        equal = left == right
        return equal if op is BinaryOp.EQ else not equal

    if op in (BinaryOp.LT, BinaryOp.LE, BinaryOp.GT, BinaryOp.GE):
        kind = value_kind(left)
        if kind is not value_kind(right) or kind is ValueKind.BOOL:
            raise _type_error(
                f"operator {op.value} is not defined on "
                f"{kind.value} and {value_kind(right).value}"
            )
        if op is BinaryOp.LT:
            return left < right
        if op is BinaryOp.LE:
            return left <= right
        if op is BinaryOp.GT:
            return left > right
        return left >= right

    _require(left, ValueKind.INT, op.value)
    _require(right, ValueKind.INT, op.value)
    if op is BinaryOp.ADD:
        return _checked(left + right)
    if op is BinaryOp.SUB:
        return _checked(left - right)
    if op is BinaryOp.MUL:
        return _checked(left * right)
    return _divide(op, left, right)


def eval_expr(state, expr: Expr) -> Value:
    """
    Evaluate an expression against a state.

    Evaluation is strict except for && and ||, which short-circuit.

    Args:
        state: A State, or any mapping with get(name, default)
        expr (Expr): Expression to evaluate

    Returns:
        Value: The result

    Raises:
        EvalError: unbound_variable, type_error or division_by_zero
    """
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, Var):
        value = state.get(expr.name, UNBOUND)
        if value is UNBOUND:
            raise EvalError(ReservedCode.UNBOUND_VARIABLE, f"variable '{expr.name}' is not bound")
        return value
    if isinstance(expr, Unary):
        operand = eval_expr(state, expr.operand)
        if expr.op is UnaryOp.NOT:
            _require(operand, ValueKind.BOOL, "!")
            return not operand
        _require(operand, ValueKind.INT, "-")
        return _checked(-operand)
    if isinstance(expr, Binary):
        if expr.op in (BinaryOp.AND, BinaryOp.OR):
            left = eval_expr(state, expr.left)
            _require(left, ValueKind.BOOL, expr.op.value)
            if expr.op is BinaryOp.AND and not left:
                return False
            if expr.op is BinaryOp.OR and left:
                return True
            right = eval_expr(state, expr.right)
            _require(right, ValueKind.BOOL, expr.op.value)
            return right
        left = eval_expr(state, expr.left)
        right = eval_expr(state, expr.right)
        return _apply_binary(expr.op, left, right)
    raise TypeError(f"Not an expression: {expr!r}")


# Statement execution

class Engine:
    """Executes statements against one program; holds the run's mutable bookkeeping."""

    def __init__(self, program: Program, config: Optional[ExecConfig] = None):
        self.program = program
        self.state: State = program.state
        self.config = config or ExecConfig()
        self.stats = ExecStats()
        self._call_depth = 0
        self._trace_depth = 0

    def eval_expr(self, expr: Expr) -> Value:
        return eval_expr(self.state, expr)

    def _apply(self, rule: Rule, stmt: Stmt, step: Callable[[], Outcome]) -> Outcome:
        """Run one rule application, emitting enter/exit trace events when tracing."""
        self.stats.steps += 1
        sink = self.config.trace_sink
        if sink is None:
            return step()
        depth = self._trace_depth
        text = print_stmt(stmt)
        sink(TraceEvent(TraceKind.ENTER, rule, text, depth))
        self._trace_depth = depth + 1
        try:
            outcome = step()
        except (DepthExceeded, RecursionError):
            self._trace_depth = depth
            sink(TraceEvent(TraceKind.EXIT, rule, text, depth, OutcomeKind.FAILURE))
            raise
        self._trace_depth = depth
        sink(TraceEvent(TraceKind.EXIT, rule, text, depth, outcome.kind))
        return outcome

    def exec(self, stmt: Stmt) -> Outcome:
        """
        Execute a statement, dispatching on its constructor.

        Raises:
            DepthExceeded: when call nesting passes config.max_depth
        """
        if isinstance(stmt, Fail):
            # no rule derives f
            return Failure((stmt.code,))
        if isinstance(stmt, Truth):
            return self._apply(Rule.TRUTH, stmt, lambda: Success(self.state))
        if isinstance(stmt, Cond):
            return self._apply(Rule.CONDITION, stmt, lambda: self._exec_condition(stmt.expr, True))
        if isinstance(stmt, NegCond):
            return self._apply(Rule.NEGATED_CONDITION, stmt, lambda: self._exec_condition(stmt.expr, False))
        if isinstance(stmt, Assign):
            return self._apply(Rule.ASSIGNMENT, stmt, lambda: self._exec_assign(stmt))
        if isinstance(stmt, Seq):
            return self._apply(Rule.SEQUENCE, stmt, lambda: self.exec_seq(stmt.first, stmt.second))
        if isinstance(stmt, Choose):
            return self._apply(Rule.CHOOSE, stmt, lambda: self.exec_choose(stmt.alts))
        if isinstance(stmt, Call):
            return self._apply(Rule.CALL, stmt, lambda: self.exec_call(stmt.name, stmt.args))
        raise TypeError(f"Not a statement: {stmt!r}")

    def _exec_condition(self, expr: Expr, wanted: bool) -> Outcome:
        try:
            value = self.eval_expr(expr)
        except EvalError as e:
            return Failure((e.code,))
        if value_kind(value) is not ValueKind.BOOL:
            return Failure.of(ReservedCode.TYPE_ERROR)
        if value is wanted:
            return Success(self.state)
        return Failure((GENERIC_FAILURE,))

    def _exec_assign(self, stmt: Assign) -> Outcome:
        try:
            value = self.eval_expr(stmt.expr)
        except EvalError as e:
            return Failure((e.code,))
        self.state.set(stmt.var, value)
        return Success(self.state)

    def exec_seq(self, first: Stmt, second: Stmt) -> Outcome:
        """Run `first`, then `second` against its post-state; a failure skips `second`."""
        outcome = self.exec(first)
        if not outcome.succeeded:
            return outcome
        return self.exec(second)

    def _attempt(self, run_alternative: Callable[[], Outcome]) -> Outcome:
        """Run inside a transaction; roll back on failure, keep writes otherwise."""
        token = self.state.tx_begin()
        try:
            outcome = run_alternative()
        except BaseException:
            # aborts keep the at-failure state
            self.state.tx_commit(token)
            raise
        if outcome.succeeded:
            self.state.tx_commit(token)
        else:
            self.state.tx_restore(token)
            self.stats.rollbacks += 1
        return outcome

    def exec_choose(self, alts: Sequence[Stmt]) -> Outcome:
        """
        Try alternatives left to right and commit the first success.

        Each failed alternative is rolled back before the next one starts.
        If all fail, the result concatenates their error codes in order.
        """
        if not alts:
            raise ValueError("choose needs at least one alternative")
        self.stats.chooses += 1
        codes: List[ErrorCode] = []
        for alt in alts:
            self.stats.alternatives_tried += 1
            outcome = self._attempt(lambda: self.exec(alt))
            if outcome.succeeded:
                return outcome
            codes.extend(outcome.codes)
        return Failure(tuple(codes))

    def exec_call(self, name: str, args: Sequence[Expr]) -> Outcome:
        """
        Evaluate arguments left to right, then backchain on matching definitions.

        Definitions are tried in declaration order; with several candidates
        each failed one is rolled back and its codes accumulated.
        """
        try:
            values = [self.eval_expr(arg) for arg in args]
        except EvalError as e:
            return Failure((e.code,))
        candidates = self.program.lookup(name, len(values))
        if not candidates:
            logger.debug(f"No definition matches {name}/{len(values)}")
            return Failure.of(ReservedCode.NO_MATCHING_PROCEDURE)
        self.stats.calls += 1
        if len(candidates) == 1:
            return self.backchain(candidates[0], name, values)

        codes: List[ErrorCode] = []
        for defn in candidates:
            outcome = self._attempt(lambda: self.backchain(defn, name, values))
            if outcome.succeeded:
                return outcome
            codes.extend(outcome.codes)
        return Failure(tuple(codes))

    def backchain(self, defn: Defn, name: str, arg_values: Sequence[Value]) -> Outcome:
        """
        Instantiate `defn` with the argument values (call by value) and run its body.
        """
        if defn.name != name or defn.arity != len(arg_values):
            raise ValueError(f"{defn.signature} does not match {name}/{len(arg_values)}")
        self._call_depth += 1
        try:
            if self._call_depth > self.config.max_depth:
                raise DepthExceeded(self._call_depth)
            self.stats.max_call_depth = max(self.stats.max_call_depth, self._call_depth)
            head = Call(name, tuple(Literal(v) for v in arg_values))
            if not defn.params:
                return self._run_body(head, defn.body)
            instance = substitute(defn.body, dict(zip(defn.params, arg_values)))
            return self._apply(Rule.ARGUMENT_PASSING, head, lambda: self._run_body(head, instance))
        finally:
            self._call_depth -= 1

    def _run_body(self, head: Call, body: Stmt) -> Outcome:
        return self._apply(Rule.BACKCHAIN, head, lambda: self.exec(body))


class RunResult(NamedTuple):
    outcome: Outcome
    state: State
    stats: ExecStats


def _children(node) -> Sequence:
    if isinstance(node, Seq):
        return (node.first, node.second)
    if isinstance(node, Choose):
        return node.alts
    if isinstance(node, (Cond, NegCond, Assign)):
        return (node.expr,)
    if isinstance(node, Call):
        return node.args
    if isinstance(node, Unary):
        return (node.operand,)
    if isinstance(node, Binary):
        return (node.left, node.right)
    return ()


def nesting_depth(root) -> int:
    """Height of a statement or expression tree, measured without recursion."""
    deepest = 0
    pending = [(root, 1)]
    while pending:
        node, depth = pending.pop()
        deepest = max(deepest, depth)
        pending.extend((child, depth + 1) for child in _children(node))
    return deepest


@contextmanager
def _recursion_headroom(program: Program, goal: Stmt, max_depth: int):
    previous = sys.getrecursionlimit()
    body_depth = max((nesting_depth(d.body) for d in program.defs), default=0)
    needed = (
        2000
        + _FRAMES_PER_LEVEL * nesting_depth(goal)
        + max_depth * (_FRAMES_PER_CALL + _FRAMES_PER_LEVEL * body_depth)
    )
    if needed > previous:
        sys.setrecursionlimit(needed)
    try:
        yield
    finally:
        sys.setrecursionlimit(previous)


def run(program: Program, goal: Stmt, config: Optional[ExecConfig] = None) -> RunResult:
    """
    Execute a goal from the program's state.

    The program itself is not modified: execution works on a copy of its
    state. A failed goal is not rolled back, so the returned state is the
    post-state on success and the at-failure state on failure.

    Args:
        program (Program): Definitions and initial state
        goal (Stmt): Statement to execute
        config (ExecConfig, optional): Depth limit and trace sink

    Returns:
        RunResult: (outcome, final state, statistics)

    Raises:
        RuntimeError: if Python runs out of stack despite the headroom
        sized from the program, an internal error rather than a failure
    """
    config = config or ExecConfig()
    working = Program(program.defs, program.state.copy())
    engine = Engine(working, config)
    engine.stats.start_time = datetime.now()

    with _recursion_headroom(program, goal, config.max_depth):
        try:
            outcome = engine.exec(goal)
        except DepthExceeded as e:
            logger.warning(f"Run aborted: {e}")
            outcome = Failure.of(ReservedCode.DEPTH_EXCEEDED)
        except RecursionError as e:
            logger.error("Run aborted: Python recursion limit reached")
            raise RuntimeError("Python recursion limit reached while executing the goal") from e

    engine.stats.end_time = datetime.now()
    logger.debug(engine.stats.summary())
    return RunResult(outcome, working.state, engine.stats)
