"""
Data models for the choose language.

Defines the abstract syntax of statements (G-formulas), procedure
definitions (D-formulas), expressions and values, plus the records an
execution produces: outcomes, trace events, statistics and run reports.
"""

from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum, IntEnum
from typing import Iterable, List, Mapping, Optional, Tuple, Union

from src.state import State
from src.utils import render_value

Value = Union[int, bool, str]

INT_MIN = -(2 ** 63)
INT_MAX = 2 ** 63 - 1


class ValueKind(Enum):
    """Kinds of runtime values."""
    INT = "int"
    BOOL = "bool"
    STR = "str"


def value_kind(value: Value) -> ValueKind:
    """
    Classify a runtime value.

    bool is checked before int because Python treats booleans as integers.

    Args:
        value: A Python int, bool or str

    Returns:
        ValueKind: The language-level kind of the value
    """
    if isinstance(value, bool):
        return ValueKind.BOOL
    if isinstance(value, int):
        return ValueKind.INT
    if isinstance(value, str):
        return ValueKind.STR
    raise TypeError(f"Not a language value: {value!r}")


class ReservedCode(Enum):
    """Error codes generated by the engine itself."""
    FAIL = "f"
    UNBOUND_VARIABLE = "unbound_variable"
    TYPE_ERROR = "type_error"
    DIVISION_BY_ZERO = "division_by_zero"
    NO_MATCHING_PROCEDURE = "no_matching_procedure"
    DEPTH_EXCEEDED = "depth_exceeded"


RESERVED_CODES = frozenset(code.value for code in ReservedCode)


@dataclass(frozen=True)
class ErrorCode:
    """Payload of a failure; bare `f` carries the code "f"."""
    code: str

    def __post_init__(self):
        if not isinstance(self.code, str) or not self.code:
            raise ValueError("Error code must be a non-empty string")

    @classmethod
    def reserved(cls, code: ReservedCode) -> "ErrorCode":
        return cls(code.value)

    @property
    def is_reserved(self) -> bool:
        return self.code in RESERVED_CODES

    def __str__(self) -> str:
        return self.code


GENERIC_FAILURE = ErrorCode.reserved(ReservedCode.FAIL)


def _as_code(code: Union[str, ErrorCode]) -> ErrorCode:
    return code if isinstance(code, ErrorCode) else ErrorCode(code)


# Expressions

class UnaryOp(Enum):
    """Unary operators, valued by their surface spelling."""
    NEG = "-"
    NOT = "!"


class BinaryOp(Enum):
    """Binary operators, valued by their surface spelling."""
    ADD = "+"
    SUB = "-"
    MUL = "*"
    DIV = "/"
    MOD = "%"
    EQ = "=="
    NE = "!="
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="
    AND = "&&"
    OR = "||"


class Expr:
    """Base class for side-effect-free expressions."""
    __slots__ = ()


@dataclass(frozen=True)
class Literal(Expr):
    """A constant value. The kind takes part in equality, so true != 1."""
    value: Value
    kind: ValueKind = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", value_kind(self.value))


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Unary(Expr):
    op: UnaryOp
    operand: Expr


@dataclass(frozen=True)
class Binary(Expr):
    op: BinaryOp
    left: Expr
    right: Expr


# Statements

class Stmt:
    """Base class for statements (G-formulas)."""
    __slots__ = ()


@dataclass(frozen=True)
class Truth(Stmt):
    """The statement `t`: always succeeds."""


@dataclass(frozen=True)
class Fail(Stmt):
    """The statement `f` or `f(code)`."""
    code: ErrorCode = GENERIC_FAILURE

    def __post_init__(self):
        object.__setattr__(self, "code", _as_code(self.code))


@dataclass(frozen=True)
class Call(Stmt):
    """Procedure call `name(args)`."""
    name: str
    args: Tuple[Expr, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class Cond(Stmt):
    """Boolean condition used as a statement."""
    expr: Expr


@dataclass(frozen=True)
class NegCond(Stmt):
    """Negated condition `!cond`."""
    expr: Expr


@dataclass(frozen=True)
class Assign(Stmt):
    var: str
    expr: Expr


@dataclass(frozen=True)
class Seq(Stmt):
    first: Stmt
    second: Stmt


@dataclass(frozen=True)
class Choose(Stmt):
    """`choose(G1, ..., Gn)` with at least one alternative."""
    alts: Tuple[Stmt, ...]

    def __post_init__(self):
        alts = tuple(self.alts)
        if not alts:
            raise ValueError("choose needs at least one alternative")
        object.__setattr__(self, "alts", alts)


TRUE = Truth()


def seq_of(stmts: Iterable[Stmt]) -> Stmt:
    """Fold statements into a right-nested sequence; an empty list is `t`."""
    items = list(stmts)
    if not items:
        return TRUE
    result = items[-1]
    for stmt in reversed(items[:-1]):
        result = Seq(stmt, result)
    return result


# Definitions and programs

@dataclass(frozen=True)
class Defn:
    """
    A procedure definition `name(params) = body`.

    The parameter list plays the role of the universal prefix: calling the
    procedure instantiates every parameter with an argument value.
    """
    name: str
    params: Tuple[str, ...]
    body: Stmt

    def __post_init__(self):
        params = tuple(self.params)
        if len(set(params)) != len(params):
            raise ValueError(f"Duplicate parameter in definition of {self.name}")
        object.__setattr__(self, "params", params)

    @property
    def arity(self) -> int:
        return len(self.params)

    @property
    def signature(self) -> str:
        return f"{self.name}/{self.arity}"


@dataclass
class Program:
    """Definitions plus the machine state they run against."""
    defs: List[Defn] = field(default_factory=list)
    state: State = field(default_factory=State)

    def lookup(self, name: str, arity: int) -> List[Defn]:
        """Return definitions matching (name, arity) in declaration order."""
        return [d for d in self.defs if d.name == name and d.arity == arity]

    def signatures(self) -> List[str]:
        return [d.signature for d in self.defs]


# Outcomes

class OutcomeKind(Enum):
    SUCCESS = "success"
    FAILURE = "failure"


class Outcome:
    """Result of executing a statement."""
    __slots__ = ()

    kind: OutcomeKind

    @property
    def succeeded(self) -> bool:
        return self.kind is OutcomeKind.SUCCESS


@dataclass
class Success(Outcome):
    state: State
    kind: OutcomeKind = field(default=OutcomeKind.SUCCESS, init=False, repr=False)


@dataclass(frozen=True)
class Failure(Outcome):
    codes: Tuple[ErrorCode, ...]
    kind: OutcomeKind = field(default=OutcomeKind.FAILURE, init=False, repr=False)

    def __post_init__(self):
        codes = tuple(_as_code(c) for c in self.codes)
        if not codes:
            raise ValueError("A failure carries at least one error code")
        object.__setattr__(self, "codes", codes)

    @classmethod
    def of(cls, *codes: Union[str, ErrorCode, ReservedCode]) -> "Failure":
        """Build a failure from codes given as strings, ErrorCodes or ReservedCodes."""
        return cls(tuple(
            ErrorCode.reserved(c) if isinstance(c, ReservedCode) else _as_code(c)
            for c in codes
        ))

    @property
    def code_list(self) -> List[str]:
        return [c.code for c in self.codes]


# AST utilities

def stmt_equal(a: Stmt, b: Stmt) -> bool:
    """Structural equality of two statements."""
    return a == b


def expr_vars(expr: Expr) -> frozenset:
    """Return the variable names occurring in an expression."""
    if isinstance(expr, Var):
        return frozenset((expr.name,))
    if isinstance(expr, Unary):
        return expr_vars(expr.operand)
    if isinstance(expr, Binary):
        return expr_vars(expr.left) | expr_vars(expr.right)
    return frozenset()


def free_vars(stmt: Stmt) -> frozenset:
    """
    Return all variable names occurring in a statement.

    Covers expressions, assignment targets and call arguments.
    """
    if isinstance(stmt, (Cond, NegCond)):
        return expr_vars(stmt.expr)
    if isinstance(stmt, Assign):
        return frozenset((stmt.var,)) | expr_vars(stmt.expr)
    if isinstance(stmt, Call):
        names = frozenset()
        for arg in stmt.args:
            names |= expr_vars(arg)
        return names
    if isinstance(stmt, Seq):
        return free_vars(stmt.first) | free_vars(stmt.second)
    if isinstance(stmt, Choose):
        names = frozenset()
        for alt in stmt.alts:
            names |= free_vars(alt)
        return names
    return frozenset()


def substitute_expr(expr: Expr, values: Mapping[str, Value]) -> Expr:
    """Replace variables bound in `values` with literals."""
    if isinstance(expr, Var):
        if expr.name in values:
            return Literal(values[expr.name])
        return expr
    if isinstance(expr, Unary):
        return Unary(expr.op, substitute_expr(expr.operand, values))
    if isinstance(expr, Binary):
        return Binary(
            expr.op,
            substitute_expr(expr.left, values),
            substitute_expr(expr.right, values),
        )
    return expr


def substitute(stmt: Stmt, values: Mapping[str, Value]) -> Stmt:
    """
    Instantiate a statement by replacing variables with values.

    Assignment targets are left alone; the parser rejects assignments to
    procedure parameters, so a substituted name never appears as a target.

    Args:
        stmt: Statement to instantiate
        values: Variable name to value mapping

    Returns:
        Stmt: The instantiated statement (shares untouched subtrees)
    """
    if not values:
        return stmt
    if isinstance(stmt, Cond):
        return Cond(substitute_expr(stmt.expr, values))
    if isinstance(stmt, NegCond):
        return NegCond(substitute_expr(stmt.expr, values))
    if isinstance(stmt, Assign):
        return Assign(stmt.var, substitute_expr(stmt.expr, values))
    if isinstance(stmt, Call):
        return Call(stmt.name, tuple(substitute_expr(a, values) for a in stmt.args))
    if isinstance(stmt, Seq):
        return Seq(substitute(stmt.first, values), substitute(stmt.second, values))
    if isinstance(stmt, Choose):
        return Choose(tuple(substitute(a, values) for a in stmt.alts))
    return stmt


# Execution records

class Rule(IntEnum):
    """Derivation rules of the execution semantics, by number."""
    BACKCHAIN = 1
    ARGUMENT_PASSING = 2
    CALL = 3
    TRUTH = 4
    CONDITION = 5
    NEGATED_CONDITION = 6
    ASSIGNMENT = 7
    SEQUENCE = 8
    CHOOSE = 9


class TraceKind(Enum):
    ENTER = "enter"
    EXIT = "exit"


@dataclass(frozen=True)
class TraceEvent:
    """One derivation step; every enter is matched by an exit at the same depth."""
    kind: TraceKind
    rule: Rule
    stmt: str
    depth: int
    outcome: Optional[OutcomeKind] = None

    def to_dict(self) -> dict:
        """Convert to the JSON Lines record; `outcome` is absent on enter."""
        record = {
            "kind": self.kind.value,
            "rule": int(self.rule),
            "stmt": self.stmt,
            "depth": self.depth,
        }
        if self.outcome is not None:
            record["outcome"] = self.outcome.value
        return record


@dataclass
class ExecStats:
    """Statistics for one run."""
    steps: int = 0
    calls: int = 0
    chooses: int = 0
    alternatives_tried: int = 0
    rollbacks: int = 0
    max_call_depth: int = 0
    start_time: Optional[datetime] = None
    end_time: Optional[datetime] = None

    def duration_seconds(self) -> float:
        """Get run duration in seconds."""
        if self.start_time and self.end_time:
            return (self.end_time - self.start_time).total_seconds()
        return 0.0

    def summary(self) -> str:
        duration = self.duration_seconds()
        return (
            f"Run completed in {duration:.3f} seconds\n"
            f"Rule applications: {self.steps}\n"
            f"Procedure calls: {self.calls} (max depth {self.max_call_depth})\n"
            f"Choose statements: {self.chooses}\n"
            f"Alternatives tried: {self.alternatives_tried}\n"
            f"Rollbacks: {self.rollbacks}"
        )


@dataclass
class RunReport:
    """What the CLI reports for a run."""
    outcome: OutcomeKind
    error_codes: List[str] = field(default_factory=list)
    final_state: List[Tuple[str, str]] = field(default_factory=list)
    steps: int = 0

    def __post_init__(self):
        if (self.outcome is OutcomeKind.FAILURE) != bool(self.error_codes):
            raise ValueError("error_codes must be non-empty exactly when the outcome is failure")

    @classmethod
    def from_run(cls, outcome: Outcome, state: State, stats: ExecStats) -> "RunReport":
        codes = outcome.code_list if isinstance(outcome, Failure) else []
        final_state = [(name, render_value(state.get(name))) for name in state.names()]
        return cls(outcome=outcome.kind, error_codes=codes, final_state=final_state, steps=stats.steps)

    def state_lines(self) -> List[str]:
        return [f"{name}={value}" for name, value in self.final_state]

    def to_dict(self) -> dict:
        return {
            "outcome": self.outcome.value,
            "error_codes": list(self.error_codes),
            "final_state": {name: value for name, value in self.final_state},
            "steps": self.steps,
        }
