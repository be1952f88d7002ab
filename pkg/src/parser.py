"""
Parser and printer for the choose language surface syntax.

Grammar (EBNF):

    program := { procdef } ;
    procdef := "proc" IDENT "(" [ IDENT { "," IDENT } ] ")" "{" stmt "}" ;
    stmt    := basic { ";" basic } [ ";" ] ;
    basic   := "t" | "f" [ "(" STRING ")" ]
             | "choose" "(" stmt { "," stmt } ")"
             | "{" stmt "}"
             | IDENT "=" expr
             | IDENT "(" [ expr { "," expr } ] ")"
             | expr ;
    expr    := or ; or := and { "||" and } ; and := cmp { "&&" cmp } ;
    cmp     := add { ("==" | "!=" | "<" | "<=" | ">" | ">=") add } ;
    add     := mul { ("+" | "-") mul } ; mul := unary { ("*" | "/" | "%") unary } ;
    unary   := "-" INT | ("!" | "-") unary | atom ;
    atom    := INT | STRING | "true" | "false" | IDENT | "(" expr ")" ;

Comments run from "//" to the end of the line. A bare expression at
statement position is a condition; one written "!e" is a negated condition.
A minus sign directly before an integer is part of the literal, so "-5" is
the literal minus five and "-(5)" negates the literal five.
"""

import logging
import re
from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from src.models import (
    INT_MAX, INT_MIN, RESERVED_CODES, TRUE,
    Assign, Binary, BinaryOp, Call, Choose, Cond, Defn, ErrorCode, Expr, Fail,
    Literal, NegCond, Program, Seq, Stmt, Truth, Unary, UnaryOp, Var, seq_of,
)
from src.utils import render_value

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SourcePos:
    """1-based line and column; columns count characters."""
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


class ParseError(Exception):
    """A syntax error with its position and the tokens that would have been accepted."""

    def __init__(self, pos: SourcePos, message: str, expected: Sequence[str] = ()):
        if not message:
            raise ValueError("ParseError needs a message")
        self.pos = pos
        self.message = message
        self.expected = list(expected)
        super().__init__(str(self))

    def __str__(self) -> str:
        text = f"{self.pos}: {self.message}"
        if self.expected:
            text += f" (expected: {', '.join(self.expected)})"
        return text


class TokenKind(Enum):
    INT = "integer"
    STRING = "string"
    IDENT = "identifier"
    KEYWORD = "keyword"
    OP = "symbol"
    EOF = "end of input"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    pos: SourcePos
    value: object = None

    def describe(self) -> str:
        if self.kind is TokenKind.EOF:
            return "end of input"
        return f"{self.kind.value} '{self.text}'"


KEYWORDS = frozenset({"proc", "t", "f", "choose", "true", "false"})

_TOKEN_RE = re.compile(r"""
    (?P<WS>[ \t\r\n]+)
  | (?P<COMMENT>//[^\n]*)
  | (?P<INT>\d+)
  | (?P<STRING>"(?:[^"\\\n]|\\.)*")
  | (?P<IDENT>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<OP>==|!=|<=|>=|&&|\|\||[-+*/%<>=!(){},;:])
""", re.VERBOSE)

_UNESCAPES = {'"': '"', "\\": "\\", "n": "\n"}


class _Positions:
    """Maps string offsets to line/column positions."""

    def __init__(self, text: str):
        self.line_starts = [0] + [m.end() for m in re.finditer(r"\n", text)]

    def at(self, offset: int) -> SourcePos:
        lo, hi = 0, len(self.line_starts) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.line_starts[mid] <= offset:
                lo = mid
            else:
                hi = mid - 1
        return SourcePos(lo + 1, offset - self.line_starts[lo] + 1)


def _unescape(body: str, offset: int, positions: _Positions) -> str:
    chars = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\":
            escaped = body[i + 1]
            if escaped not in _UNESCAPES:
                raise ParseError(
                    positions.at(offset + i),
                    f"Unsupported escape sequence '\\{escaped}'",
                    ['\\"', "\\\\", "\\n"],
                )
            chars.append(_UNESCAPES[escaped])
            i += 2
        else:
            chars.append(ch)
            i += 1
    return "".join(chars)


def tokenize(text: str, keywords: FrozenSet[str] = KEYWORDS) -> List[Token]:
    """
    Split source text into tokens, ending with an EOF token.

    Args:
        text (str): Source text
        keywords: Words lexed as keywords rather than identifiers

    Returns:
        list: Tokens with positions
    """
    positions = _Positions(text)
    tokens: List[Token] = []
    offset = 0
    while offset < len(text):
        match = _TOKEN_RE.match(text, offset)
        if match is None:
            pos = positions.at(offset)
            if text[offset] == '"':
                raise ParseError(pos, "Unterminated string literal", ['"'])
            raise ParseError(pos, f"Unexpected character {text[offset]!r}")
        kind = match.lastgroup
        lexeme = match.group()
        pos = positions.at(offset)
        if kind == "INT":
            tokens.append(Token(TokenKind.INT, lexeme, pos, int(lexeme)))
        elif kind == "STRING":
            value = _unescape(lexeme[1:-1], offset + 1, positions)
            tokens.append(Token(TokenKind.STRING, lexeme, pos, value))
        elif kind == "IDENT":
            token_kind = TokenKind.KEYWORD if lexeme in keywords else TokenKind.IDENT
            tokens.append(Token(token_kind, lexeme, pos))
        elif kind == "OP":
            tokens.append(Token(TokenKind.OP, lexeme, pos))
        offset = match.end()
    tokens.append(Token(TokenKind.EOF, "", positions.at(len(text))))
    return tokens


# Binding power of binary operators; higher binds tighter.
PREC_OR, PREC_AND, PREC_CMP, PREC_ADD, PREC_MUL, PREC_UNARY = 1, 2, 3, 4, 5, 6

BINARY_PRECEDENCE: Dict[BinaryOp, int] = {
    BinaryOp.OR: PREC_OR,
    BinaryOp.AND: PREC_AND,
    BinaryOp.EQ: PREC_CMP, BinaryOp.NE: PREC_CMP,
    BinaryOp.LT: PREC_CMP, BinaryOp.LE: PREC_CMP,
    BinaryOp.GT: PREC_CMP, BinaryOp.GE: PREC_CMP,
    BinaryOp.ADD: PREC_ADD, BinaryOp.SUB: PREC_ADD,
    BinaryOp.MUL: PREC_MUL, BinaryOp.DIV: PREC_MUL, BinaryOp.MOD: PREC_MUL,
}

_LEVELS: List[List[BinaryOp]] = [
    [op for op, prec in BINARY_PRECEDENCE.items() if prec == level]
    for level in range(PREC_OR, PREC_UNARY)
]

_STMT_CLOSERS = ("}", ")", ",")


class Parser:
    """Recursive-descent parser over a token list."""

    keywords: FrozenSet[str] = KEYWORDS

    def __init__(self, text: str):
        self.tokens = tokenize(text, self.keywords)
        self.current = 0
        self._params: FrozenSet[str] = frozenset()

    # Token helpers

    def curr(self) -> Token:
        return self.tokens[self.current]

    def peek(self, ahead: int = 1) -> Token:
        index = min(self.current + ahead, len(self.tokens) - 1)
        return self.tokens[index]

    def advance(self) -> Token:
        token = self.tokens[self.current]
        if token.kind is not TokenKind.EOF:
            self.current += 1
        return token

    def at_end(self) -> bool:
        return self.curr().kind is TokenKind.EOF

    def check(self, text: str) -> bool:
        """True if the current token is the symbol or keyword `text`."""
        token = self.curr()
        return token.kind in (TokenKind.OP, TokenKind.KEYWORD) and token.text == text

    def match(self, text: str) -> bool:
        if self.check(text):
            self.advance()
            return True
        return False

    def error(self, message: str, expected: Sequence[str] = (), token: Optional[Token] = None) -> ParseError:
        token = token or self.curr()
        return ParseError(token.pos, message, expected)

    def expect(self, text: str) -> Token:
        if not self.check(text):
            raise self.error(f"Expected '{text}', found {self.curr().describe()}", [f"'{text}'"])
        return self.advance()

    def expect_ident(self, what: str = "identifier") -> Token:
        token = self.curr()
        if token.kind is not TokenKind.IDENT:
            raise self.error(f"Expected {what}, found {token.describe()}", ["identifier"])
        return self.advance()

    def expect_end(self) -> None:
        if not self.at_end():
            raise self.error(f"Unexpected {self.curr().describe()}", ["end of input"])

    # Programs

    def parse_program(self) -> List[Defn]:
        """program := { procdef }"""
        defs: List[Defn] = []
        seen: Dict[Tuple[str, int], Token] = {}
        while not self.at_end():
            name_token, defn = self.parse_procdef()
            self.register(name_token, defn.arity, seen)
            defs.append(defn)
        return defs

    @staticmethod
    def register(name_token: Token, arity: int, seen: Dict[Tuple[str, int], Token]) -> None:
        """Reject a second definition with the same name and arity."""
        key = (name_token.text, arity)
        if key in seen:
            raise ParseError(
                name_token.pos,
                f"Duplicate definition of {name_token.text}/{arity} "
                f"(first defined at {seen[key].pos})",
            )
        seen[key] = name_token

    def parse_params(self) -> Tuple[str, ...]:
        self.expect("(")
        params: List[str] = []
        if not self.check(")"):
            while True:
                token = self.expect_ident("parameter name")
                if token.text in params:
                    raise self.error(f"Duplicate parameter '{token.text}'", token=token)
                params.append(token.text)
                if not self.match(","):
                    break
        self.expect(")")
        return tuple(params)

    def parse_procdef(self) -> Tuple[Token, Defn]:
        self.expect("proc")
        name_token = self.expect_ident("procedure name")
        params = self.parse_params()
        self.expect("{")
        self._params = frozenset(params)
        try:
            body = self.parse_stmt()
        finally:
            self._params = frozenset()
        self.expect("}")
        logger.debug(f"Parsed definition {name_token.text}/{len(params)}")
        return name_token, Defn(name_token.text, params, body)

    # Statements

    def parse_stmt(self) -> Stmt:
        """stmt := basic { ";" basic } [ ";" ]"""
        items = [self.parse_basic()]
        while self.match(";"):
            if self.at_end() or any(self.check(c) for c in _STMT_CLOSERS):
                break
            items.append(self.parse_basic())
        return seq_of(items)

    def parse_basic(self) -> Stmt:
        token = self.curr()
        if self.match("t"):
            return TRUE
        if self.match("f"):
            if self.match("("):
                code_token = self.curr()
                if code_token.kind is not TokenKind.STRING:
                    raise self.error(f"Expected error code string, found {code_token.describe()}", ["string"])
                self.advance()
                self.expect(")")
                return Fail(self._user_code(code_token))
            return Fail()
        if self.match("choose"):
            return self.parse_choose()
        if self.match("{"):
            inner = self.parse_stmt()
            self.expect("}")
            return inner
        if token.kind is TokenKind.IDENT:
            following = self.peek()
            if following.kind is TokenKind.OP and following.text == "=":
                return self.parse_assign()
            if following.kind is TokenKind.OP and following.text == "(":
                return self.parse_call()
        if not self._starts_expr(token):
            raise self.error(
                f"Expected a statement, found {token.describe()}",
                ["'t'", "'f'", "'choose'", "'{'", "identifier", "expression"],
            )
        negated = self.check("!")
        expr = self.parse_expr()
        if negated and isinstance(expr, Unary) and expr.op is UnaryOp.NOT:
            return NegCond(expr.operand)
        return Cond(expr)

    def _user_code(self, token: Token) -> ErrorCode:
        code = token.value
        if not code:
            raise self.error("Error code must not be empty", token=token)
        if code in RESERVED_CODES and code != "f":
            raise self.error(f"Error code {token.text} is reserved for the engine", token=token)
        return ErrorCode(code)

    def parse_choose(self) -> Choose:
        self.expect("(")
        if self.check(")"):
            raise self.error("choose needs at least one alternative", ["statement"])
        alts = [self.parse_stmt()]
        while self.match(","):
            alts.append(self.parse_stmt())
        self.expect(")")
        return Choose(tuple(alts))

    def parse_assign(self) -> Assign:
        target = self.advance()
        if target.text in self._params:
            raise self.error(f"Cannot assign to parameter '{target.text}'", token=target)
        self.expect("=")
        return Assign(target.text, self.parse_expr())

    def parse_call(self) -> Call:
        name = self.advance()
        self.expect("(")
        args: List[Expr] = []
        if not self.check(")"):
            args.append(self.parse_expr())
            while self.match(","):
                args.append(self.parse_expr())
        self.expect(")")
        return Call(name.text, tuple(args))

    # Expressions

    @staticmethod
    def _starts_expr(token: Token) -> bool:
        if token.kind in (TokenKind.INT, TokenKind.STRING, TokenKind.IDENT):
            return True
        if token.kind is TokenKind.KEYWORD:
            return token.text in ("true", "false")
        return token.kind is TokenKind.OP and token.text in ("(", "!", "-")

    def parse_expr(self, level: int = 0) -> Expr:
        if level == len(_LEVELS):
            return self.parse_unary()
        left = self.parse_expr(level + 1)
        while True:
            op = self._binary_op(_LEVELS[level])
            if op is None:
                return left
            self.advance()
            left = Binary(op, left, self.parse_expr(level + 1))

    def _binary_op(self, ops: List[BinaryOp]) -> Optional[BinaryOp]:
        token = self.curr()
        if token.kind is not TokenKind.OP:
            return None
        for op in ops:
            if op.value == token.text:
                return op
        return None

    def parse_unary(self) -> Expr:
        if self.match("!"):
            return Unary(UnaryOp.NOT, self.parse_unary())
        if self.match("-"):
            if self.curr().kind is TokenKind.INT:
                return Literal(self.parse_int_literal(negative=True))
            return Unary(UnaryOp.NEG, self.parse_unary())
        return self.parse_atom()

    def parse_int_literal(self, negative: bool = False) -> int:
        """Consume an INT token; a preceding minus sign is folded into the literal."""
        token = self.curr()
        value = -token.value if negative else token.value
        if not INT_MIN <= value <= INT_MAX:
            start = self.tokens[self.current - 1] if negative else token
            text = f"-{token.text}" if negative else token.text
            raise self.error(f"Integer literal {text} is out of the 64-bit range", token=start)
        self.advance()
        return value

    def parse_atom(self) -> Expr:
        token = self.curr()
        if token.kind is TokenKind.INT:
            return Literal(self.parse_int_literal())
        if token.kind is TokenKind.STRING:
            self.advance()
            return Literal(token.value)
        if self.match("true"):
            return Literal(True)
        if self.match("false"):
            return Literal(False)
        if token.kind is TokenKind.IDENT:
            self.advance()
            if self.check("("):
                raise self.error("Procedure calls are not allowed inside expressions")
            return Var(token.text)
        if self.match("("):
            inner = self.parse_expr()
            self.expect(")")
            return inner
        raise self.error(
            f"Expected an expression, found {token.describe()}",
            ["integer", "string", "'true'", "'false'", "identifier", "'('", "'!'", "'-'"],
        )

    def parse_bindings(self) -> List[Tuple[str, Expr]]:
        """bindings := IDENT "=" expr { "," IDENT "=" expr }"""
        bindings: List[Tuple[str, Expr]] = []
        if self.at_end():
            return bindings
        while True:
            name = self.expect_ident("variable name")
            self.expect("=")
            bindings.append((name.text, self.parse_expr()))
            if not self.match(","):
                break
        self.expect_end()
        return bindings


def parse_program(text: str) -> Program:
    """
    Parse a program text into its definitions with an empty initial state.

    Raises:
        ParseError: On the first syntax error or a duplicate (name, arity)
    """
    parser = Parser(text)
    defs = parser.parse_program()
    logger.debug(f"Parsed {len(defs)} definition(s)")
    return Program(defs)


def parse_goal(text: str) -> Stmt:
    """Parse a single statement (for example a CLI goal)."""
    parser = Parser(text)
    stmt = parser.parse_stmt()
    parser.expect_end()
    return stmt


def parse_expression(text: str) -> Expr:
    parser = Parser(text)
    expr = parser.parse_expr()
    parser.expect_end()
    return expr


def parse_bindings(text: str) -> List[Tuple[str, Expr]]:
    """Parse `name=expr, name=expr, ...` as used by the CLI --state flag."""
    return Parser(text).parse_bindings()


# Printing

def print_expr(expr: Expr, min_prec: int = 0) -> str:
    """Render an expression, parenthesizing only where precedence requires it."""
    if isinstance(expr, Literal):
        text = render_value(expr.value)
        prec = PREC_UNARY if text.startswith("-") else PREC_UNARY + 1
    elif isinstance(expr, Var):
        text, prec = expr.name, PREC_UNARY + 1
    elif isinstance(expr, Unary):
        operand = print_expr(expr.operand, PREC_UNARY)
        if expr.op is UnaryOp.NEG and operand[:1].isdigit():
            # "-5" would re-parse as the literal
            operand = f"({operand})"
        text, prec = expr.op.value + operand, PREC_UNARY
    elif isinstance(expr, Binary):
        prec = BINARY_PRECEDENCE[expr.op]
        left = print_expr(expr.left, prec)
        right = print_expr(expr.right, prec + 1)
        text = f"{left} {expr.op.value} {right}"
    else:
        raise TypeError(f"Not an expression: {expr!r}")
    if prec < min_prec:
        return f"({text})"
    return text


def print_stmt(stmt: Stmt) -> str:
    """
    Render a statement in canonical surface syntax.

    parse_goal(print_stmt(s)) is structurally equal to s.
    """
    if isinstance(stmt, Truth):
        return "t"
    if isinstance(stmt, Fail):
        if stmt.code.code == "f":
            return "f"
        return f"f({render_value(stmt.code.code)})"
    if isinstance(stmt, Call):
        return f"{stmt.name}({', '.join(print_expr(a) for a in stmt.args)})"
    if isinstance(stmt, Cond):
        text = print_expr(stmt.expr)
        if isinstance(stmt.expr, Unary) and stmt.expr.op is UnaryOp.NOT:
            # a leading "!" would read back as a negated condition
            return f"({text})"
        return text
    if isinstance(stmt, NegCond):
        return "!" + print_expr(stmt.expr, PREC_UNARY)
    if isinstance(stmt, Assign):
        return f"{stmt.var} = {print_expr(stmt.expr)}"
    if isinstance(stmt, Seq):
        return f"{_print_seq_part(stmt.first)}; {print_stmt(stmt.second)}"
    if isinstance(stmt, Choose):
        return f"choose({', '.join(print_stmt(a) for a in stmt.alts)})"
    raise TypeError(f"Not a statement: {stmt!r}")


def _print_seq_part(stmt: Stmt) -> str:
    if isinstance(stmt, Seq):
        return "{ " + print_stmt(stmt) + " }"
    return print_stmt(stmt)


def print_program(defs: Sequence[Defn]) -> str:
    """Render definitions as a canonical program text, one sequence step per line."""
    blocks = []
    for defn in defs:
        steps = []
        body = defn.body
        while isinstance(body, Seq):
            steps.append(_print_seq_part(body.first))
            body = body.second
        steps.append(print_stmt(body))
        lines = ";\n    ".join(steps)
        blocks.append(f"proc {defn.name}({', '.join(defn.params)}) {{\n    {lines}\n}}\n")
    return "\n".join(blocks)
