"""
Translation of traditional selection statements into choose form.

    if (c) S else T          ->  choose(c; S, !c; T)
    switch (e) { case v: S; break; ... default: D }
                             ->  choose(e == v; S, ..., true; D)
    try B catch H            ->  choose(B, H)

Also contains the mini-Java front end (`.mj` files) for these statements.
Java-like methods `name(params) { ... }` become procedure definitions.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from src.models import (
    TRUE, Binary, BinaryOp, Choose, Cond, Defn, Expr, Literal, NegCond, Seq,
    Stmt, Value, ValueKind, value_kind,
)
from src.parser import KEYWORDS, Parser, Token, TokenKind, print_program

logger = logging.getLogger(__name__)


class SugarStmt:
    """Base class for statements of the mini-Java front end."""
    __slots__ = ()


@dataclass(frozen=True)
class Plain(SugarStmt):
    """A core statement used as-is."""
    stmt: Stmt


@dataclass(frozen=True)
class SSeq(SugarStmt):
    first: SugarStmt
    second: SugarStmt


@dataclass(frozen=True)
class IfThenElse(SugarStmt):
    cond: Expr
    then: SugarStmt
    otherwise: Optional[SugarStmt] = None


@dataclass(frozen=True)
class Switch(SugarStmt):
    """Switch without fall-through; case labels are pairwise distinct values."""
    scrutinee: Expr
    cases: Tuple[Tuple[Value, SugarStmt], ...]
    default: Optional[SugarStmt] = None

    def __post_init__(self):
        cases = tuple((label, body) for label, body in self.cases)
        labels = [(value_kind(label), label) for label, _ in cases]
        if len(set(labels)) != len(labels):
            raise ValueError("switch case labels must be distinct")
        object.__setattr__(self, "cases", cases)


@dataclass(frozen=True)
class TryCatch(SugarStmt):
    body: SugarStmt
    handler: SugarStmt


@dataclass(frozen=True)
class SugarDefn:
    """A Java-like method `name(params) { ... }`."""
    name: str
    params: Tuple[str, ...]
    body: SugarStmt


def sugar_seq(stmts: Sequence[SugarStmt]) -> SugarStmt:
    """Fold into right-nested SSeq; an empty block is `t`."""
    if not stmts:
        return Plain(TRUE)
    result = stmts[-1]
    for stmt in reversed(stmts[:-1]):
        result = SSeq(stmt, result)
    return result


def desugar(sugar: SugarStmt) -> Stmt:
    """
    Translate a sugar statement into the core language.

    A missing else branch or default becomes `t`. Try-catch always yields a
    two-alternative choose in body-then-handler order; use flatten_choose to
    merge nested handlers.
    """
    if isinstance(sugar, Plain):
        return sugar.stmt
    if isinstance(sugar, SSeq):
        return Seq(desugar(sugar.first), desugar(sugar.second))
    if isinstance(sugar, IfThenElse):
        otherwise = desugar(sugar.otherwise) if sugar.otherwise is not None else TRUE
        return Choose((
            Seq(Cond(sugar.cond), desugar(sugar.then)),
            Seq(NegCond(sugar.cond), otherwise),
        ))
    if isinstance(sugar, Switch):
        alts = [
            Seq(Cond(Binary(BinaryOp.EQ, sugar.scrutinee, Literal(label))), desugar(body))
            for label, body in sugar.cases
        ]
        default = desugar(sugar.default) if sugar.default is not None else TRUE
        alts.append(Seq(Cond(Literal(True)), default))
        return Choose(tuple(alts))
    if isinstance(sugar, TryCatch):
        return Choose((desugar(sugar.body), desugar(sugar.handler)))
    raise TypeError(f"Not a sugar statement: {sugar!r}")


def flatten_choose(stmt: Stmt) -> Stmt:
    """Splice nested choose alternatives into their parent choose, recursively."""
    if isinstance(stmt, Choose):
        alts: List[Stmt] = []
        for alt in stmt.alts:
            flat = flatten_choose(alt)
            if isinstance(flat, Choose):
                alts.extend(flat.alts)
            else:
                alts.append(flat)
        return Choose(tuple(alts))
    if isinstance(stmt, Seq):
        return Seq(flatten_choose(stmt.first), flatten_choose(stmt.second))
    return stmt


def desugar_defn(defn: SugarDefn, flatten: bool = False) -> Defn:
    body = desugar(defn.body)
    if flatten:
        body = flatten_choose(body)
    return Defn(defn.name, defn.params, body)


SUGAR_KEYWORDS = KEYWORDS | frozenset(
    {"if", "else", "switch", "case", "default", "break", "try", "catch"}
)


class SugarParser(Parser):
    """
    Parser for mini-Java selection statements.

        method  := IDENT "(" [ IDENT { "," IDENT } ] ")" block ;
        block   := "{" { sstmt } "}" ;
        sstmt   := "if" "(" expr ")" branch [ "else" branch ]
                 | "switch" "(" expr ")" "{" { clause } "}"
                 | "try" block "catch" block { "catch" block }
                 | block
                 | basic ";" ;
        branch  := block | sstmt ;
        clause  := ( "case" label | "default" ) ":" { sstmt } [ "break" ";" ] ;
        label   := INT | "-" INT | STRING | "true" | "false" | IDENT ;

    Every clause but the last must end in `break;`. A bare identifier label
    stands for the string of the same name.
    """

    keywords = SUGAR_KEYWORDS

    def parse_sugar_program(self) -> List[SugarDefn]:
        defs: List[SugarDefn] = []
        seen: Dict[Tuple[str, int], Token] = {}
        while not self.at_end():
            name_token = self.expect_ident("method name")
            params = self.parse_params()
            self._params = frozenset(params)
            try:
                body = self.parse_block()
            finally:
                self._params = frozenset()
            self.register(name_token, len(params), seen)
            defs.append(SugarDefn(name_token.text, params, body))
        return defs

    def parse_sugar_sequence(self, closers: Sequence[str] = ()) -> SugarStmt:
        stmts: List[SugarStmt] = []
        while not self.at_end() and not any(self.check(c) for c in closers):
            stmts.append(self.parse_sugar_stmt())
        return sugar_seq(stmts)

    def parse_block(self) -> SugarStmt:
        self.expect("{")
        body = self.parse_sugar_sequence(("}",))
        self.expect("}")
        return body

    def parse_branch(self) -> SugarStmt:
        if self.check("{"):
            return self.parse_block()
        return self.parse_sugar_stmt()

    def parse_sugar_stmt(self) -> SugarStmt:
        if self.match("if"):
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            then = self.parse_branch()
            otherwise = self.parse_branch() if self.match("else") else None
            return IfThenElse(cond, then, otherwise)
        if self.match("switch"):
            return self.parse_switch()
        if self.match("try"):
            result = self.parse_block()
            self.expect("catch")
            result = TryCatch(result, self.parse_block())
            while self.match("catch"):
                result = TryCatch(result, self.parse_block())
            return result
        if self.check("{"):
            return self.parse_block()
        for word in ("break", "case", "default", "else", "catch"):
            if self.check(word):
                raise self.error(f"Unexpected '{word}'", ["statement"])
        stmt = self.parse_basic()
        self.expect(";")
        return Plain(stmt)

    def parse_switch(self) -> Switch:
        self.expect("(")
        scrutinee = self.parse_expr()
        self.expect(")")
        self.expect("{")
        cases: List[Tuple[Value, SugarStmt]] = []
        default: Optional[SugarStmt] = None
        seen_labels: Dict[Tuple[ValueKind, Value], Token] = {}
        previous_broke = True
        while not self.check("}"):
            clause_token = self.curr()
            if not (self.check("case") or self.check("default")):
                raise self.error(
                    f"Expected 'case', 'default' or '}}', found {clause_token.describe()}",
                    ["'case'", "'default'", "'}'"],
                )
            if not previous_broke:
                raise self.error(
                    "Case falls through into the next clause; end it with 'break;'",
                    ["'break'"],
                )
            if self.match("case"):
                label_token = self.curr()
                label = self.parse_case_label()
                key = (value_kind(label), label)
                if key in seen_labels:
                    raise self.error(
                        f"Duplicate case label {label_token.text} (first at {seen_labels[key].pos})",
                        token=label_token,
                    )
                seen_labels[key] = label_token
                self.expect(":")
                body, previous_broke = self.parse_clause_body()
                cases.append((label, body))
            else:
                self.advance()
                if default is not None:
                    raise self.error("Duplicate default clause", token=clause_token)
                self.expect(":")
                default, previous_broke = self.parse_clause_body()
        self.expect("}")
        return Switch(scrutinee, tuple(cases), default)

    def parse_clause_body(self) -> Tuple[SugarStmt, bool]:
        body = self.parse_sugar_sequence(("case", "default", "}", "break"))
        if self.match("break"):
            self.expect(";")
            return body, True
        return body, False

    def parse_case_label(self) -> Value:
        token = self.curr()
        if token.kind is TokenKind.INT:
            return self.parse_int_literal()
        if self.check("-") and self.peek().kind is TokenKind.INT:
            self.advance()
            return self.parse_int_literal(negative=True)
        if token.kind is TokenKind.STRING:
            self.advance()
            return token.value
        if self.match("true"):
            return True
        if self.match("false"):
            return False
        if token.kind is TokenKind.IDENT:
            self.advance()
            return token.text
        raise self.error(
            f"Expected a case label, found {token.describe()}",
            ["integer", "string", "'true'", "'false'", "identifier"],
        )


def parse_sugar(text: str) -> SugarStmt:
    """
    Parse a sequence of mini-Java statements.

    Raises:
        ParseError: On syntax errors, including switch fall-through
    """
    parser = SugarParser(text)
    stmt = parser.parse_sugar_sequence()
    parser.expect_end()
    return stmt


def parse_sugar_program(text: str) -> List[SugarDefn]:
    """Parse a `.mj` file of Java-like methods."""
    return SugarParser(text).parse_sugar_program()


def translate(text: str, flatten: bool = False) -> str:
    """
    Translate a `.mj` program into canonical `.ch` text.

    Args:
        text (str): Mini-Java source
        flatten (bool): Merge nested choose statements

    Returns:
        str: Program text in the choose language
    """
    defs = [desugar_defn(d, flatten) for d in parse_sugar_program(text)]
    logger.debug(f"Translated {len(defs)} method(s)")
    return print_program(defs)
