"""
Seeded random generators for programs, goals and expressions.

Every generator draws from its own random.Random, so a seed always yields the
same case. Integer literals may be negative, and outside safe mode they
include the 64-bit extremes.
"""

import random
from typing import List, Optional, Sequence, Tuple

from src.models import (
    INT_MAX, INT_MIN, TRUE, Assign, Binary, BinaryOp, Call, Choose, Cond, Defn,
    Expr, Fail, Literal, NegCond, Program, Seq, Stmt, Unary, UnaryOp, Var,
)
from src.state import State

VARIABLES = tuple(f"v{i}" for i in range(8))
PARAMS = ("a", "b")
ERROR_CODES = ("f", "e1", "e2", "e3")
STRINGS = ("", "tom", "kim", 'say "hi"', "two\nlines", "back\\slash")

ARITH_OPS = (BinaryOp.ADD, BinaryOp.SUB, BinaryOp.MUL, BinaryOp.DIV, BinaryOp.MOD)
SAFE_ARITH_OPS = (BinaryOp.ADD, BinaryOp.SUB, BinaryOp.MUL)
CMP_OPS = (BinaryOp.EQ, BinaryOp.NE, BinaryOp.LT, BinaryOp.LE, BinaryOp.GT, BinaryOp.GE)


class ProgramGenerator:
    """
    Random programs over a small set of global variables.

    Procedures p0..pN-1 take up to two parameters; pI only calls pJ with
    J > I, so generated programs never recurse.
    """

    def __init__(
        self,
        seed: int,
        max_depth: int = 6,
        variables: Sequence[str] = VARIABLES,
        procedures: int = 3,
    ):
        self.rng = random.Random(seed)
        self.max_depth = max_depth
        self.variables = tuple(variables)
        self.procedures = procedures
        self._scope: Tuple[str, ...] = ()
        self._callable: List[Tuple[str, int]] = []

    def _readable(self) -> Tuple[str, ...]:
        return self.variables + self._scope

    # Expressions

    def int_expr(self, depth: int, safe: bool = False) -> Expr:
        rng = self.rng
        if depth <= 0 or rng.random() < 0.4:
            if rng.random() < 0.5:
                if not safe and rng.random() < 0.05:
                    return Literal(rng.choice((INT_MIN, INT_MAX)))
                return Literal(rng.randint(-9, 9))
            return Var(rng.choice(self._readable()))
        if rng.random() < 0.15:
            return Unary(UnaryOp.NEG, self.int_expr(depth - 1, safe))
        ops = SAFE_ARITH_OPS if safe else ARITH_OPS
        return Binary(rng.choice(ops), self.int_expr(depth - 1, safe), self.int_expr(depth - 1, safe))

    def bool_expr(self, depth: int, safe: bool = False) -> Expr:
        """A boolean-valued expression; with safe=True it evaluates without error
        as long as every variable is bound to an int."""
        rng = self.rng
        if depth <= 0 or rng.random() < 0.2:
            return Literal(rng.random() < 0.5)
        roll = rng.random()
        if roll < 0.5:
            return Binary(rng.choice(CMP_OPS), self.int_expr(depth - 1, safe), self.int_expr(depth - 1, safe))
        if roll < 0.75:
            op = rng.choice((BinaryOp.AND, BinaryOp.OR))
            return Binary(op, self.bool_expr(depth - 1, safe), self.bool_expr(depth - 1, safe))
        if roll < 0.9 or safe:
            return Unary(UnaryOp.NOT, self.bool_expr(depth - 1, safe))
        op = rng.choice((BinaryOp.EQ, BinaryOp.NE))
        right = Literal(rng.choice(STRINGS)) if rng.random() < 0.5 else Var(rng.choice(self._readable()))
        return Binary(op, Literal(rng.choice(STRINGS)), right)

    def expr(self, depth: int) -> Expr:
        roll = self.rng.random()
        if roll < 0.55:
            return self.int_expr(depth)
        if roll < 0.9:
            return self.bool_expr(depth)
        return Literal(self.rng.choice(STRINGS))

    # Statements

    def call(self) -> Call:
        rng = self.rng
        if not self._callable or rng.random() < 0.1:
            return Call("missing", ())
        name, arity = rng.choice(self._callable)
        return Call(name, tuple(self.int_expr(1) for _ in range(arity)))

    def leaf(self) -> Stmt:
        rng = self.rng
        roll = rng.random()
        if roll < 0.1:
            return TRUE
        if roll < 0.25:
            return Fail(rng.choice(ERROR_CODES))
        if roll < 0.55:
            return Assign(rng.choice(self.variables), self.expr(2))
        if roll < 0.75:
            return Cond(self.bool_expr(2))
        if roll < 0.9:
            return NegCond(self.bool_expr(2))
        return self.call()

    def stmt(self, depth: Optional[int] = None) -> Stmt:
        """A random statement whose tree is at most `depth` levels deep."""
        rng = self.rng
        depth = self.max_depth if depth is None else depth
        if depth <= 1:
            return self.leaf()
        roll = rng.random()
        if roll < 0.3:
            return self.leaf()
        if roll < 0.55:
            return Seq(self.stmt(depth - 1), self.stmt(depth - 1))
        if roll < 0.85:
            return Choose(tuple(self.stmt(depth - 1) for _ in range(rng.randint(1, 3))))
        return self.call()

    def side_effects(self, depth: int) -> Stmt:
        """A sequence of one to three assignments or leaves."""
        parts = [self.stmt(depth) for _ in range(self.rng.randint(1, 3))]
        result = parts[-1]
        for part in reversed(parts[:-1]):
            result = Seq(part, result)
        return result

    # Programs

    def initial_state(self, all_ints: bool = False) -> State:
        rng = self.rng
        return State({
            name: rng.randint(0, 9)
            for name in self.variables
            if all_ints or rng.random() < 0.6
        })

    def program(self) -> Program:
        rng = self.rng
        names = [f"p{i}" for i in range(self.procedures)]
        arities = [rng.randint(0, 2) for _ in names]
        defs: List[Defn] = []
        for i in reversed(range(len(names))):
            self._callable = list(zip(names[i + 1:], arities[i + 1:]))
            self._scope = PARAMS[:arities[i]]
            defs.append(Defn(names[i], self._scope, self.stmt(self.max_depth - 1)))
        defs.reverse()
        self._scope = ()
        self._callable = list(zip(names, arities))
        return Program(defs, self.initial_state())

    def case(self) -> Tuple[Program, Stmt]:
        """A program and a goal to run against it."""
        program = self.program()
        return program, self.stmt()


def cases(count: int, seed: int = 0, **kwargs):
    """Yield (index, program, goal) for `count` consecutive seeds."""
    for index in range(count):
        program, goal = ProgramGenerator(seed + index, **kwargs).case()
        yield index, program, goal
