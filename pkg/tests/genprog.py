"""Seeded random AST generation shared by the fuzzing and round-trip tests."""

import random

from swhile.syntax import (
    And,
    Assign,
    BoolLit,
    Call,
    DiffBlock,
    If,
    Leq,
    Lit,
    Or,
    Sample,
    Seq,
    Var,
    VarTable,
    While,
)

_NAMES = ("x", "y", "z", "w")

# "exp" stays out of assignment right-hand sides: there the concrete syntax
# reads exp(...) as the exponential sampler, so such ASTs do not round-trip.
_SAFE_UNARY = ("neg", "ln", "sqrt", "sin", "cos")


def gen_table(rng: random.Random, max_vars: int = 3) -> VarTable:
    return VarTable(_NAMES[: rng.randint(1, max_vars)])


def gen_expr(rng: random.Random, table: VarTable, depth: int, allow_exp: bool = False):
    if depth <= 0 or rng.random() < 0.35:
        if rng.random() < 0.5:
            value = rng.choice((0.0, 1.0, -1.0, 0.5, 2.0, -9.8, 0.25, 3.0))
            return Lit(value)
        index = rng.randrange(len(table))
        return Var(index, table.names[index])
    roll = rng.random()
    if roll < 0.7:
        op = rng.choice(("+", "-", "*", "/"))
        return Call(op, (gen_expr(rng, table, depth - 1, allow_exp),
                         gen_expr(rng, table, depth - 1, allow_exp)))
    ops = _SAFE_UNARY + (("exp",) if allow_exp else ())
    op = rng.choice(ops)
    arg = gen_expr(rng, table, depth - 1, allow_exp)
    if op == "neg" and isinstance(arg, Lit):
        return Lit(-arg.value)  # the parser folds -literal the same way
    return Call(op, (arg,))


def gen_bool(rng: random.Random, table: VarTable, depth: int):
    if depth <= 0 or rng.random() < 0.4:
        roll = rng.random()
        if roll < 0.2:
            return BoolLit(rng.random() < 0.5)
        return Leq(gen_expr(rng, table, depth - 1), gen_expr(rng, table, depth - 1))
    cls = And if rng.random() < 0.5 else Or
    return cls(gen_bool(rng, table, depth - 1), gen_bool(rng, table, depth - 1))


def gen_atomic(rng: random.Random, table: VarTable, allow_exp: bool = False):
    roll = rng.random()
    index = rng.randrange(len(table))
    var = Var(index, table.names[index])
    if roll < 0.35:
        return Assign(var, gen_expr(rng, table, 2, allow_exp))
    if roll < 0.55:
        return Sample(var)
    derivs = tuple(
        gen_expr(rng, table, 1) if rng.random() < 0.6 else Lit(0.0) for _ in table.names
    )
    return DiffBlock(derivs, gen_expr(rng, table, 1))


def gen_program(rng: random.Random, table: VarTable, depth: int, allow_exp: bool = False):
    if depth <= 1 or rng.random() < 0.3:
        return gen_atomic(rng, table, allow_exp)
    roll = rng.random()
    if roll < 0.5:
        return Seq(gen_program(rng, table, depth - 1, allow_exp),
                   gen_program(rng, table, depth - 1, allow_exp))
    if roll < 0.8:
        return If(gen_bool(rng, table, 2),
                  gen_program(rng, table, depth - 1, allow_exp),
                  gen_program(rng, table, depth - 1, allow_exp))
    return While(gen_bool(rng, table, 2), gen_program(rng, table, depth - 1, allow_exp))


def gen_declared_program(rng: random.Random, depth: int = 4):
    """Program prefixed with one assignment per variable, in table order.

    The prefix pins the inferred variable table to `table`, so pretty
    printing followed by parsing reproduces the AST exactly.
    """
    table = gen_table(rng)
    body = gen_program(rng, table, depth)
    program = body
    for index in reversed(range(len(table))):
        var = Var(index, table.names[index])
        program = Seq(Assign(var, Lit(float(index))), program)
    return program, table


def gen_store(rng: random.Random, table: VarTable, lo: float = -2.0, hi: float = 2.0):
    return tuple(round(rng.uniform(lo, hi), 3) for _ in table.names)
