"""Pure Python tape interpreter.

Mirrors the compiled kernel operation for operation.  Both call into the
same libm, so results agree bit for bit; the differences below only paper
over places where the math module raises instead of returning inf or nan.
"""

from __future__ import annotations

import math

from ._tape import (
    OP_ADD,
    OP_CONST,
    OP_COS,
    OP_DIV,
    OP_EXP,
    OP_LN,
    OP_MUL,
    OP_NEG,
    OP_POW,
    OP_SIN,
    OP_SUB,
    OP_VAR,
)

_INF = math.inf
_NAN = math.nan


def _sin(x):
    try:
        return math.sin(x)
    except ValueError:  # sin(inf) in C yields nan quietly
        return _NAN


def _cos(x):
    try:
        return math.cos(x)
    except ValueError:
        return _NAN


def _exp(x):
    try:
        return math.exp(x)
    except OverflowError:  # C exp overflows to inf
        return _INF


def _pow(x, n):
    try:
        return math.pow(x, n)
    except OverflowError:
        # C pow overflows to +-inf; the sign follows the base and parity.
        if x < 0 and n % 2 != 0:
            return -_INF
        return _INF


def eval_program(code, arg, starts, consts, points, out, status, stack_need):
    code = code.tolist()
    arg = arg.tolist()
    starts = starts.tolist()
    consts = consts.tolist()
    n_expr = len(starts) - 1
    stack = [0.0] * stack_need
    log = math.log
    for p in range(points.shape[0]):
        row = points[p].tolist()
        for e in range(n_expr):
            sp = 0
            err = 0
            for pc in range(starts[e], starts[e + 1]):
                op = code[pc]
                a = arg[pc]
                if op == OP_CONST:
                    stack[sp] = consts[a]
                    sp += 1
                elif op == OP_VAR:
                    stack[sp] = row[a]
                    sp += 1
                elif op == OP_ADD:
                    sp -= 1
                    stack[sp - 1] = stack[sp - 1] + stack[sp]
                elif op == OP_SUB:
                    sp -= 1
                    stack[sp - 1] = stack[sp - 1] - stack[sp]
                elif op == OP_MUL:
                    sp -= 1
                    stack[sp - 1] = stack[sp - 1] * stack[sp]
                elif op == OP_DIV:
                    sp -= 1
                    if stack[sp] == 0.0:
                        err = 1
                        break
                    stack[sp - 1] = stack[sp - 1] / stack[sp]
                elif op == OP_NEG:
                    stack[sp - 1] = -stack[sp - 1]
                elif op == OP_POW:
                    x = stack[sp - 1]
                    if a < 0 and x == 0.0:
                        err = 1
                        break
                    stack[sp - 1] = _pow(x, a)
                elif op == OP_SIN:
                    stack[sp - 1] = _sin(stack[sp - 1])
                elif op == OP_COS:
                    stack[sp - 1] = _cos(stack[sp - 1])
                elif op == OP_EXP:
                    stack[sp - 1] = _exp(stack[sp - 1])
                else:  # OP_LN
                    x = stack[sp - 1]
                    if x <= 0.0:
                        err = 2
                        break
                    stack[sp - 1] = log(x)
            if err:
                out[p, e] = _NAN
                status[p, e] = err
            else:
                out[p, e] = stack[sp - 1]
                status[p, e] = 0
