# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled tape interpreter, same contract as _pykernel.eval_program."""

from libc.math cimport NAN, cos, exp, log, pow, sin

import numpy as np


def eval_program(int[:] code, int[:] arg, int[:] starts, double[:] consts,
                 double[:, :] points, double[:, :] out,
                 unsigned char[:, :] status, int stack_need):
    cdef Py_ssize_t npts = points.shape[0]
    cdef Py_ssize_t n_expr = starts.shape[0] - 1
    cdef double[::1] stack = np.zeros(stack_need, dtype=np.float64)
    cdef Py_ssize_t p, e, pc
    cdef int op, a, sp
    cdef unsigned char err
    cdef double x

    for p in range(npts):
        for e in range(n_expr):
            sp = 0
            err = 0
            for pc in range(starts[e], starts[e + 1]):
                op = code[pc]
                a = arg[pc]
                if op == 0:  # const
                    stack[sp] = consts[a]
                    sp += 1
                elif op == 1:  # var
                    stack[sp] = points[p, a]
                    sp += 1
                elif op == 3:  # add
                    sp -= 1
                    stack[sp - 1] = stack[sp - 1] + stack[sp]
                elif op == 4:  # sub
                    sp -= 1
                    stack[sp - 1] = stack[sp - 1] - stack[sp]
                elif op == 5:  # mul
                    sp -= 1
                    stack[sp - 1] = stack[sp - 1] * stack[sp]
                elif op == 6:  # div
                    sp -= 1
                    if stack[sp] == 0.0:
                        err = 1
                        break
                    stack[sp - 1] = stack[sp - 1] / stack[sp]
                elif op == 2:  # neg
                    stack[sp - 1] = -stack[sp - 1]
                elif op == 7:  # pow, integer exponent in arg
                    x = stack[sp - 1]
                    if a < 0 and x == 0.0:
                        err = 1
                        break
                    stack[sp - 1] = pow(x, <double> a)
                elif op == 8:
                    stack[sp - 1] = sin(stack[sp - 1])
                elif op == 9:
                    stack[sp - 1] = cos(stack[sp - 1])
                elif op == 10:
                    stack[sp - 1] = exp(stack[sp - 1])
                else:  # ln
                    x = stack[sp - 1]
                    if x <= 0.0:
                        err = 2
                        break
                    stack[sp - 1] = log(x)
            if err:
                out[p, e] = NAN
                status[p, e] = err
            else:
                out[p, e] = stack[sp - 1]
                status[p, e] = 0
