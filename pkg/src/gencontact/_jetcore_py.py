"""Pure-Python order-2 jet evaluator for compiled expression programs.

Mirrors ``_jetcore.pyx`` instruction for instruction; used when the
extension is not built and as the reference in the backend benchmark.
"""
import cmath

import numpy as np

OP_CONST = 0
OP_VAR = 1
OP_ADD = 2
OP_SUB = 3
OP_MUL = 4
OP_DIV = 5
OP_NEG = 6
OP_POWI = 7
OP_SIN = 8
OP_COS = 9
OP_EXP = 10

POLE_TOL = 1e-14


def _unary(v, g, h, f0, f1, f2):
    return f0, f1 * g, f1 * h + f2 * np.outer(g, g)


def eval_program(ops, arg_a, arg_b, arg_k, consts, outputs, point):
    """Evaluate every output register of a program to (value, gradient, Hessian).

    Returns ``(status, vals, grads, hesses)``.  ``status`` is -1 on success,
    otherwise the index of the instruction that hit a pole.
    """
    dim = len(point)
    n = len(ops)
    vals = [0j] * n
    grads = [None] * n
    hesss = [None] * n
    zero_g = np.zeros(dim, dtype=complex)
    zero_h = np.zeros((dim, dim), dtype=complex)
    for r in range(n):
        op = ops[r]
        a = arg_a[r]
        b = arg_b[r]
        if op == OP_CONST:
            v, g, h = complex(consts[arg_k[r]]), zero_g, zero_h
        elif op == OP_VAR:
            g = np.zeros(dim, dtype=complex)
            g[arg_k[r]] = 1.0
            v, h = complex(point[arg_k[r]]), zero_h
        elif op == OP_ADD:
            v, g, h = vals[a] + vals[b], grads[a] + grads[b], hesss[a] + hesss[b]
        elif op == OP_SUB:
            v, g, h = vals[a] - vals[b], grads[a] - grads[b], hesss[a] - hesss[b]
        elif op == OP_NEG:
            v, g, h = -vals[a], -grads[a], -hesss[a]
        elif op == OP_MUL:
            va, vb, ga, gb = vals[a], vals[b], grads[a], grads[b]
            v = va * vb
            g = va * gb + vb * ga
            cross = np.outer(ga, gb)
            h = va * hesss[b] + vb * hesss[a] + cross + cross.T
        elif op == OP_DIV:
            vb = vals[b]
            if abs(vb) <= POLE_TOL:
                return r, None, None, None
            # a / b = a * (1/b)
            rv, rg, rh = _unary(vb, grads[b], hesss[b], 1.0 / vb, -1.0 / vb**2, 2.0 / vb**3)
            va, ga = vals[a], grads[a]
            v = va * rv
            g = va * rg + rv * ga
            cross = np.outer(ga, rg)
            h = va * rh + rv * hesss[a] + cross + cross.T
        elif op == OP_POWI:
            k = int(arg_k[r])
            va = vals[a]
            if k < 0 and abs(va) <= POLE_TOL:
                return r, None, None, None
            f0 = va**k
            f1 = 0j if k == 0 else k * va ** (k - 1)
            f2 = 0j if k in (0, 1) else k * (k - 1) * va ** (k - 2)
            v, g, h = _unary(va, grads[a], hesss[a], f0, f1, f2)
        elif op == OP_SIN:
            va = vals[a]
            s, c = cmath.sin(va), cmath.cos(va)
            v, g, h = _unary(va, grads[a], hesss[a], s, c, -s)
        elif op == OP_COS:
            va = vals[a]
            s, c = cmath.sin(va), cmath.cos(va)
            v, g, h = _unary(va, grads[a], hesss[a], c, -s, -c)
        elif op == OP_EXP:
            va = vals[a]
            e = cmath.exp(va)
            v, g, h = _unary(va, grads[a], hesss[a], e, e, e)
        else:
            raise ValueError(f"unknown opcode {op}")
        vals[r], grads[r], hesss[r] = v, g, h
    out_v = np.array([vals[o] for o in outputs], dtype=complex)
    out_g = np.array([grads[o] for o in outputs], dtype=complex).reshape(len(outputs), dim)
    out_h = np.array([hesss[o] for o in outputs], dtype=complex).reshape(len(outputs), dim, dim)
    return -1, out_v, out_g, out_h
