# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled order-2 jet evaluator (same contract as ``_jetcore_py``)."""
import numpy as np

from libc.complex cimport csin, ccos, cexp

cdef extern from "complex.h":
    double cabs(double complex)

cdef enum:
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

cdef double POLE_TOL = 1e-14


cdef double complex _ipow(double complex x, long k) nogil:
    cdef double complex acc = 1.0
    cdef double complex base = x
    cdef long e = k
    if e < 0:
        base = 1.0 / x
        e = -e
    while e > 0:
        if e & 1:
            acc = acc * base
        base = base * base
        e >>= 1
    return acc


cdef void _unary(double complex[:] gv, double complex[:, :] hv,
                 double complex[:] go, double complex[:, :] ho,
                 double complex f1, double complex f2, int dim) nogil:
    cdef int i, j
    for i in range(dim):
        go[i] = f1 * gv[i]
    for i in range(dim):
        for j in range(dim):
            ho[i, j] = f1 * hv[i, j] + f2 * gv[i] * gv[j]


def eval_program(const int[:] ops, const int[:] arg_a, const int[:] arg_b,
                 const long[:] arg_k, const double complex[:] consts,
                 const int[:] outputs, const double[:] point):
    cdef int dim = point.shape[0]
    cdef int n = ops.shape[0]
    cdef int nout = outputs.shape[0]
    cdef double complex[:] V = np.zeros(n, dtype=np.complex128)
    cdef double complex[:, :] G = np.zeros((n, dim), dtype=np.complex128)
    cdef double complex[:, :, :] H = np.zeros((n, dim, dim), dtype=np.complex128)
    cdef int r, a, b, i, j, op
    cdef long k
    cdef double complex va, vb, rv, rg1, rg2, s, c, e, f1, f2
    for r in range(n):
        op = ops[r]
        a = arg_a[r]
        b = arg_b[r]
        if op == OP_CONST:
            V[r] = consts[arg_k[r]]
        elif op == OP_VAR:
            V[r] = point[arg_k[r]]
            G[r, arg_k[r]] = 1.0
        elif op == OP_ADD:
            V[r] = V[a] + V[b]
            for i in range(dim):
                G[r, i] = G[a, i] + G[b, i]
                for j in range(dim):
                    H[r, i, j] = H[a, i, j] + H[b, i, j]
        elif op == OP_SUB:
            V[r] = V[a] - V[b]
            for i in range(dim):
                G[r, i] = G[a, i] - G[b, i]
                for j in range(dim):
                    H[r, i, j] = H[a, i, j] - H[b, i, j]
        elif op == OP_NEG:
            V[r] = -V[a]
            for i in range(dim):
                G[r, i] = -G[a, i]
                for j in range(dim):
                    H[r, i, j] = -H[a, i, j]
        elif op == OP_MUL:
            va = V[a]
            vb = V[b]
            V[r] = va * vb
            for i in range(dim):
                G[r, i] = va * G[b, i] + vb * G[a, i]
                for j in range(dim):
                    H[r, i, j] = (va * H[b, i, j] + vb * H[a, i, j]
                                  + G[a, i] * G[b, j] + G[b, i] * G[a, j])
        elif op == OP_DIV:
            vb = V[b]
            if cabs(vb) <= POLE_TOL:
                return r, None, None, None
            va = V[a]
            rv = 1.0 / vb
            rg1 = -rv * rv
            rg2 = 2.0 * rv * rv * rv
            V[r] = va * rv
            # jet of 1/b stored transiently in row r, then combined with a
            for i in range(dim):
                for j in range(dim):
                    H[r, i, j] = rg1 * H[b, i, j] + rg2 * G[b, i] * G[b, j]
            for i in range(dim):
                G[r, i] = rg1 * G[b, i]
            for i in range(dim):
                for j in range(dim):
                    H[r, i, j] = (va * H[r, i, j] + rv * H[a, i, j]
                                  + G[a, i] * G[r, j] + G[r, i] * G[a, j])
            for i in range(dim):
                G[r, i] = va * G[r, i] + rv * G[a, i]
        elif op == OP_POWI:
            k = arg_k[r]
            va = V[a]
            if k < 0 and cabs(va) <= POLE_TOL:
                return r, None, None, None
            V[r] = _ipow(va, k)
            f1 = 0.0 if k == 0 else k * _ipow(va, k - 1)
            f2 = 0.0 if (k == 0 or k == 1) else k * (k - 1) * _ipow(va, k - 2)
            _unary(G[a], H[a], G[r], H[r], f1, f2, dim)
        elif op == OP_SIN:
            va = V[a]
            s = csin(va)
            c = ccos(va)
            V[r] = s
            _unary(G[a], H[a], G[r], H[r], c, -s, dim)
        elif op == OP_COS:
            va = V[a]
            s = csin(va)
            c = ccos(va)
            V[r] = c
            _unary(G[a], H[a], G[r], H[r], -s, -c, dim)
        elif op == OP_EXP:
            e = cexp(V[a])
            V[r] = e
            _unary(G[a], H[a], G[r], H[r], e, e, dim)
        else:
            raise ValueError(f"unknown opcode {op}")
    out_v = np.empty(nout, dtype=np.complex128)
    out_g = np.empty((nout, dim), dtype=np.complex128)
    out_h = np.empty((nout, dim, dim), dtype=np.complex128)
    cdef double complex[:] ov = out_v
    cdef double complex[:, :] og = out_g
    cdef double complex[:, :, :] oh = out_h
    cdef int o
    for o in range(nout):
        r = outputs[o]
        ov[o] = V[r]
        for i in range(dim):
            og[o, i] = G[r, i]
            for j in range(dim):
                oh[o, i, j] = H[r, i, j]
    return -1, out_v, out_g, out_h
