# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Same signatures and results as ``_pykernels``."""
from libc.math cimport exp, NAN, isnan

import numpy as np

BACKEND = "cython"


cdef inline Py_ssize_t _winner(const double[:, ::1] W, const signed char[:, ::1] X,
                               Py_ssize_t t) noexcept nogil:
    cdef Py_ssize_t m = W.shape[0], n = X.shape[1]
    cdef Py_ssize_t i, j, best = 0
    cdef double s, best_s = 0.0
    for i in range(m):
        s = W[i, 0]
        for j in range(n):
            s += W[i, j + 1] * X[t, j]
        if i == 0 or s > best_s:
            best = i
            best_s = s
    return best


cdef double _accuracy(const double[:, ::1] W, const signed char[:, ::1] X,
                      const Py_ssize_t[::1] y) noexcept nogil:
    cdef Py_ssize_t t, hits = 0
    for t in range(X.shape[0]):
        if _winner(W, X, t) == y[t]:
            hits += 1
    return <double>hits / X.shape[0]


def accuracy(const double[:, ::1] W, const signed char[:, ::1] X, const Py_ssize_t[::1] y):
    return _accuracy(W, X, y)


def pocket_chunk(double[:, ::1] W, double[:, ::1] P,
                 const signed char[:, ::1] X, const Py_ssize_t[::1] y,
                 double rate, long run, long pocket_run, long swaps,
                 bint pocket_current, double pocket_acc, double work_acc,
                 bint ratchet, const signed char[:, ::1] RX, const Py_ssize_t[::1] Ry,
                 list events, long it0):
    cdef Py_ssize_t T = X.shape[0], n = X.shape[1]
    cdef Py_ssize_t t, j, k, truth
    for t in range(T):
        truth = y[t]
        k = _winner(W, X, t)
        if k == truth:
            run += 1
            if run > pocket_run:
                if pocket_current:
                    pocket_run = run
                elif not ratchet:
                    P[:, :] = W
                    pocket_run = run
                    pocket_current = True
                    swaps += 1
                    events.append((it0 + t + 1, swaps, pocket_run, NAN))
                else:
                    if isnan(work_acc):
                        work_acc = _accuracy(W, RX, Ry)
                    if work_acc > pocket_acc:
                        P[:, :] = W
                        pocket_run = run
                        pocket_acc = work_acc
                        pocket_current = True
                        swaps += 1
                        events.append((it0 + t + 1, swaps, pocket_run, pocket_acc))
        else:
            W[truth, 0] += rate
            W[k, 0] -= rate
            for j in range(n):
                W[truth, j + 1] += rate * X[t, j]
                W[k, j + 1] -= rate * X[t, j]
            run = 0
            pocket_current = False
            work_acc = NAN
    return run, pocket_run, swaps, pocket_current, pocket_acc, work_acc


def enum_max_sum(const double[:, ::1] lo, const double[:, ::1] hi):
    cdef Py_ssize_t m = lo.shape[0], na = lo.shape[1], nb = hi.shape[1]
    cdef Py_ssize_t a, b, i
    cdef double best, v, part, total = 0.0
    with nogil:
        for b in range(nb):
            part = 0.0
            for a in range(na):
                best = lo[0, a] + hi[0, b]
                for i in range(1, m):
                    v = lo[i, a] + hi[i, b]
                    if v > best:
                        best = v
                part += exp(best)
            total += part
    return total


def enum_decided_sum(const double[:, ::1] jlo, const double[:, ::1] jhi,
                     const double[:, ::1] slo, const double[:, ::1] shi):
    cdef Py_ssize_t m = slo.shape[0], na = slo.shape[1], nb = shi.shape[1]
    cdef Py_ssize_t a, b, i, d
    cdef double best, v, part, total = 0.0
    with nogil:
        for b in range(nb):
            part = 0.0
            for a in range(na):
                d = 0
                best = slo[0, a] + shi[0, b]
                for i in range(1, m):
                    v = slo[i, a] + shi[i, b]
                    if v > best:
                        best = v
                        d = i
                part += exp(jlo[d, a] + jhi[d, b])
            total += part
    return total
