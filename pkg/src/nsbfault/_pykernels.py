"""Pure-Python/numpy implementations of the hot kernels.

Signatures mirror ``_ckernels.pyx`` exactly; ``nsbfault.kernels`` picks one
at import time.
"""
import math

import numpy as np

BACKEND = "python"


def _argmax(scores):
    # np.argmax returns the first maximum, i.e. ties go to the lowest index.
    return int(np.argmax(scores))


def accuracy(W, X, y):
    """Fraction of rows of ``X`` whose winner-take-all class under ``W`` equals ``y``."""
    s = X.astype(np.float64) @ W[:, 1:].T + W[:, 0]
    return float(np.count_nonzero(np.argmax(s, axis=1) == y)) / X.shape[0]


def pocket_chunk(W, P, X, y, rate, run, pocket_run, swaps, pocket_current,
                 pocket_acc, work_acc, ratchet, RX, Ry, events, it0):
    """Run the pocket loop over the examples ``X[t], y[t]`` in order.

    ``W`` (working weights) and ``P`` (pocket weights) are updated in place.
    Returns the scalar state ``(run, pocket_run, swaps, pocket_current,
    pocket_acc, work_acc)``; ``work_acc`` is NaN when the working weights'
    accuracy on the ratchet set has not been computed since their last change.
    Each swap appends ``(iteration, swaps, pocket_run, accuracy)`` to
    ``events``.
    """
    bias = W[:, 0]
    lin = W[:, 1:]
    Xf = X.astype(np.float64)
    for t in range(X.shape[0]):
        x = Xf[t]
        truth = int(y[t])
        k = _argmax(bias + lin @ x)
        if k == truth:
            run += 1
            if run > pocket_run:
                if pocket_current:
                    pocket_run = run
                elif not ratchet:
                    P[:] = W
                    pocket_run = run
                    pocket_current = True
                    swaps += 1
                    events.append((it0 + t + 1, swaps, pocket_run, math.nan))
                else:
                    if math.isnan(work_acc):
                        work_acc = accuracy(W, RX, Ry)
                    if work_acc > pocket_acc:
                        P[:] = W
                        pocket_run = run
                        pocket_acc = work_acc
                        pocket_current = True
                        swaps += 1
                        events.append((it0 + t + 1, swaps, pocket_run, pocket_acc))
        else:
            W[truth, 0] += rate
            W[truth, 1:] += rate * x
            W[k, 0] -= rate
            W[k, 1:] -= rate * x
            run = 0
            pocket_current = False
            work_acc = math.nan
    return run, pocket_run, swaps, pocket_current, pocket_acc, work_acc


def enum_max_sum(lo, hi):
    """Sum over all (a, b) of ``exp(max_i lo[i, a] + hi[i, b])``."""
    total = 0.0
    for b in range(hi.shape[1]):
        joint = lo + hi[:, b:b + 1]
        total += float(np.sum(np.exp(joint.max(axis=0))))
    return total


def enum_decided_sum(jlo, jhi, slo, shi):
    """Sum over all (a, b) of ``exp(jlo[d, a] + jhi[d, b])`` where ``d`` is the
    lowest-index argmax of ``slo[:, a] + shi[:, b]``."""
    total = 0.0
    cols = np.arange(jlo.shape[1])
    for b in range(jhi.shape[1]):
        d = np.argmax(slo + shi[:, b:b + 1], axis=0)
        total += float(np.sum(np.exp(jlo[d, cols] + jhi[d, b])))
    return total
