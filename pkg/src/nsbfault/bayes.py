"""Exact Bayesian machinery for NSB problems.

Likelihoods follow the conditional-independence model: under fault ``i``
reading ``j`` agrees with ``patterns[i, j]`` with probability
``1 - noise[i, j]``. Decision scores are computed in log space; a mismatch
at a noise-free position contributes ``-inf``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .machine import LinearMachine
from .problem import NsbProblem, as_reading, sample_examples

__all__ = [
    "UtilityReport",
    "EnumerationGuardError",
    "DEFAULT_MAX_INPUTS",
    "likelihood",
    "marginal_likelihood",
    "log_likelihoods",
    "bayes_scores",
    "bayes_decide",
    "bayes_decide_batch",
    "BayesDecider",
    "all_readings",
    "exact_expected_utility",
    "monte_carlo_utility",
]

DEFAULT_MAX_INPUTS = 24


class EnumerationGuardError(ValueError):
    pass


@dataclass(frozen=True)
class UtilityReport:
    """Probability that a decider names the true fault."""

    value: float
    method: str  # "exact" or "monte-carlo"
    stderr: float = 0.0
    sample_count: int = 0

    @property
    def figure_of_merit(self) -> float:
        return 1000.0 * self.value


def _log_tables(problem: NsbProblem):
    with np.errstate(divide="ignore"):
        log_match = np.log1p(-problem.noise)
        log_miss = np.log(problem.noise)
        log_prior = np.log(problem.priors)
    return log_match, log_miss, log_prior


def _factors(problem: NsbProblem, reading: np.ndarray, fault: int) -> list[float]:
    noise = problem.noise[fault]
    pattern = problem.patterns[fault]
    return [
        1.0 - noise[j] if reading[j] == pattern[j] else noise[j]
        for j in range(reading.shape[0])
        if reading[j] != 0
    ]


def likelihood(problem: NsbProblem, reading, fault: int) -> float:
    """P(V | G_fault) for a fully known reading."""
    v = as_reading(reading, problem.n_inputs)
    if np.any(v == 0):
        raise ValueError("reading has unknown entries; use marginal_likelihood")
    return math.prod(_factors(problem, v, fault))


def marginal_likelihood(problem: NsbProblem, reading, fault: int) -> float:
    """P(known readings | G_fault); unknown (0) readings contribute a factor of 1."""
    v = as_reading(reading, problem.n_inputs)
    return math.prod(_factors(problem, v, fault))


def log_likelihoods(problem: NsbProblem, readings) -> np.ndarray:
    """log P(V | G_i) for each row of ``readings`` (shape (B, n)) and each fault.

    Zero entries are treated as unknown and marginalized out.
    """
    R = np.asarray(readings)
    log_match, log_miss, _ = _log_tables(problem)
    match = R[:, None, :] == problem.patterns[None, :, :]
    terms = np.where(match, log_match, log_miss)
    terms = np.where((R != 0)[:, None, :], terms, 0.0)
    return terms.sum(axis=2)


def bayes_scores(problem: NsbProblem, reading) -> np.ndarray:
    """log( P(V | G_i) P(G_i) ) for every fault, marginalizing unknown readings."""
    v = as_reading(reading, problem.n_inputs)
    _, _, log_prior = _log_tables(problem)
    return log_likelihoods(problem, v[None, :])[0] + log_prior


def bayes_decide(problem: NsbProblem, reading) -> int:
    """Most probable fault given the reading; ties go to the lowest index."""
    return int(np.argmax(bayes_scores(problem, reading)))


def bayes_decide_batch(problem: NsbProblem, readings) -> np.ndarray:
    _, _, log_prior = _log_tables(problem)
    return np.argmax(log_likelihoods(problem, readings) + log_prior, axis=1)


class BayesDecider:
    """The optimal decision rule of ``problem`` as a reading -> fault callable."""

    def __init__(self, problem: NsbProblem):
        self.problem = problem

    def __call__(self, reading) -> int:
        return bayes_decide(self.problem, reading)

    def decide_batch(self, readings) -> np.ndarray:
        return bayes_decide_batch(self.problem, readings)


def all_readings(n: int, start: int = 0, stop: int | None = None) -> np.ndarray:
    """Fully known readings with indices ``start..stop-1`` in enumeration order.

    Reading ``r`` has ``V_{j+1} = +1`` iff bit ``j`` of ``r`` is set (bit 0 is
    the least significant), else ``-1``.
    """
    if stop is None:
        stop = 1 << n
    idx = np.arange(start, stop, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(n, dtype=np.int64)) & 1
    return (2 * bits - 1).astype(np.int8)


def _decide_batch(decider, readings) -> np.ndarray:
    batch = getattr(decider, "decide_batch", None)
    if batch is not None:
        return np.asarray(batch(readings), dtype=np.intp)
    return np.fromiter((decider(r) for r in readings), dtype=np.intp, count=len(readings))


def _split(n: int) -> int:
    return n // 2


def _joint_half_tables(problem: NsbProblem, n_lo: int):
    """Split log P(V|G_i)P(G_i) into a low-input table and a high-input table.

    ``lo[i, a] + hi[i, b]`` is the log joint of the reading with index
    ``b * 2**n_lo + a``.
    """
    log_match, log_miss, log_prior = _log_tables(problem)
    A = problem.patterns

    def half(cols):
        R = all_readings(len(cols))
        terms = np.where(R[:, None, :] == A[None, :, cols], log_match[None, :, cols], log_miss[None, :, cols])
        return np.ascontiguousarray(terms.sum(axis=2).T)

    lo = half(np.arange(n_lo)) + log_prior[:, None]
    hi = half(np.arange(n_lo, problem.n_inputs))
    return np.ascontiguousarray(lo), hi


def _score_half_tables(machine: LinearMachine, n_lo: int):
    W = machine.weights
    n = machine.n_inputs
    lo = W[:, 1:n_lo + 1] @ all_readings(n_lo).T.astype(np.float64) + W[:, :1]
    hi = W[:, n_lo + 1:] @ all_readings(n - n_lo).T.astype(np.float64)
    return np.ascontiguousarray(lo), np.ascontiguousarray(hi)


def exact_expected_utility(problem: NsbProblem, decider=None, *, max_inputs: int = DEFAULT_MAX_INPUTS) -> UtilityReport:
    """Expected utility of ``decider`` by enumerating all 2**n readings.

    Computes ``sum_V P(V | G_d(V)) P(G_d(V))``. With ``decider=None`` (or a
    :class:`BayesDecider` for this problem) the optimal rule is used and the
    sum becomes ``sum_V max_i P(V | G_i) P(G_i)``. A :class:`LinearMachine`
    is evaluated through the compiled kernel; any other callable is invoked
    once per reading.
    """
    n = problem.n_inputs
    if n > max_inputs:
        raise EnumerationGuardError(f"exact enumeration needs n <= {max_inputs}, problem has n = {n}")
    n_lo = _split(n)
    jlo, jhi = _joint_half_tables(problem, n_lo)

    if decider is None or (isinstance(decider, BayesDecider) and decider.problem is problem):
        value = kernels.enum_max_sum(jlo, jhi)
    elif isinstance(decider, LinearMachine):
        if decider.n_inputs != n or decider.n_outputs != problem.n_faults:
            raise ValueError("machine dimensions do not match the problem")
        slo, shi = _score_half_tables(decider, n_lo)
        value = kernels.enum_decided_sum(jlo, jhi, slo, shi)
    else:
        # generic decider: evaluate in chunks of high-half blocks, index order
        value = 0.0
        block = 1 << n_lo
        cols = np.arange(block)
        for b in range(jhi.shape[1]):
            d = _decide_batch(decider, all_readings(n, b * block, (b + 1) * block))
            value += float(np.sum(np.exp(jlo[d, cols] + jhi[d, b])))
    return UtilityReport(value=float(value), method="exact")


def monte_carlo_utility(problem: NsbProblem, decider, sample_count: int, seed) -> UtilityReport:
    """Fraction of freshly sampled examples on which ``decider`` is correct."""
    if sample_count < 1:
        raise ValueError("sample_count must be at least 1")
    if decider is None:
        decider = BayesDecider(problem)
    rng = np.random.default_rng(seed)
    readings, faults = sample_examples(problem, sample_count, rng)
    hits = int(np.count_nonzero(_decide_batch(decider, readings) == faults))
    p = hits / sample_count
    return UtilityReport(
        value=p,
        method="monte-carlo",
        stderr=math.sqrt(p * (1.0 - p) / sample_count),
        sample_count=sample_count,
    )
