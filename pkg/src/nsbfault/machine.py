"""Winner-take-all linear machines (single-layer linear discriminant networks).

A machine with ``m`` outputs and ``n`` inputs is an ``m x (n+1)`` weight
matrix; column 0 holds the biases. The output cell with the largest weighted
sum wins; ties go to the lowest index.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import logsumexp

from .problem import NsbProblem, ProblemFormatError, as_reading, default_names, require_valid

__all__ = [
    "LinearMachine",
    "classify",
    "scores",
    "choose_K",
    "bayes_network",
    "network_to_nsb",
    "inversion_beta",
    "parse_machine",
    "serialize_machine",
    "read_machine",
    "write_machine",
]


class LinearMachine:
    """Immutable weight matrix plus display names for the outputs."""

    __slots__ = ("weights", "names")

    def __init__(self, weights, names=None):
        W = np.array(weights, dtype=np.float64)
        if W.ndim != 2 or W.shape[0] < 1 or W.shape[1] < 2:
            raise ValueError(f"weights must be an m x (n+1) matrix with m, n >= 1, got shape {W.shape}")
        if not np.all(np.isfinite(W)):
            raise ValueError("weights must be finite")
        W.setflags(write=False)
        names = default_names(W.shape[0]) if names is None else tuple(str(s) for s in names)
        if len(names) != W.shape[0]:
            raise ValueError(f"expected {W.shape[0]} names, got {len(names)}")
        object.__setattr__(self, "weights", W)
        object.__setattr__(self, "names", names)

    def __setattr__(self, key, value):
        raise AttributeError("LinearMachine is immutable")

    def __reduce__(self):
        return (LinearMachine, (np.array(self.weights), self.names))

    @classmethod
    def zeros(cls, n_outputs: int, n_inputs: int, names=None) -> "LinearMachine":
        return cls(np.zeros((n_outputs, n_inputs + 1)), names)

    @property
    def n_outputs(self) -> int:
        return self.weights.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.weights.shape[1] - 1

    @property
    def bias(self) -> np.ndarray:
        return self.weights[:, 0]

    def scores(self, reading) -> np.ndarray:
        v = as_reading(reading, self.n_inputs)
        return self.weights[:, 0] + self.weights[:, 1:] @ v.astype(np.float64)

    def classify(self, reading) -> int:
        return int(np.argmax(self.scores(reading)))

    __call__ = classify

    def decide_batch(self, readings) -> np.ndarray:
        R = np.asarray(readings)
        if R.ndim != 2 or R.shape[1] != self.n_inputs:
            raise ValueError(f"readings must have shape (B, {self.n_inputs})")
        s = R.astype(np.float64) @ self.weights[:, 1:].T + self.weights[:, 0]
        return np.argmax(s, axis=1)

    classify_batch = decide_batch

    def __eq__(self, other):
        if not isinstance(other, LinearMachine):
            return NotImplemented
        return self.names == other.names and np.array_equal(self.weights, other.weights)

    def __repr__(self):
        return f"LinearMachine(outputs={self.n_outputs}, inputs={self.n_inputs})"


def scores(machine: LinearMachine, reading) -> np.ndarray:
    return machine.scores(reading)


def classify(machine: LinearMachine, reading) -> int:
    return machine.classify(reading)


def _noise_terms(noise: np.ndarray):
    """Elementwise log((1-N)/N) and log((1-N)N), with zeros where N == 0."""
    noisy = noise > 0
    safe = np.where(noisy, noise, 0.5)
    log_odds = np.where(noisy, np.log1p(-safe) - np.log(safe), 0.0)
    log_prod = np.where(noisy, np.log1p(-safe) + np.log(safe), 0.0)
    return noisy, log_odds, log_prod


def choose_K(problem: NsbProblem) -> float:
    """Weight magnitude standing in for the infinite log-odds of a noise-free input.

    One more than the largest, over faults, of
    ``|log P(G_i)| + sum |log((1-N)N)| + sum |A log((1-N)/N)|`` taken over
    the noisy inputs of that fault.
    """
    _, log_odds, log_prod = _noise_terms(problem.noise)
    per_fault = (
        np.abs(np.log(problem.priors))
        + np.abs(log_prod).sum(axis=1)
        + np.abs(problem.patterns * log_odds).sum(axis=1)
    )
    return 1.0 + float(per_fault.max())


def bayes_network(problem: NsbProblem, alpha: float = 1.0, beta: float = 0.0) -> LinearMachine:
    """Linear machine whose winner is the most probable fault.

    Input weights are ``alpha * A * log((1-N)/N)``, or ``alpha * A * K`` at
    noise-free inputs. The bias is
    ``beta + alpha * (2 log P + sum log((1-N)N) - K * #noise-free)``, which
    makes every score ``alpha * 2 log(P(V|G)P(G))`` up to the common ``beta``
    whenever no noise-free input is contradicted.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    require_valid(problem)
    noisy, log_odds, log_prod = _noise_terms(problem.noise)
    A = problem.patterns.astype(np.float64)
    K = choose_K(problem) if not noisy.all() else 0.0
    W = np.empty((problem.n_faults, problem.n_inputs + 1))
    W[:, 1:] = alpha * A * np.where(noisy, log_odds, K)
    noiseless = (~noisy).sum(axis=1)
    W[:, 0] = beta + alpha * (2.0 * np.log(problem.priors) + log_prod.sum(axis=1) - K * noiseless)
    return LinearMachine(W, problem.names)


def _invert(machine: LinearMachine):
    w = machine.weights[:, 1:]
    mag = np.abs(w)
    patterns = np.where(w < 0, -1, 1)
    # log N = -softplus(|w|), log(1-N) = -softplus(-|w|)
    log_n = -np.logaddexp(0.0, mag)
    log_1mn = -np.logaddexp(0.0, -mag)
    S = (log_n + log_1mn).sum(axis=1)
    half = (machine.weights[:, 0] - S) / 2.0
    beta = 2.0 * float(logsumexp(half))
    priors = np.exp(half - beta / 2.0)
    return NsbProblem(machine.names, priors, patterns, np.exp(log_n)), beta


def network_to_nsb(machine: LinearMachine) -> NsbProblem:
    """Recover an NSB problem whose optimal rule is the machine's decision rule.

    With ``alpha = 1``: ``A = sign(w)`` (``+1`` where ``w == 0``) and
    ``N = 1 / (1 + exp|w|)``, so ``N = 1/2`` exactly where ``w = 0``. The
    priors are ``exp((w_0 - S) / 2)`` normalized to sum to one, where
    ``S = sum_j log((1-N)N)``. ``bayes_network(result, 1, inversion_beta(machine))``
    reproduces the machine's weights up to rounding.
    """
    return _invert(machine)[0]


def inversion_beta(machine: LinearMachine) -> float:
    """The bias offset absorbed when normalizing the recovered priors."""
    return _invert(machine)[1]


# --------------------------------------------------------------------------
# File format

HEADER = "lmachine v1"


def serialize_machine(machine: LinearMachine) -> str:
    out = [HEADER, f"inputs {machine.n_inputs}", f"outputs {machine.n_outputs}"]
    for name, row in zip(machine.names, machine.weights):
        out.append(f"row {name} " + " ".join(format(float(x), ".17g") for x in row))
    return "\n".join(out) + "\n"


def parse_machine(text: str) -> LinearMachine:
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append((lineno, line.split()))
    if not lines or " ".join(lines[0][1]) != HEADER:
        raise ProblemFormatError(f"expected header {HEADER!r}", lines[0][0] if lines else None)
    dims = {}
    for key, (lineno, toks) in zip(("inputs", "outputs"), lines[1:3]):
        if len(toks) != 2 or toks[0] != key:
            raise ProblemFormatError(f"expected '{key} <count>'", lineno)
        try:
            dims[key] = int(toks[1])
        except ValueError:
            raise ProblemFormatError(f"{key}: expected an integer, got {toks[1]!r}", lineno) from None
        if dims[key] < 1:
            raise ProblemFormatError(f"{key} must be at least 1", lineno)
    if len(dims) != 2:
        raise ProblemFormatError("missing inputs/outputs lines")
    n, m = dims["inputs"], dims["outputs"]
    names, rows = [], []
    for lineno, toks in lines[3:]:
        if toks[0] != "row" or len(toks) < 2:
            raise ProblemFormatError("expected 'row <name> <bias> <w_1> ... <w_n>'", lineno)
        values = toks[2:]
        if len(values) != n + 1:
            raise ProblemFormatError(f"row length mismatch at {toks[1]}: got {len(values)} values, expected {n + 1}", lineno)
        try:
            row = [float(t) for t in values]
        except ValueError:
            raise ProblemFormatError(f"row {toks[1]}: non-numeric weight", lineno) from None
        if not all(math.isfinite(x) for x in row):
            raise ProblemFormatError(f"row {toks[1]}: weights must be finite", lineno)
        names.append(toks[1])
        rows.append(row)
    if len(rows) != m:
        raise ProblemFormatError(f"declared {m} outputs but found {len(rows)} rows")
    return LinearMachine(rows, names)


def read_machine(path) -> LinearMachine:
    with open(path, encoding="utf-8") as fh:
        return parse_machine(fh.read())


def write_machine(machine: LinearMachine, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_machine(machine))
