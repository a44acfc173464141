"""Pocket algorithm for winner-take-all linear machines.

Working weights follow the multi-class perceptron rule; a separate copy (the
pocket) keeps the weights that produced the longest run of consecutive
correct classifications. The pocket, never the working weights, is the
result of training.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .machine import LinearMachine
from .problem import NsbProblem, TrainingExample, require_valid, sample_examples

__all__ = [
    "TrainerConfig",
    "TrainingRun",
    "train",
    "perceptron_step",
    "accuracy_on",
    "examples_to_arrays",
    "write_run_log",
]

CHUNK = 8192


@dataclass(frozen=True)
class TrainerConfig:
    """Settings for one pocket run.

    ``dataset_size`` switches training on a problem from stream mode (a fresh
    sample every iteration) to finite mode (a fixed sample of that size drawn
    once, then examples picked uniformly at random from it). ``ratchet``
    additionally requires a pocket replacement to strictly improve accuracy
    on the fixed set, so it needs ``dataset_size``.
    """

    iterations: int
    seed: int = 0
    ratchet: bool = False
    dataset_size: int | None = None
    learning_rate: float = 1.0

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be positive")
        if self.dataset_size is not None and self.dataset_size < 1:
            raise ValueError("dataset_size must be positive")
        if self.ratchet and self.dataset_size is None:
            raise ValueError("ratchet mode requires dataset_size")
        if not (self.learning_rate > 0 and math.isfinite(self.learning_rate)):
            raise ValueError("learning_rate must be a positive number")


@dataclass
class TrainingRun:
    final: LinearMachine
    pocket_run_length: int
    swap_count: int
    iterations_executed: int
    pocket_accuracy_history: list[tuple[int, float]] = field(default_factory=list)
    events: list[tuple[int, int, int, float]] = field(default_factory=list)

    def __eq__(self, other):
        if not isinstance(other, TrainingRun):
            return NotImplemented

        def key(r):
            # NaN accuracies (non-ratchet events) must compare equal
            ev = [(a, b, c, None if math.isnan(d) else d) for a, b, c, d in r.events]
            return (r.final, r.pocket_run_length, r.swap_count, r.iterations_executed, r.pocket_accuracy_history, ev)

        return key(self) == key(other)


def examples_to_arrays(examples) -> tuple[np.ndarray, np.ndarray]:
    """Stack TrainingExamples into (readings int8 (k, n), faults intp (k,))."""
    if isinstance(examples, tuple) and len(examples) == 2 and isinstance(examples[0], np.ndarray):
        X, y = examples
        return np.ascontiguousarray(X, dtype=np.int8), np.ascontiguousarray(y, dtype=np.intp)
    examples = list(examples)
    if not examples:
        raise ValueError("example set is empty")
    X = np.array([e.reading for e in examples], dtype=np.int8)
    y = np.array([e.fault for e in examples], dtype=np.intp)
    return X, y


def perceptron_step(weights: LinearMachine, example: TrainingExample, rate: float = 1.0) -> LinearMachine:
    """One multi-class perceptron update.

    If the machine picks fault ``k`` instead of the true ``i``, row ``i``
    gains ``rate * (1, V)`` and row ``k`` loses it; a correct pick leaves the
    weights untouched.
    """
    v = np.asarray(example.reading, dtype=np.float64)
    if v.shape[0] != weights.n_inputs:
        raise ValueError(f"example has {v.shape[0]} readings, machine expects {weights.n_inputs}")
    k = weights.classify(example.reading)
    i = example.fault
    if k == i:
        return weights
    delta = rate * np.concatenate(([1.0], v))
    W = weights.weights.copy()
    W[i] += delta
    W[k] -= delta
    return LinearMachine(W, weights.names)


def accuracy_on(weights: LinearMachine, examples) -> float:
    """Fraction of ``examples`` the machine classifies correctly."""
    X, y = examples_to_arrays(examples)
    if X.shape[0] == 0:
        raise ValueError("example set is empty")
    if X.shape[1] != weights.n_inputs:
        raise ValueError("example dimension does not match machine")
    return kernels.accuracy(np.ascontiguousarray(weights.weights), X, y)


def train(source, config: TrainerConfig, names: Sequence[str] | None = None) -> TrainingRun:
    """Run the pocket algorithm for ``config.iterations`` steps.

    ``source`` is either an :class:`NsbProblem` (stream mode, or finite mode
    when ``config.dataset_size`` is set) or a fixed set of examples given as
    a sequence of :class:`TrainingExample` or a ``(readings, faults)`` pair
    of arrays. Weights start at zero.
    """
    rng = np.random.default_rng(config.seed)
    if isinstance(source, NsbProblem):
        require_valid(source)
        m, n = source.n_faults, source.n_inputs
        names = source.names if names is None else names
        problem = source if config.dataset_size is None else None
        if problem is None:
            fixed = sample_examples(source, config.dataset_size, rng)
    else:
        fixed = examples_to_arrays(source)
        problem = None
        n = fixed[0].shape[1]
        m = int(fixed[1].max()) + 1 if names is None else len(names)
        if fixed[1].min() < 0 or fixed[1].max() >= m:
            raise ValueError("example fault index out of range")

    W = np.zeros((m, n + 1))
    P = np.zeros((m, n + 1))
    empty_X = np.zeros((0, n), dtype=np.int8)
    empty_y = np.zeros(0, dtype=np.intp)
    RX, Ry = (fixed if config.ratchet else (empty_X, empty_y))

    run = pocket_run = swaps = 0
    pocket_current = True
    pocket_acc = kernels.accuracy(P, RX, Ry) if config.ratchet else math.nan
    work_acc = pocket_acc
    history = [(0, pocket_acc)] if config.ratchet else []
    events: list = []

    done = 0
    while done < config.iterations:
        size = min(CHUNK, config.iterations - done)
        if problem is not None:
            X, y = sample_examples(problem, size, rng)
        else:
            pick = rng.integers(0, fixed[0].shape[0], size=size)
            X, y = fixed[0][pick], fixed[1][pick]
        run, pocket_run, swaps, pocket_current, pocket_acc, work_acc = kernels.pocket_chunk(
            W, P, np.ascontiguousarray(X), np.ascontiguousarray(y, dtype=np.intp),
            float(config.learning_rate), run, pocket_run, swaps, pocket_current,
            pocket_acc, work_acc, config.ratchet, RX, Ry, events, done,
        )
        done += size

    if config.ratchet:
        history.extend((it, acc) for it, _, _, acc in events)
    return TrainingRun(
        final=LinearMachine(P, names),
        pocket_run_length=int(pocket_run),
        swap_count=int(swaps),
        iterations_executed=done,
        pocket_accuracy_history=history,
        events=[(int(a), int(b), int(c), float(d)) for a, b, c, d in events],
    )


def write_run_log(run: TrainingRun, path) -> None:
    """One CSV row per pocket swap; accuracy is blank outside ratchet mode."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "swap", "pocket_run_length", "accuracy"])
        for it, swap, plen, acc in run.events:
            w.writerow([it, swap, plen, "" if math.isnan(acc) else repr(acc)])
