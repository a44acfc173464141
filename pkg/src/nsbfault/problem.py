"""Noisy single-pattern boolean fault detection problems.

A problem has ``m`` faults, each with a prior probability, a noise-free
pattern of ``n`` boolean (+1/-1) instrument readings, and per-instrument flip
probabilities. Fault indices are 0-based throughout the Python API; fault
*names* (``G1``, ``G2``, ...) are only used for display and in files.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "NsbProblem",
    "TrainingExample",
    "ProblemFormatError",
    "InvalidProblemError",
    "validate",
    "require_valid",
    "fold_priors",
    "lemonade",
    "sample_example",
    "sample_examples",
    "parse_problem",
    "serialize_problem",
    "read_problem",
    "write_problem",
    "as_reading",
]

PRIOR_SUM_TOL = 1e-9


class ProblemFormatError(ValueError):
    """Malformed problem file. ``lineno`` is 1-based, or None if not tied to a line."""

    def __init__(self, reason: str, lineno: int | None = None):
        self.reason = reason
        self.lineno = lineno
        where = f"line {lineno}: " if lineno is not None else ""
        super().__init__(where + reason)


class InvalidProblemError(ValueError):
    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("invalid problem: " + "; ".join(violations))


@dataclass(frozen=True, eq=False)
class NsbProblem:
    """Faults with priors, a +/-1 pattern matrix and a noise matrix.

    Construction only checks shapes; value ranges are checked by
    :func:`validate`, so that deliberately unnormalized problems can still be
    built (e.g. scaled priors).

    Parameters
    ----------
    names : sequence of str
        One display label per fault.
    priors : array_like, shape (m,)
    patterns : array_like, shape (m, n)
        Noise-free readings, entries +1 or -1.
    noise : array_like, shape (m, n) or (n,)
        ``noise[i, j]`` is the probability that reading ``j`` differs from
        ``patterns[i, j]`` under fault ``i``. A single row is broadcast to
        every fault.
    """

    names: tuple[str, ...]
    priors: np.ndarray
    patterns: np.ndarray
    noise: np.ndarray

    def __init__(self, names, priors, patterns, noise):
        priors = np.array(priors, dtype=np.float64)
        patterns = np.array(patterns, dtype=np.int8)
        noise = np.array(noise, dtype=np.float64)
        if patterns.ndim != 2 or patterns.shape[0] < 1 or patterns.shape[1] < 1:
            raise ValueError(f"patterns must be a non-empty (m, n) matrix, got shape {patterns.shape}")
        m, n = patterns.shape
        if noise.ndim == 1:
            noise = np.tile(noise, (m, 1))
        if noise.shape != (m, n):
            raise ValueError(f"noise shape {noise.shape} does not match patterns {(m, n)}")
        if priors.shape != (m,):
            raise ValueError(f"expected {m} priors, got shape {priors.shape}")
        if names is None:
            names = default_names(m)
        names = tuple(str(s) for s in names)
        if len(names) != m:
            raise ValueError(f"expected {m} names, got {len(names)}")
        for arr in (priors, patterns, noise):
            arr.setflags(write=False)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "priors", priors)
        object.__setattr__(self, "patterns", patterns)
        object.__setattr__(self, "noise", noise)

    @property
    def n_faults(self) -> int:
        return self.patterns.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.patterns.shape[1]

    def __eq__(self, other):
        if not isinstance(other, NsbProblem):
            return NotImplemented
        return (
            self.names == other.names
            and np.array_equal(self.priors, other.priors)
            and np.array_equal(self.patterns, other.patterns)
            and np.array_equal(self.noise, other.noise)
        )

    def __repr__(self):
        return f"NsbProblem(m={self.n_faults}, n={self.n_inputs}, names={list(self.names)!r})"

    def replace(self, **changes) -> "NsbProblem":
        fields = dict(names=self.names, priors=self.priors, patterns=self.patterns, noise=self.noise)
        fields.update(changes)
        return NsbProblem(**fields)


@dataclass(frozen=True)
class TrainingExample:
    """A fully known reading paired with the 0-based index of the true fault."""

    reading: tuple[int, ...]
    fault: int

    def __post_init__(self):
        reading = tuple(int(v) for v in self.reading)
        if any(v not in (-1, 1) for v in reading):
            raise ValueError("training readings must be fully known (+1/-1 only)")
        if self.fault < 0:
            raise ValueError("fault index must be non-negative")
        object.__setattr__(self, "reading", reading)


def default_names(m: int) -> tuple[str, ...]:
    return tuple(f"G{i + 1}" for i in range(m))


def as_reading(values, n: int | None = None) -> np.ndarray:
    """Coerce to an int8 vector over {-1, 0, +1}; 0 marks an unknown reading."""
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise ValueError("a reading must be one-dimensional")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"reading has length {arr.shape[0]}, expected {n}")
    if not np.all(np.isin(arr, (-1, 0, 1))):
        raise ValueError("reading entries must be -1, 0 or +1")
    return arr.astype(np.int8)


def validate(problem: NsbProblem) -> list[str]:
    """Return the list of invariant violations; an empty list means valid.

    Indices in messages are 1-based to match fault names.
    """
    out = []
    for i, p in enumerate(problem.priors, start=1):
        if not math.isfinite(p) or p <= 0.0 or p > 1.0:
            out.append(f"priors[{i}] = {p!r} outside (0, 1]")
    total = float(np.sum(problem.priors))
    if not abs(total - 1.0) <= PRIOR_SUM_TOL:
        out.append(f"priors sum ≠ 1 (sum = {total!r}, tolerance {PRIOR_SUM_TOL:g})")
    bad = np.argwhere((problem.patterns != 1) & (problem.patterns != -1))
    for i, j in bad:
        out.append(f"patterns[{i + 1},{j + 1}] = {int(problem.patterns[i, j])} not in {{-1, +1}}")
    for (i, j), v in np.ndenumerate(problem.noise):
        if not math.isfinite(v) or v < 0.0:
            out.append(f"noise[{i + 1},{j + 1}] < 0 ({v!r})")
        elif v > 0.5:
            out.append(f"noise[{i + 1},{j + 1}] > 1/2 ({v!r})")
    return out


def require_valid(problem: NsbProblem) -> NsbProblem:
    violations = validate(problem)
    if violations:
        raise InvalidProblemError(violations)
    return problem


def fold_priors(frequencies: Sequence[float], importances: Sequence[float]) -> np.ndarray:
    """Fold misclassification importance into the priors.

    Returns ``f_i * u_i / sum_k f_k * u_k``. Maximizing the probability of a
    correct diagnosis under these priors maximizes expected utility when the
    penalty for missing fault ``i`` is ``u_i`` regardless of what was chosen.
    """
    f = np.asarray(frequencies, dtype=np.float64)
    u = np.asarray(importances, dtype=np.float64)
    if f.ndim != 1 or f.shape != u.shape or f.size == 0:
        raise ValueError("frequencies and importances must be non-empty sequences of equal length")
    if not (np.all(np.isfinite(f)) and np.all(np.isfinite(u))) or np.any(f <= 0) or np.any(u <= 0):
        raise ValueError("frequencies and importances must be positive")
    ratio = f * u
    return ratio / ratio.sum()


# Frequency, importance and noise-free readings V1..V8 per fault.
_LEMONADE_TABLE = [
    (1, 20, (1, 1, -1, 1, 1, 1, 1, 1)),
    (1, 2, (-1, -1, 1, 1, 1, 1, 1, 1)),
    (1, 2, (-1, -1, -1, 1, 1, 1, 1, 1)),
    (1, 2, (-1, -1, -1, -1, -1, -1, -1, -1)),
    (1, 2, (-1, -1, -1, 1, 1, -1, -1, -1)),
    (1, 2, (-1, -1, -1, -1, -1, 1, 1, 1)),
    (2, 2, (-1, -1, -1, -1, 1, -1, -1, -1)),
    (2, 2, (-1, -1, -1, -1, -1, -1, -1, 1)),
    (40, 1, (-1, -1, -1, -1, -1, -1, -1, -1)),
]
_LEMONADE_NOISE = (0.15, 0.25, 0.20, 0.15, 0.10, 0.20, 0.10, 0.05)


def lemonade() -> NsbProblem:
    """The 9-fault, 8-instrument lemonade problem with importance folded into the priors."""
    freq = [row[0] for row in _LEMONADE_TABLE]
    imp = [row[1] for row in _LEMONADE_TABLE]
    patterns = [row[2] for row in _LEMONADE_TABLE]
    return NsbProblem(default_names(9), fold_priors(freq, imp), patterns, _LEMONADE_NOISE)


def lemonade_weights() -> tuple[list[int], list[int]]:
    """Frequency and importance columns of the lemonade table."""
    return [row[0] for row in _LEMONADE_TABLE], [row[1] for row in _LEMONADE_TABLE]


def sample_examples(problem: NsbProblem, count: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``count`` examples from the generative model.

    Returns ``(readings, faults)``: an int8 array of shape (count, n) with
    entries +/-1, and the 0-based true fault of each row. Faults are drawn
    from the priors, then each reading is flipped independently with the
    fault's noise probability.
    """
    m, n = problem.patterns.shape
    cdf = np.cumsum(problem.priors)
    cdf /= cdf[-1]
    faults = np.searchsorted(cdf, rng.random(count), side="right")
    np.minimum(faults, m - 1, out=faults)
    flips = rng.random((count, n)) < problem.noise[faults]
    readings = np.where(flips, -problem.patterns[faults], problem.patterns[faults]).astype(np.int8)
    return readings, faults.astype(np.intp)


def sample_example(problem: NsbProblem, rng: np.random.Generator) -> TrainingExample:
    readings, faults = sample_examples(problem, 1, rng)
    return TrainingExample(tuple(readings[0]), int(faults[0]))


# --------------------------------------------------------------------------
# File format

HEADER = "nsb-problem v1"
_NAME_RE = re.compile(r"^\S+$")


def _float(token: str, what: str, lineno: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ProblemFormatError(f"{what}: cannot parse {token!r} as a number", lineno) from None
    if not math.isfinite(value):
        raise ProblemFormatError(f"{what}: {token!r} is not finite", lineno)
    return value


def _int(token: str, what: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise ProblemFormatError(f"{what}: expected an integer, got {token!r}", lineno) from None


def _content_lines(text: str) -> Iterable[tuple[int, list[str]]]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def parse_problem(text: str) -> NsbProblem:
    """Parse the line-oriented ``nsb-problem v1`` format.

    Per-value ranges and dimensions are enforced here; whether the priors sum
    to one is left to :func:`validate`.
    """
    lines = list(_content_lines(text))
    if not lines:
        raise ProblemFormatError("empty problem file")
    it = iter(lines)

    lineno, toks = next(it)
    if " ".join(toks) != HEADER:
        raise ProblemFormatError(f"expected header {HEADER!r}", lineno)

    def header_int(key):
        try:
            lineno, toks = next(it)
        except StopIteration:
            raise ProblemFormatError(f"missing {key!r} line") from None
        if len(toks) != 2 or toks[0] != key:
            raise ProblemFormatError(f"expected '{key} <count>'", lineno)
        value = _int(toks[1], key, lineno)
        if value < 1:
            raise ProblemFormatError(f"{key} must be at least 1", lineno)
        return value

    n = header_int("inputs")
    m = header_int("faults")

    names, priors, weights, patterns, noise = [], [], [], [], []
    current = None  # name of the fault block being filled
    block: dict[str, list] = {}

    def close_block(lineno):
        if current is None:
            return
        for key in ("pattern", "noise"):
            if key not in block:
                raise ProblemFormatError(f"fault {current} has no {key} line", lineno)
        patterns.append(block["pattern"])
        noise.append(block["noise"])

    for lineno, toks in it:
        key = toks[0]
        if key == "fault":
            close_block(lineno)
            block = {}
            if len(toks) < 2:
                raise ProblemFormatError("fault line needs a name", lineno)
            current = toks[1]
            if current in names:
                raise ProblemFormatError(f"duplicate fault name {current}", lineno)
            names.append(current)
            rest = toks[2:]
            if len(rest) == 2 and rest[0] == "prior":
                p = _float(rest[1], "prior", lineno)
                if not (0.0 < p <= 1.0):
                    raise ProblemFormatError(f"prior out of range (0, 1] at fault {current}: {rest[1]}", lineno)
                priors.append(p)
            elif len(rest) == 3 and rest[0] == "weight":
                f = _float(rest[1], "frequency", lineno)
                u = _float(rest[2], "importance", lineno)
                if f <= 0 or u <= 0:
                    raise ProblemFormatError(f"weight out of range at fault {current}: frequency and importance must be positive", lineno)
                weights.append((f, u))
            else:
                raise ProblemFormatError("expected 'fault <name> prior <p>' or 'fault <name> weight <frequency> <importance>'", lineno)
        elif key in ("pattern", "noise"):
            if current is None:
                raise ProblemFormatError(f"{key} line outside a fault block", lineno)
            if key in block:
                raise ProblemFormatError(f"duplicate {key} line at fault {current}", lineno)
            values = toks[1:]
            if len(values) != n:
                raise ProblemFormatError(f"{key} length mismatch at fault {current}: got {len(values)}, expected {n}", lineno)
            if key == "pattern":
                row = []
                for t in values:
                    if t not in ("1", "-1"):
                        raise ProblemFormatError(f"pattern entry out of range at fault {current}: {t!r} is not 1 or -1", lineno)
                    row.append(int(t))
            else:
                row = [_float(t, "noise", lineno) for t in values]
                for v in row:
                    if not (0.0 <= v <= 0.5):
                        raise ProblemFormatError(f"noise out of range [0, 1/2] at fault {current}: {v!r}", lineno)
            block[key] = row
        else:
            raise ProblemFormatError(f"unexpected keyword {key!r}", lineno)
    close_block(lines[-1][0])

    if len(names) != m:
        raise ProblemFormatError(f"declared {m} faults but found {len(names)}")
    if priors and weights:
        raise ProblemFormatError("priors must be given either all as 'prior' or all as 'weight'")
    if weights:
        freq, imp = zip(*weights)
        prior_values = fold_priors(freq, imp)
    else:
        prior_values = priors
    return NsbProblem(names, prior_values, patterns, noise)


def serialize_problem(problem: NsbProblem) -> str:
    """Render a problem in the ``nsb-problem v1`` format.

    Decimals are written with ``repr``, the shortest text that parses back
    to the identical double.
    """
    out = [HEADER, f"inputs {problem.n_inputs}", f"faults {problem.n_faults}"]
    for i, name in enumerate(problem.names):
        if not _NAME_RE.match(name):
            raise ValueError(f"fault name {name!r} contains whitespace")
        out.append(f"fault {name} prior {float(problem.priors[i])!r}")
        out.append("  pattern " + " ".join(str(int(v)) for v in problem.patterns[i]))
        out.append("  noise " + " ".join(repr(float(v)) for v in problem.noise[i]))
    return "\n".join(out) + "\n"


def read_problem(path) -> NsbProblem:
    with open(path, encoding="utf-8") as fh:
        return parse_problem(fh.read())


def write_problem(problem: NsbProblem, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_problem(problem))
