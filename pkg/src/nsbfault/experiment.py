"""Network-vs-Bayes comparison runs and random benchmark problems."""
from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bayes import UtilityReport, bayes_decide_batch, exact_expected_utility
from .machine import LinearMachine
from .pocket import TrainerConfig, train
from .problem import NsbProblem, default_names, require_valid, sample_examples

__all__ = [
    "EVAL_STREAM_LABEL",
    "ComparisonReport",
    "eval_rng",
    "train_best_of",
    "compare",
    "random_problem",
]

# The evaluation stream is seeded with (EVAL_STREAM_LABEL, seed) while training
# uses the bare seed, so the two never share random draws.
EVAL_STREAM_LABEL = 0x45564C  # "EVL"


def eval_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng([EVAL_STREAM_LABEL, seed])


def _fmt(x: float) -> str:
    return f"{x:.4f}"


@dataclass(frozen=True)
class ComparisonReport:
    """Outcome of scoring a trained network and the Bayes rule on the same examples.

    ``counts[a][b]``: ``a`` is 0 if the network was correct else 1, ``b``
    likewise for the Bayes rule.
    """

    counts: tuple[tuple[int, int], tuple[int, int]]
    bayes_utility: UtilityReport
    network_utility: UtilityReport
    exact_bayes_utility: UtilityReport
    exact_network_utility: UtilityReport
    agreement_count: int
    seed: int
    sample_count: int
    train_iterations: int
    seeds: int = 1
    selected_seed: int | None = None

    @property
    def agreement_rate(self) -> float:
        return self.agreement_count / self.sample_count

    @property
    def relative_performance(self) -> float:
        return self.exact_network_utility.value / self.exact_bayes_utility.value

    def items(self) -> list[tuple[str, str]]:
        """Stable ``key = value`` pairs; numbers already formatted for output."""
        (cc, cw), (wc, ww) = self.counts
        return [
            ("seed", str(self.seed)),
            ("seeds", str(self.seeds)),
            ("selected_seed", str(self.seed if self.selected_seed is None else self.selected_seed)),
            ("train_iterations", str(self.train_iterations)),
            ("sample_count", str(self.sample_count)),
            ("net_correct_bayes_correct", str(cc)),
            ("net_correct_bayes_wrong", str(cw)),
            ("net_wrong_bayes_correct", str(wc)),
            ("net_wrong_bayes_wrong", str(ww)),
            ("bayes_correct", str(cc + wc)),
            ("network_correct", str(cc + cw)),
            ("bayes_utility", _fmt(self.bayes_utility.value)),
            ("bayes_stderr", _fmt(self.bayes_utility.stderr)),
            ("network_utility", _fmt(self.network_utility.value)),
            ("network_stderr", _fmt(self.network_utility.stderr)),
            ("exact_bayes_utility", _fmt(self.exact_bayes_utility.value)),
            ("exact_network_utility", _fmt(self.exact_network_utility.value)),
            ("agreement_count", str(self.agreement_count)),
            ("agreement_rate", _fmt(self.agreement_rate)),
            ("relative_performance", _fmt(self.relative_performance)),
        ]

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.items())

    def to_json(self) -> str:
        data = {k: (float(v) if "." in v else int(v)) for k, v in self.items()}
        return json.dumps(data, indent=2) + "\n"

    def render(self) -> str:
        (cc, cw), (wc, ww) = self.counts
        kv = dict(self.items())
        width = max(len(kv[k]) for k in ("net_correct_bayes_correct", "net_correct_bayes_wrong",
                                          "net_wrong_bayes_correct", "net_wrong_bayes_wrong"))
        width = max(width, len("Bayes correct"))
        lines = [
            f"Comparison on {self.sample_count} evaluation examples (seed {self.seed})",
            "",
            f"{'':<16}{'Bayes correct':>{width + 2}}{'Bayes wrong':>{width + 2}}",
            f"{'Network correct':<16}{cc:>{width + 2}}{cw:>{width + 2}}",
            f"{'Network wrong':<16}{wc:>{width + 2}}{ww:>{width + 2}}",
            "",
            f"Bayes utility (sampled):    {kv['bayes_utility']} +/- {kv['bayes_stderr']}",
            f"Network utility (sampled):  {kv['network_utility']} +/- {kv['network_stderr']}",
            f"Bayes utility (exact):      {kv['exact_bayes_utility']}",
            f"Network utility (exact):    {kv['exact_network_utility']}",
            f"Agreement:                  {kv['agreement_count']} ({kv['agreement_rate']})",
            f"Relative performance:       {kv['relative_performance']}",
        ]
        return "\n".join(lines) + "\n"


def _train_one(args):
    problem, config = args
    run = train(problem, config)
    return run.final, exact_expected_utility(problem, run.final).value


def train_best_of(problem: NsbProblem, config: TrainerConfig, seeds: int = 1, workers: int | None = None):
    """Train with seeds ``config.seed .. config.seed + seeds - 1``; keep the best.

    Runs are ranked by exact expected utility; ties keep the lowest seed.
    Returns ``(machine, seed, exact_utility)``.
    """
    if seeds < 1:
        raise ValueError("seeds must be at least 1")
    configs = [
        TrainerConfig(config.iterations, config.seed + k, config.ratchet, config.dataset_size, config.learning_rate)
        for k in range(seeds)
    ]
    jobs = [(problem, c) for c in configs]
    if seeds == 1 or workers == 1:
        results = [_train_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers or min(seeds, os.cpu_count() or 1)) as pool:
            results = list(pool.map(_train_one, jobs))
    best = max(range(seeds), key=lambda k: (results[k][1], -k))
    machine, value = results[best]
    return machine, configs[best].seed, value


def compare(problem: NsbProblem, config: TrainerConfig, sample_count: int, seeds: int = 1,
            workers: int | None = None, machine: LinearMachine | None = None) -> ComparisonReport:
    """Train a pocket machine (unless ``machine`` is given) and score it against the Bayes rule.

    Evaluation examples come from :func:`eval_rng` of ``config.seed``.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be at least 1")
    require_valid(problem)
    if machine is None:
        machine, chosen, _ = train_best_of(problem, config, seeds, workers)
    else:
        chosen = None
    readings, truth = sample_examples(problem, sample_count, eval_rng(config.seed))
    bayes_pred = bayes_decide_batch(problem, readings)
    net_pred = machine.decide_batch(readings)
    b_ok = bayes_pred == truth
    n_ok = net_pred == truth
    counts = (
        (int(np.sum(n_ok & b_ok)), int(np.sum(n_ok & ~b_ok))),
        (int(np.sum(~n_ok & b_ok)), int(np.sum(~n_ok & ~b_ok))),
    )

    def sampled(hits):
        p = hits / sample_count
        return UtilityReport(p, "monte-carlo", float(np.sqrt(p * (1 - p) / sample_count)), sample_count)

    return ComparisonReport(
        counts=counts,
        bayes_utility=sampled(int(b_ok.sum())),
        network_utility=sampled(int(n_ok.sum())),
        exact_bayes_utility=exact_expected_utility(problem),
        exact_network_utility=exact_expected_utility(problem, machine),
        agreement_count=int(np.sum(bayes_pred == net_pred)),
        seed=config.seed,
        sample_count=sample_count,
        train_iterations=config.iterations,
        seeds=seeds,
        selected_seed=chosen,
    )


def random_problem(n: int, m: int, seed: int, noise_min: float = 0.05, noise_max: float = 0.45,
                   prior_mode: str = "equal") -> NsbProblem:
    """Random NSB problem with distinct patterns.

    Patterns are uniform over {-1, +1}^n with duplicate rows redrawn; noise
    is uniform on ``[noise_min, noise_max]``; priors are ``1/m`` (``equal``)
    or a symmetric Dirichlet(1) draw (``dirichlet``).
    """
    if not 1 <= n <= 24:
        raise ValueError("inputs must be between 1 and 24")
    if m < 2:
        raise ValueError("faults must be at least 2")
    if not 0.0 <= noise_min <= noise_max <= 0.5:
        raise ValueError("need 0 <= noise_min <= noise_max <= 1/2")
    if m > 2 ** n:
        raise ValueError(f"cannot draw {m} distinct patterns of length {n} (only {2 ** n} exist)")
    if prior_mode not in ("equal", "dirichlet"):
        raise ValueError("prior_mode must be 'equal' or 'dirichlet'")
    rng = np.random.default_rng(seed)
    seen = set()
    patterns = []
    while len(patterns) < m:
        row = tuple(int(v) for v in 2 * rng.integers(0, 2, size=n) - 1)
        if row not in seen:
            seen.add(row)
            patterns.append(row)
    noise = rng.uniform(noise_min, noise_max, size=(m, n))
    if prior_mode == "equal":
        priors = np.full(m, 1.0 / m)
    else:
        priors = rng.dirichlet(np.ones(m))
    return NsbProblem(default_names(m), priors, patterns, noise)
