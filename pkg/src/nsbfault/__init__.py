"""Noisy single-pattern boolean fault detection.

Exact Bayes decision rules and expected utilities, the closed-form
Bayes-optimal winner-take-all linear machine and its inverse, and a pocket
algorithm trainer.
"""
from .bayes import (
    BayesDecider,
    EnumerationGuardError,
    UtilityReport,
    all_readings,
    bayes_decide,
    bayes_decide_batch,
    bayes_scores,
    exact_expected_utility,
    likelihood,
    marginal_likelihood,
    monte_carlo_utility,
)
from .kernels import BACKEND
from .machine import (
    LinearMachine,
    bayes_network,
    choose_K,
    classify,
    inversion_beta,
    network_to_nsb,
    parse_machine,
    read_machine,
    scores,
    serialize_machine,
    write_machine,
)
from .pocket import TrainerConfig, TrainingRun, accuracy_on, perceptron_step, train
from .problem import (
    InvalidProblemError,
    NsbProblem,
    ProblemFormatError,
    TrainingExample,
    fold_priors,
    lemonade,
    parse_problem,
    read_problem,
    require_valid,
    sample_example,
    sample_examples,
    serialize_problem,
    validate,
    write_problem,
)

__version__ = "0.1.0"
