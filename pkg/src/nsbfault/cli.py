"""``nsb`` command-line tool.

Exit codes: 0 success, 2 usage error, 3 input-format error, 4 guard violation.
"""
from __future__ import annotations

import argparse
import os
import sys

from .bayes import (
    DEFAULT_MAX_INPUTS,
    EnumerationGuardError,
    exact_expected_utility,
    monte_carlo_utility,
)
from .experiment import compare, random_problem
from .machine import bayes_network, network_to_nsb, read_machine, serialize_machine
from .pocket import TrainerConfig, train, write_run_log
from .problem import (
    InvalidProblemError,
    ProblemFormatError,
    lemonade,
    read_problem,
    require_valid,
    serialize_problem,
    validate,
)

EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_GUARD = 4

BUILTIN = "lemonade"


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _load_problem(path, check=True):
    # the built-in problem name works wherever a problem file is expected
    if path == BUILTIN and not os.path.exists(path):
        return lemonade()
    try:
        problem = read_problem(path)
    except OSError as e:
        raise CliError(f"{path}: {e.strerror}", EXIT_INPUT) from e
    except ProblemFormatError as e:
        raise CliError(f"{path}: {e}", EXIT_INPUT) from e
    if check:
        try:
            require_valid(problem)
        except InvalidProblemError as e:
            raise CliError(f"{path}: {e}", EXIT_INPUT) from e
    return problem


def _load_machine(path):
    try:
        return read_machine(path)
    except OSError as e:
        raise CliError(f"{path}: {e.strerror}", EXIT_INPUT) from e
    except (ProblemFormatError, ValueError) as e:
        raise CliError(f"{path}: {e}", EXIT_INPUT) from e


def _write(path, text):
    if path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as e:
        raise CliError(f"{path}: {e.strerror}", EXIT_INPUT) from e


def _trainer_config(args):
    try:
        return TrainerConfig(
            iterations=args.iters,
            seed=args.seed,
            ratchet=getattr(args, "ratchet", False),
            dataset_size=getattr(args, "dataset_size", None),
            learning_rate=getattr(args, "rate", 1.0),
        )
    except ValueError as e:
        raise CliError(str(e), EXIT_USAGE) from e


def _print_utility(report):
    print(f"method = {report.method}")
    print(f"utility = {report.value:.4f}")
    print(f"figure_of_merit = {1000 * round(report.value, 4):.1f}")
    print(f"stderr = {report.stderr:.4f}")
    print(f"samples = {report.sample_count}")


def cmd_validate(args):
    problem = _load_problem(args.problem, check=False)
    violations = validate(problem)
    if violations:
        for v in violations:
            print(v)
        raise CliError(f"{args.problem}: {len(violations)} violation(s)", EXIT_INPUT)
    print("ok")


def cmd_lemonade(args):
    _write(args.output, serialize_problem(lemonade()))


def cmd_bayes_utility(args):
    problem = _load_problem(args.problem)
    if args.exact:
        try:
            report = exact_expected_utility(problem, max_inputs=args.max_inputs)
        except EnumerationGuardError as e:
            raise CliError(str(e), EXIT_GUARD) from e
    else:
        if args.samples < 1:
            raise CliError("--samples must be at least 1", EXIT_USAGE)
        report = monte_carlo_utility(problem, None, args.samples, args.seed)
    _print_utility(report)


def cmd_construct(args):
    problem = _load_problem(args.problem)
    if not args.alpha > 0:
        raise CliError("--alpha must be positive", EXIT_USAGE)
    machine = bayes_network(problem, args.alpha, args.beta)
    _write_machine(machine, args.output)


def _write_machine(machine, path):
    _write(path, serialize_machine(machine))


def cmd_invert(args):
    machine = _load_machine(args.weights)
    _write(args.output, serialize_problem(network_to_nsb(machine)))


def cmd_train(args):
    problem = _load_problem(args.problem)
    run = train(problem, _trainer_config(args))
    _write_machine(run.final, args.output)
    if args.log:
        write_run_log(run, args.log)
    if args.output != "-":
        print(f"iterations = {run.iterations_executed}")
        print(f"swap_count = {run.swap_count}")
        print(f"pocket_run_length = {run.pocket_run_length}")


def cmd_classify(args):
    machine = _load_machine(args.weights)
    try:
        values = [int(t) for t in args.reading.replace(",", " ").split()]
    except ValueError as e:
        raise CliError("--reading tokens must be -1, 0 or 1", EXIT_USAGE) from e
    if any(v not in (-1, 0, 1) for v in values):
        raise CliError("--reading tokens must be -1, 0 or 1", EXIT_USAGE)
    if len(values) != machine.n_inputs:
        raise CliError(f"--reading has {len(values)} values, machine expects {machine.n_inputs}", EXIT_USAGE)
    print(machine.names[machine.classify(values)])


def cmd_compare(args):
    problem = _load_problem(args.problem)
    if args.samples < 1:
        raise CliError("--samples must be at least 1", EXIT_USAGE)
    if args.seeds < 1:
        raise CliError("--seeds must be at least 1", EXIT_USAGE)
    if problem.n_inputs > DEFAULT_MAX_INPUTS:
        raise CliError(f"exact utilities need n <= {DEFAULT_MAX_INPUTS}", EXIT_GUARD)
    report = compare(problem, _trainer_config(args), args.samples, seeds=args.seeds)
    sys.stdout.write(report.render())
    sys.stdout.write("\n")
    sys.stdout.write(report.to_text())
    if args.json:
        _write(args.json, report.to_json())


def cmd_gen_random(args):
    try:
        problem = random_problem(args.inputs, args.faults, args.seed, args.noise_min, args.noise_max, args.priors)
    except ValueError as e:
        raise CliError(str(e), EXIT_USAGE) from e
    _write(args.output, serialize_problem(problem))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nsb", description="Noisy single-pattern boolean fault detection tools.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("validate", help="check a problem file")
    p.add_argument("problem")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("lemonade", help="write the built-in lemonade problem")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_lemonade)

    p = sub.add_parser("bayes-utility", help="expected utility of the optimal Bayes rule")
    p.add_argument("problem")
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--exact", action="store_true")
    mode.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-inputs", type=int, default=DEFAULT_MAX_INPUTS, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_bayes_utility)

    p = sub.add_parser("construct", help="build the Bayes-optimal linear machine")
    p.add_argument("problem")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("invert", help="recover an NSB problem from a linear machine")
    p.add_argument("weights")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("train", help="train a linear machine with the pocket algorithm")
    p.add_argument("problem")
    p.add_argument("--iters", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--ratchet", action="store_true")
    p.add_argument("--dataset-size", type=int)
    p.add_argument("--rate", type=float, default=1.0)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--log")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", help="classify one reading with a linear machine")
    p.add_argument("weights")
    p.add_argument("--reading", required=True, help='whitespace-separated tokens in {-1,0,1}, e.g. "-1 0 1"')
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("compare", help="compare a trained network with the Bayes rule")
    p.add_argument("problem")
    p.add_argument("--iters", type=int, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--json")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("gen-random", help="generate a random NSB problem")
    p.add_argument("--inputs", type=int, required=True)
    p.add_argument("--faults", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--noise-min", type=float, default=0.05)
    p.add_argument("--noise-max", type=float, default=0.45)
    p.add_argument("--priors", choices=("equal", "dirichlet"), default="equal")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen_random)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except CliError as e:
        print(f"nsb: error: {e}", file=sys.stderr)
        return e.code
    return 0


if __name__ == "__main__":
    sys.exit(main())
