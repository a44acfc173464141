import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsbfault import (
    BayesDecider,
    EnumerationGuardError,
    LinearMachine,
    NsbProblem,
    all_readings,
    bayes_decide,
    bayes_decide_batch,
    exact_expected_utility,
    lemonade,
    likelihood,
    marginal_likelihood,
    monte_carlo_utility,
)

import oracles
from conftest import make_random_problem


class TestLikelihood:
    def test_worked_lemonade_example(self):
        expected = 0.85 * 0.25 * 0.20 * 0.85 * 0.90 * 0.80 * 0.90 * 0.95
        assert likelihood(lemonade(), [1, -1, 1, 1, 1, 1, 1, 1], 0) == pytest.approx(expected, rel=1e-15)

    def test_noiseless(self):
        p = NsbProblem(None, [1.0], [[1, -1, 1]], [0.0, 0.0, 0.0])
        assert likelihood(p, [1, -1, 1], 0) == 1.0
        assert likelihood(p, [1, 1, 1], 0) == 0.0

    def test_uniform_noise(self):
        p = NsbProblem(None, [0.5, 0.5], [[1, 1, 1, 1], [-1, 1, -1, 1]], [0.5] * 4)
        for V in all_readings(4):
            for i in range(2):
                assert likelihood(p, V, i) == 2.0 ** -4

    def test_rejects_unknown_entries(self):
        with pytest.raises(ValueError, match="marginal_likelihood"):
            likelihood(lemonade(), [1, 0, 1, 1, 1, 1, 1, 1], 0)

    def test_rejects_wrong_length(self):
        with pytest.raises(ValueError):
            likelihood(lemonade(), [1, 1], 0)


class TestMarginal:
    def test_all_unknown(self):
        p = lemonade()
        for i in range(9):
            assert marginal_likelihood(p, [0] * 8, i) == 1.0

    def test_equals_likelihood_when_known(self):
        p = lemonade()
        for V in all_readings(8)[::17]:
            for i in range(9):
                assert marginal_likelihood(p, V, i) == likelihood(p, V, i)

    def test_single_known_reading(self):
        assert marginal_likelihood(lemonade(), [1, 0, 0, 0, 0, 0, 0, 0], 0) == pytest.approx(0.85)

    def test_marginalizes_by_summation(self, rng):
        # summing the full likelihood over the unknown positions gives the marginal
        p = make_random_problem(rng, 5, 3)
        V = np.array([1, 0, -1, 0, 1])
        unknown = np.flatnonzero(V == 0)
        for i in range(3):
            total = 0.0
            for fill in all_readings(len(unknown)):
                full = V.copy()
                full[unknown] = fill
                total += likelihood(p, full, i)
            assert marginal_likelihood(p, V, i) == pytest.approx(total, rel=1e-12)


class TestDecide:
    def test_single_fault(self):
        p = NsbProblem(None, [1.0], [[1, -1]], [0.3, 0.2])
        for V in all_readings(2):
            assert bayes_decide(p, V) == 0
        assert bayes_decide(p, [0, 0]) == 0

    def test_lemonade_pattern_g1(self):
        p = lemonade()
        V = (1, 1, -1, 1, 1, 1, 1, 1)
        scores = oracles.bayes_joint_scores(p, V)
        assert int(np.argmax(scores)) == 0
        assert bayes_decide(p, V) == 0

    def test_lemonade_all_minus_one(self):
        p = lemonade()
        V = (-1,) * 8
        assert int(np.argmax(oracles.bayes_joint_scores(p, V))) == 8
        assert bayes_decide(p, V) == 8

    def test_matches_oracle_everywhere_on_lemonade(self):
        p = lemonade()
        R = all_readings(8)
        batch = bayes_decide_batch(p, R)
        for V, d in zip(R, batch):
            scores = oracles.bayes_joint_scores(p, tuple(V))
            assert scores[d] == max(scores)
            assert bayes_decide(p, V) == d

    def test_ties_go_to_lowest_index(self):
        p = NsbProblem(None, [0.5, 0.5], [[1, 1], [1, 1]], [0.2, 0.2])
        for V in all_readings(2):
            assert bayes_decide(p, V) == 0

    def test_zero_noise_mismatch_never_chosen(self):
        p = NsbProblem(None, [0.9, 0.1], [[1, 1], [-1, 1]], [[0.0, 0.3], [0.4, 0.4]])
        assert bayes_decide(p, [-1, 1]) == 1
        assert bayes_decide(p, [-1, -1]) == 1

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(1e-3, 1e3))
    def test_prior_scaling_invariance(self, seed, c):
        rng = np.random.default_rng(seed)
        p = make_random_problem(rng, 6, 4, noise_low=0.01, noise_high=0.5)
        scaled = p.replace(priors=p.priors * c)
        R = all_readings(6)
        np.testing.assert_array_equal(bayes_decide_batch(p, R), bayes_decide_batch(scaled, R))


class TestExactUtility:
    def test_lemonade_matches_rational_brute_force(self):
        assert oracles.lemonade_exact_utility() == oracles.LEMONADE_EXACT_UTILITY
        report = exact_expected_utility(lemonade())
        assert report.value == pytest.approx(float(oracles.LEMONADE_EXACT_UTILITY), abs=1e-14)
        assert report.method == "exact"
        assert report.stderr == 0.0 and report.sample_count == 0
        assert report.figure_of_merit == pytest.approx(1000 * report.value)

    def test_noiseless_distinct_patterns(self):
        p = NsbProblem(None, [0.2, 0.3, 0.5], [[1, 1, 1], [1, -1, 1], [-1, -1, -1]], [0.0] * 3)
        assert exact_expected_utility(p).value == pytest.approx(1.0, abs=1e-15)

    def test_guard(self):
        p = NsbProblem(None, [1.0], [[1] * 25], [0.1] * 25)
        with pytest.raises(EnumerationGuardError):
            exact_expected_utility(p)
        with pytest.raises(EnumerationGuardError):
            exact_expected_utility(lemonade(), max_inputs=7)

    @pytest.mark.parametrize("n", [1, 2, 3, 7])
    def test_matches_oracle_on_random_problems(self, rng, n):
        p = make_random_problem(rng, n, 4, zero_noise_frac=0.2)
        assert exact_expected_utility(p).value == pytest.approx(oracles.bayes_utility(p), rel=1e-12)

    def test_decider_paths_agree(self, rng):
        p = make_random_problem(rng, 7, 5)
        machine = LinearMachine(rng.normal(size=(5, 8)))
        via_kernel = exact_expected_utility(p, machine).value
        via_callable = exact_expected_utility(p, lambda V: machine.classify(V)).value
        oracle = oracles.utility_of(p, lambda V: oracles.machine_choice(machine.weights.tolist(), V))
        assert via_kernel == pytest.approx(oracle, rel=1e-12)
        assert via_callable == pytest.approx(oracle, rel=1e-12)
        bayes = exact_expected_utility(p).value
        assert exact_expected_utility(p, BayesDecider(p)).value == bayes
        assert exact_expected_utility(p, lambda V: bayes_decide(p, V)).value == pytest.approx(bayes, rel=1e-12)

    def test_machine_dimension_mismatch(self):
        with pytest.raises(ValueError):
            exact_expected_utility(lemonade(), LinearMachine.zeros(9, 7))

    def test_bayes_dominates_random_deciders(self):
        rng = np.random.default_rng(77)
        for _ in range(4):
            p = make_random_problem(rng, 5, 4, zero_noise_frac=0.1)
            best = exact_expected_utility(p).value
            for _ in range(25):
                table = rng.integers(0, 4, size=32)
                decider = lambda V, t=table: int(t[int(np.sum((np.asarray(V) > 0) << np.arange(5)))])
                assert exact_expected_utility(p, decider).value <= best + 1e-12

    def test_enumeration_order(self):
        R = all_readings(3)
        assert R.tolist() == [
            [-1, -1, -1], [1, -1, -1], [-1, 1, -1], [1, 1, -1],
            [-1, -1, 1], [1, -1, 1], [-1, 1, 1], [1, 1, 1],
        ]
        np.testing.assert_array_equal(all_readings(5, 8, 12), all_readings(5)[8:12])

    def test_normalization(self, rng):
        for n in (1, 4, 9):
            p = make_random_problem(rng, n, 3, zero_noise_frac=0.2)
            from nsbfault.bayes import log_likelihoods

            totals = np.exp(log_likelihoods(p, all_readings(n))).sum(axis=0)
            np.testing.assert_allclose(totals, 1.0, atol=1e-9)


class TestMonteCarlo:
    def test_deterministic(self):
        a = monte_carlo_utility(lemonade(), None, 2000, seed=5)
        b = monte_carlo_utility(lemonade(), None, 2000, seed=5)
        assert a == b
        assert a.method == "monte-carlo" and a.sample_count == 2000
        assert a.stderr == pytest.approx(math.sqrt(a.value * (1 - a.value) / 2000))

    def test_perfect_decider(self):
        p = NsbProblem(None, [1.0], [[-1, -1, 1]], [0.0] * 3)
        r = monte_carlo_utility(p, lambda V: 0, 300, seed=1)
        assert r.value == 1.0 and r.stderr == 0.0

    def test_rejects_zero_samples(self):
        with pytest.raises(ValueError):
            monte_carlo_utility(lemonade(), None, 0, seed=1)

    def test_lemonade_within_three_sigma(self):
        exact = exact_expected_utility(lemonade()).value
        r = monte_carlo_utility(lemonade(), BayesDecider(lemonade()), 5000, seed=11)
        assert abs(r.value - exact) <= 3 * math.sqrt(exact * (1 - exact) / 5000)

    def test_four_sigma_coverage(self):
        # estimates should land within 4 standard errors of the exact value in
        # at least 99% of seeded trials
        rng = np.random.default_rng(8)
        p = make_random_problem(rng, 6, 5, noise_low=0.05, noise_high=0.4)
        exact = exact_expected_utility(p).value
        reports = [monte_carlo_utility(p, None, 1000, seed=s) for s in range(200)]
        inside = sum(abs(r.value - exact) <= 4 * r.stderr for r in reports)
        assert inside >= 198
