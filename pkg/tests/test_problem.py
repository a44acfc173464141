import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsbfault import (
    NsbProblem,
    ProblemFormatError,
    TrainingExample,
    fold_priors,
    lemonade,
    parse_problem,
    sample_example,
    sample_examples,
    serialize_problem,
    validate,
)
from nsbfault.problem import InvalidProblemError, require_valid

from oracles import LEMONADE_PATTERNS, LEMONADE_RATIOS


def test_lemonade_shape_and_rows():
    p = lemonade()
    assert (p.n_faults, p.n_inputs) == (9, 8)
    assert tuple(p.patterns[0]) == (1, 1, -1, 1, 1, 1, 1, 1)
    assert tuple(p.patterns[8]) == (-1,) * 8
    assert p.patterns.tolist() == [list(r) for r in LEMONADE_PATTERNS]
    for row in p.noise:
        assert row.tolist() == [0.15, 0.25, 0.20, 0.15, 0.10, 0.20, 0.10, 0.05]
    assert p.names == tuple(f"G{i}" for i in range(1, 10))


def test_lemonade_priors_are_final_ratios_over_78():
    p = lemonade()
    assert sum(LEMONADE_RATIOS) == 78
    for prior, ratio in zip(p.priors, LEMONADE_RATIOS):
        assert prior == pytest.approx(ratio / 78, rel=1e-15)
    assert p.priors[8] == pytest.approx(40 / 78)


def test_lemonade_validates():
    assert validate(lemonade()) == []


def test_validate_reports_noise_above_half():
    p = lemonade()
    noise = np.array(p.noise)
    noise[0, 0] = 0.6
    violations = validate(p.replace(noise=noise))
    assert len(violations) == 1
    assert "noise[1,1] > 1/2" in violations[0]


def test_validate_reports_prior_sum():
    p = lemonade()
    violations = validate(p.replace(priors=p.priors * 0.9))
    assert any("priors sum ≠ 1" in v for v in violations)


def test_validate_rejects_zero_prior_and_bad_pattern():
    p = NsbProblem(None, [1.0, 0.0], [[1, -1], [1, 0]], [0.1, 0.2])
    violations = validate(p)
    assert any("priors[2]" in v for v in violations)
    assert any("patterns[2,2]" in v for v in violations)
    with pytest.raises(InvalidProblemError):
        require_valid(p)


def test_noise_half_is_allowed():
    p = NsbProblem(None, [0.5, 0.5], [[1], [-1]], [[0.5], [0.0]])
    assert validate(p) == []


def test_construction_checks_shapes():
    with pytest.raises(ValueError):
        NsbProblem(None, [1.0], [[1, 1]], [0.1, 0.1, 0.1])
    with pytest.raises(ValueError):
        NsbProblem(None, [0.5, 0.5], [[1, 1]], [0.1, 0.1])
    with pytest.raises(ValueError):
        NsbProblem(["a"], [0.5, 0.5], [[1], [1]], [0.1])


def test_problem_is_immutable():
    p = lemonade()
    with pytest.raises(ValueError):
        p.priors[0] = 0.5
    with pytest.raises(AttributeError):
        p.priors = None


class TestFoldPriors:
    def test_lemonade_columns(self):
        freq = [1, 1, 1, 1, 1, 1, 2, 2, 40]
        imp = [20, 2, 2, 2, 2, 2, 2, 2, 1]
        folded = fold_priors(freq, imp)
        np.testing.assert_allclose(folded * 78, LEMONADE_RATIOS, rtol=1e-14)
        assert folded[8] == pytest.approx(40 / 78)

    def test_uniform(self):
        np.testing.assert_allclose(fold_priors([1] * 4, [1] * 4), [0.25] * 4)

    def test_equal_products(self):
        np.testing.assert_allclose(fold_priors([1, 2], [2, 1]), [0.5, 0.5])

    @pytest.mark.parametrize("f,u", [([1, 0], [1, 1]), ([1, 1], [1, -2]), ([1], [1, 1]), ([], [])])
    def test_rejects_bad_input(self, f, u):
        with pytest.raises(ValueError):
            fold_priors(f, u)

    @given(st.lists(st.tuples(st.floats(1e-6, 1e6), st.floats(1e-6, 1e6)), min_size=1, max_size=40))
    def test_sums_to_one(self, pairs):
        f, u = zip(*pairs)
        assert abs(fold_priors(f, u).sum() - 1.0) <= 1e-12


class TestSampling:
    def test_zero_noise_reproduces_pattern(self, rng):
        p = NsbProblem(None, [0.3, 0.7], [[1, -1, 1], [-1, -1, 1]], [0.0, 0.0, 0.0])
        X, y = sample_examples(p, 500, rng)
        np.testing.assert_array_equal(X, p.patterns[y])
        ex = sample_example(p, rng)
        assert isinstance(ex, TrainingExample)
        assert ex.reading == tuple(p.patterns[ex.fault])

    def test_deterministic_for_seed(self):
        p = lemonade()
        a = sample_examples(p, 1000, np.random.default_rng(3))
        b = sample_examples(p, 1000, np.random.default_rng(3))
        np.testing.assert_array_equal(a[0], b[0])
        np.testing.assert_array_equal(a[1], b[1])
        assert sample_example(p, np.random.default_rng(9)) == sample_example(p, np.random.default_rng(9))

    def test_lemonade_statistics(self):
        # 3-sigma binomial bounds on fault frequencies and conditional flip rates
        p = lemonade()
        count = 100_000
        X, y = sample_examples(p, count, np.random.default_rng(2024))
        freq = np.bincount(y, minlength=9) / count
        for i in range(9):
            pi = p.priors[i]
            assert abs(freq[i] - pi) <= 3 * math.sqrt(pi * (1 - pi) / count)
        assert abs(freq[8] - 40 / 78) <= 0.01
        flips = X != p.patterns[y]
        assert abs(flips[:, 7].mean() - 0.05) <= 0.01
        for i in range(9):
            rows = flips[y == i]
            for j in range(8):
                q = p.noise[i, j]
                assert abs(rows[:, j].mean() - q) <= 3 * math.sqrt(q * (1 - q) / len(rows))


class TestFileFormat:
    def test_lemonade_round_trip(self):
        p = lemonade()
        text = serialize_problem(p)
        assert text.startswith("nsb-problem v1\ninputs 8\nfaults 9\nfault G1 prior ")
        assert parse_problem(text) == p

    def test_comments_and_blank_lines(self):
        text = """# a two-fault problem
nsb-problem v1

inputs 2   # two instruments
faults 2
fault A prior 0.25
  pattern 1 -1
  noise 0.1 0.2
fault B prior 0.75
  pattern -1 -1
  noise 0.0 0.5
"""
        p = parse_problem(text)
        assert p.names == ("A", "B")
        assert p.priors.tolist() == [0.25, 0.75]
        assert p.noise.tolist() == [[0.1, 0.2], [0.0, 0.5]]

    def test_weight_form_folds_priors(self):
        text = "nsb-problem v1\ninputs 1\nfaults 2\nfault A weight 1 2\n pattern 1\n noise 0.1\nfault B weight 2 1\n pattern -1\n noise 0.1\n"
        assert parse_problem(text).priors.tolist() == [0.5, 0.5]

    def test_mixed_prior_forms_rejected(self):
        text = "nsb-problem v1\ninputs 1\nfaults 2\nfault A weight 1 2\n pattern 1\n noise 0.1\nfault B prior 0.5\n pattern -1\n noise 0.1\n"
        with pytest.raises(ProblemFormatError, match="all as"):
            parse_problem(text)

    def test_pattern_length_mismatch(self):
        text = serialize_problem(lemonade()).replace("pattern 1 1 -1 1 1 1 1 1", "pattern 1 1 -1 1 1 1 1", 1)
        with pytest.raises(ProblemFormatError, match="pattern length mismatch at fault G1") as exc:
            parse_problem(text)
        assert exc.value.lineno == 5

    def test_negative_prior(self):
        text = serialize_problem(lemonade()).replace("fault G2 prior 0.02564102564102564", "fault G2 prior -0.1")
        with pytest.raises(ProblemFormatError, match="prior out of range"):
            parse_problem(text)

    @pytest.mark.parametrize(
        "old,new,message",
        [
            ("nsb-problem v1", "nsb-problem v2", "header"),
            ("faults 9", "faults 10", "declared 10 faults"),
            ("pattern 1 1 -1", "pattern 1 0 -1", "pattern entry out of range"),
            ("noise 0.15", "noise 0.65", "noise out of range"),
            ("noise 0.15", "noise abc", "cannot parse"),
            ("inputs 8", "inputs x", "expected an integer"),
        ],
    )
    def test_malformed(self, old, new, message):
        text = serialize_problem(lemonade()).replace(old, new, 1)
        with pytest.raises(ProblemFormatError, match=message):
            parse_problem(text)

    def test_missing_noise_line(self):
        text = "nsb-problem v1\ninputs 1\nfaults 1\nfault A prior 1\n pattern 1\n"
        with pytest.raises(ProblemFormatError, match="no noise line"):
            parse_problem(text)

    @settings(max_examples=60)
    @given(
        st.integers(1, 6).flatmap(
            lambda n: st.integers(1, 6).flatmap(
                lambda m: st.tuples(
                    st.lists(st.lists(st.sampled_from([-1, 1]), min_size=n, max_size=n), min_size=m, max_size=m),
                    st.lists(st.lists(st.floats(0, 0.5), min_size=n, max_size=n), min_size=m, max_size=m),
                    st.lists(st.floats(1e-3, 1.0), min_size=m, max_size=m),
                )
            )
        )
    )
    def test_round_trip_property(self, parts):
        patterns, noise, weights = parts
        priors = np.array(weights) / np.sum(weights)
        p = NsbProblem(None, priors, patterns, noise)
        assert validate(p) == []
        assert parse_problem(serialize_problem(p)) == p
