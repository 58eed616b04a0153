"""Chi-square helpers: they must accept correct samplers and flag wrong ones."""

import numpy as np

from usdsim.gof import chi_square_gof, count_outcomes, two_sample_chi_square
from helpers import make_rng


def test_count_outcomes():
    samples = np.array([[1, 0], [1, 0], [0, 2], [3, 1]])
    assert count_outcomes(samples) == {(1, 0): 2, (0, 2): 1, (3, 1): 1}


class TestGoodnessOfFit:
    def test_accepts_true_law(self):
        rng = make_rng(401)
        probs = {(0, 0): 0.5, (1, 0): 0.3, (0, 1): 0.2}
        m = 60_000
        draws = rng.choice(3, size=m, p=[0.5, 0.3, 0.2])
        observed = {
            (0, 0): int((draws == 0).sum()),
            (1, 0): int((draws == 1).sum()),
            (0, 1): int((draws == 2).sum()),
        }
        result = chi_square_gof(observed, probs, m)
        assert result.df == 2
        assert result.pvalue >= 0.01

    def test_rejects_wrong_law(self):
        rng = make_rng(402)
        m = 60_000
        draws = rng.choice(3, size=m, p=[0.55, 0.25, 0.2])
        observed = {
            (0, 0): int((draws == 0).sum()),
            (1, 0): int((draws == 1).sum()),
            (0, 1): int((draws == 2).sum()),
        }
        result = chi_square_gof(observed, {(0, 0): 0.5, (1, 0): 0.3, (0, 1): 0.2}, m)
        assert result.pvalue < 1e-6

    def test_outcome_outside_support_fails_outright(self):
        result = chi_square_gof({(0, 0): 99, (5, 5): 1}, {(0, 0): 1.0}, 100)
        assert result.pvalue == 0.0

    def test_point_mass_passes(self):
        result = chi_square_gof({(3, 2): 1000}, {(3, 2): 1.0}, 1000)
        assert result.df == 0
        assert result.pvalue == 1.0

    def test_sparse_cells_are_pooled(self):
        # many tiny-probability outcomes collapse into one pooled cell
        probs = {("big", 0): 0.99}
        probs.update({("tiny", i): 0.0001 for i in range(100)})
        observed = {("big", 0): 9899, ("tiny", 3): 101}
        result = chi_square_gof(observed, probs, 10_000)
        assert result.cells == 2
        assert result.df == 1

    def test_zero_probability_key_allowed_when_unobserved(self):
        result = chi_square_gof(
            {(0, 0): 500, (1, 0): 500}, {(0, 0): 0.5, (1, 0): 0.5, (9, 9): 0.0}, 1000
        )
        assert result.pvalue >= 0.01


class TestTwoSample:
    def test_accepts_identical_distribution(self):
        rng = make_rng(403)
        x = np.column_stack([rng.binomial(50, 0.4, 40_000), rng.binomial(30, 0.5, 40_000)])
        y = np.column_stack([rng.binomial(50, 0.4, 40_000), rng.binomial(30, 0.5, 40_000)])
        result = two_sample_chi_square(x, y)
        assert result.pvalue >= 0.01

    def test_rejects_shifted_distribution(self):
        rng = make_rng(404)
        x = np.column_stack([rng.binomial(50, 0.40, 40_000), rng.binomial(30, 0.5, 40_000)])
        y = np.column_stack([rng.binomial(50, 0.45, 40_000), rng.binomial(30, 0.5, 40_000)])
        result = two_sample_chi_square(x, y)
        assert result.pvalue < 1e-6

    def test_identical_point_masses_pass(self):
        x = np.tile([[7, 3]], (1000, 1))
        result = two_sample_chi_square(x, x.copy())
        assert result.pvalue == 1.0

    def test_distinct_point_masses_fail(self):
        x = np.tile([[7, 3]], (1000, 1))
        y = np.tile([[3, 7]], (1000, 1))
        result = two_sample_chi_square(x, y)
        assert result.pvalue < 1e-6
