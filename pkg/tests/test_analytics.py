"""Expectation engine, regime constants and trajectory statistics."""

import math
from decimal import Decimal, getcontext
from fractions import Fraction
from types import SimpleNamespace

import numpy as np
import pytest

from usdsim import (
    Configuration,
    Regime,
    UniformNoise,
    below_threshold_entry,
    classify_regime,
    count_switches,
    expected_next,
    expected_next_regime,
    metastable_entry,
    sample_transitions_aggregated,
    thresholds,
    trajectory_stats,
)
from helpers import make_rng

getcontext().prec = 50


def _config_from_s_q(n: int, s: int, q: int) -> Configuration:
    a = (n - q + s) // 2
    b = (n - q - s) // 2
    assert a - b == s and n - a - b == q
    return Configuration(n, a, b)


def _traj(n: int, biases) -> SimpleNamespace:
    return SimpleNamespace(n=n, s=np.array(biases, dtype=np.int64))


class TestExpectedNext:
    def test_hand_evaluated_values(self):
        e = expected_next(Configuration(100, 60, 40), 0.1)
        assert e.e_a == pytest.approx(37.2, abs=1e-12)
        assert e.e_b == pytest.approx(19.2, abs=1e-12)
        assert e.e_s == pytest.approx(18.0, abs=1e-12)
        assert e.e_q == pytest.approx(43.6, abs=1e-12)

    def test_second_hand_evaluated_value(self):
        # n=100, a=50, b=30: E[Q] = 10 + 0.0035 * (2*400 + 6400 - 400) = 33.8
        e = expected_next(Configuration(100, 50, 30), 0.1)
        assert e.e_q == pytest.approx(33.8, abs=1e-12)

    def test_balanced_bias_is_a_fixed_point_of_zero(self):
        rng = make_rng(301)
        for _ in range(50):
            n = int(rng.integers(2, 1000))
            a = int(rng.integers(0, n // 2 + 1))
            q = n - 2 * a
            e = expected_next(Configuration(n, a, a), float(rng.uniform(0, 0.5)))
            assert e.e_s == 0.0

    def test_p_one_third_drift_is_q_independent(self):
        # at p = 1/3 the q/n term vanishes: E[S] = (2/3) s
        e = expected_next(_config_from_s_q(100, 30, 50), 1 / 3)
        assert e.e_s == pytest.approx(20.0, abs=1e-12)
        e2 = expected_next(_config_from_s_q(100, 30, 10), 1 / 3)
        assert e2.e_s == pytest.approx(20.0, abs=1e-12)

    def test_internal_consistency(self):
        rng = make_rng(302)
        for _ in range(300):
            n = int(rng.integers(1, 10**6))
            a = int(rng.integers(0, n + 1))
            b = int(rng.integers(0, n - a + 1))
            p = float(rng.uniform(0, 0.5))
            e = expected_next(Configuration(n, a, b), p)
            assert e.e_s == pytest.approx(e.e_a - e.e_b, abs=1e-9 * max(1, abs(e.e_s)))
            assert e.e_a + e.e_b + e.e_q == pytest.approx(n, rel=1e-12)

    def test_monte_carlo_agreement_spot(self):
        config = Configuration(10**4, 3000, 2500)
        p = 1 / 12
        m = 5 * 10**4
        samples = sample_transitions_aggregated(config, UniformNoise(p), m, make_rng(303))
        e = expected_next(config, p)
        for expected, values in (
            (e.e_a, samples[:, 0]),
            (e.e_b, samples[:, 1]),
            (e.e_q, config.n - samples[:, 0] - samples[:, 1]),
            (e.e_s, samples[:, 0] - samples[:, 1]),
        ):
            se = values.std(ddof=1) / math.sqrt(m)
            assert abs(values.mean() - expected) <= 4 * se

    def test_input_validation(self):
        with pytest.raises(ValueError):
            expected_next(Configuration(0, 0, 0), 0.1)
        with pytest.raises(ValueError):
            expected_next(Configuration(10, 5, 5), 0.6)


class TestExpectedNextRegime:
    def test_substitution_identity_subcritical(self):
        config = _config_from_s_q(100, 20, 30)
        eps = 1 / 12
        via_regime = expected_next_regime(config, eps, Regime.SUBCRITICAL)
        via_p = expected_next(config, 1 / 6 - eps)
        for x, y in zip(
            (via_regime.e_a, via_regime.e_b, via_regime.e_s, via_regime.e_q),
            (via_p.e_a, via_p.e_b, via_p.e_s, via_p.e_q),
        ):
            assert math.isclose(x, y, rel_tol=1e-12, abs_tol=1e-9)

    def test_zero_bias_supercritical(self):
        e = expected_next_regime(_config_from_s_q(90, 0, 30), 1 / 30, Regime.SUPERCRITICAL)
        assert e.e_s == 0.0

    def test_hand_evaluated_subcritical_drift(self):
        # s (5/6 + eps + (1+6 eps)/2 * q/n) at eps=0.05, n=1000, s=100, q=400
        config = _config_from_s_q(1000, 100, 400)
        e = expected_next_regime(config, 0.05, Regime.SUBCRITICAL)
        assert e.e_s == pytest.approx(100 * (5 / 6 + 0.05 + 0.5 * 1.3 * 0.4), abs=1e-9)
        assert e.e_s == pytest.approx(expected_next(config, 1 / 6 - 0.05).e_s, rel=1e-12)

    def test_identity_over_random_inputs(self):
        rng = make_rng(304)
        for _ in range(200):
            n = int(rng.integers(1, 10**5))
            a = int(rng.integers(0, n + 1))
            b = int(rng.integers(0, n - a + 1))
            config = Configuration(n, a, b)
            if rng.random() < 0.5:
                eps = float(rng.uniform(1e-6, 1 / 6 - 1e-6))
                regime, p = Regime.SUBCRITICAL, 1 / 6 - eps
            else:
                eps = float(rng.uniform(1e-6, 1 / 3))
                regime, p = Regime.SUPERCRITICAL, 1 / 6 + eps
            via_regime = expected_next_regime(config, eps, regime)
            via_p = expected_next(config, p)
            for x, y in zip(
                (via_regime.e_a, via_regime.e_b, via_regime.e_s, via_regime.e_q),
                (via_p.e_a, via_p.e_b, via_p.e_s, via_p.e_q),
            ):
                assert math.isclose(x, y, rel_tol=1e-12, abs_tol=1e-9)

    def test_epsilon_range_validation(self):
        config = Configuration(10, 5, 5)
        with pytest.raises(ValueError):
            expected_next_regime(config, 0.2, Regime.SUBCRITICAL)
        with pytest.raises(ValueError):
            expected_next_regime(config, 0.4, Regime.SUPERCRITICAL)
        with pytest.raises(ValueError):
            expected_next_regime(config, 0.1, Regime.CRITICAL)


class TestThresholds:
    def test_subcritical_constants_against_high_precision_oracle(self):
        # independent evaluation of the same closed forms in 50-digit decimal
        eps = Decimal(1) / Decimal(12)
        ts = thresholds(1 / 12, Regime.SUBCRITICAL)
        oracle = {
            "delta_lo_frac": 2 * eps.sqrt() / (1 + 6 * eps),
            "delta_hi_frac": 1 - 2 * ((1 - 6 * eps) / 12) ** 3,
            "beta_sub_frac": 2 * (3 * eps).sqrt() / (1 + 6 * eps),
            "q_lo_frac": (1 - 4 * eps) / (3 * (1 + 6 * eps)),
            "q_floor_frac": (1 - 6 * eps) / 12,
            "b_floor_frac": ((1 - 6 * eps) / 12) ** 3,
        }
        for name, value in oracle.items():
            assert abs(getattr(ts, name) - float(value)) <= 1e-9, name
        # six-figure reference values
        assert ts.delta_lo_frac == pytest.approx(0.384900, abs=5e-7)
        assert ts.delta_hi_frac == pytest.approx(0.999855, abs=5e-7)
        assert ts.beta_sub_frac == pytest.approx(2 / 3, abs=1e-12)
        assert ts.q_lo_frac == pytest.approx(0.148148, abs=5e-7)

    def test_supercritical_constants_against_high_precision_oracle(self):
        eps = Decimal(1) / Decimal(30)
        ts = thresholds(1 / 30, Regime.SUPERCRITICAL)
        beta = 2 * (2 * eps).sqrt() / ((1 + 6 * eps) * (1 - 6 * eps)).sqrt()
        assert abs(ts.beta_super_frac - float(beta)) <= 1e-9
        assert ts.beta_super_frac == pytest.approx(0.527046, abs=1e-6)
        assert ts.k == 1
        q_cap = (1 + 3 * eps) / (3 * (1 - 6 * eps))
        assert abs(ts.q_cap_super_frac - float(q_cap)) <= 1e-9
        # ladder entries: 1/3 - (2 eps / (1+6 eps)) (3/2)^(2i+3) for i=-1,
        # then 2/9 + eps/3 and 1/12 + eps
        expected_ladder = (
            float(Fraction(1, 3) - Fraction(2, 30) / Fraction(12, 10) * Fraction(3, 2)),
            float(Fraction(2, 9) + Fraction(1, 90)),
            float(Fraction(1, 12) + Fraction(1, 30)),
        )
        assert ts.qbar == pytest.approx(expected_ladder, abs=1e-12)

    def test_small_epsilon_limits(self):
        ts = thresholds(1e-15, Regime.SUBCRITICAL)
        assert ts.delta_lo_frac < 1e-6
        assert ts.delta_hi_frac == pytest.approx(1 - 2 / 1728, abs=1e-9)

    def test_band_ordering_property(self):
        for eps in np.linspace(1e-4, 1 / 6 - 1e-4, 100):
            ts = thresholds(float(eps), Regime.SUBCRITICAL)
            assert ts.delta_lo_frac < ts.delta_hi_frac
            assert 0 <= ts.delta_lo_frac <= 1
            assert 0 <= ts.delta_hi_frac <= 1
            assert 0 <= ts.beta_sub_frac <= 1

    def test_qbar_decreasing_at_operative_epsilons(self):
        # strict decrease holds at the distances the experiments use (p=1/5
        # and p=1/12 equivalents) and throughout the single-interval region
        for eps in [1 / 30, 1 / 12, *np.linspace(0.053, 1 / 12, 20)]:
            ts = thresholds(float(eps), Regime.SUPERCRITICAL)
            ladder = ts.qbar
            assert all(x > y for x, y in zip(ladder, ladder[1:])), eps

    def test_qbar_junction_counterexample_is_known(self):
        # the claimed global monotonicity of the ladder fails when the
        # interval-count ceiling lands unfavourably: at eps=0.0015 the last
        # geometric entry dips below the 2/9 + eps/3 tail entry.  Pinned here
        # so the exact ladder definition is not "fixed" silently.
        ladder = thresholds(0.0015, Regime.SUPERCRITICAL).qbar
        assert any(x <= y for x, y in zip(ladder, ladder[1:]))

    def test_supercritical_field_gating(self):
        mid = thresholds(0.1, Regime.SUPERCRITICAL)  # above the ladder range
        assert mid.beta_super_frac is None and mid.k is None and mid.qbar is None
        assert mid.q_cap_super_frac is not None
        high = thresholds(0.2, Regime.SUPERCRITICAL)  # above the cap range too
        assert high.q_cap_super_frac is None

    def test_range_validation(self):
        with pytest.raises(ValueError):
            thresholds(1 / 6, Regime.SUBCRITICAL)
        with pytest.raises(ValueError):
            thresholds(0.4, Regime.SUPERCRITICAL)
        with pytest.raises(ValueError):
            thresholds(0.01, Regime.CRITICAL)


class TestClassifyRegime:
    def test_reference_points(self):
        assert classify_regime(1 / 12) is Regime.SUBCRITICAL
        assert classify_regime(1 / 6) is Regime.CRITICAL
        assert classify_regime(1 / 5) is Regime.SUPERCRITICAL

    def test_tolerance_window(self):
        assert classify_regime(1 / 6 + 5e-13) is Regime.CRITICAL
        assert classify_regime(1 / 6 - 5e-13) is Regime.CRITICAL
        assert classify_regime(1 / 6 + 1e-10) is Regime.SUPERCRITICAL
        assert classify_regime(1 / 6 - 1e-10) is Regime.SUBCRITICAL

    def test_range_validation(self):
        with pytest.raises(ValueError):
            classify_regime(0.51)
        with pytest.raises(ValueError):
            classify_regime(-0.1)


class TestDriftDirection:
    def test_subcritical_amplification(self):
        # with enough undecided mass the drift gains at least eps/3 per round
        rng = make_rng(305)
        for _ in range(200):
            eps = float(rng.uniform(1e-3, 1 / 6 - 1e-3))
            ts = thresholds(eps, Regime.SUBCRITICAL)
            n = int(rng.integers(10, 10**5))
            q = int(rng.integers(math.ceil(ts.q_lo_frac * n), n + 1))
            s_max = n - q
            s = int(rng.integers(0, s_max + 1))
            if (n - q - s) % 2:
                s -= 1
            if s < 0:
                continue
            e = expected_next_regime(_config_from_s_q(n, s, q), eps, Regime.SUBCRITICAL)
            assert e.e_s >= s * (1 + eps / 3) - 1e-9

    def test_supercritical_contraction(self):
        # under the undecided cap the bias shrinks by at least eps/2 per round
        rng = make_rng(306)
        for _ in range(200):
            eps = float(rng.uniform(1e-3, 1 / 12))
            ts = thresholds(eps, Regime.SUPERCRITICAL)
            n = int(rng.integers(10, 10**5))
            q_hi = min(n, math.floor(ts.q_cap_super_frac * n))
            q = int(rng.integers(0, q_hi + 1))
            s = int(rng.integers(0, n - q + 1))
            if (n - q - s) % 2:
                s -= 1
            if s < 0:
                continue
            e = expected_next_regime(_config_from_s_q(n, s, q), eps, Regime.SUPERCRITICAL)
            assert e.e_s <= s * (1 - eps / 2) + 1e-9

    def test_drift_linear_in_bias(self):
        n, q, p = 1000, 300, 0.12
        rates = []
        for s in (10, 50, 200):
            e = expected_next(_config_from_s_q(n, s, q), p)
            rates.append(e.e_s / s)
        assert rates[0] == pytest.approx(rates[1], rel=1e-12)
        assert rates[1] == pytest.approx(rates[2], rel=1e-12)


class TestEntryDetection:
    def test_metastable_entry_first_crossing(self):
        traj = _traj(100, [0, 10, 50, 60])
        assert metastable_entry(traj, frac=0.385) == 2

    def test_metastable_entry_absent(self):
        traj = _traj(100, [0, 10, 30, 20])
        assert metastable_entry(traj, frac=0.385) is None

    def test_metastable_entry_uses_threshold_set(self):
        ts = thresholds(1 / 12, Regime.SUBCRITICAL)
        traj = _traj(1000, [0, 100, 400, 900])
        assert metastable_entry(traj, ts) == 2  # 400 >= 384.9

    def test_metastable_entry_needs_subcritical_set(self):
        ts = thresholds(1 / 30, Regime.SUPERCRITICAL)
        with pytest.raises(ValueError):
            metastable_entry(_traj(10, [0, 1]), ts)

    def test_negative_bias_counts(self):
        traj = _traj(100, [0, -50, -10])
        assert metastable_entry(traj, frac=0.4) == 1

    def test_below_threshold_entry(self):
        n = 2**14
        level = 10 * math.sqrt(n * math.log(n))
        traj = _traj(n, [n, int(level * 1.5), int(level * 0.9), 0])
        assert below_threshold_entry(traj, 10.0) == 2

    def test_below_threshold_never(self):
        n = 2**14
        traj = _traj(n, [n] * 50)
        assert below_threshold_entry(traj, 10.0) is None

    def test_log_base_parameter(self):
        n = 1024
        s = int(10 * math.sqrt(n * math.log(n))) + 1  # above natural-log level
        traj = _traj(n, [s])
        assert below_threshold_entry(traj, 10.0, log_base=math.e) is None
        assert below_threshold_entry(traj, 10.0, log_base=2) == 0  # log2 level is higher

    def test_coefficient_validation(self):
        with pytest.raises(ValueError):
            below_threshold_entry(_traj(10, [1]), 0.0)


class TestSwitchCounting:
    def test_two_switches(self):
        assert count_switches([5, 3, -2, -1, 4]) == 2

    def test_zero_carries_previous_sign(self):
        assert count_switches([5, 0, -3]) == 1
        assert count_switches([5, 0, 3]) == 0

    def test_leading_zeros_contribute_nothing(self):
        assert count_switches([0, 0, 3, -1]) == 1
        assert count_switches([0, 0, 0]) == 0

    def test_empty_and_single(self):
        assert count_switches([]) == 0
        assert count_switches([7]) == 0

    def test_negation_invariance(self):
        rng = make_rng(307)
        for _ in range(50):
            s = rng.integers(-5, 6, size=100)
            assert count_switches(s) == count_switches(-s)

    def test_accepts_trajectory_objects(self):
        assert count_switches(_traj(10, [1, -1, 1])) == 2


class TestTrajectoryStats:
    def test_all_fields(self):
        traj = _traj(100, [0, 10, 50, -60, 55])
        stats = trajectory_stats(traj, entry_frac=0.45, below_coefficient=1.0)
        assert stats.entry_round_metastable == 2
        assert stats.entry_round_below_threshold == 0
        assert stats.switch_count == 2
        assert stats.min_abs_bias == 0
        assert stats.max_abs_bias == 60

    def test_window_restricts_switches_and_range(self):
        traj = _traj(100, [5, -5, 5, 5, 5])
        stats = trajectory_stats(traj, window=(2, None))
        assert stats.switch_count == 0
        assert stats.min_abs_bias == 5

    def test_entry_disabled_without_fraction(self):
        stats = trajectory_stats(_traj(100, [0, 50]))
        assert stats.entry_round_metastable is None
