import logging
import math

import numpy as np
import pandas as pd
import pytest

from group_testing import rates
from group_testing.decoders import Algorithm, sole_defective_indicator
from group_testing.design import DefectiveSet, OutcomeVector, generate_design
from group_testing.errors import ConfigValidationError, DomainError, NoCrossingError
from group_testing.experiments import (
    CURVE_COLUMNS,
    ExperimentConfig,
    crossing,
    default_theta_grid,
    estimate_success,
    estimate_threshold,
    exact_comp_curve,
    exact_comp_success,
    exact_sole_defective_success,
    figure1_data,
    outcome_information,
    run_trial,
    run_trials,
    sweep_tests,
    union_bound_floor,
    wilson_interval,
)
from group_testing.oracle import EnumerationCaps


def _standard_error(p, trials):
    return max(math.sqrt(p * (1 - p) / trials), 1.0 / trials)


class TestExperimentConfig:
    def test_collects_all_problems(self):
        with pytest.raises(ConfigValidationError) as info:
            ExperimentConfig.from_dict({"n": 0, "k": 5, "trials": 0, "p": 2.0})
        assert len(info.value.errors) >= 3

    def test_sss_rejected_at_scale(self):
        with pytest.raises(ConfigValidationError) as info:
            ExperimentConfig(n=100_000, k=10, decoders=("SSS",))
        assert any("SSS" in e for e in info.value.errors)

    def test_unknown_key(self):
        with pytest.raises(ConfigValidationError) as info:
            ExperimentConfig.from_dict({"n": 10, "k": 2, "colour": "blue"})
        assert info.value.errors == ["Chave desconhecida na configuração: 'colour'."]

    def test_bad_types_are_reported(self):
        with pytest.raises(ConfigValidationError) as info:
            ExperimentConfig.from_dict({"n": "muitos", "k": 2})
        assert any("'n'" in e for e in info.value.errors)

    def test_aliases(self):
        config = ExperimentConfig.from_dict({"n": 100, "k": 5, "seed": 7, "tests": [10, 20]})
        assert config.master_seed == 7
        assert config.t_grid == (10, 20)

    def test_defaults_to_nu_one(self):
        config = ExperimentConfig(n=100, k=10)
        assert config.design_p == pytest.approx(1 - math.exp(-0.1))
        assert config.effective_nu == 1.0
        assert config.decoders == (Algorithm.COMP,)

    def test_p_and_nu_are_exclusive(self):
        with pytest.raises(ConfigValidationError):
            ExperimentConfig(n=100, k=10, p=0.1, nu=1.0)

    def test_k_zero_requires_p(self):
        with pytest.raises(ConfigValidationError):
            ExperimentConfig(n=10, k=0, t_grid=(5,))

    def test_grid_must_increase(self):
        with pytest.raises(ConfigValidationError):
            ExperimentConfig(n=10, k=2, t_grid=(5, 5))

    def test_resolved_grid(self):
        config = ExperimentConfig(n=500, k=10)
        reference = rates.t_comp(500, 10).value
        grid = config.resolved_grid()
        assert len(grid) == 10
        assert grid[0] == round(0.5 * reference)
        assert grid[-1] == round(1.5 * reference)
        assert list(grid) == sorted(set(grid))

    def test_single_point_grid_is_the_reference(self):
        config = ExperimentConfig(n=500, k=10, grid_points=1)
        assert config.resolved_grid() == (round(rates.t_comp(500, 10).value),)

    def test_explicit_grid_wins(self):
        config = ExperimentConfig(n=500, k=10, t_grid=(3, 7))
        assert config.resolved_grid() == (3, 7)

    def test_to_dict_is_complete(self):
        data = ExperimentConfig(n=500, k=10, master_seed=3).to_dict()
        assert data["master_seed"] == 3
        assert data["decoders"] == ["COMP"]
        assert len(data["t_grid"]) == 10
        assert "threads" not in data


class TestRunTrial:
    def test_deterministic(self):
        config = ExperimentConfig(n=50, k=3, decoders=("COMP", "DD"), t_grid=(20,), master_seed=9)
        assert run_trial(config, 20, 4) == run_trial(config, 20, 4)
        assert run_trial(config, 20, 4).trial_seed != run_trial(config, 20, 5).trial_seed

    def test_no_tests_means_failure(self):
        config = ExperimentConfig(
            n=20, k=3, decoders=("COMP", "DD", "SCOMP", "SSS"), t_grid=(0,)
        )
        record = run_trial(config, 0, 0)
        assert not any(o.success for o in record.outcomes)
        assert record.comp_size == 20
        assert record.size_of(Algorithm.SSS) == 0

    def test_empty_defective_set(self):
        config = ExperimentConfig(n=10, k=0, p=1.0, t_grid=(3,))
        record = run_trial(config, 3, 0)
        assert record.outcome(Algorithm.COMP).success
        assert record.negatives == 3
        assert record.outcome_information == 0.0

    def test_sss_outcome_fields(self):
        config = ExperimentConfig(n=12, k=2, decoders=("SSS",), t_grid=(10,), master_seed=1)
        record = run_trial(config, 10, 0)
        outcome = record.outcome(Algorithm.SSS)
        assert outcome.size is not None and outcome.size <= 2
        assert outcome.success <= outcome.lenient_success
        assert record.outcome(Algorithm.COMP) is None

    def test_truncated_sss(self):
        config = ExperimentConfig(
            n=30, k=4, decoders=("SSS",), t_grid=(15,), sss_budget=1, trials=20
        )
        point = estimate_success(config, 15)
        estimate = point.estimate("SSS")
        assert estimate.truncated + estimate.trials == 20

    def test_oracle_diagnostics(self):
        config = ExperimentConfig(n=12, k=2, t_grid=(8,), oracle_diagnostics=True)
        assert run_trial(config, 8, 0).satisfying_d >= 1

    def test_oracle_diagnostics_respect_configured_caps(self):
        tight = EnumerationCaps(max_n_unrestricted=4, max_n_fixed_k=8)
        config = ExperimentConfig(
            n=12, k=2, t_grid=(8,), oracle_diagnostics=True, oracle_caps=tight
        )
        assert run_trial(config, 8, 0).satisfying_d is None
        assert config.to_dict()["oracle_caps"]["max_n_fixed_k"] == 8

    def test_oracle_diagnostics_with_fixed_k_above_unrestricted_cap(self):
        config = ExperimentConfig(n=20, k=2, t_grid=(10,), oracle_diagnostics=True)
        assert run_trial(config, 10, 0).satisfying_d >= 1

    def test_oracle_caps_from_dict(self):
        config = ExperimentConfig.from_dict(
            {"n": 12, "k": 2, "oracle_caps": {"max_n_unrestricted": 4}}
        )
        assert config.oracle_caps == EnumerationCaps(max_n_unrestricted=4)
        assert "oracle_caps" not in config.to_dict()
        with pytest.raises(ConfigValidationError):
            ExperimentConfig.from_dict({"n": 12, "k": 2, "oracle_caps": 5})


class TestWilson:
    def test_zero_successes(self):
        low, high = wilson_interval(0, 100)
        assert low == 0.0
        assert high < 0.037

    def test_symmetric_at_half(self):
        low, high = wilson_interval(50, 100)
        assert 0.5 - low == pytest.approx(high - 0.5)

    def test_no_trials(self):
        assert wilson_interval(0, 0) == (0.0, 1.0)

    def test_contains_estimate(self):
        for successes in (0, 1, 37, 99, 100):
            low, high = wilson_interval(successes, 100, 0.99)
            assert low <= successes / 100 <= high

    def test_invalid_counts(self):
        with pytest.raises(DomainError):
            wilson_interval(5, 3)


class TestExactFormulas:
    def test_comp_edge_cases(self):
        assert exact_comp_success(100, 5, 0, 0.1) == 0.0
        assert exact_comp_success(5, 5, 0, 0.1) == 1.0
        with pytest.raises(DomainError):
            exact_comp_success(100, 5, 10, 0.0)

    @pytest.mark.parametrize("n,k,T,p", [(20, 2, 15, 0.2), (50, 5, 40, 0.1), (8, 1, 6, 0.5)])
    def test_comp_matches_direct_sum(self, n, k, T, p):
        q = 1 - p
        a = q**k
        direct = sum(
            math.comb(T, m) * a**m * (1 - a) ** (T - m) * (1 - q**m) ** (n - k)
            for m in range(T + 1)
        )
        assert exact_comp_success(n, k, T, p) == pytest.approx(direct, rel=1e-10, abs=1e-14)

    def test_comp_is_increasing_in_T(self):
        curve = exact_comp_curve(500, 10, 1 - math.exp(-0.1), range(0, 400, 20))
        assert np.all(np.diff(curve) >= -1e-12)
        assert curve[-1] > 0.9

    def test_comp_at_scaled_thresholds(self):
        n, k = 10_000, 100
        p = 1 - math.exp(-1 / k)
        reference = rates.t_comp(n, k).value
        assert exact_comp_success(n, k, round(0.7 * reference), p) < 0.05
        assert exact_comp_success(n, k, round(1.3 * reference), p) >= 0.85

    def test_sole_defective_single_item(self):
        """Com k = 1 basta o item aparecer em algum teste."""
        assert exact_sole_defective_success(1, 10, 0.2) == pytest.approx(1 - 0.8**10)

    def test_sole_defective_needs_k_tests(self, caplog):
        with caplog.at_level(logging.WARNING):
            value = exact_sole_defective_success(30, 5, 0.05)
        assert value == pytest.approx(0.0, abs=1e-12)
        assert "precisão estendida" in caplog.text

    def test_sole_defective_matches_enumeration(self):
        """k = 2, T = 2: os dois testes precisam separar os dois itens."""
        p = 0.3
        r = p * (1 - p)
        expected = 1 - 2 * (1 - r) ** 2 + (1 - 2 * r) ** 2
        assert exact_sole_defective_success(2, 2, p) == pytest.approx(expected)

    def test_sole_defective_large_k(self):
        """Com k grande cada defeituoso fica isolado com chance ~ 1 − (1 − r)^T, quase independente."""
        k, T, p = 1100, 20_000, 1 / 1100
        r = p * (1 - p) ** (k - 1)
        value = exact_sole_defective_success(k, T, p)
        assert value == pytest.approx(math.exp(-k * (1 - r) ** T), abs=0.02)
        assert 0.0 <= union_bound_floor(100_000, k, T, p) <= 1.0

    def test_sole_defective_large_k_fewer_tests_than_items(self, caplog):
        """Cada teste isola no máximo um defeituoso, então T < k dá probabilidade zero."""
        with caplog.at_level(logging.WARNING):
            value = exact_sole_defective_success(1100, 1000, 1 / 1100)
        assert value == pytest.approx(0.0, abs=1e-12)
        assert "precisão estendida" in caplog.text

    def test_union_bound_floor_range(self):
        for T in (0, 10, 50, 200):
            value = union_bound_floor(100, 5, T, 0.1)
            assert 0.0 <= value <= 1.0
        assert union_bound_floor(100, 5, 0, 0.1) == 1.0


class TestOutcomeInformation:
    def test_one_bit_per_test(self):
        p = 1 - 2 ** (-1 / 4)
        y = OutcomeVector([True, False, True, False])
        assert outcome_information(y, p, 4) == pytest.approx(1.0)

    def test_empty(self):
        assert outcome_information(OutcomeVector(np.zeros(0, dtype=bool)), 0.1, 3) == 0.0


class TestMonteCarlo:
    def test_comp_matches_exact_formula(self):
        n, k, trials = 200, 5, 400
        config = ExperimentConfig(n=n, k=k, t_grid=(40, 80), trials=trials, master_seed=21)
        curve = sweep_tests(config)
        for point in curve.points:
            exact = exact_comp_success(n, k, point.T, config.design_p)
            observed = point.estimate(Algorithm.COMP).success
            assert abs(observed - exact) <= 4 * _standard_error(exact, trials)

    def test_sole_defective_matches_exact_formula(self):
        k, T, p, draws = 4, 20, 0.2, 2000
        K = DefectiveSet(tuple(range(k)), k)
        hits = sum(
            sole_defective_indicator(generate_design(k, T, p, seed), K) for seed in range(draws)
        )
        exact = exact_sole_defective_success(k, T, p)
        assert abs(hits / draws - exact) <= 4 * _standard_error(exact, draws)

    def test_pointwise_relations(self):
        config = ExperimentConfig(
            n=20,
            k=3,
            decoders=("COMP", "DD", "SSS"),
            t_grid=(6, 12, 24),
            trials=100,
            record_trials=True,
            master_seed=5,
        )
        for point in sweep_tests(config).points:
            for record in point.records:
                sss = record.outcome(Algorithm.SSS)
                if sss.lenient_success:
                    assert record.sole_defective
                if not record.sole_defective:
                    assert sss.size <= config.k - 1
                sss_lt = sss.size < config.k
                comp_gt = record.comp_size > config.k
                assert (sss_lt and comp_gt) or sss.size == config.k or record.comp_size == config.k

    def test_threshold_near_exact_crossing(self):
        n, k = 500, 10
        config = ExperimentConfig(n=n, k=k, trials=400, master_seed=8)
        curve = sweep_tests(config)
        grid = curve.T_values
        exact = crossing(grid, exact_comp_curve(n, k, config.design_p, grid), 0.5)
        estimate = estimate_threshold(curve, level=0.5)
        step = float(np.max(np.diff(grid)))
        assert abs(estimate.T - exact.T) <= step

    def test_reproducible_frames(self):
        config = ExperimentConfig(n=100, k=4, decoders=("COMP", "DD"), t_grid=(30, 60), trials=50)
        pd.testing.assert_frame_equal(
            sweep_tests(config).to_frame(), sweep_tests(config).to_frame()
        )

    def test_parallel_matches_serial(self):
        serial = ExperimentConfig(n=100, k=4, t_grid=(40,), trials=40, master_seed=3)
        parallel = ExperimentConfig(n=100, k=4, t_grid=(40,), trials=40, master_seed=3, threads=2)
        assert run_trials(serial, 40) == run_trials(parallel, 40)

    def test_frame_layout(self):
        config = ExperimentConfig(n=30, k=2, decoders=("COMP", "SSS"), t_grid=(10, 20), trials=10)
        frame = sweep_tests(config).to_frame()
        assert list(frame.columns) == CURVE_COLUMNS
        assert frame["decoder"].tolist() == ["COMP", "COMP", "SSS", "SSS"]
        assert frame.loc[frame["decoder"] == "COMP", "sss_size_lt_k"].isna().all()

    def test_curve_dict(self):
        config = ExperimentConfig(n=30, k=2, t_grid=(10,), trials=5, record_trials=True)
        data = sweep_tests(config).to_dict()
        assert data["schema_version"] == 1
        assert len(data["points"][0]["records"]) == 5


class TestThreshold:
    def test_linear_interpolation(self):
        estimate = crossing([10, 20, 30], [0.0, 0.4, 0.8], 0.5)
        assert estimate.T == pytest.approx(22.5)
        assert (estimate.lower, estimate.upper) == (20, 30)

    def test_sharp_step(self):
        assert crossing([10, 20, 30], [0.0, 0.5, 1.0], 0.5).T == 20.0

    def test_never_reaches_level(self):
        with pytest.raises(NoCrossingError):
            crossing([10, 20], [0.1, 0.2], 0.5)

    def test_starts_above_level(self):
        with pytest.raises(NoCrossingError):
            crossing([10, 20], [0.6, 0.9], 0.5)

    def test_estimate_threshold_on_curve(self):
        config = ExperimentConfig(n=100, k=2, t_grid=(0, 200), trials=20)
        estimate = estimate_threshold(sweep_tests(config), level=0.5)
        assert 0 <= estimate.T <= 200


class TestFigure1:
    def test_shape_and_ordering(self):
        table = figure1_data(default_theta_grid())
        assert table.shape == (99, 5)
        assert list(table.columns) == ["theta", "counting_bound", "capacity", "dd_rate", "comp_max_rate"]
        assert (table["comp_max_rate"] <= table["dd_rate"] + 1e-12).all()
        assert (table["dd_rate"] <= table["capacity"] + 1e-12).all()
        assert (table["capacity"] <= 1.0 + 1e-12).all()

    def test_anchors(self):
        table = figure1_data(default_theta_grid()).set_index("theta")
        assert round(table.loc[0.5, "capacity"], 3) == 0.531
        high = table[table.index >= 0.5]
        assert np.allclose(high["dd_rate"], high["capacity"], atol=1e-12)
        low = table[table.index <= 1 / 3]
        assert np.allclose(low["capacity"], 1.0, atol=1e-9)

    def test_rejects_theta_outside_interval(self):
        with pytest.raises(DomainError):
            figure1_data([0.0])


@pytest.mark.slow
class TestAcceptance:
    def test_comp_curve_matches_exact_formula(self):
        n, k, trials = 500, 10, 10_000
        config = ExperimentConfig(n=n, k=k, trials=trials, master_seed=0)
        for point in sweep_tests(config).points:
            exact = exact_comp_success(n, k, point.T, config.design_p)
            observed = point.estimate(Algorithm.COMP).success
            assert abs(observed - exact) <= 3 * _standard_error(exact, trials)

    def test_comp_threshold_location(self):
        n, k = 10_000, 100
        reference = rates.t_comp(n, k).value
        grid = tuple(round(m * reference) for m in (0.7, 0.85, 1.0, 1.15, 1.3))
        config = ExperimentConfig(n=n, k=k, t_grid=grid, trials=2000, threads=4)
        curve = sweep_tests(config)
        estimate = estimate_threshold(curve, level=0.5)
        assert abs(estimate.T - reference) <= 0.15 * reference
        assert curve.success_values()[0] <= 0.475

    @pytest.mark.parametrize("T", [50, 100, 200, 400])
    def test_sole_defective_frequency(self, T):
        k, p, draws = 10, 0.1, 100_000
        K = DefectiveSet(tuple(range(k)), k)
        hits = sum(
            sole_defective_indicator(generate_design(k, T, p, seed), K) for seed in range(draws)
        )
        exact = exact_sole_defective_success(k, T, p)
        assert abs(hits / draws - exact) <= 3 * _standard_error(exact, draws)
