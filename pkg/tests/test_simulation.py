import math

import numpy as np
import pytest

from catforge import irt
from catforge.bank import generate_item_bank
from catforge.estimation import HillClimbingEstimator
from catforge.initialization import FixedInitializer, RandomInitializer
from catforge.selection import LinearSelector, MaxInfoSelector, RandomSelector, RandomesqueSelector
from catforge.simulation import (
    ExamineeState,
    Simulator,
    generate_examinees,
    simulate_response,
    validity_measures,
)
from catforge.stopping import MaxItemStopper, MinErrorStopper


def fixed_length_states(tests):
    return [ExamineeState(true_theta=0.0, estimates=[0.0] * (len(t) + 1), administered=list(t)) for t in tests]


class TestGenerateExaminees:
    def test_constant_difficulty(self):
        bank = np.tile([1.0, 0.5, 0.0, 1.0], (10, 1))
        assert np.all(generate_examinees(20, bank, seed=1) == 0.5)

    def test_standard_normal_without_bank(self):
        draws = generate_examinees(100_000, seed=2)
        assert -0.02 <= draws.mean() <= 0.02
        assert abs(draws.std() - 1) < 0.02

    def test_follows_bank_difficulties(self, bank100):
        draws = generate_examinees(50_000, bank100, seed=3)
        assert abs(draws.mean() - bank100.b.mean()) < 0.02
        assert abs(draws.std() - bank100.b.std()) < 0.02

    def test_seeded(self):
        assert np.array_equal(generate_examinees(5, seed=4), generate_examinees(5, seed=4))

    @pytest.mark.parametrize("count", [0, -1, 1.5])
    def test_invalid_count(self, count):
        with pytest.raises(ValueError):
            generate_examinees(count)


class TestSimulateResponse:
    def test_certain_success(self):
        rng = np.random.default_rng(0)
        assert all(simulate_response(-5.0, (1, 0, 0.999999, 1), rng) for _ in range(1000))

    def test_half_at_difficulty(self):
        rng = np.random.default_rng(1)
        freq = np.mean([simulate_response(0.3, (1.4, 0.3, 0, 1), rng) for _ in range(10_000)])
        assert 0.48 <= freq <= 0.52

    def test_reproducible(self):
        rng1, rng2 = np.random.default_rng(5), np.random.default_rng(5)
        assert [simulate_response(0.0, (1, 0, 0, 1), rng1) for _ in range(50)] == [
            simulate_response(0.0, (1, 0, 0, 1), rng2) for _ in range(50)
        ]


class TestValidity:
    def test_perfect_estimates(self):
        states = [ExamineeState(true_theta=t, estimates=[0.0, t], administered=[0]) for t in (-1.0, 0.5, 2.0)]
        v = validity_measures(states, 10)
        assert v.bias == v.mse == v.rmse == 0.0

    def test_error_measures(self):
        states = [
            ExamineeState(true_theta=0.0, estimates=[0.0, 1.0], administered=[0]),
            ExamineeState(true_theta=0.0, estimates=[0.0, -3.0], administered=[1]),
        ]
        v = validity_measures(states, 2)
        assert v.bias == -1.0
        assert v.mse == 5.0
        assert v.rmse == math.sqrt(5.0)

    def test_identical_tests_overlap_fully(self):
        v = validity_measures(fixed_length_states([range(20)] * 7), 100)
        assert abs(v.overlap - 1.0) <= 1e-12

    def test_uniform_exposure_gives_lower_bound(self):
        # every item seen by exactly half of the examinees
        v = validity_measures(fixed_length_states([range(0, 5), range(5, 10)]), 10)
        assert v.overlap == pytest.approx(0.5, abs=1e-15)

    def test_no_examinees(self):
        with pytest.raises(ValueError):
            validity_measures([], 10)

    def test_rmse_bounds_bias(self, rng):
        states = [
            ExamineeState(true_theta=float(t), estimates=[0.0, float(t + e)], administered=[0])
            for t, e in zip(rng.normal(size=50), rng.normal(0.3, 0.5, 50))
        ]
        v = validity_measures(states, 5)
        assert v.rmse**2 == pytest.approx(v.mse, rel=1e-15)
        assert abs(v.bias) <= v.rmse


def run(bank, examinees, selector=None, stopper=None, seed=0, workers=1, initializer=None):
    sim = Simulator(bank, examinees, seed=seed)
    return sim.simulate(
        initializer or FixedInitializer(0.0),
        selector or MaxInfoSelector(),
        HillClimbingEstimator(),
        stopper or MaxItemStopper(20),
        workers=workers,
    )


class TestSimulator:
    def test_fixed_length(self, bank100):
        result = run(bank100, 10)
        assert [s.test_length for s in result.states] == [20] * 10
        assert not any(s.exhausted for s in result.states)

    def test_trajectory_shapes(self, bank100):
        for s in run(bank100, 5).states:
            n = len(s.administered)
            assert len(s.responses) == len(s.estimates) - 1 == len(s.see_trace) == len(s.var_trace) == len(s.info_trace) == n
            assert len(set(s.administered)) == n

    def test_traces_recorded_at_new_estimate(self, bank100):
        s = run(bank100, 1).states[0]
        for t in range(s.test_length):
            given = bank100.params[s.administered[: t + 1]]
            assert s.info_trace[t] == pytest.approx(irt.test_info(s.estimates[t + 1], given), rel=1e-12)
            assert s.var_trace[t] == pytest.approx(s.see_trace[t] ** 2, rel=1e-12)

    def test_information_grows_at_fixed_theta(self, bank100):
        s = run(bank100, 1).states[0]
        theta = s.final_estimate
        info = [irt.test_info(theta, bank100.params[s.administered[: t + 1]]) for t in range(s.test_length)]
        assert all(b >= a for a, b in zip(info, info[1:]))

    def test_min_error_gives_variable_lengths(self, bank100):
        result = run(bank100, 20, stopper=MinErrorStopper(0.4))
        lengths = {s.test_length for s in result.states}
        assert len(lengths) > 1

    def test_linear_tests_are_identical(self, bank100):
        indexes = list(range(0, 100, 2))
        result = run(bank100, 8, selector=LinearSelector(indexes), stopper=MaxItemStopper(50))
        assert all(s.administered == indexes for s in result.states)
        assert result.validity.overlap == pytest.approx(1.0, abs=1e-12)

    def test_exhaustion_is_flagged(self):
        bank = generate_item_bank(5, seed=1)
        result = run(bank, 3, stopper=MaxItemStopper(10))
        assert all(s.exhausted and s.test_length == 5 for s in result.states)
        assert math.isfinite(result.validity.rmse)

    def test_exposure_matches_states(self, bank100):
        result = run(bank100, 12, selector=RandomesqueSelector(5))
        counts = np.zeros(100, int)
        for s in result.states:
            counts[s.administered] += 1
        assert result.bank.exposure_counts.tolist() == counts.tolist()
        assert result.bank.n_tests == 12
        assert bank100.n_tests == 0

    def test_explicit_examinees(self, bank100):
        result = run(bank100, [-1.0, 0.0, 1.5], stopper=MaxItemStopper(5))
        assert result.examinees == [-1.0, 0.0, 1.5]
        assert [len(e) for e in result.estimations] == [6, 6, 6]
        assert len(result.administered_items) == 3

    def test_deterministic(self, bank100):
        kwargs = dict(selector=RandomesqueSelector(4), stopper=MinErrorStopper(0.35), seed=17)
        a = run(bank100, 15, initializer=RandomInitializer(), **kwargs)
        b = run(bank100, 15, initializer=RandomInitializer(), **kwargs)
        assert a.states == b.states
        assert a.validity == b.validity
        c = run(bank100, 15, initializer=RandomInitializer(), **{**kwargs, "seed": 18})
        assert c.states != a.states

    def test_parallel_equals_sequential(self, bank100):
        kwargs = dict(selector=RandomSelector(), stopper=MaxItemStopper(10), seed=3)
        seq = run(bank100, 16, **kwargs)
        par = run(bank100, 16, workers=4, **kwargs)
        assert seq.states == par.states
        assert seq.bank == par.bank

    def test_random_selection_overlap(self):
        bank = generate_item_bank(200, "3PL", seed=5)
        result = run(bank, 500, selector=RandomSelector(), stopper=MaxItemStopper(20))
        assert 0.1 <= result.validity.overlap <= 0.13

    def test_invalid_inputs(self, bank100):
        with pytest.raises(ValueError):
            Simulator(bank100, [])
        with pytest.raises(ValueError):
            Simulator(bank100, [0.0, math.nan])
        with pytest.raises(ValueError):
            Simulator(np.empty((0, 4)), 3)
