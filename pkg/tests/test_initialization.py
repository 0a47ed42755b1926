import numpy as np
import pytest

from catforge.initialization import FixedInitializer, RandomInitializer


class TestFixed:
    def test_returns_value(self):
        assert FixedInitializer(0.0).initialize() == 0.0
        assert FixedInitializer(-1.25).initialize(np.random.default_rng(3)) == -1.25

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            FixedInitializer(float("nan"))


class TestRandom:
    def test_uniform_range(self):
        init = RandomInitializer("uniform", (-2, 2), seed=1)
        draws = np.array([init.initialize() for _ in range(5000)])
        assert draws.min() >= -2 and draws.max() < 2
        assert abs(draws.mean()) < 0.1

    def test_default_uniform_bounds(self):
        init = RandomInitializer(seed=4)
        draws = np.array([init.initialize() for _ in range(2000)])
        assert init.params == (-4.0, 4.0)
        assert -4 <= draws.min() and draws.max() < 4

    def test_normal_moments(self):
        init = RandomInitializer("normal", (1.0, 0.5), seed=2)
        draws = np.array([init.initialize() for _ in range(20_000)])
        assert abs(draws.mean() - 1.0) < 0.02
        assert abs(draws.std() - 0.5) < 0.02

    def test_seeded_determinism(self):
        a = RandomInitializer("normal", seed=9)
        b = RandomInitializer("normal", seed=9)
        assert [a.initialize() for _ in range(5)] == [b.initialize() for _ in range(5)]

    def test_explicit_generator_wins(self):
        init = RandomInitializer("uniform", seed=0)
        x = init.initialize(np.random.default_rng(123))
        y = init.initialize(np.random.default_rng(123))
        assert x == y

    @pytest.mark.parametrize(
        "dist, params", [("uniform", (1, 1)), ("uniform", (2, -2)), ("normal", (0, 0)), ("cauchy", None)]
    )
    def test_invalid(self, dist, params):
        with pytest.raises(ValueError):
            RandomInitializer(dist, params)
