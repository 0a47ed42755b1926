"""Initial proficiency estimates, chosen before the first item is shown."""

from __future__ import annotations

import math
from abc import ABC, abstractmethod

import numpy as np


class Initializer(ABC):
    """Produces the starting estimate for one examinee."""

    @abstractmethod
    def initialize(self, rng: np.random.Generator | None = None) -> float:
        ...


class FixedInitializer(Initializer):
    """Starts every examinee at the same value."""

    def __init__(self, value: float = 0.0):
        if not math.isfinite(value):
            raise ValueError(f"initial value must be finite, got {value}")
        self.value = float(value)

    def initialize(self, rng=None) -> float:
        return self.value

    def __repr__(self):
        return f"FixedInitializer({self.value})"


class RandomInitializer(Initializer):
    """Draws the starting estimate from a uniform or normal distribution.

    Args:
        dist: ``"uniform"`` or ``"normal"``.
        params: ``(low, high)`` for the uniform, ``(mean, sd)`` for the
            normal. Defaults to ``(-4, 4)`` and ``(0, 1)``.
        seed: seed of the generator used when :meth:`initialize` is called
            without one.
    """

    def __init__(self, dist: str = "uniform", params: tuple[float, float] | None = None, seed=None):
        if dist == "uniform":
            params = (-4.0, 4.0) if params is None else tuple(params)
            if not params[0] < params[1]:
                raise ValueError(f"uniform bounds need low < high, got {params}")
        elif dist == "normal":
            params = (0.0, 1.0) if params is None else tuple(params)
            if not params[1] > 0:
                raise ValueError(f"normal sd must be positive, got {params[1]}")
        else:
            raise ValueError(f"unknown distribution {dist!r}, expected 'uniform' or 'normal'")
        if not all(math.isfinite(p) for p in params):
            raise ValueError(f"distribution parameters must be finite, got {params}")
        self.dist = dist
        self.params = (float(params[0]), float(params[1]))
        self._rng = np.random.default_rng(seed)

    def initialize(self, rng: np.random.Generator | None = None) -> float:
        rng = self._rng if rng is None else rng
        if self.dist == "uniform":
            return float(rng.uniform(*self.params))
        return float(rng.normal(*self.params))

    def __repr__(self):
        return f"RandomInitializer({self.dist!r}, {self.params})"
