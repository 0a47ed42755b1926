"""Stopping rules, checked after every response."""

from __future__ import annotations

import math
from abc import ABC, abstractmethod

from . import irt


class Stopper(ABC):
    @abstractmethod
    def stop(self, administered_items, theta: float) -> bool:
        """Return True when the test should end.

        ``administered_items`` holds the parameters of the items shown so far
        (an ``(n, 4)`` array, a list of items or an empty list).
        """


class MaxItemStopper(Stopper):
    """Ends the test after a fixed number of items."""

    def __init__(self, max_items: int):
        if int(max_items) != max_items or max_items < 1:
            raise ValueError(f"max_items must be a positive integer, got {max_items}")
        self.max_items = int(max_items)

    def stop(self, administered_items, theta: float) -> bool:
        return len(administered_items) >= self.max_items

    def __repr__(self):
        return f"MaxItemStopper({self.max_items})"


class MinErrorStopper(Stopper):
    """Ends the test once the standard error of estimation drops below a threshold.

    ``min_items`` keeps the rule from ending a test before that many items
    were answered.
    """

    def __init__(self, threshold: float, min_items: int = 1):
        if not (math.isfinite(threshold) and threshold > 0):
            raise ValueError(f"threshold must be positive, got {threshold}")
        if int(min_items) != min_items or min_items < 0:
            raise ValueError(f"min_items must be a nonnegative integer, got {min_items}")
        self.threshold = float(threshold)
        self.min_items = int(min_items)

    def stop(self, administered_items, theta: float) -> bool:
        n = len(administered_items)
        if n == 0 or n < self.min_items:
            return False
        return irt.see(theta, administered_items) < self.threshold

    def __repr__(self):
        return f"MinErrorStopper({self.threshold}, min_items={self.min_items})"
