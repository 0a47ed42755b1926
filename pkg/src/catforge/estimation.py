"""Maximum-likelihood proficiency estimators.

Both estimators return an :class:`OptimizerReport` from :meth:`optimize`;
:meth:`Estimator.estimate` returns just the new estimate.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import irt
from .irt import log_likelihood


@dataclass(frozen=True)
class OptimizerReport:
    theta_hat: float
    evaluations: int
    converged: bool


def default_bounds(bank) -> tuple[float, float]:
    """Search interval ``[min(b) - 1, max(b) + 1]`` over the bank."""
    b = irt.as_params(bank)[:, 1]
    return float(b.min()) - 1.0, float(b.max()) + 1.0


class Estimator(ABC):
    def __init__(self, bounds: tuple[float, float] | None = None):
        if bounds is not None:
            lo, hi = (float(v) for v in bounds)
            if not lo < hi:
                raise ValueError(f"bounds need lo < hi, got {bounds}")
            bounds = (lo, hi)
        self.bounds = bounds

    def _context(self, bank, administered, responses):
        params = irt.as_params(bank)
        administered = list(administered)
        responses = [bool(r) for r in responses]
        if not administered:
            raise ValueError("estimation needs at least one administered item")
        if len(administered) != len(responses):
            raise ValueError(
                f"{len(administered)} administered items but {len(responses)} responses"
            )
        bounds = self.bounds or default_bounds(params)
        return params, params[administered], responses, bounds

    @abstractmethod
    def optimize(
        self,
        bank,
        administered: Sequence[int],
        responses: Sequence[bool],
        est_theta: float | None = None,
        rng: np.random.Generator | None = None,
    ) -> OptimizerReport:
        ...

    def estimate(self, bank, administered, responses, est_theta=None, rng=None) -> float:
        return self.optimize(bank, administered, responses, est_theta, rng).theta_hat


class HillClimbingEstimator(Estimator):
    """Bounded hill climbing on the log-likelihood.

    Starting at the current estimate (or the middle of the bounds) with a
    step of ``initial_step``, the climber keeps moving while the likelihood
    improves, tries the opposite direction when it does not and halves the
    step when neither side improves. It stops once the step is below
    ``tol``.

    Constant response vectors have no finite maximum; for those the
    estimate moves halfway from the current value toward the largest (all
    correct) or smallest (all wrong) difficulty in the bank, without
    touching the likelihood.
    """

    def __init__(self, bounds=None, initial_step: float = 1.0, tol: float = 1e-5):
        super().__init__(bounds)
        if not initial_step > 0 or not tol > 0:
            raise ValueError("initial_step and tol must be positive")
        self.initial_step = float(initial_step)
        self.tol = float(tol)

    def optimize(self, bank, administered, responses, est_theta=None, rng=None) -> OptimizerReport:
        params, items, responses, (lo, hi) = self._context(bank, administered, responses)
        start = (lo + hi) / 2.0 if est_theta is None else float(est_theta)

        if all(responses):
            b_max = float(params[:, 1].max())
            return OptimizerReport(start + (b_max - start) / 2.0, 0, True)
        if not any(responses):
            b_min = float(params[:, 1].min())
            return OptimizerReport(start - (start - b_min) / 2.0, 0, True)

        x = min(max(start, lo), hi)
        fx = log_likelihood(x, responses, items)
        evals = 1
        step = self.initial_step
        direction = 1.0
        while step >= self.tol:
            moved = False
            for sign in (direction, -direction):
                cand = min(max(x + sign * step, lo), hi)
                if cand == x:
                    continue
                fc = log_likelihood(cand, responses, items)
                evals += 1
                if fc > fx:
                    x, fx, direction, moved = cand, fc, sign, True
                    break
            if not moved:
                step /= 2.0
        return OptimizerReport(x, evals, True)

    def __repr__(self):
        return f"HillClimbingEstimator(bounds={self.bounds})"


class DifferentialEvolutionEstimator(Estimator):
    """Differential evolution (rand/1/bin) over the bounded proficiency interval.

    Mutants falling outside the bounds are clipped back onto them. With a
    single coordinate the binomial crossover always keeps the mutant, so
    ``crossover`` has no effect here. The search converges when either the
    spread of the population or the spread of its log-likelihoods drops
    below ``tol``; it gives up after ``max_generations``.
    """

    def __init__(
        self,
        bounds=None,
        popsize: int = 20,
        mutation: float = 0.8,
        crossover: float = 0.9,
        tol: float = 1e-8,
        max_generations: int = 200,
        seed=None,
    ):
        super().__init__(bounds)
        if popsize < 4:
            raise ValueError("rand/1 mutation needs a population of at least 4")
        self.popsize = int(popsize)
        self.mutation = float(mutation)
        self.crossover = float(crossover)
        self.tol = float(tol)
        self.max_generations = int(max_generations)
        self._rng = np.random.default_rng(seed)

    def optimize(self, bank, administered, responses, est_theta=None, rng=None) -> OptimizerReport:
        _, items, responses, (lo, hi) = self._context(bank, administered, responses)
        rng = self._rng if rng is None else rng
        n = self.popsize

        pop = rng.uniform(lo, hi, n)
        if est_theta is not None:
            pop[0] = min(max(float(est_theta), lo), hi)
        fit = np.array([log_likelihood(x, responses, items) for x in pop])
        evals = n
        converged = False
        for _ in range(self.max_generations):
            if self._collapsed(pop, fit):
                converged = True
                break
            for i in range(n):
                r = rng.choice(n - 1, 3, replace=False)
                r1, r2, r3 = r + (r >= i)
                mutant = pop[r1] + self.mutation * (pop[r2] - pop[r3])
                trial = min(max(mutant, lo), hi)
                f_trial = log_likelihood(trial, responses, items)
                evals += 1
                if f_trial >= fit[i]:
                    pop[i], fit[i] = trial, f_trial
        else:
            converged = self._collapsed(pop, fit)
        best = int(np.argmax(fit))
        return OptimizerReport(float(pop[best]), evals, converged)

    def _collapsed(self, pop, fit) -> bool:
        # the likelihood is flat to float precision long before theta collapses
        return bool(pop.max() - pop.min() < self.tol or fit.max() - fit.min() < self.tol)

    def __repr__(self):
        return f"DifferentialEvolutionEstimator(bounds={self.bounds}, popsize={self.popsize})"
