"""Simulation of computerized adaptive tests over a population of examinees.

Each examinee runs the loop: initialize the estimate, then repeatedly
select an item, draw a response from the item characteristic curve,
re-estimate and check the stopping rule. The run is deterministic for a
given master seed. Examinee ``j`` draws all of its randomness from
``numpy.random.SeedSequence(seed, spawn_key=(1, j))``; generated
proficiencies come from ``spawn_key=(0,)``. Results therefore do not depend
on the order (or parallelism) in which examinees are simulated.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import irt
from .bank import ItemBank, update_exposure
from .estimation import Estimator
from .initialization import Initializer
from .selection import BankExhaustedError, Selector
from .stopping import Stopper


@dataclass
class ExamineeState:
    """Trajectory of one examinee's test.

    ``estimates`` starts with the initial estimate, so it is one longer than
    ``administered``. The three traces are evaluated after each response at
    the newly estimated proficiency.
    """

    true_theta: float
    estimates: list[float] = field(default_factory=list)
    administered: list[int] = field(default_factory=list)
    responses: list[bool] = field(default_factory=list)
    see_trace: list[float] = field(default_factory=list)
    var_trace: list[float] = field(default_factory=list)
    info_trace: list[float] = field(default_factory=list)
    exhausted: bool = False

    @property
    def final_estimate(self) -> float:
        return self.estimates[-1]

    @property
    def test_length(self) -> int:
        return len(self.administered)


@dataclass(frozen=True)
class Validity:
    bias: float
    mse: float
    rmse: float
    overlap: float


@dataclass
class SimulationResult:
    states: list[ExamineeState]
    bank: ItemBank
    validity: Validity

    @property
    def examinees(self) -> list[float]:
        return [s.true_theta for s in self.states]

    @property
    def estimations(self) -> list[list[float]]:
        return [s.estimates for s in self.states]

    @property
    def administered_items(self) -> list[list[int]]:
        return [s.administered for s in self.states]


def _seed_sequence(seed, *key) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=key)


def generate_examinees(count: int, bank=None, seed=None) -> np.ndarray:
    """Draw ``count`` proficiencies from the normal distribution of the bank's difficulties.

    Without a bank the standard normal is used. The standard deviation is
    the population one, so a bank with a single difficulty yields identical
    examinees.
    """
    if int(count) != count or count < 1:
        raise ValueError(f"the number of examinees must be a positive integer, got {count}")
    if bank is None:
        mean, sd = 0.0, 1.0
    else:
        b = irt.as_params(bank)[:, 1]
        mean, sd = float(b.mean()), float(b.std())
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return rng.normal(mean, sd, int(count))


def simulate_response(true_theta: float, item, rng: np.random.Generator) -> bool:
    """Bernoulli draw with success probability ``icc(true_theta, item)``."""
    return bool(rng.random() < irt.icc(true_theta, item))


def validity_measures(states: Sequence[ExamineeState], n_items: int) -> Validity:
    """Bias, MSE, RMSE and test overlap rate of a finished simulation.

    The overlap rate is ``(N / Q) * var(r) + Q / N`` with ``N`` the bank
    size, ``r`` the exposure rates over these tests and ``Q`` the test
    length; for tests of varying length ``Q`` is the mean length.
    """
    if not states:
        raise ValueError("validity measures need at least one examinee")
    err = np.array([s.final_estimate - s.true_theta for s in states])
    bias = float(err.mean())
    mse = float(np.mean(err**2))
    rmse = math.sqrt(mse)

    counts = np.zeros(n_items)
    for s in states:
        counts[np.unique(np.asarray(s.administered, dtype=np.int64))] += 1
    rates = counts / len(states)
    q = float(np.mean([s.test_length for s in states]))
    overlap = (n_items / q) * float(rates.var()) + q / n_items if q > 0 else 0.0
    return Validity(bias, mse, rmse, overlap)


class Simulator:
    """Runs a population of examinees through one CAT configuration.

    Args:
        bank: the item bank.
        examinees: a number of examinees, whose proficiencies are then drawn
            with :func:`generate_examinees`, or their explicit proficiencies.
        seed: master seed of the run.
    """

    def __init__(self, bank: ItemBank, examinees, seed: int = 0):
        if not isinstance(bank, ItemBank):
            bank = ItemBank(irt.as_params(bank))
        if len(bank) == 0:
            raise ValueError("the item bank is empty")
        self.bank = bank
        self.seed = seed
        if np.ndim(examinees) == 0:
            rng = np.random.default_rng(_seed_sequence(seed, 0))
            self.examinees = [float(t) for t in generate_examinees(int(examinees), bank, rng)]
        else:
            self.examinees = [float(t) for t in examinees]
            if not self.examinees:
                raise ValueError("the list of examinees is empty")
            if not all(math.isfinite(t) for t in self.examinees):
                raise ValueError("examinee proficiencies must be finite")
        self.result: SimulationResult | None = None

    def _run_one(self, j, initializer, selector, estimator, stopper) -> ExamineeState:
        rng = np.random.default_rng(_seed_sequence(self.seed, 1, j))
        params = self.bank.params
        state = ExamineeState(true_theta=self.examinees[j])
        state.estimates.append(float(initializer.initialize(rng)))
        while True:
            try:
                item = selector.select(self.bank, state.administered, state.estimates[-1], rng)
            except BankExhaustedError:
                state.exhausted = True
                break
            state.administered.append(int(item))
            state.responses.append(simulate_response(state.true_theta, params[item], rng))
            theta = float(
                estimator.estimate(self.bank, state.administered, state.responses, state.estimates[-1], rng)
            )
            state.estimates.append(theta)
            given = params[state.administered]
            info = irt.test_info(theta, given)
            see = math.sqrt(1.0 / info) if info > 0 else math.inf
            state.info_trace.append(info)
            state.see_trace.append(see)
            state.var_trace.append(see**2)
            if stopper.stop(given, theta):
                break
        return state

    def simulate(
        self,
        initializer: Initializer,
        selector: Selector,
        estimator: Estimator,
        stopper: Stopper,
        workers: int = 1,
    ) -> SimulationResult:
        """Run every examinee and compute exposure and validity measures.

        With ``workers > 1`` examinees run concurrently on threads; the result
        is identical to a sequential run.
        """
        args = (initializer, selector, estimator, stopper)
        n = len(self.examinees)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                states = list(pool.map(lambda j: self._run_one(j, *args), range(n)))
        else:
            states = [self._run_one(j, *args) for j in range(n)]
        bank = update_exposure(self.bank, [s.administered for s in states])
        self.result = SimulationResult(states, bank, validity_measures(states, len(self.bank)))
        return self.result
