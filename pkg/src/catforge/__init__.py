"""Computerized adaptive testing simulation under the logistic IRT models."""

__version__ = "0.1.0"

from .bank import ItemBank, generate_item_bank, load_csv, normalize_item_bank, save_csv, update_exposure, validate
from .estimation import DifferentialEvolutionEstimator, HillClimbingEstimator, OptimizerReport
from .initialization import FixedInitializer, RandomInitializer
from .irt import Item
from .selection import (
    AStratifiedBBlockingSelector,
    AStratifiedSelector,
    BankExhaustedError,
    ClusterSelector,
    IntervalIntegrationSelector,
    LinearSelector,
    MaxInfoBBlockingSelector,
    MaxInfoSelector,
    MaxInfoStratificationSelector,
    RandomesqueSelector,
    RandomSelector,
    The54321Selector,
)
from .simulation import SimulationResult, Simulator
from .stopping import MaxItemStopper, MinErrorStopper
