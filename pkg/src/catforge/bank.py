"""Item banks: generation, validation, normalization, exposure and CSV I/O.

Parameter columns are always ordered ``(a, b, c, d)``; CSV files add the
exposure rate ``r`` as a fifth column.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .irt import Item

MODELS = ("1PL", "2PL", "3PL", "4PL")
CSV_HEADER = ("a", "b", "c", "d", "r")


class ItemBankError(ValueError):
    """An item bank (or a file holding one) is malformed or out of domain."""


@dataclass(frozen=True)
class Violation:
    row: int
    param: str
    message: str

    def __str__(self):
        return f"row {self.row}, parameter {self.param}: {self.message}"


@dataclass(frozen=True, eq=False)
class ItemBank:
    """An ordered, immutable collection of items.

    ``params`` is an ``(n, 4)`` array of ``(a, b, c, d)`` rows. Exposure is
    kept as cumulative counts: ``exposure_counts[i]`` is the number of
    tests item ``i`` appeared in and ``n_tests`` the number of tests applied.
    ``base_rates`` carries rates read from a file whose counts are unknown;
    they are reported until the first :func:`update_exposure`.
    """

    params: np.ndarray
    model: str = "4PL"
    exposure_counts: np.ndarray | None = None
    n_tests: int = 0
    base_rates: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        params = np.array(self.params, dtype=float).reshape(-1, 4)
        params.setflags(write=False)
        object.__setattr__(self, "params", params)
        if self.model not in MODELS:
            raise ItemBankError(f"unknown model {self.model!r}, expected one of {MODELS}")
        counts = self.exposure_counts
        counts = np.zeros(len(params), dtype=np.int64) if counts is None else np.array(counts, dtype=np.int64)
        if counts.shape != (len(params),):
            raise ItemBankError("exposure_counts must have one entry per item")
        counts.setflags(write=False)
        object.__setattr__(self, "exposure_counts", counts)
        if self.base_rates is not None:
            rates = np.array(self.base_rates, dtype=float)
            rates.setflags(write=False)
            object.__setattr__(self, "base_rates", rates)

    def __len__(self):
        return len(self.params)

    def __getitem__(self, i: int) -> Item:
        a, b, c, d = (float(v) for v in self.params[i])
        return Item(a, b, c, d, float(self.exposure_rates[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def __eq__(self, other):
        if not isinstance(other, ItemBank):
            return NotImplemented
        return (
            self.model == other.model
            and self.n_tests == other.n_tests
            and np.array_equal(self.params, other.params)
            and np.array_equal(self.exposure_counts, other.exposure_counts)
            and np.array_equal(self.exposure_rates, other.exposure_rates)
        )

    __hash__ = None

    @property
    def a(self) -> np.ndarray:
        return self.params[:, 0]

    @property
    def b(self) -> np.ndarray:
        return self.params[:, 1]

    @property
    def c(self) -> np.ndarray:
        return self.params[:, 2]

    @property
    def d(self) -> np.ndarray:
        return self.params[:, 3]

    @property
    def exposure_rates(self) -> np.ndarray:
        if self.n_tests > 0:
            return self.exposure_counts / self.n_tests
        if self.base_rates is not None:
            return self.base_rates
        return np.zeros(len(self))

    def subset(self, indices: Sequence[int]) -> np.ndarray:
        """Parameter rows of the given items, in the given order."""
        return self.params[np.asarray(indices, dtype=np.int64)]

    def validate(self) -> list[Violation]:
        return validate(self)

    @property
    def is_valid(self) -> bool:
        return not validate(self)


def infer_model(params: np.ndarray) -> str:
    """Smallest logistic model that represents every row of ``params``."""
    params = np.asarray(params, dtype=float).reshape(-1, 4)
    if len(params) == 0:
        return "4PL"
    if np.any(params[:, 3] != 1.0):
        return "4PL"
    if np.any(params[:, 2] != 0.0):
        return "3PL"
    if np.any(params[:, 0] != params[0, 0]):
        return "2PL"
    return "1PL"


def validate(bank: ItemBank) -> list[Violation]:
    """List every violated invariant of ``bank``. An empty list means valid."""
    report: list[Violation] = []
    for i, (a, b, c, d) in enumerate(bank.params):
        if not (math.isfinite(a) and a > 0):
            report.append(Violation(i, "a", f"discrimination {a} must be finite and > 0"))
        if not math.isfinite(b):
            report.append(Violation(i, "b", f"difficulty {b} must be finite"))
        if not (0.0 <= c < 1.0):
            report.append(Violation(i, "c", f"pseudo-guessing {c} outside [0, 1)"))
        if not (0.0 < d <= 1.0):
            report.append(Violation(i, "d", f"upper asymptote {d} outside (0, 1]"))
        if c >= d and 0.0 <= c < 1.0 and 0.0 < d <= 1.0:
            report.append(Violation(i, "c", f"pseudo-guessing {c} must be below upper asymptote {d}"))
    model = bank.model
    if model in ("1PL", "2PL", "3PL"):
        for i in np.flatnonzero(bank.d != 1.0):
            report.append(Violation(int(i), "d", f"{model} items need d = 1"))
    if model in ("1PL", "2PL"):
        for i in np.flatnonzero(bank.c != 0.0):
            report.append(Violation(int(i), "c", f"{model} items need c = 0"))
    if model == "1PL" and len(bank):
        for i in np.flatnonzero(bank.a != bank.a[0]):
            report.append(Violation(int(i), "a", "1PL items need a common discrimination"))
    rates = bank.exposure_rates
    for i in np.flatnonzero((rates < 0) | (rates > 1) | ~np.isfinite(rates)):
        report.append(Violation(int(i), "r", f"exposure rate {rates[i]} outside [0, 1]"))
    if bank.n_tests < 0:
        report.append(Violation(-1, "N", "number of tests must be nonnegative"))
    if np.any(bank.exposure_counts > max(bank.n_tests, 0)) or np.any(bank.exposure_counts < 0):
        report.append(Violation(-1, "q", "exposure counts must lie in [0, N]"))
    return report


def check(bank: ItemBank) -> ItemBank:
    """Return ``bank`` unchanged, raising :class:`ItemBankError` if it is invalid."""
    report = validate(bank)
    if report:
        raise ItemBankError("invalid item bank: " + "; ".join(str(v) for v in report))
    return bank


def _resample(rng, draw, bad, size):
    values = draw(size)
    mask = bad(values)
    while mask.any():
        values[mask] = draw(int(mask.sum()))
        mask = bad(values)
    return values


def generate_item_bank(size: int, model: str = "4PL", corr: float = 0.0, seed=None) -> ItemBank:
    """Draw a random item bank.

    Parameters follow ``a ~ N(1.2, 0.25)``, ``b ~ N(0, 1)``,
    ``c ~ N(0.25, 0.02)`` and ``d ~ U(0.94, 1)``. With ``corr != 0`` the pair
    ``(a, b)`` is drawn from a bivariate normal with that correlation.
    Draws outside the valid domain are redrawn rather than clipped. Lower
    models fix the unused parameters (``a = 1`` for 1PL, ``c = 0`` up to
    2PL, ``d = 1`` up to 3PL).

    ``seed`` may be anything accepted by :func:`numpy.random.default_rng`.
    """
    if not isinstance(size, (int, np.integer)) or size < 1:
        raise ValueError(f"bank size must be a positive integer, got {size!r}")
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}, expected one of {MODELS}")
    if not -1.0 <= corr <= 1.0:
        raise ValueError(f"correlation {corr} outside [-1, 1]")
    rng = np.random.default_rng(seed)
    mean_a, sd_a = 1.2, 0.25

    if corr == 0.0:
        a = _resample(rng, lambda n: rng.normal(mean_a, sd_a, n), lambda v: v <= 0, size)
        b = rng.normal(0.0, 1.0, size)
    else:
        z = rng.standard_normal((size, 2))
        bad = mean_a + sd_a * z[:, 0] <= 0
        while bad.any():
            z[bad] = rng.standard_normal((int(bad.sum()), 2))
            bad = mean_a + sd_a * z[:, 0] <= 0
        a = mean_a + sd_a * z[:, 0]
        b = corr * z[:, 0] + math.sqrt(1.0 - corr**2) * z[:, 1]
    d = rng.uniform(0.94, 1.0, size)
    c = _resample(rng, lambda n: rng.normal(0.25, 0.02, n), lambda v: (v < 0) | (v >= d), size)

    if model == "1PL":
        a = np.ones(size)
    if model in ("1PL", "2PL"):
        c = np.zeros(size)
    if model != "4PL":
        d = np.ones(size)
    return check(ItemBank(np.column_stack([a, b, c, d]), model=model))


def normalize_item_bank(raw) -> ItemBank:
    """Fill in missing parameter columns with their default values.

    One column is read as ``b`` (with ``a = 1``), two as ``(a, b)``, three as
    ``(a, b, c)`` and four as ``(a, b, c, d)``. The model of the result is
    the smallest one consistent with the parameters. An :class:`ItemBank`
    is returned as is.
    """
    if isinstance(raw, ItemBank):
        return check(raw)
    arr = np.array(raw, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or not 1 <= arr.shape[1] <= 4:
        raise ItemBankError(f"expected a matrix with 1 to 4 parameter columns, got shape {arr.shape}")
    n, k = arr.shape
    full = np.column_stack([np.ones(n), np.zeros(n), np.zeros(n), np.ones(n)])
    if k == 1:
        full[:, 1] = arr[:, 0]
    else:
        full[:, :k] = arr
    return check(ItemBank(full, model=infer_model(full)))


def update_exposure(bank: ItemBank, administered: Iterable[Sequence[int]]) -> ItemBank:
    """Account for newly applied tests.

    ``administered`` holds one index list per test. Returns a new bank whose
    exposure rates are ``q_i / N`` over all tests seen so far.
    """
    counts = np.array(bank.exposure_counts, dtype=np.int64)
    n_tests = bank.n_tests
    for test in administered:
        idx = np.unique(np.asarray(list(test), dtype=np.int64))
        if idx.size and (idx[0] < 0 or idx[-1] >= len(bank)):
            raise IndexError(f"item index out of range for a bank of {len(bank)} items: {list(test)}")
        counts[idx] += 1
        n_tests += 1
    return ItemBank(bank.params, model=bank.model, exposure_counts=counts, n_tests=n_tests)


def _fmt(x: float) -> str:
    return repr(float(x))


def save_csv(bank: ItemBank, path) -> None:
    """Write ``bank`` as CSV with header ``a,b,c,d,r``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row, r in zip(bank.params, bank.exposure_rates):
            writer.writerow([_fmt(v) for v in row] + [_fmt(r)])


def load_csv(path) -> ItemBank:
    """Read a bank written by :func:`save_csv`.

    The ``r`` column is optional. Raises :class:`ItemBankError` naming the
    offending line for malformed rows.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ItemBankError(f"{path}: empty file, no header and no items")
    header = [h.strip() for h in rows[0]]
    if header not in (list(CSV_HEADER), list(CSV_HEADER[:4])):
        raise ItemBankError(f"{path}:1: expected header 'a,b,c,d,r', got {','.join(header)!r}")
    width = len(header)
    params, rates = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != width:
            raise ItemBankError(f"{path}:{lineno}: expected {width} columns, got {len(row)}")
        try:
            values = [float(cell) for cell in row]
        except ValueError as exc:
            raise ItemBankError(f"{path}:{lineno}: {exc}") from None
        params.append(values[:4])
        rates.append(values[4] if width == 5 else 0.0)
    if not params:
        raise ItemBankError(f"{path}: the file holds no items")
    params = np.array(params)
    rates = np.array(rates)
    bank = ItemBank(params, model=infer_model(params), base_rates=rates if rates.any() else None)
    report = validate(bank)
    if report:
        v = report[0]
        raise ItemBankError(f"{path}:{v.row + 2}: {v}")
    return bank
