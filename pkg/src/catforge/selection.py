"""Item selection strategies.

Every selector implements ``select(bank, administered, est_theta, rng=None)``
and returns the index of the next item, never one in ``administered``.
When no item can be chosen a :class:`BankExhaustedError` is raised. Ties
are always broken toward the lowest item index.

Stochastic selectors draw from ``rng`` when it is given (the simulator
passes one generator per examinee) and from their own seeded generator
otherwise.
"""

from __future__ import annotations

import hashlib
import logging
import threading
from abc import ABC, abstractmethod
from typing import Sequence

import numpy as np

from . import irt
from ._kmeans import kmeans

log = logging.getLogger(__name__)

#: order of the Gauss-Legendre rule used by :class:`IntervalIntegrationSelector`
QUADRATURE_ORDER = 21


class BankExhaustedError(RuntimeError):
    """No eligible item is left to present."""


def _available(n: int, administered: Sequence[int]) -> np.ndarray:
    mask = np.ones(n, dtype=bool)
    if len(administered):
        idx = np.asarray(administered, dtype=np.int64)
        if idx.min() < 0 or idx.max() >= n:
            raise IndexError(f"administered index out of range for a bank of {n} items")
        mask[idx] = False
    if not mask.any():
        raise BankExhaustedError("every item of the bank has already been administered")
    return mask


def _bank_key(params: np.ndarray) -> bytes:
    return hashlib.blake2b(np.ascontiguousarray(params).tobytes(), digest_size=16).digest()


def _top_candidates(info: np.ndarray, mask: np.ndarray, n: int) -> np.ndarray:
    idx = np.flatnonzero(mask)
    order = np.lexsort((idx, -info[idx]))
    return idx[order[:n]]


class Selector(ABC):
    @abstractmethod
    def select(
        self,
        bank,
        administered: Sequence[int],
        est_theta: float,
        rng: np.random.Generator | None = None,
    ) -> int:
        ...


class _SeededSelector(Selector):
    def __init__(self, seed=None):
        self._rng = np.random.default_rng(seed)

    def _pick(self, rng):
        return self._rng if rng is None else rng


class MaxInfoSelector(Selector):
    """Picks the non-administered item with the largest information at the estimate."""

    def select(self, bank, administered, est_theta, rng=None) -> int:
        params = irt.as_params(bank)
        mask = _available(len(params), administered)
        info = np.where(mask, irt.inf_batch(est_theta, params), -np.inf)
        return int(np.argmax(info))

    def __repr__(self):
        return "MaxInfoSelector()"


class LinearSelector(Selector):
    """Presents a fixed sequence of items, the same for every examinee."""

    def __init__(self, indexes: Sequence[int]):
        indexes = [int(i) for i in indexes]
        if not indexes:
            raise ValueError("a linear test needs at least one item index")
        if len(set(indexes)) != len(indexes) or min(indexes) < 0:
            raise ValueError("linear test indexes must be unique and nonnegative")
        self.indexes = indexes

    def select(self, bank, administered, est_theta, rng=None) -> int:
        n = len(irt.as_params(bank))
        if max(self.indexes) >= n:
            raise IndexError(f"linear test index out of range for a bank of {n} items")
        pos = len(administered)
        if pos >= len(self.indexes):
            raise BankExhaustedError(f"the linear sequence of {len(self.indexes)} items is used up")
        return self.indexes[pos]

    def __repr__(self):
        return f"LinearSelector({self.indexes})"


class RandomSelector(_SeededSelector):
    """Picks uniformly among the non-administered items."""

    def select(self, bank, administered, est_theta, rng=None) -> int:
        mask = _available(len(irt.as_params(bank)), administered)
        return int(self._pick(rng).choice(np.flatnonzero(mask)))

    def __repr__(self):
        return "RandomSelector()"


class RandomesqueSelector(_SeededSelector):
    """Picks uniformly among the ``n`` most informative non-administered items."""

    def __init__(self, n: int = 5, seed=None):
        super().__init__(seed)
        if int(n) != n or n < 1:
            raise ValueError(f"n must be a positive integer, got {n}")
        self.n = int(n)

    def _n_for(self, n_administered: int) -> int:
        return self.n

    def select(self, bank, administered, est_theta, rng=None) -> int:
        params = irt.as_params(bank)
        mask = _available(len(params), administered)
        info = irt.inf_batch(est_theta, params)
        top = _top_candidates(info, mask, self._n_for(len(administered)))
        return int(self._pick(rng).choice(top))

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n})"


class The54321Selector(RandomesqueSelector):
    """Randomesque selection whose candidate pool shrinks by one per item shown.

    With ``n`` candidates for the first item, ``n - t`` are used for item
    ``t`` (never fewer than one), so the end of the test is pure maximum
    information.
    """

    def _n_for(self, n_administered: int) -> int:
        return max(1, self.n - n_administered)


class _StratifiedSelector(Selector):
    """Shared machinery of the four stratification methods.

    The bank is split into ``test_size`` strata; the item at test position
    ``k`` comes from stratum ``k``. When that stratum has no unused item the
    next strata are tried in order (wrapping around), and positions past the
    last stratum draw from the last one onward.

    ``within_stratum`` decides which unused item of the stratum is taken:
    ``"first_unused"`` takes the first one in stratum order,
    ``"closest_b"`` the one whose difficulty is nearest the estimate.
    """

    WITHIN = ("first_unused", "closest_b")

    def __init__(self, test_size: int, within_stratum: str = "first_unused"):
        if int(test_size) != test_size or test_size < 1:
            raise ValueError(f"test_size must be a positive integer, got {test_size}")
        if within_stratum not in self.WITHIN:
            raise ValueError(f"within_stratum must be one of {self.WITHIN}, got {within_stratum!r}")
        self.test_size = int(test_size)
        self.within_stratum = within_stratum
        self._cache: dict[bytes, list[np.ndarray]] = {}
        self._lock = threading.Lock()

    def _ranking(self, params: np.ndarray) -> np.ndarray:
        return params[:, 0]

    def _partition(self, params: np.ndarray) -> list[np.ndarray]:
        order = np.argsort(self._ranking(params), kind="stable")
        return np.array_split(order, self.test_size)

    def strata(self, bank) -> list[np.ndarray]:
        """Item indices of every stratum, in stratum order."""
        params = irt.as_params(bank)
        if len(params) < self.test_size:
            raise ValueError(
                f"a bank of {len(params)} items cannot be split into {self.test_size} strata"
            )
        key = _bank_key(params)
        with self._lock:
            cached = self._cache.get(key)
        if cached is None:
            cached = self._partition(params)
            for s in cached:
                s.setflags(write=False)
            with self._lock:
                self._cache[key] = cached
        return cached

    def select(self, bank, administered, est_theta, rng=None) -> int:
        params = irt.as_params(bank)
        mask = _available(len(params), administered)
        strata = self.strata(params)
        k = len(strata)
        start = min(len(administered), k - 1)
        for offset in range(k):
            stratum = strata[(start + offset) % k]
            unused = stratum[mask[stratum]]
            if not len(unused):
                continue
            if offset:
                log.debug("stratum %d exhausted, drawing from stratum %d", start, (start + offset) % k)
            if self.within_stratum == "first_unused":
                return int(unused[0])
            dist = np.abs(params[unused, 1] - est_theta)
            best = np.flatnonzero(dist == dist.min())
            return int(unused[best].min())
        raise BankExhaustedError("every stratum is exhausted")

    def __repr__(self):
        return f"{type(self).__name__}(test_size={self.test_size}, within_stratum={self.within_stratum!r})"


class AStratifiedSelector(_StratifiedSelector):
    """Strata of ascending discrimination."""


class _BBlockingMixin:
    def _partition(self, params: np.ndarray) -> list[np.ndarray]:
        K = self.test_size
        rank = self._ranking(params)
        by_b = np.argsort(params[:, 1], kind="stable")
        strata: list[list[int]] = [[] for _ in range(K)]
        for start in range(0, len(by_b), K):
            block = by_b[start:start + K]
            block = block[np.argsort(rank[block], kind="stable")]
            for j, item in enumerate(block):
                strata[j].append(int(item))
        return [np.array(s, dtype=np.int64) for s in strata]


class AStratifiedBBlockingSelector(_BBlockingMixin, _StratifiedSelector):
    """Discrimination strata with difficulty spread evenly across them.

    Items are sorted by difficulty and cut into blocks of ``test_size``
    items; inside each block they are sorted by discrimination and the
    ``j``-th one goes to stratum ``j``.
    """


class MaxInfoStratificationSelector(_StratifiedSelector):
    """Strata of ascending peak information."""

    def _ranking(self, params):
        return irt.max_info_value(params)


class MaxInfoBBlockingSelector(_BBlockingMixin, MaxInfoStratificationSelector):
    """Peak-information strata with difficulty spread evenly across them."""


class ClusterSelector(Selector):
    """Selects from a cluster of items with similar parameters.

    Items are grouped by k-means on the z-scored ``(a, b, c, d)`` columns.
    With ``method="item_info"`` the chosen cluster is the one holding the
    most informative item of the whole bank at the estimate; with
    ``method="mean_info"`` it is the cluster of highest mean information.
    The most informative unused item of that cluster is returned; if the
    cluster is used up the next cluster in the same ranking is tried.
    """

    METHODS = ("item_info", "mean_info")

    def __init__(self, n_clusters: int = 8, method: str = "item_info", n_init: int = 10, seed=0):
        if int(n_clusters) != n_clusters or n_clusters < 1:
            raise ValueError(f"n_clusters must be a positive integer, got {n_clusters}")
        if method not in self.METHODS:
            raise ValueError(f"method must be one of {self.METHODS}, got {method!r}")
        self.n_clusters = int(n_clusters)
        self.method = method
        self.n_init = int(n_init)
        self.seed = seed
        self._cache: dict[bytes, np.ndarray] = {}
        self._lock = threading.Lock()

    def clusters(self, bank) -> np.ndarray:
        """Cluster label of every item."""
        params = irt.as_params(bank)
        if len(params) < self.n_clusters:
            raise ValueError(f"a bank of {len(params)} items cannot form {self.n_clusters} clusters")
        key = _bank_key(params)
        with self._lock:
            labels = self._cache.get(key)
        if labels is None:
            sd = params.std(axis=0)
            z = (params - params.mean(axis=0)) / np.where(sd > 0, sd, 1.0)
            labels, _ = kmeans(z, self.n_clusters, n_init=self.n_init, seed=self.seed)
            labels.setflags(write=False)
            with self._lock:
                self._cache[key] = labels
        return labels

    def select(self, bank, administered, est_theta, rng=None) -> int:
        params = irt.as_params(bank)
        mask = _available(len(params), administered)
        labels = self.clusters(params)
        info = irt.inf_batch(est_theta, params)
        present = np.unique(labels)
        if self.method == "item_info":
            score = np.array([info[labels == j].max() for j in present])
        else:
            score = np.array([info[labels == j].mean() for j in present])
        for j in present[np.lexsort((present, -score))]:
            members = mask & (labels == j)
            if members.any():
                return int(np.argmax(np.where(members, info, -np.inf)))
        raise BankExhaustedError("every cluster is exhausted")

    def __repr__(self):
        return f"ClusterSelector(n_clusters={self.n_clusters}, method={self.method!r})"


def interval_information(params, center: float, delta: float, order: int = QUADRATURE_ORDER) -> np.ndarray:
    """Integral of each item's information over ``[center - delta, center + delta]``."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    thetas = center + delta * nodes
    info = irt.inf_batch(thetas[:, None], irt.as_params(params))
    return delta * (weights @ info)


class IntervalIntegrationSelector(Selector):
    """Picks the item with the most information integrated around the estimate."""

    def __init__(self, delta: float = 0.5):
        if not delta > 0:
            raise ValueError(f"delta must be positive, got {delta}")
        self.delta = float(delta)

    def select(self, bank, administered, est_theta, rng=None) -> int:
        params = irt.as_params(bank)
        mask = _available(len(params), administered)
        area = np.where(mask, interval_information(params, est_theta, self.delta), -np.inf)
        return int(np.argmax(area))

    def __repr__(self):
        return f"IntervalIntegrationSelector(delta={self.delta})"
