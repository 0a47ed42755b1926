"""Logistic item response theory functions.

Every function works on the four-parameter logistic model (4PL). Lower
models are obtained by fixing parameters: ``d = 1`` gives the 3PL, adding
``c = 0`` gives the 2PL and adding ``a = 1`` gives the Rasch model.

The item characteristic curve used here is the rising logistic

    P(theta) = c + (d - c) / (1 + exp(-a (theta - b)))

so that the probability of a correct answer grows with proficiency.

Items can be given as :class:`Item` objects, as ``(a, b, c, d)`` sequences
or, for the functions that take several items, as an ``(n, 4)`` (or
``(n, 5)``, the fifth column being the exposure rate) array or an
:class:`~catforge.bank.ItemBank`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

#: probability clamp used inside :func:`log_likelihood`
PROB_EPS = 1e-10

#: default working interval of the proficiency scale
THETA_BOUNDS = (-6.0, 6.0)


@dataclass(frozen=True)
class Item:
    """A single test item.

    Attributes:
        a: discrimination, must be positive.
        b: difficulty, on the proficiency scale.
        c: pseudo-guessing probability, ``0 <= c < d``.
        d: upper asymptote, ``c < d <= 1``.
        r: exposure rate, fraction of tests the item appeared in.
    """

    a: float = 1.0
    b: float = 0.0
    c: float = 0.0
    d: float = 1.0
    r: float = 0.0

    def __post_init__(self):
        _check_params(self.a, self.b, self.c, self.d)
        if not 0.0 <= self.r <= 1.0:
            raise ValueError(f"exposure rate r={self.r} outside [0, 1]")

    @property
    def params(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)


def _check_params(a, b, c, d):
    if not (math.isfinite(a) and a > 0):
        raise ValueError(f"discrimination a={a} must be finite and > 0")
    if not math.isfinite(b):
        raise ValueError(f"difficulty b={b} must be finite")
    if not (0.0 <= c < d <= 1.0):
        raise ValueError(f"asymptotes must satisfy 0 <= c < d <= 1, got c={c}, d={d}")


def _unpack(item) -> tuple[float, float, float, float]:
    if isinstance(item, Item):
        return item.params
    vals = [float(v) for v in item]
    if len(vals) == 2:
        vals += [0.0, 1.0]
    elif len(vals) == 3:
        vals.append(1.0)
    elif len(vals) not in (4, 5):
        raise ValueError(f"an item needs 2 to 5 parameters, got {len(vals)}")
    a, b, c, d = vals[:4]
    _check_params(a, b, c, d)
    return a, b, c, d


def as_params(items) -> np.ndarray:
    """Return an ``(n, 4)`` float array of ``(a, b, c, d)`` rows."""
    params = getattr(items, "params", None)
    if isinstance(params, np.ndarray):
        return params
    if isinstance(items, np.ndarray):
        arr = items.astype(float, copy=False)
    else:
        items = list(items)
        if not items:
            return np.empty((0, 4))
        arr = np.array([_unpack(it) for it in items], dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] < 4:
        raise ValueError(f"expected an (n, 4) item matrix, got shape {arr.shape}")
    return arr[:, :4]


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def _sigmoid_arr(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def icc(theta: float, item) -> float:
    """Probability that an examinee of proficiency ``theta`` answers ``item`` correctly."""
    a, b, c, d = _unpack(item)
    return c + (d - c) * _sigmoid(a * (theta - b))


def _info_from_s(a, c, d, s, sc):
    # s = sigmoid(a(theta-b)), sc = 1 - s computed without cancellation
    p = c + (d - c) * s
    q = 1.0 - p
    num = a * a * (d - c) ** 2 * s * s * sc * sc
    den = p * q
    return num, den


def inf(theta: float, item) -> float:
    """Fisher information of ``item`` at ``theta``.

    Written as ``a^2 (P-c)^2 (d-P)^2 / ((d-c)^2 P (1-P))``; the limit 0 is
    returned where ``P`` reaches 0 or 1 in floating point.
    """
    a, b, c, d = _unpack(item)
    x = a * (theta - b)
    num, den = _info_from_s(a, c, d, _sigmoid(x), _sigmoid(-x))
    if den <= 0.0:
        return 0.0
    return num / den


def _max_info_arr(a, b, c, d):
    u = -0.75 + (c + d - 2.0 * c * d) / 2.0
    v = (c + d - 1.0) / 4.0
    arg = np.clip(-(v / 2.0) * np.sqrt(27.0 / -(u**3)), -1.0, 1.0)
    x_star = 2.0 * np.sqrt(-u / 3.0) * np.cos(np.arccos(arg) / 3.0 + 4.0 * np.pi / 3.0) + 0.5
    return b + np.log((x_star - c) / (d - x_star)) / a, x_star


def max_info(item) -> float:
    """Proficiency at which ``item`` is most informative.

    Closed form ``b + log((x* - c) / (d - x*)) / a`` where ``x*``, the
    response probability at the peak, is the root in ``(c, d)`` of a cubic
    obtained with the trigonometric method.
    """
    a, b, c, d = _unpack(item)
    u = -0.75 + (c + d - 2.0 * c * d) / 2.0
    # with this sign of v the trigonometric root x* is the probability at the
    # information peak of the rising curve (the opposite sign yields 1 - x*)
    v = (c + d - 1.0) / 4.0
    arg = max(-1.0, min(1.0, -(v / 2.0) * math.sqrt(27.0 / -(u**3))))
    x_star = 2.0 * math.sqrt(-u / 3.0) * math.cos(math.acos(arg) / 3.0 + 4.0 * math.pi / 3.0) + 0.5
    if not c < x_star < d:
        raise ArithmeticError(
            f"maximum-information probability {x_star!r} fell outside ({c}, {d})"
        )
    return b + math.log((x_star - c) / (d - x_star)) / a


def test_info(theta: float, items) -> float:
    """Test information, the sum of item information over ``items``."""
    params = as_params(items)
    if len(params) == 0:
        raise ValueError("test information needs at least one item")
    return float(np.sum(inf_batch(theta, params)))


# keep pytest from collecting the function above when imported into test modules
test_info.__test__ = False


def see(theta: float, items) -> float:
    """Standard error of estimation; ``inf`` when the test carries no information."""
    info = test_info(theta, items)
    if info <= 0.0:
        return math.inf
    return math.sqrt(1.0 / info)


def var(theta: float, items) -> float:
    """Variance of the proficiency estimate, the squared standard error."""
    return see(theta, items) ** 2


def reliability(theta: float, items) -> float:
    """Test reliability ``1 - 1/I(theta)``. Negative whenever ``I(theta) < 1``."""
    info = test_info(theta, items)
    if info <= 0.0:
        return -math.inf
    return 1.0 - 1.0 / info


def _check_responses(responses, n_items):
    x = np.asarray(responses, dtype=float).reshape(-1)
    if len(x) != n_items or n_items == 0:
        raise ValueError(
            f"responses and items must have the same nonzero length, got {len(x)} and {n_items}"
        )
    return x


def log_likelihood(theta: float, responses: Sequence[bool], items) -> float:
    """Log-likelihood of a dichotomous response vector at ``theta``.

    Probabilities are clamped to ``[PROB_EPS, 1 - PROB_EPS]`` so the value is
    always finite.
    """
    params = as_params(items)
    x = _check_responses(responses, len(params))
    p = np.clip(icc_batch(theta, params), PROB_EPS, 1.0 - PROB_EPS)
    return float(np.sum(x * np.log(p) + (1.0 - x) * np.log(1.0 - p)))


def log_likelihood_grad(theta: float, responses: Sequence[bool], items) -> float:
    """Derivative of :func:`log_likelihood` with respect to ``theta``.

    Exact away from the clamped tails.
    """
    params = as_params(items)
    x = _check_responses(responses, len(params))
    a, b, c, d = params.T
    z = a * (theta - b)
    s, sc = _sigmoid_arr(z), _sigmoid_arr(-z)
    p = np.clip(c + (d - c) * s, PROB_EPS, 1.0 - PROB_EPS)
    dp = a * (d - c) * s * sc
    return float(np.sum((x - p) * dp / (p * (1.0 - p))))


def icc_batch(theta: float, items) -> np.ndarray:
    """:func:`icc` for every item of a bank at once."""
    params = as_params(items)
    a, b, c, d = params.T
    return c + (d - c) * _sigmoid_arr(a * (np.asarray(theta, dtype=float) - b))


def inf_batch(theta, items) -> np.ndarray:
    """:func:`inf` for every item of a bank at once.

    ``theta`` may also be an array broadcastable against the items, e.g. one
    proficiency per item or a column of proficiencies against all items.
    """
    params = as_params(items)
    a, b, c, d = params.T
    x = a * (np.asarray(theta, dtype=float) - b)
    num, den = _info_from_s(a, c, d, _sigmoid_arr(x), _sigmoid_arr(-x))
    out = np.zeros_like(num)
    ok = den > 0.0
    out[ok] = num[ok] / den[ok]
    return out


def max_info_batch(items) -> np.ndarray:
    """:func:`max_info` for every item of a bank at once."""
    params = as_params(items)
    if len(params) == 0:
        return np.empty(0)
    a, b, c, d = params.T
    theta, x_star = _max_info_arr(a, b, c, d)
    if np.any((x_star <= c) | (x_star >= d)):
        raise ArithmeticError("maximum-information probability fell outside (c, d)")
    return theta


def max_info_value(items) -> np.ndarray:
    """Peak information of every item, ``inf(max_info(item), item)``."""
    params = as_params(items)
    return inf_batch(max_info_batch(params), params)
