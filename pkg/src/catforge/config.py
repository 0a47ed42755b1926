"""JSON run configuration: schema, validation and component construction.

A configuration looks like::

    {
      "version": 1,
      "seed": 42,
      "bank": {"generate": {"size": 100, "model": "4PL", "corr": 0.0}},
      "examinees": {"count": 10},
      "initializer": {"kind": "random", "distribution": "uniform", "params": [-4, 4]},
      "selector": {"kind": "max_info"},
      "estimator": {"kind": "hill_climbing"},
      "stopper": {"kind": "max_items", "max_items": 20},
      "output": {"charts": true}
    }

``bank`` may instead be ``{"path": "items.csv"}`` (relative paths are
resolved against the configuration file). ``examinees`` may be
``{"thetas": [...]}``. Unknown keys anywhere are rejected.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from . import bank as bank_mod
from .estimation import DifferentialEvolutionEstimator, Estimator, HillClimbingEstimator
from .initialization import FixedInitializer, Initializer, RandomInitializer
from .selection import (
    AStratifiedBBlockingSelector,
    AStratifiedSelector,
    ClusterSelector,
    IntervalIntegrationSelector,
    LinearSelector,
    MaxInfoBBlockingSelector,
    MaxInfoSelector,
    MaxInfoStratificationSelector,
    RandomesqueSelector,
    RandomSelector,
    Selector,
    The54321Selector,
)
from .stopping import MaxItemStopper, MinErrorStopper, Stopper

SCHEMA_VERSION = 1
SEED_ENV = "CATFORGE_SEED"


class ConfigError(ValueError):
    """The run configuration is malformed."""


_num = {"type": "number"}
_pos_int = {"type": "integer", "minimum": 1}
_seed = {"type": "integer", "minimum": 0}
_bounds = {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}


def _obj(properties: dict, required=()) -> dict:
    return {
        "type": "object",
        "properties": properties,
        "required": list(required),
        "additionalProperties": False,
    }


TOP_SCHEMA = _obj(
    {
        "version": {"const": SCHEMA_VERSION},
        "seed": _seed,
        "bank": {"type": "object"},
        "examinees": {"type": "object"},
        "initializer": {"type": "object"},
        "selector": {"type": "object"},
        "estimator": {"type": "object"},
        "stopper": {"type": "object"},
        "output": _obj({"charts": {"type": "boolean"}}),
    },
    required=("bank", "examinees", "initializer", "selector", "estimator", "stopper"),
)

BANK_SCHEMAS = {
    "generate": _obj(
        {
            "generate": _obj(
                {
                    "size": _pos_int,
                    "model": {"enum": list(bank_mod.MODELS)},
                    "corr": {"type": "number", "minimum": -1, "maximum": 1},
                    "seed": _seed,
                },
                required=("size",),
            )
        },
        required=("generate",),
    ),
    "path": _obj({"path": {"type": "string", "minLength": 1}}, required=("path",)),
}

EXAMINEE_SCHEMAS = {
    "count": _obj({"count": _pos_int}, required=("count",)),
    "thetas": _obj({"thetas": {"type": "array", "items": _num, "minItems": 1}}, required=("thetas",)),
}

_stratified = {"test_size": _pos_int, "within_stratum": {"enum": ["first_unused", "closest_b"]}}

COMPONENT_SCHEMAS: dict[str, dict[str, dict]] = {
    "initializer": {
        "fixed": {"value": _num},
        "random": {"distribution": {"enum": ["uniform", "normal"]}, "params": _bounds},
    },
    "selector": {
        "max_info": {},
        "linear": {"indexes": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1}},
        "random": {},
        "randomesque": {"n": _pos_int},
        "54321": {"n": _pos_int},
        "a_stratified": _stratified,
        "a_stratified_b_blocking": _stratified,
        "max_info_stratified": _stratified,
        "max_info_b_blocking": _stratified,
        "cluster": {
            "n_clusters": _pos_int,
            "method": {"enum": ["item_info", "mean_info"]},
            "n_init": _pos_int,
            "seed": _seed,
        },
        "interval_integration": {"delta": {"type": "number", "exclusiveMinimum": 0}},
    },
    "estimator": {
        "hill_climbing": {
            "bounds": _bounds,
            "initial_step": {"type": "number", "exclusiveMinimum": 0},
            "tol": {"type": "number", "exclusiveMinimum": 0},
        },
        "differential_evolution": {
            "bounds": _bounds,
            "popsize": {"type": "integer", "minimum": 4},
            "mutation": {"type": "number", "exclusiveMinimum": 0},
            "crossover": {"type": "number", "minimum": 0, "maximum": 1},
            "tol": {"type": "number", "exclusiveMinimum": 0},
            "max_generations": _pos_int,
        },
    },
    "stopper": {
        "max_items": {"max_items": _pos_int},
        "min_error": {
            "threshold": {"type": "number", "exclusiveMinimum": 0},
            "min_items": {"type": "integer", "minimum": 0},
        },
    },
}

_REQUIRED = {
    ("selector", "linear"): ("indexes",),
    ("stopper", "max_items"): ("max_items",),
    ("stopper", "min_error"): ("threshold",),
}


def _json_path(base: str, path) -> str:
    out = base
    for part in path:
        out += f"[{part}]" if isinstance(part, int) else f".{part}"
    return out


def _check(instance, schema, base: str) -> None:
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(instance), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        e = errors[0]
        raise ConfigError(f"{_json_path(base, e.absolute_path)}: {e.message}")


def _check_variant(section: str, value: dict, variants: dict[str, dict]) -> str:
    keys = [k for k in variants if k in value]
    if len(keys) != 1:
        raise ConfigError(f"$.{section}: expected exactly one of {sorted(variants)}")
    _check(value, variants[keys[0]], f"$.{section}")
    return keys[0]


def validate_config(config: Any) -> dict:
    """Check ``config`` against the schema; raises :class:`ConfigError` naming the JSON path."""
    _check(config, TOP_SCHEMA, "$")
    _check_variant("bank", config["bank"], BANK_SCHEMAS)
    _check_variant("examinees", config["examinees"], EXAMINEE_SCHEMAS)
    for section, kinds in COMPONENT_SCHEMAS.items():
        value = config[section]
        kind = value.get("kind")
        if kind not in kinds:
            raise ConfigError(f"$.{section}.kind: expected one of {sorted(kinds)}, got {kind!r}")
        schema = _obj(
            {"kind": {"const": kind}, **kinds[kind]},
            required=("kind", *_REQUIRED.get((section, kind), ())),
        )
        _check(value, schema, f"$.{section}")
    return config


def load_config(path) -> dict:
    """Read, validate and resolve a configuration file.

    Relative bank paths become absolute and the ``CATFORGE_SEED``
    environment variable, when set, replaces the seed.
    """
    path = Path(path)
    try:
        config = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"{path}: no such configuration file") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    if isinstance(config, dict) and "manifest_version" in config:
        config = config.get("config")
    validate_config(config)
    config = json.loads(json.dumps(config))
    config.setdefault("version", SCHEMA_VERSION)
    config.setdefault("seed", 0)
    env_seed = os.environ.get(SEED_ENV)
    if env_seed is not None:
        try:
            config["seed"] = int(env_seed)
        except ValueError:
            raise ConfigError(f"{SEED_ENV}={env_seed!r} is not an integer") from None
        if config["seed"] < 0:
            raise ConfigError(f"{SEED_ENV} must be nonnegative")
    if "path" in config["bank"]:
        bank_path = Path(config["bank"]["path"])
        if not bank_path.is_absolute():
            bank_path = (path.parent / bank_path).resolve()
        config["bank"]["path"] = str(bank_path)
    return config


def build_bank(config: dict) -> bank_mod.ItemBank:
    section = config["bank"]
    if "path" in section:
        try:
            return bank_mod.load_csv(section["path"])
        except FileNotFoundError:
            raise ConfigError(f"$.bank.path: no such file {section['path']}") from None
    gen = section["generate"]
    seed = gen.get("seed")
    if seed is None:
        seed = np.random.SeedSequence(config.get("seed", 0), spawn_key=(2,))
    return bank_mod.generate_item_bank(
        gen["size"], gen.get("model", "4PL"), gen.get("corr", 0.0), seed=seed
    )


def build_initializer(section: dict) -> Initializer:
    if section["kind"] == "fixed":
        return FixedInitializer(section.get("value", 0.0))
    return RandomInitializer(section.get("distribution", "uniform"), section.get("params"))


def build_selector(section: dict, stopper_section: dict | None = None) -> Selector:
    kind = section["kind"]
    if kind == "max_info":
        return MaxInfoSelector()
    if kind == "linear":
        return LinearSelector(section["indexes"])
    if kind == "random":
        return RandomSelector()
    if kind == "randomesque":
        return RandomesqueSelector(section.get("n", 5))
    if kind == "54321":
        return The54321Selector(section.get("n", 5))
    if kind == "cluster":
        return ClusterSelector(
            section.get("n_clusters", 8), section.get("method", "item_info"), section.get("n_init", 10), section.get("seed", 0)
        )
    if kind == "interval_integration":
        return IntervalIntegrationSelector(section.get("delta", 0.5))
    test_size = section.get("test_size")
    if test_size is None:
        if stopper_section is None or stopper_section.get("kind") != "max_items":
            raise ConfigError(f"$.selector.test_size: required by {kind!r} unless the stopper is max_items")
        test_size = stopper_section["max_items"]
    cls = {
        "a_stratified": AStratifiedSelector,
        "a_stratified_b_blocking": AStratifiedBBlockingSelector,
        "max_info_stratified": MaxInfoStratificationSelector,
        "max_info_b_blocking": MaxInfoBBlockingSelector,
    }[kind]
    return cls(test_size, section.get("within_stratum", "first_unused"))


def build_estimator(section: dict) -> Estimator:
    options = {k: v for k, v in section.items() if k != "kind"}
    if section["kind"] == "hill_climbing":
        return HillClimbingEstimator(**options)
    return DifferentialEvolutionEstimator(**options)


def build_stopper(section: dict) -> Stopper:
    if section["kind"] == "max_items":
        return MaxItemStopper(section["max_items"])
    return MinErrorStopper(section["threshold"], section.get("min_items", 1))


def build_components(config: dict):
    """Return ``(initializer, selector, estimator, stopper)`` for ``config``."""
    return (
        build_initializer(config["initializer"]),
        build_selector(config["selector"], config["stopper"]),
        build_estimator(config["estimator"]),
        build_stopper(config["stopper"]),
    )
