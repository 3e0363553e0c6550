"""Scenario configuration files for the benchmark harness.

A scenario file (TOML or JSON, selected by extension) declares everything
one benchmark run needs: the managed system, the adaptation goals, the
reducer settings, the approaches to compare, and the run layout (cycles,
seed, output directory). Loading validates shape and ranges and applies
exactly two environment overrides: ADASPACE_SEED and ADASPACE_OUT.

The declarative specs stay plain data so they can be echoed back into run
artifacts; the build_* helpers materialize them into live objects (managed
system, goal set, reducer configuration with cold models).
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from adaspace import deltaiot, sbs
from adaspace.features import (
    SCALER_KINDS,
    FeatureError,
    FeatureMask,
    Scaler,
    compose_features,
    fit_scaler,
    scaler_from_ranges,
    select_features,
)
from adaspace.goals import (
    OPTIMIZE_MAX,
    OPTIMIZE_MIN,
    SETPOINT,
    THRESHOLD_ABOVE,
    THRESHOLD_BELOW,
    Goal,
    GoalError,
    GoalSet,
    optimize_max,
    optimize_min,
    setpoint,
    threshold_above,
    threshold_below,
)
from adaspace.learners import Hyperparams, LearnerError, OnlineModel, make_model
from adaspace.mape import APPROACHES
from adaspace.reducer import STRATEGIES, ReducerConfig, ReducerError

SCHEMA_VERSION = 1
ENV_SEED = "ADASPACE_SEED"
ENV_OUT = "ADASPACE_OUT"
SYSTEM_KINDS = ("deltaiot", "sbs")
GOAL_KINDS = (THRESHOLD_BELOW, THRESHOLD_ABOVE, SETPOINT, OPTIMIZE_MIN, OPTIMIZE_MAX)

_NAME_PATTERN = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")
_HYPERPARAM_KEYS = ("eta", "alpha", "l1_ratio", "cap_c", "epsilon")
_SYSTEM_PARAM_KEYS = {"deltaiot": ("snr_std", "load_std"), "sbs": ("walk_std",)}

# Sampling budget when a standard scaler has to be fitted from scratch:
# a short seeded uncertainty walk, a strided slice of the space per state.
_SCALER_FIT_STATES = 16
_SCALER_FIT_MAX_ROWS = 512


class ConfigError(ValueError):
    """Scenario file or override outside the contract."""


@dataclass(frozen=True)
class GoalSpec:
    """One adaptation goal by quality name, before index resolution."""

    kind: str
    quality: str
    bound: float | None = None
    target: float | None = None
    margin: float | None = None
    name: str = ""

    def __post_init__(self) -> None:
        if self.kind not in GOAL_KINDS:
            raise ConfigError(f"unknown goal kind {self.kind!r}")
        if not self.quality:
            raise ConfigError("goal needs a quality name")
        if self.kind in (THRESHOLD_BELOW, THRESHOLD_ABOVE) and self.bound is None:
            raise ConfigError(f"{self.kind} goal on {self.quality!r} needs a bound")
        if self.kind == SETPOINT and (self.target is None or self.margin is None):
            raise ConfigError(f"setpoint goal on {self.quality!r} needs target and margin")

    @property
    def default_name(self) -> str:
        if self.name:
            return self.name
        suffix = {
            THRESHOLD_BELOW: "below",
            THRESHOLD_ABOVE: "above",
            SETPOINT: "setpoint",
            OPTIMIZE_MIN: "min",
            OPTIMIZE_MAX: "max",
        }[self.kind]
        return f"{self.quality}-{suffix}"


@dataclass(frozen=True)
class ModelSpec:
    """Family/loss/penalty/hyperparameters of one online model."""

    family: str
    loss: str = ""
    penalty: str = "none"
    hyperparams: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "hyperparams", dict(self.hyperparams))
        unknown = sorted(set(self.hyperparams) - set(_HYPERPARAM_KEYS))
        if unknown:
            raise ConfigError(f"unknown hyperparameters {unknown}")


@dataclass(frozen=True)
class ReducerSpec:
    """Declarative counterpart of ReducerConfig: models by target name,
    scaler by kind, feature mask by indices (None keeps every feature)."""

    exploration_rate: float
    warmup_count: int
    granularity: int
    models: Mapping[str, ModelSpec]
    scaler: str = "none"
    features: tuple[int, ...] | None = None
    training_strategy: str = "round-robin"
    training_budget: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "models", dict(self.models))
        if not 0.0 <= self.exploration_rate <= 1.0:
            raise ConfigError("exploration_rate must be in [0, 1]")
        if self.warmup_count < 0:
            raise ConfigError("warmup_count must be >= 0")
        if self.granularity < 1:
            raise ConfigError("granularity must be >= 1")
        if self.scaler not in SCALER_KINDS:
            raise ConfigError(f"unknown scaler kind {self.scaler!r}")
        if not self.models:
            raise ConfigError("reducer needs at least one model")
        if self.training_strategy not in STRATEGIES:
            raise ConfigError(f"training_strategy must be one of {STRATEGIES}")
        if self.training_budget is not None and self.training_budget < 1:
            raise ConfigError("training_budget must be >= 1 when set")
        if self.features is not None:
            object.__setattr__(self, "features", tuple(int(i) for i in self.features))


@dataclass(frozen=True)
class SystemSpec:
    """Which managed system to simulate and how to seed/parameterize it.

    model_path points at a topology (deltaiot) or workflow (sbs) JSON
    file; profile_path at a recorded uncertainty CSV (deltaiot only)."""

    kind: str
    seed: int = 0
    params: Mapping[str, float] = field(default_factory=dict)
    profile_path: str | None = None
    model_path: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "params", dict(self.params))
        if self.kind not in SYSTEM_KINDS:
            raise ConfigError(f"unknown system kind {self.kind!r}")
        if self.seed < 0:
            raise ConfigError("system seed must be >= 0")
        allowed = _SYSTEM_PARAM_KEYS[self.kind]
        unknown = sorted(set(self.params) - set(allowed))
        if unknown:
            raise ConfigError(f"unknown {self.kind} parameters {unknown}")
        if self.profile_path is not None and self.kind != "deltaiot":
            raise ConfigError("uncertainty profiles only apply to deltaiot")


@dataclass(frozen=True)
class ScenarioConfig:
    """One fully declared benchmark scenario."""

    name: str
    system: SystemSpec
    goals: tuple[GoalSpec, ...]
    reducer: ReducerSpec
    approaches: tuple[str, ...] = APPROACHES
    random_runs: int = 1
    cycles: int = 300
    seed: int = 0
    output_dir: str = "runs"
    noise_stds: tuple[float, ...] | None = None
    cost_ms: tuple[float, ...] | None = None
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self) -> None:
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(
                f"schema_version {self.schema_version} unsupported "
                f"(this build reads version {SCHEMA_VERSION})"
            )
        if not _NAME_PATTERN.match(self.name):
            raise ConfigError(f"scenario name {self.name!r} is not filesystem-safe")
        object.__setattr__(self, "goals", tuple(self.goals))
        if not self.goals:
            raise ConfigError("scenario needs at least one goal")
        object.__setattr__(self, "approaches", tuple(self.approaches))
        if not self.approaches:
            raise ConfigError("scenario needs at least one approach")
        if len(set(self.approaches)) != len(self.approaches):
            raise ConfigError("duplicate approaches")
        for approach in self.approaches:
            if approach not in APPROACHES:
                raise ConfigError(f"unknown approach {approach!r}")
        if self.random_runs < 1:
            raise ConfigError("random_runs must be >= 1")
        if self.cycles < 1:
            raise ConfigError("cycles must be >= 1")
        if self.cycles < self.reducer.warmup_count:
            raise ConfigError(
                f"cycles ({self.cycles}) must cover the warm-up "
                f"count ({self.reducer.warmup_count})"
            )
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")
        if not self.output_dir:
            raise ConfigError("output_dir must be non-empty")
        for label, values in (("noise_stds", self.noise_stds), ("cost_ms", self.cost_ms)):
            if values is None:
                continue
            values = tuple(float(v) for v in values)
            object.__setattr__(self, label, values)
            if any(v < 0 for v in values):
                raise ConfigError(f"{label} entries must be >= 0")


def _expect_mapping(value: Any, where: str) -> Mapping[str, Any]:
    if not isinstance(value, Mapping):
        raise ConfigError(f"{where} must be a table/object")
    return value


def _check_keys(data: Mapping[str, Any], allowed: Sequence[str], where: str) -> None:
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown keys {unknown} in {where}")


_REQUIRED = object()


def _get(data: Mapping[str, Any], key: str, kind: type, where: str, default=_REQUIRED):
    if key not in data:
        if default is _REQUIRED:
            raise ConfigError(f"missing required key {key!r} in {where}")
        return default
    value = data[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or isinstance(value, bool):
        raise ConfigError(f"{where}.{key} must be of type {kind.__name__}")
    return value


def _goal_from_mapping(data: Mapping[str, Any], where: str) -> GoalSpec:
    data = _expect_mapping(data, where)
    _check_keys(data, ("kind", "quality", "bound", "target", "margin", "name"), where)
    return GoalSpec(
        kind=_get(data, "kind", str, where),
        quality=_get(data, "quality", str, where),
        bound=_get(data, "bound", float, where, default=None),
        target=_get(data, "target", float, where, default=None),
        margin=_get(data, "margin", float, where, default=None),
        name=_get(data, "name", str, where, default=""),
    )


def _model_from_mapping(data: Mapping[str, Any], where: str) -> ModelSpec:
    data = _expect_mapping(data, where)
    _check_keys(data, ("family", "loss", "penalty") + _HYPERPARAM_KEYS, where)
    hyperparams = {
        k: float(_get(data, k, float, where)) for k in _HYPERPARAM_KEYS if k in data
    }
    return ModelSpec(
        family=_get(data, "family", str, where),
        loss=_get(data, "loss", str, where, default=""),
        penalty=_get(data, "penalty", str, where, default="none"),
        hyperparams=hyperparams,
    )


def _reducer_from_mapping(data: Mapping[str, Any], where: str) -> ReducerSpec:
    data = _expect_mapping(data, where)
    _check_keys(
        data,
        (
            "exploration_rate",
            "warmup_count",
            "granularity",
            "models",
            "scaler",
            "features",
            "training_strategy",
            "training_budget",
        ),
        where,
    )
    models_data = _expect_mapping(
        data.get("models", {}), f"{where}.models"
    )
    models = {
        str(name): _model_from_mapping(spec, f"{where}.models.{name}")
        for name, spec in models_data.items()
    }
    features = data.get("features")
    if features is not None:
        if not isinstance(features, Sequence) or isinstance(features, (str, bytes)):
            raise ConfigError(f"{where}.features must be a list of indices")
        features = tuple(int(i) for i in features)
    return ReducerSpec(
        exploration_rate=_get(data, "exploration_rate", float, where),
        warmup_count=_get(data, "warmup_count", int, where),
        granularity=_get(data, "granularity", int, where),
        models=models,
        scaler=_get(data, "scaler", str, where, default="none"),
        features=features,
        training_strategy=_get(data, "training_strategy", str, where, default="round-robin"),
        training_budget=_get(data, "training_budget", int, where, default=None),
    )


def _system_from_mapping(data: Mapping[str, Any], where: str) -> SystemSpec:
    data = _expect_mapping(data, where)
    kind = _get(data, "kind", str, where)
    param_keys = _SYSTEM_PARAM_KEYS.get(kind, ())
    _check_keys(data, ("kind", "seed", "profile", "model") + tuple(param_keys), where)
    params = {k: float(_get(data, k, float, where)) for k in param_keys if k in data}
    return SystemSpec(
        kind=kind,
        seed=_get(data, "seed", int, where, default=0),
        params=params,
        profile_path=_get(data, "profile", str, where, default=None),
        model_path=_get(data, "model", str, where, default=None),
    )


def scenario_from_mapping(data: Mapping[str, Any], source: str = "<mapping>") -> ScenarioConfig:
    data = _expect_mapping(data, source)
    _check_keys(
        data,
        (
            "schema_version",
            "name",
            "system",
            "goals",
            "reducer",
            "approaches",
            "random_runs",
            "cycles",
            "seed",
            "output_dir",
            "verifier",
            "design",  # provenance block written by the design command
        ),
        source,
    )
    goals_data = data.get("goals")
    if not isinstance(goals_data, Sequence) or isinstance(goals_data, (str, bytes)):
        raise ConfigError(f"{source}.goals must be a list of goal tables")
    goals = tuple(
        _goal_from_mapping(g, f"{source}.goals[{i}]") for i, g in enumerate(goals_data)
    )

    verifier = _expect_mapping(data.get("verifier", {}), f"{source}.verifier")
    _check_keys(verifier, ("noise_stds", "cost_ms"), f"{source}.verifier")

    def float_tuple(key: str) -> tuple[float, ...] | None:
        values = verifier.get(key)
        if values is None:
            return None
        if not isinstance(values, Sequence) or isinstance(values, (str, bytes)):
            raise ConfigError(f"{source}.verifier.{key} must be a list of numbers")
        return tuple(float(v) for v in values)

    approaches = data.get("approaches", list(APPROACHES))
    if not isinstance(approaches, Sequence) or isinstance(approaches, (str, bytes)):
        raise ConfigError(f"{source}.approaches must be a list")

    return ScenarioConfig(
        name=_get(data, "name", str, source),
        system=_system_from_mapping(data.get("system", {}), f"{source}.system"),
        goals=goals,
        reducer=_reducer_from_mapping(data.get("reducer", {}), f"{source}.reducer"),
        approaches=tuple(str(a) for a in approaches),
        random_runs=_get(data, "random_runs", int, source, default=1),
        cycles=_get(data, "cycles", int, source, default=300),
        seed=_get(data, "seed", int, source, default=0),
        output_dir=_get(data, "output_dir", str, source, default="runs"),
        noise_stds=float_tuple("noise_stds"),
        cost_ms=float_tuple("cost_ms"),
        schema_version=_get(data, "schema_version", int, source),
    )


def scenario_to_mapping(scenario: ScenarioConfig) -> dict:
    """Plain-data echo of a scenario, loadable by scenario_from_mapping."""
    data: dict[str, Any] = {
        "schema_version": scenario.schema_version,
        "name": scenario.name,
        "system": {
            "kind": scenario.system.kind,
            "seed": scenario.system.seed,
            **scenario.system.params,
        },
        "goals": [
            {
                k: v
                for k, v in (
                    ("kind", g.kind),
                    ("quality", g.quality),
                    ("bound", g.bound),
                    ("target", g.target),
                    ("margin", g.margin),
                    ("name", g.name),
                )
                if v not in (None, "")
            }
            for g in scenario.goals
        ],
        "reducer": {
            "exploration_rate": scenario.reducer.exploration_rate,
            "warmup_count": scenario.reducer.warmup_count,
            "granularity": scenario.reducer.granularity,
            "scaler": scenario.reducer.scaler,
            "training_strategy": scenario.reducer.training_strategy,
            "models": {
                name: {
                    "family": m.family,
                    **({"loss": m.loss} if m.loss else {}),
                    "penalty": m.penalty,
                    **m.hyperparams,
                }
                for name, m in scenario.reducer.models.items()
            },
        },
        "approaches": list(scenario.approaches),
        "random_runs": scenario.random_runs,
        "cycles": scenario.cycles,
        "seed": scenario.seed,
        "output_dir": scenario.output_dir,
    }
    if scenario.system.profile_path is not None:
        data["system"]["profile"] = scenario.system.profile_path
    if scenario.system.model_path is not None:
        data["system"]["model"] = scenario.system.model_path
    if scenario.reducer.features is not None:
        data["reducer"]["features"] = list(scenario.reducer.features)
    if scenario.reducer.training_budget is not None:
        data["reducer"]["training_budget"] = scenario.reducer.training_budget
    verifier = {}
    if scenario.noise_stds is not None:
        verifier["noise_stds"] = list(scenario.noise_stds)
    if scenario.cost_ms is not None:
        verifier["cost_ms"] = list(scenario.cost_ms)
    if verifier:
        data["verifier"] = verifier
    return data


def _resolve_system_paths(scenario: ScenarioConfig, base: Path) -> ScenarioConfig:
    """Profile and model paths in a scenario file are relative to the file."""
    fields = {}
    for attr in ("profile_path", "model_path"):
        value = getattr(scenario.system, attr)
        if value is not None and not Path(value).is_absolute():
            fields[attr] = str(base / value)
    if not fields:
        return scenario
    return replace(scenario, system=replace(scenario.system, **fields))


def load_scenario(path, env: Mapping[str, str] | None = None) -> ScenarioConfig:
    """Parses a TOML or JSON scenario file and applies the two permitted
    environment overrides (seed and output directory)."""
    env = os.environ if env is None else env
    path = Path(path)
    try:
        if path.suffix == ".toml":
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        elif path.suffix == ".json":
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        else:
            raise ConfigError(f"{path}: expected a .toml or .json scenario file")
    except FileNotFoundError:
        raise ConfigError(f"{path}: scenario file not found") from None
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None

    scenario = scenario_from_mapping(data, source=str(path))
    scenario = _resolve_system_paths(scenario, path.parent)
    overrides: dict[str, Any] = {}
    if env.get(ENV_SEED):
        try:
            seed = int(env[ENV_SEED])
        except ValueError:
            raise ConfigError(f"{ENV_SEED} must be an integer") from None
        overrides["seed"] = seed
    if env.get(ENV_OUT):
        overrides["output_dir"] = env[ENV_OUT]
    return replace(scenario, **overrides) if overrides else scenario


def with_overrides(
    scenario: ScenarioConfig,
    seed: int | None = None,
    cycles: int | None = None,
    granularity: int | None = None,
    approaches: Sequence[str] | None = None,
    output_dir: str | None = None,
) -> ScenarioConfig:
    """Command-line flag overrides on top of a loaded scenario."""
    if granularity is not None:
        scenario = replace(scenario, reducer=replace(scenario.reducer, granularity=granularity))
    fields: dict[str, Any] = {}
    if seed is not None:
        fields["seed"] = seed
    if cycles is not None:
        fields["cycles"] = cycles
    if approaches is not None:
        fields["approaches"] = tuple(approaches)
    if output_dir is not None:
        fields["output_dir"] = output_dir
    return replace(scenario, **fields) if fields else scenario


def build_system(spec: SystemSpec):
    """Materializes the managed-system simulator a spec describes."""
    try:
        if spec.kind == "deltaiot":
            topology = None
            if spec.model_path is not None:
                topology = deltaiot.topology_from_json(_read_text(spec.model_path))
            profile = None
            if spec.profile_path is not None:
                profile = deltaiot.UncertaintyProfile.from_csv(spec.profile_path)
            return deltaiot.DeltaIoTSystem(
                seed=spec.seed, topology=topology, profile=profile, **spec.params
            )
        workflow = None
        if spec.model_path is not None:
            workflow = sbs.workflow_from_json(_read_text(spec.model_path))
        return sbs.SBSSystem(seed=spec.seed, workflow=workflow, **spec.params)
    except (ValueError, OSError) as exc:
        raise ConfigError(f"cannot build {spec.kind} system: {exc}") from exc


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"{path}: file not found") from None


def build_goals(scenario: ScenarioConfig, quality_names: Sequence[str]) -> GoalSet:
    """Resolves goal specs against the system's quality names. Point goals
    receive stable default names (used as CSV column suffixes)."""
    quality_names = list(quality_names)
    thresholds: list[Goal] = []
    setpoints: list[Goal] = []
    optimization: Goal | None = None
    for spec in scenario.goals:
        if spec.quality not in quality_names:
            raise ConfigError(
                f"goal quality {spec.quality!r} not in system qualities {quality_names}"
            )
        index = quality_names.index(spec.quality)
        name = spec.default_name
        if spec.kind == THRESHOLD_BELOW:
            thresholds.append(threshold_below(index, spec.bound, name=name))
        elif spec.kind == THRESHOLD_ABOVE:
            thresholds.append(threshold_above(index, spec.bound, name=name))
        elif spec.kind == SETPOINT:
            setpoints.append(setpoint(index, spec.target, spec.margin, name=name))
        else:
            if optimization is not None:
                raise ConfigError("at most one optimization goal per scenario")
            maker = optimize_min if spec.kind == OPTIMIZE_MIN else optimize_max
            optimization = maker(index, name=name)
    names = [g.name for g in thresholds + setpoints]
    if optimization is not None:
        names.append(optimization.name)
    if len(set(names)) != len(names):
        raise ConfigError(f"goal names must be unique, got {sorted(names)}")
    try:
        return GoalSet(tuple(thresholds), tuple(setpoints), optimization)
    except GoalError as exc:
        raise ConfigError(str(exc)) from exc


def _standard_scaler_sample(scenario: ScenarioConfig, mask: FeatureMask) -> np.ndarray:
    """Masked feature vectors from a short seeded uncertainty walk of a
    scratch system clone; the live run's trajectory is left untouched."""
    scratch = build_system(scenario.system)
    space = scratch.enumerate_space()
    stride = max(1, space.size // _SCALER_FIT_MAX_ROWS)
    blocks = []
    for _ in range(_SCALER_FIT_STATES):
        state = scratch.read_uncertainties()
        tail = scratch.uncertainty_features(state)
        blocks.append(compose_features(space, tail)[::stride])
        scratch.advance_time()
    return select_features(np.vstack(blocks), mask)


def build_reducer_config(scenario: ScenarioConfig, system) -> ReducerConfig:
    """Cold-start ReducerConfig for one run: mask over the system's feature
    layout, a materialized scaler, and freshly initialized models."""
    d = len(system.feature_names)
    spec = scenario.reducer
    indices = spec.features if spec.features is not None else tuple(range(d))
    try:
        mask = FeatureMask(indices)
    except FeatureError as exc:
        raise ConfigError(str(exc)) from exc
    if mask.indices[-1] >= d:
        raise ConfigError(
            f"feature index {mask.indices[-1]} out of range for {d} features"
        )

    lo, hi = system.feature_ranges()
    idx = np.asarray(mask.indices, dtype=np.int64)
    if spec.scaler == "none":
        scaler = Scaler("none", len(mask))
    elif spec.scaler == "min-max":
        scaler = scaler_from_ranges(lo[idx], hi[idx])
    elif spec.scaler == "max-abs":
        scaler = Scaler(
            "max-abs", len(mask), amax=np.maximum(np.abs(lo), np.abs(hi))[idx]
        )
    else:
        scaler = fit_scaler("standard", _standard_scaler_sample(scenario, mask))

    goals = build_goals(scenario, system.quality_names)
    n_threshold_classes = 2 ** len(goals.thresholds)
    models: dict[str, OnlineModel] = {}
    for target, model_spec in spec.models.items():
        classes = tuple(range(n_threshold_classes)) if target == "thresholds" else ()
        try:
            models[target] = make_model(
                model_spec.family,
                len(mask),
                classes=classes,
                loss=model_spec.loss,
                penalty=model_spec.penalty,
                hyperparams=Hyperparams(**model_spec.hyperparams),
            )
        except LearnerError as exc:
            raise ConfigError(f"model {target!r}: {exc}") from exc

    try:
        cfg = ReducerConfig(
            exploration_rate=spec.exploration_rate,
            warmup_count=spec.warmup_count,
            granularity=spec.granularity,
            mask=mask,
            scaler=scaler,
            models=models,
            training_strategy=spec.training_strategy,
            training_budget=spec.training_budget,
        )
        cfg.validate_for(goals)
    except ReducerError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def verifier_params(
    scenario: ScenarioConfig, system
) -> tuple[tuple[float, ...] | None, tuple[float, ...] | None]:
    """Scenario noise/cost overrides, length-checked against the system."""
    n = len(system.quality_names)
    for label, values in (("noise_stds", scenario.noise_stds), ("cost_ms", scenario.cost_ms)):
        if values is not None and len(values) != n:
            raise ConfigError(f"verifier.{label} needs {n} entries, got {len(values)}")
    return scenario.noise_stds, scenario.cost_ms


def default_candidate_catalog(n_features: int) -> tuple[OnlineModel, ...]:
    """Design-stage candidates: three classifier families and two regressor
    families with the loss/penalty variants the evaluation grid compares."""
    return (
        make_model("perceptron", n_features, classes=(0, 1)),
        make_model("sgd-classifier", n_features, classes=(0, 1), loss="log", penalty="l1"),
        make_model("sgd-classifier", n_features, classes=(0, 1), loss="hinge", penalty="l1"),
        make_model(
            "sgd-classifier", n_features, classes=(0, 1), loss="hinge", penalty="elasticnet"
        ),
        make_model("pa-classifier", n_features, classes=(0, 1), loss="hinge"),
        make_model("sgd-regressor", n_features, loss="squared"),
        make_model("pa-regressor", n_features, loss="epsilon-insensitive"),
        make_model("pa-regressor", n_features, loss="squared-epsilon-insensitive"),
    )
