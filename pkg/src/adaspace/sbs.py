"""Service-based health-monitoring simulator.

A workflow serves a stream of requests. Each request takes one of three
paths: a sleep-analysis path with probability p, and for awake requests
either a combined exercise-diet path (fraction alpha) or separate exercise
and diet analyses. Every path ends in a visualization step.

Each service type has two or three deployed instances, owned by one of
three providers. The adaptation decision is the traffic split across
instances per type plus alpha, giving 5*10*10*3*3*3 = 13500 options.
Provider load scales instance failure rate and cost; provider bandwidth
scales response time; all scalings are piecewise-linear curves.

Qualities are exact per-request expectations over path choice and instance
assignment. A Monte-Carlo mode samples paths and instances per request for
cross-checking the closed form.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from adaspace.space import AdaptationSpace, Dimension
from adaspace.verifier import QualityModel

ALPHA_LEVELS = (0, 25, 50, 75, 100)
QUALITY_NAMES = ("failure", "response", "cost")
PROVIDERS = (1, 2, 3)

# traffic splits: three-instance types allow every composition of thirds,
# two-instance types none/half/all to the first instance
WEIGHTS3 = tuple(
    (i / 3.0, j / 3.0, (3 - i - j) / 3.0)
    for i in range(4)
    for j in range(4 - i)
)
WEIGHTS2 = ((0.0, 1.0), (0.5, 0.5), (1.0, 0.0))

# multiplier curves in percent: (x, multiplier) breakpoints per provider
FAILURE_CURVES = {
    1: ((0.0, 60.0), (100.0, 120.0)),
    2: ((0.0, 75.0), (100.0, 125.0)),
    3: ((0.0, 75.0), (100.0, 150.0)),
}
RESPONSE_CURVES = {
    1: ((0.0, 110.0), (100.0, 80.0)),
    2: ((0.0, 125.0), (100.0, 85.0)),
    3: ((0.0, 130.0), (100.0, 90.0)),
}
COST_CURVES = {
    1: ((0.0, 100.0), (70.0, 100.0), (100.0, 200.0)),
    2: ((0.0, 100.0), (60.0, 100.0), (100.0, 250.0)),
    3: ((0.0, 100.0), (50.0, 100.0), (100.0, 300.0)),
}
CURVES = {"failure": FAILURE_CURVES, "response": RESPONSE_CURVES, "cost": COST_CURVES}


class WorkflowError(ValueError):
    """Workflow description outside the contract."""


def scaling(provider: int, quality: str, x) -> tuple[np.ndarray, bool]:
    """Multiplier in percent for a provider's quality at utilization x
    (load for failure/cost, bandwidth for response). x outside [0,100]
    is clamped and flagged."""
    if quality not in CURVES:
        raise WorkflowError(f"unknown quality {quality!r}")
    if provider not in CURVES[quality]:
        raise WorkflowError(f"unknown provider {provider!r}")
    points = CURVES[quality][provider]
    values = np.asarray(x, dtype=np.float64)
    clamped = bool(np.any(values < 0.0) or np.any(values > 100.0))
    values = np.clip(values, 0.0, 100.0)
    xs = [px for px, _ in points]
    ys = [py for _, py in points]
    result = np.interp(values, xs, ys)
    return result, clamped


@dataclass(frozen=True)
class ServiceInstance:
    provider: int
    failure_pct: float
    response_ms: float
    cost_cents: float

    def __post_init__(self) -> None:
        if self.provider not in PROVIDERS:
            raise WorkflowError(f"provider must be one of {PROVIDERS}")
        if not 0.0 <= self.failure_pct <= 100.0:
            raise WorkflowError("failure rate must be a percentage")
        if self.response_ms < 0 or self.cost_cents < 0:
            raise WorkflowError("response time and cost must be non-negative")


@dataclass(frozen=True)
class ServiceType:
    name: str
    instances: tuple[ServiceInstance, ...]

    def __post_init__(self) -> None:
        if len(self.instances) not in (2, 3):
            raise WorkflowError(f"type {self.name!r} needs 2 or 3 instances")

    @property
    def weights(self) -> tuple[tuple[float, ...], ...]:
        return WEIGHTS3 if len(self.instances) == 3 else WEIGHTS2


@dataclass(frozen=True)
class Workflow:
    """Five service types and the three request paths over them. Paths are
    tuples of type indices; the sleep path is taken with probability p,
    awake requests split alpha / 1-alpha over combined and separate."""

    types: tuple[ServiceType, ...]
    sleep_path: tuple[int, ...] = (0, 1)
    combined_path: tuple[int, ...] = (2, 1)
    separate_path: tuple[int, ...] = (3, 4, 1)

    def __post_init__(self) -> None:
        names = [t.name for t in self.types]
        if len(set(names)) != len(names):
            raise WorkflowError("duplicate service type names")
        for path in (self.sleep_path, self.combined_path, self.separate_path):
            if not path:
                raise WorkflowError("paths cannot be empty")
            if any(not 0 <= i < len(self.types) for i in path):
                raise WorkflowError("path references an unknown service type")
            if len(set(path)) != len(path):
                raise WorkflowError("a path may use each service type once")

    @property
    def paths(self) -> tuple[tuple[int, ...], ...]:
        return (self.sleep_path, self.combined_path, self.separate_path)

    def distribution_dimensions(self) -> tuple[int, ...]:
        """Type indices in dimension order: three-instance types first,
        then two-instance types, each group in declaration order."""
        three = [i for i, t in enumerate(self.types) if len(t.instances) == 3]
        two = [i for i, t in enumerate(self.types) if len(t.instances) == 2]
        return tuple(three + two)


def default_workflow() -> Workflow:
    mk = ServiceInstance
    return Workflow(
        types=(
            ServiceType("sleep-analysis", (
                mk(1, 3.0, 3.0, 8.0), mk(2, 4.5, 2.5, 6.0), mk(3, 2.0, 4.0, 10.0))),
            ServiceType("visualization", (
                mk(1, 2.5, 2.2, 4.0), mk(2, 4.0, 3.2, 3.0))),
            ServiceType("exercise-diet-analysis", (
                mk(1, 5.0, 4.5, 5.0), mk(2, 3.5, 3.5, 7.0), mk(3, 2.5, 2.8, 12.0))),
            ServiceType("exercise-analysis", (
                mk(2, 4.0, 2.6, 5.0), mk(3, 2.8, 3.8, 9.0))),
            ServiceType("diet-analysis", (
                mk(1, 3.2, 2.4, 6.0), mk(3, 5.5, 3.0, 4.0))),
        ),
    )


def workflow_to_json(workflow: Workflow) -> str:
    return json.dumps(
        {
            "types": [
                {
                    "name": t.name,
                    "instances": [
                        [i.provider, i.failure_pct, i.response_ms, i.cost_cents]
                        for i in t.instances
                    ],
                }
                for t in workflow.types
            ],
            "sleep_path": list(workflow.sleep_path),
            "combined_path": list(workflow.combined_path),
            "separate_path": list(workflow.separate_path),
        }
    )


def workflow_from_json(text: str) -> Workflow:
    data = json.loads(text)
    types = tuple(
        ServiceType(
            t["name"],
            tuple(
                ServiceInstance(int(p), float(fr), float(rt), float(c))
                for p, fr, rt, c in t["instances"]
            ),
        )
        for t in data["types"]
    )
    return Workflow(
        types=types,
        sleep_path=tuple(data["sleep_path"]),
        combined_path=tuple(data["combined_path"]),
        separate_path=tuple(data["separate_path"]),
    )


@dataclass(frozen=True)
class SBSState:
    """Provider loads and bandwidths (percent) plus the sleep-request
    probability p (percent), with a version counter for estimate caching."""

    load: np.ndarray
    bandwidth: np.ndarray
    p: float
    version: int = 0

    def __post_init__(self) -> None:
        for name in ("load", "bandwidth"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.load.shape != (3,) or self.bandwidth.shape != (3,):
            raise ValueError("need one load and one bandwidth per provider")
        for arr in (self.load, self.bandwidth):
            if np.any(arr < 0.0) or np.any(arr > 100.0):
                raise ValueError("provider state outside [0, 100]")
        if not 0.0 <= self.p <= 100.0:
            raise ValueError("p outside [0, 100]")


def initial_state(rng: np.random.Generator) -> SBSState:
    return SBSState(
        load=rng.uniform(20.0, 80.0, size=3),
        bandwidth=rng.uniform(20.0, 80.0, size=3),
        p=50.0,
        version=0,
    )


def step_uncertainties(
    state: SBSState, rng: np.random.Generator, std: float = 1.7
) -> SBSState:
    """One clamped Gaussian step for each load, bandwidth and p."""
    if std == 0.0:
        return SBSState(state.load, state.bandwidth, state.p, state.version + 1)
    return SBSState(
        load=np.clip(state.load + rng.normal(0.0, std, 3), 0.0, 100.0),
        bandwidth=np.clip(state.bandwidth + rng.normal(0.0, std, 3), 0.0, 100.0),
        p=float(np.clip(state.p + rng.normal(0.0, std), 0.0, 100.0)),
        version=state.version + 1,
    )


def _scaled_instances(workflow: Workflow, load: np.ndarray, bandwidth: np.ndarray):
    """Per type: arrays of instance failure fraction, response ms and cost
    cents after applying the provider multipliers for the current state."""
    fail_mult = {p: scaling(p, "failure", load[p - 1])[0] for p in PROVIDERS}
    resp_mult = {p: scaling(p, "response", bandwidth[p - 1])[0] for p in PROVIDERS}
    cost_mult = {p: scaling(p, "cost", load[p - 1])[0] for p in PROVIDERS}
    scaled = []
    for t in workflow.types:
        fr = np.array([i.failure_pct / 100.0 * fail_mult[i.provider] / 100.0
                       for i in t.instances])
        rt = np.array([i.response_ms * resp_mult[i.provider] / 100.0
                       for i in t.instances])
        cost = np.array([i.cost_cents * cost_mult[i.provider] / 100.0
                         for i in t.instances])
        scaled.append((fr, rt, cost))
    return scaled


def path_probabilities(p_frac, alpha_frac):
    """(sleep, combined, separate) request fractions."""
    return (
        p_frac,
        (1.0 - p_frac) * alpha_frac,
        (1.0 - p_frac) * (1.0 - alpha_frac),
    )


def compute_qualities(
    workflow: Workflow,
    config_matrix: np.ndarray,
    load: np.ndarray,
    bandwidth: np.ndarray,
    p: float,
) -> np.ndarray:
    """Exact expected (failure %, response ms, cost cents) per option row.

    Instance choices are independent across types, so the expected path
    failure 1 - prod(1 - fr) factors through per-type expectations; the
    linear qualities sum directly."""
    config_matrix = np.atleast_2d(np.asarray(config_matrix, dtype=np.float64))
    n = config_matrix.shape[0]
    scaled = _scaled_instances(workflow, np.asarray(load), np.asarray(bandwidth))
    dim_types = workflow.distribution_dimensions()

    type_fr = np.zeros((n, len(workflow.types)))
    type_rt = np.zeros_like(type_fr)
    type_cost = np.zeros_like(type_fr)
    for dim, t_index in enumerate(dim_types, start=1):
        table = np.array(workflow.types[t_index].weights)
        weights = table[config_matrix[:, dim].astype(np.int64)]
        fr, rt, cost = scaled[t_index]
        type_fr[:, t_index] = weights @ fr
        type_rt[:, t_index] = weights @ rt
        type_cost[:, t_index] = weights @ cost

    alpha = config_matrix[:, 0] / 100.0
    probs = path_probabilities(p / 100.0, alpha)
    failure = np.zeros(n)
    response = np.zeros(n)
    cost = np.zeros(n)
    for prob, path in zip(probs, workflow.paths):
        members = list(path)
        path_ok = np.ones(n)
        for t_index in members:
            path_ok *= 1.0 - type_fr[:, t_index]
        failure += prob * (1.0 - path_ok)
        response += prob * type_rt[:, members].sum(axis=1)
        cost += prob * type_cost[:, members].sum(axis=1)
    return np.column_stack([100.0 * failure, response, cost])


def monte_carlo_qualities(
    workflow: Workflow,
    config_row: Sequence[float],
    load: np.ndarray,
    bandwidth: np.ndarray,
    p: float,
    n_requests: int,
    seed: int,
) -> np.ndarray:
    """Per-request sampling cross-check: draw a path and one instance per
    type on it, then average the per-request failure probability, response
    and cost over n_requests."""
    rng = np.random.default_rng(seed)
    config_row = np.asarray(config_row, dtype=np.float64)
    scaled = _scaled_instances(workflow, np.asarray(load), np.asarray(bandwidth))
    dim_of_type = {t: d for d, t in enumerate(workflow.distribution_dimensions(), 1)}
    weights = {
        t_index: np.array(workflow.types[t_index].weights[int(config_row[dim])])
        for t_index, dim in dim_of_type.items()
    }
    probs = path_probabilities(p / 100.0, config_row[0] / 100.0)
    totals = np.zeros(3)
    path_choices = rng.choice(3, size=n_requests, p=probs)
    for choice in path_choices:
        path = workflow.paths[choice]
        ok, rt, cost = 1.0, 0.0, 0.0
        for t_index in path:
            j = rng.choice(len(weights[t_index]), p=weights[t_index])
            fr_j, rt_j, cost_j = scaled[t_index]
            ok *= 1.0 - fr_j[j]
            rt += rt_j[j]
            cost += cost_j[j]
        totals += (1.0 - ok, rt, cost)
    mean = totals / n_requests
    return np.array([100.0 * mean[0], mean[1], mean[2]])


class SBSSystem:
    """Managed-system interface over the workflow: option enumeration,
    seeded uncertainty evolution, batched exact quality estimation."""

    quality_names = QUALITY_NAMES
    noise_stds = (0.2, 0.15, 0.3)
    verify_cost_ms = (40.0, 30.0, 30.0)  # per option, summing to 100
    requests_per_cycle = 100  # adaptation is triggered every 100 requests

    def __init__(
        self,
        seed: int = 0,
        workflow: Workflow | None = None,
        walk_std: float = 1.7,
    ) -> None:
        self.workflow = workflow or default_workflow()
        self.walk_std = walk_std
        self._rng = np.random.default_rng(seed)
        self._space = self._enumerate()
        self._state = initial_state(self._rng)
        self._applied_option: int | None = None
        self._cache: tuple[int, bytes, np.ndarray] | None = None

    def _enumerate(self) -> AdaptationSpace:
        dims = [Dimension("alpha_pct", ALPHA_LEVELS)]
        for t_index in self.workflow.distribution_dimensions():
            t = self.workflow.types[t_index]
            dims.append(Dimension(f"dist_t{t_index}", tuple(range(len(t.weights)))))
        return AdaptationSpace(tuple(dims))

    def enumerate_space(self) -> AdaptationSpace:
        return self._space

    def read_uncertainties(self) -> SBSState:
        return self._state

    def apply_option(self, option_id: int) -> None:
        if not 0 <= option_id < self._space.size:
            raise ValueError(f"option id {option_id} outside the space")
        self._applied_option = option_id

    def advance_time(self) -> None:
        self._state = step_uncertainties(self._state, self._rng, self.walk_std)

    @property
    def feature_names(self) -> tuple[str, ...]:
        names = list(self._space.dimension_names)
        names += [f"load_{p}" for p in PROVIDERS]
        names += [f"bandwidth_{p}" for p in PROVIDERS]
        names.append("p")
        for p in PROVIDERS:
            names += [f"fail_mult_p{p}", f"resp_mult_p{p}", f"cost_mult_p{p}"]
        return tuple(names)

    def feature_ranges(self) -> tuple[np.ndarray, np.ndarray]:
        lo = [0.0] * 6 + [0.0] * 7
        hi = [100.0, 9.0, 9.0, 2.0, 2.0, 2.0] + [100.0] * 7
        for p in PROVIDERS:
            for curves in (FAILURE_CURVES, RESPONSE_CURVES, COST_CURVES):
                ys = [y for _, y in curves[p]]
                lo.append(min(ys))
                hi.append(max(ys))
        return np.array(lo), np.array(hi)

    def uncertainty_features(self, state: SBSState) -> np.ndarray:
        mults = []
        for p in PROVIDERS:
            mults.append(scaling(p, "failure", state.load[p - 1])[0])
            mults.append(scaling(p, "response", state.bandwidth[p - 1])[0])
            mults.append(scaling(p, "cost", state.load[p - 1])[0])
        return np.concatenate([state.load, state.bandwidth, [state.p], mults])

    def estimate_all(self, option_ids, state: SBSState) -> np.ndarray:
        ids = np.asarray(option_ids, dtype=np.int64)
        key = (state.version, ids.tobytes())
        if self._cache is not None and self._cache[:2] == key:
            return self._cache[2]
        config = np.asarray(self._space.config_matrix, dtype=np.float64)[ids]
        values = compute_qualities(
            self.workflow, config, state.load, state.bandwidth, state.p
        )
        values.setflags(write=False)
        self._cache = (state.version, ids.tobytes(), values)
        return values

    def estimate_qualities(self, option_id: int, state: SBSState) -> np.ndarray:
        return self.estimate_all([option_id], state)[0]

    def quality_models(self, noise_stds=None, cost_ms=None) -> tuple[QualityModel, ...]:
        stds = self.noise_stds if noise_stds is None else tuple(noise_stds)
        costs = self.verify_cost_ms if cost_ms is None else tuple(cost_ms)
        return tuple(
            QualityModel(
                quality_index=j,
                name=name,
                estimator=lambda ids, state, j=j: self.estimate_all(ids, state)[:, j],
                noise_std=stds[j],
                cost_ms=costs[j],
            )
            for j, name in enumerate(self.quality_names)
        )
