"""IoT mesh simulator: 15 motes, 17 links, analytic quality models.

The network is a DAG rooted at the gateway (id 1). Motes 7, 10 and 12 have
two parents each; the fraction of their packets sent to the first parent is
the adaptation decision, giving 6^3 = 216 options. Uncertainties are
per-link SNR and per-mote packet load, evolving as clamped random walks.

Quality models are analytic surrogates:

* Each link's transmit power is picked per cycle as the smallest setting
  whose effective SNR (snr + 2 dB per power step) is non-negative, clamped
  to the maximum setting.
* Delivery probability is 1 at effective SNR >= 0, degrading linearly below
  (delivery_slope per dB) to 0.
* Packet loss is the expected fraction of generated packets that never
  reach the gateway, from delivery products propagated over the DAG.
* Latency is the percentage of traffic exceeding per-link slot capacity
  (loss-agnostic traffic, so it reflects congestion, not drops).
* Energy is the per-cycle transmission charge, linear in link traffic and
  transmit power.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from adaspace.space import AdaptationSpace, Dimension
from adaspace.verifier import QualityModel

SNR_MIN, SNR_MAX = -40.0, 15.0
LOAD_MIN, LOAD_MAX = 0.0, 10.0
POWER_MAX = 15
DB_PER_POWER_STEP = 2.0

DEFAULT_LINKS: tuple[tuple[int, int], ...] = (
    (2, 1), (3, 1), (4, 1), (5, 1),
    (6, 2), (7, 2), (7, 3), (8, 3),
    (9, 4), (10, 4), (10, 5), (11, 5),
    (12, 6), (12, 7), (13, 8), (14, 9), (15, 11),
)

QUALITY_NAMES = ("loss", "latency", "energy")
DISTRIBUTION_LEVELS = (0, 20, 40, 60, 80, 100)


class TopologyError(ValueError):
    """Topology description outside the contract."""


@dataclass(frozen=True)
class Topology:
    """Directed child->parent link list plus the quality-model constants."""

    links: tuple[tuple[int, int], ...] = DEFAULT_LINKS
    gateway: int = 1
    delivery_slope: float = 0.05  # delivery lost per dB below 0 effective SNR
    slot_capacity: float = 18.0  # packets per link per cycle before queueing
    energy_base: float = 40.0  # charge units per packet at power 0
    energy_per_power: float = 6.0  # extra charge units per power step
    energy_unit: float = 1000.0  # charge units per mC

    def __post_init__(self) -> None:
        if len(set(self.links)) != len(self.links):
            raise TopologyError("duplicate links")
        children = [c for c, _ in self.links]
        motes = sorted(set(children) | {p for _, p in self.links})
        if self.gateway not in motes:
            raise TopologyError("gateway not referenced by any link")
        counts = {m: children.count(m) for m in set(children)}
        if any(c > 2 for c in counts.values()):
            raise TopologyError("a mote may have at most two parents")
        if self.gateway in counts:
            raise TopologyError("gateway cannot have a parent")
        parents: dict[int, list[int]] = {}
        for c, p in self.links:
            parents.setdefault(c, []).append(p)
        for mote in motes:
            seen, frontier = set(), [mote]
            while frontier:
                node = frontier.pop()
                if node == self.gateway:
                    break
                if node in seen:
                    continue
                seen.add(node)
                frontier.extend(parents.get(node, []))
            else:
                raise TopologyError(f"mote {mote} cannot reach the gateway")
        self.depth_order()  # raises on cycles

    @property
    def motes(self) -> tuple[int, ...]:
        """Packet-generating motes (everything but the gateway), ascending."""
        ids = {c for c, _ in self.links} | {p for _, p in self.links}
        ids.discard(self.gateway)
        return tuple(sorted(ids))

    @property
    def dual_parent_motes(self) -> tuple[int, ...]:
        children = [c for c, _ in self.links]
        return tuple(sorted(m for m in set(children) if children.count(m) == 2))

    def first_link_index(self, mote: int) -> int:
        """Index of the lower-parent link of a dual-parent mote; the
        distribution dimension is the percentage routed over this link."""
        indices = [i for i, (c, _) in enumerate(self.links) if c == mote]
        return min(indices, key=lambda i: self.links[i][1])

    def depth_order(self) -> tuple[int, ...]:
        """Motes ordered deepest-first, so children are processed before
        any of their parents when propagating traffic."""
        depth: dict[int, int] = {self.gateway: 0}
        pending = set(self.motes)
        parents = {m: [p for c, p in self.links if c == m] for m in self.motes}
        while pending:
            progressed = False
            for m in sorted(pending):
                if all(p in depth for p in parents[m]):
                    depth[m] = 1 + max(depth[p] for p in parents[m])
                    pending.discard(m)
                    progressed = True
                    break
            if not progressed:
                raise TopologyError("topology is not a DAG")
        return tuple(sorted(self.motes, key=lambda m: (-depth[m], m)))


def topology_to_json(topology: Topology) -> str:
    return json.dumps(
        {
            "links": [list(l) for l in topology.links],
            "gateway": topology.gateway,
            "delivery_slope": topology.delivery_slope,
            "slot_capacity": topology.slot_capacity,
            "energy_base": topology.energy_base,
            "energy_per_power": topology.energy_per_power,
            "energy_unit": topology.energy_unit,
        }
    )


def topology_from_json(text: str) -> Topology:
    data = json.loads(text)
    return Topology(
        links=tuple((int(c), int(p)) for c, p in data["links"]),
        gateway=int(data.get("gateway", 1)),
        delivery_slope=float(data.get("delivery_slope", 0.05)),
        slot_capacity=float(data.get("slot_capacity", 18.0)),
        energy_base=float(data.get("energy_base", 40.0)),
        energy_per_power=float(data.get("energy_per_power", 6.0)),
        energy_unit=float(data.get("energy_unit", 1000.0)),
    )


@dataclass(frozen=True)
class IoTState:
    """Per-link SNR (dB) and per-mote load (packets/cycle), plus a version
    counter used for caching batch quality estimates."""

    snr: np.ndarray
    load: np.ndarray
    version: int = 0

    def __post_init__(self) -> None:
        for name in ("snr", "load"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if np.any(self.snr < SNR_MIN) or np.any(self.snr > SNR_MAX):
            raise ValueError(f"SNR outside [{SNR_MIN}, {SNR_MAX}]")
        if np.any(self.load < LOAD_MIN) or np.any(self.load > LOAD_MAX):
            raise ValueError(f"load outside [{LOAD_MIN}, {LOAD_MAX}]")


def initial_state(topology: Topology, rng: np.random.Generator) -> IoTState:
    snr = rng.uniform(SNR_MIN + 2.0, SNR_MAX - 3.0, size=len(topology.links))
    load = rng.uniform(LOAD_MIN, LOAD_MAX, size=len(topology.motes))
    return IoTState(snr, load, version=0)


def step_uncertainties(
    state: IoTState,
    rng: np.random.Generator,
    snr_std: float = 2.0,
    load_std: float = 1.0,
) -> IoTState:
    """One clamped Gaussian random-walk step for every SNR and load value."""
    snr = state.snr + rng.normal(0.0, snr_std, size=state.snr.shape) if snr_std > 0 else state.snr
    load = state.load + rng.normal(0.0, load_std, size=state.load.shape) if load_std > 0 else state.load
    return IoTState(
        np.clip(snr, SNR_MIN, SNR_MAX),
        np.clip(load, LOAD_MIN, LOAD_MAX),
        version=state.version + 1,
    )


def derive_power(snr: np.ndarray) -> tuple[np.ndarray, bool]:
    """Smallest power setting making effective SNR non-negative; links too
    weak even at maximum power are clamped and flagged."""
    needed = np.ceil(np.maximum(0.0, -np.asarray(snr)) / DB_PER_POWER_STEP)
    clamped = needed > POWER_MAX
    return np.minimum(needed, POWER_MAX).astype(np.int64), bool(clamped.any())


def link_shares(topology: Topology, config_matrix: np.ndarray) -> np.ndarray:
    """Per-option fraction of each child mote's traffic crossing each link.
    config_matrix columns follow the dual-parent motes in ascending order."""
    n = config_matrix.shape[0]
    shares = np.ones((n, len(topology.links)))
    for dim, mote in enumerate(topology.dual_parent_motes):
        first = topology.first_link_index(mote)
        fraction = config_matrix[:, dim] / 100.0
        for i, (child, _) in enumerate(topology.links):
            if child == mote:
                shares[:, i] = fraction if i == first else 1.0 - fraction
    return shares


def compute_qualities(
    topology: Topology,
    config_matrix: np.ndarray,
    snr: np.ndarray,
    load: np.ndarray,
    power: np.ndarray,
) -> np.ndarray:
    """Ground-truth (loss %, latency %, energy mC) per option row."""
    config_matrix = np.atleast_2d(np.asarray(config_matrix, dtype=np.float64))
    n = config_matrix.shape[0]
    links = topology.links
    motes = topology.motes
    mote_index = {m: i for i, m in enumerate(motes)}

    effective = np.asarray(snr, dtype=np.float64) + DB_PER_POWER_STEP * np.asarray(power)
    delivery = np.clip(1.0 + topology.delivery_slope * np.minimum(effective, 0.0), 0.0, 1.0)

    shares = link_shares(topology, config_matrix)
    # traffic propagation, deepest motes first; raw ignores losses
    raw_out = np.zeros((n, max(motes) + 1))
    delivered_out = np.zeros_like(raw_out)
    for m in motes:
        raw_out[:, m] = load[mote_index[m]]
        delivered_out[:, m] = load[mote_index[m]]
    gateway_in = np.zeros(n)
    link_raw = np.zeros((n, len(links)))
    for m in topology.depth_order():
        for i, (child, parent) in enumerate(links):
            if child != m:
                continue
            link_raw[:, i] = raw_out[:, m] * shares[:, i]
            delivered = delivered_out[:, m] * shares[:, i] * delivery[i]
            if parent == topology.gateway:
                gateway_in += delivered
            else:
                raw_out[:, parent] += link_raw[:, i]
                delivered_out[:, parent] += delivered

    generated = float(np.sum(load))
    if generated > 0:
        loss = 100.0 * (1.0 - gateway_in / generated)
        overflow = np.maximum(0.0, link_raw - topology.slot_capacity).sum(axis=1)
        latency = np.clip(100.0 * overflow / generated, 0.0, 100.0)
    else:
        loss = np.zeros(n)
        latency = np.zeros(n)
    per_packet = topology.energy_base + topology.energy_per_power * np.asarray(power)
    energy = link_raw @ per_packet / topology.energy_unit
    return np.column_stack([np.clip(loss, 0.0, 100.0), latency, energy])


class DeltaIoTSystem:
    """Managed-system interface over the mesh: option enumeration, seeded
    uncertainty evolution, and batched ground-truth quality estimation."""

    quality_names = QUALITY_NAMES
    # verifier noise defaults: 1% of each quality's typical range
    noise_stds = (1.0, 1.0, 0.15)
    verify_cost_ms = (40.0, 30.0, 30.0)  # per option, summing to 100

    def __init__(
        self,
        seed: int = 0,
        topology: Topology | None = None,
        snr_std: float = 2.0,
        load_std: float = 1.0,
        profile: "UncertaintyProfile | None" = None,
    ) -> None:
        self.topology = topology or Topology()
        self.snr_std = snr_std
        self.load_std = load_std
        self._rng = np.random.default_rng(seed)
        self._profile = profile
        self._space = self._enumerate()
        self._state = (
            profile.state_for(0, self.topology)
            if profile is not None
            else initial_state(self.topology, self._rng)
        )
        self._cycle = 0
        self._applied_option: int | None = None
        self._cache: tuple[int, bytes, np.ndarray] | None = None

    def _enumerate(self) -> AdaptationSpace:
        dims = tuple(
            Dimension(f"dist_{m}", DISTRIBUTION_LEVELS)
            for m in self.topology.dual_parent_motes
        )
        if not dims:
            raise TopologyError("topology has no dual-parent motes to adapt")
        return AdaptationSpace(dims)

    def enumerate_space(self) -> AdaptationSpace:
        return self._space

    def read_uncertainties(self) -> IoTState:
        return self._state

    def apply_option(self, option_id: int) -> None:
        if not 0 <= option_id < self._space.size:
            raise ValueError(f"option id {option_id} outside the space")
        self._applied_option = option_id

    def advance_time(self) -> None:
        self._cycle += 1
        if self._profile is not None:
            self._state = self._profile.state_for(self._cycle, self.topology)
        else:
            self._state = step_uncertainties(
                self._state, self._rng, self.snr_std, self.load_std
            )

    # feature layout: config distributions, then per-link SNR, per-mote
    # load and the per-link power chosen for the cycle
    @property
    def feature_names(self) -> tuple[str, ...]:
        names = [f"dist_{m}" for m in self.topology.dual_parent_motes]
        names += [f"snr_{c}_{p}" for c, p in self.topology.links]
        names += [f"load_{m}" for m in self.topology.motes]
        names += [f"power_{c}_{p}" for c, p in self.topology.links]
        return tuple(names)

    def feature_ranges(self) -> tuple[np.ndarray, np.ndarray]:
        n_dims = len(self.topology.dual_parent_motes)
        n_links = len(self.topology.links)
        n_motes = len(self.topology.motes)
        lo = np.concatenate([
            np.zeros(n_dims),
            np.full(n_links, SNR_MIN),
            np.full(n_motes, LOAD_MIN),
            np.zeros(n_links),
        ])
        hi = np.concatenate([
            np.full(n_dims, 100.0),
            np.full(n_links, SNR_MAX),
            np.full(n_motes, LOAD_MAX),
            np.full(n_links, float(POWER_MAX)),
        ])
        return lo, hi

    def uncertainty_features(self, state: IoTState) -> np.ndarray:
        power, _ = derive_power(state.snr)
        return np.concatenate([state.snr, state.load, power.astype(np.float64)])

    def estimate_all(self, option_ids, state: IoTState) -> np.ndarray:
        ids = np.asarray(option_ids, dtype=np.int64)
        key = (state.version, ids.tobytes())
        if self._cache is not None and self._cache[:2] == key:
            return self._cache[2]
        power, _ = derive_power(state.snr)
        config = np.asarray(self._space.config_matrix, dtype=np.float64)[ids]
        values = compute_qualities(self.topology, config, state.snr, state.load, power)
        values.setflags(write=False)
        self._cache = (state.version, ids.tobytes(), values)
        return values

    def estimate_qualities(self, option_id: int, state: IoTState) -> np.ndarray:
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


class UncertaintyProfile:
    """Recorded uncertainty playback: CSV rows (cycle, id, value) where id
    is snr_<child>_<parent> or load_<mote>. Values repeat their last cycle
    when a cycle is not listed."""

    def __init__(self, rows: Sequence[tuple[int, str, float]]) -> None:
        self._by_cycle: dict[int, dict[str, float]] = {}
        for cycle, key, value in rows:
            self._by_cycle.setdefault(int(cycle), {})[str(key)] = float(value)
        if not self._by_cycle:
            raise ValueError("profile has no rows")

    @classmethod
    def from_csv(cls, path) -> "UncertaintyProfile":
        rows = []
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if [h.strip() for h in header] != ["cycle", "id", "value"]:
                raise ValueError(f"{path}: expected header cycle,id,value")
            for cycle, key, value in reader:
                rows.append((int(cycle), key, float(value)))
        return cls(rows)

    def state_for(self, cycle: int, topology: Topology) -> IoTState:
        effective: dict[str, float] = {}
        for c in sorted(self._by_cycle):
            if c > cycle:
                break
            effective.update(self._by_cycle[c])
        snr = np.array(
            [effective.get(f"snr_{c}_{p}", 0.0) for c, p in topology.links]
        )
        load = np.array(
            [effective.get(f"load_{m}", 0.0) for m in topology.motes]
        )
        return IoTState(snr, load, version=cycle)
