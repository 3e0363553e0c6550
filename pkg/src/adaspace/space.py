"""Discrete adaptation spaces: the full cartesian grid of setting values.

An adaptation option is one configuration of the managed system. Options are
identified by their index in the row-major enumeration of the grid (first
dimension slowest), so ids are stable and the id <-> config mapping is a
bijection that never needs the materialized list.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np


class SpaceError(ValueError):
    """An option id or config fell outside the declared space."""


@dataclass(frozen=True)
class Dimension:
    name: str
    domain: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.domain) == 0:
            raise SpaceError(f"dimension {self.name!r} has an empty domain")
        if len(set(self.domain)) != len(self.domain):
            raise SpaceError(f"dimension {self.name!r} has duplicate values")


@dataclass(frozen=True)
class AdaptationOption:
    id: int
    config: tuple[float, ...]


class AdaptationSpace:
    """Immutable full enumeration over a list of discrete dimensions."""

    def __init__(self, dimensions: Sequence[Dimension]):
        if len(dimensions) == 0:
            raise SpaceError("a space needs at least one dimension")
        self.dimensions: tuple[Dimension, ...] = tuple(dimensions)
        self._radices = tuple(len(d.domain) for d in self.dimensions)

    @property
    def size(self) -> int:
        n = 1
        for r in self._radices:
            n *= r
        return n

    @property
    def dimension_names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.dimensions)

    @cached_property
    def index_matrix(self) -> np.ndarray:
        """(size, n_dims) array of per-dimension domain indices, row-major."""
        ids = np.arange(self.size, dtype=np.int64)
        out = np.empty((self.size, len(self.dimensions)), dtype=np.int64)
        for d in range(len(self.dimensions) - 1, -1, -1):
            out[:, d] = ids % self._radices[d]
            ids //= self._radices[d]
        out.setflags(write=False)
        return out

    @cached_property
    def config_matrix(self) -> np.ndarray:
        """(size, n_dims) array of actual setting values, row-major."""
        domains = [np.asarray(d.domain, dtype=np.float64) for d in self.dimensions]
        out = np.empty(self.index_matrix.shape, dtype=np.float64)
        for d, domain in enumerate(domains):
            out[:, d] = domain[self.index_matrix[:, d]]
        out.setflags(write=False)
        return out

    def option_by_id(self, option_id: int) -> AdaptationOption:
        if not 0 <= option_id < self.size:
            raise SpaceError(f"option id {option_id} outside [0, {self.size})")
        config = []
        rem = option_id
        for radix, dim in zip(reversed(self._radices), reversed(self.dimensions)):
            config.append(dim.domain[rem % radix])
            rem //= radix
        return AdaptationOption(option_id, tuple(reversed(config)))

    def id_of_config(self, config: Sequence[float]) -> int:
        if len(config) != len(self.dimensions):
            raise SpaceError("config length does not match dimension count")
        option_id = 0
        for value, dim, radix in zip(config, self.dimensions, self._radices):
            try:
                idx = dim.domain.index(value)
            except ValueError:
                raise SpaceError(f"value {value!r} not in domain of {dim.name!r}") from None
            option_id = option_id * radix + idx
        return option_id

    def enumerate_options(self) -> list[AdaptationOption]:
        configs = self.config_matrix
        return [AdaptationOption(i, tuple(configs[i])) for i in range(self.size)]
