"""Per-option quality estimation with simulated verification cost.

Stands in for statistical model checking: each quality has a deterministic
ground-truth estimator plus zero-mean Gaussian estimation noise, and a
simulated per-option cost in milliseconds. Verification time is therefore
accounted analytically (cost x option count) while staying deterministic
for a given seed.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


class VerifierError(ValueError):
    """Verification request outside the contract."""


@dataclass(frozen=True)
class QualityModel:
    """One verifiable quality: ground-truth estimator + noise + cost.

    The estimator is vectorized: (option ids, uncertainty state) -> one
    scalar per option."""

    quality_index: int
    name: str
    estimator: Callable[[np.ndarray, object], np.ndarray]
    noise_std: float = 0.0
    cost_ms: float = 0.0

    def __post_init__(self) -> None:
        if self.quality_index < 0:
            raise VerifierError("quality index must be >= 0")
        if not (math.isfinite(self.noise_std) and self.noise_std >= 0):
            raise VerifierError("noise std must be finite and >= 0")
        if not (math.isfinite(self.cost_ms) and self.cost_ms >= 0):
            raise VerifierError("cost must be finite and >= 0")


@dataclass(frozen=True)
class VerificationResult:
    option_ids: np.ndarray
    qualities: np.ndarray  # row i = quality vector of option_ids[i]
    simulated_ms: float
    real_ms: float


def check_coverage(models: Sequence[QualityModel], quality_indices) -> None:
    covered = {m.quality_index for m in models}
    missing = sorted(set(quality_indices) - covered)
    if missing:
        raise VerifierError(f"no quality model for quality indices {missing}")


def verify(
    option_ids,
    state,
    models: Sequence[QualityModel],
    seed: int,
) -> VerificationResult:
    """Estimates every model's quality for each option and adds one
    independent noise draw per (option, quality). Columns are placed by
    quality_index; simulated time is sum(cost_ms) per option."""
    started = time.perf_counter()
    ids = np.array(option_ids, dtype=np.int64)  # copy: result arrays are frozen
    if ids.ndim != 1 or ids.size == 0:
        raise VerifierError("need a non-empty 1-D list of option ids")
    if np.unique(ids).size != ids.size:
        raise VerifierError("duplicate option ids")
    if not models:
        raise VerifierError("need at least one quality model")
    width = max(m.quality_index for m in models) + 1
    seen = set()
    for m in models:
        if m.quality_index in seen:
            raise VerifierError(f"duplicate quality model for index {m.quality_index}")
        seen.add(m.quality_index)

    rng = np.random.default_rng(seed)
    qualities = np.zeros((ids.size, width))
    # draw noise in model order so results are reproducible per seed
    for model in sorted(models, key=lambda m: m.quality_index):
        values = np.asarray(model.estimator(ids, state), dtype=np.float64)
        if values.shape != (ids.size,):
            raise VerifierError(f"estimator for {model.name!r} returned wrong shape")
        if model.noise_std > 0:
            values = values + rng.normal(0.0, model.noise_std, size=ids.size)
        qualities[:, model.quality_index] = values

    simulated_ms = float(sum(m.cost_ms for m in models)) * ids.size
    real_ms = (time.perf_counter() - started) * 1000.0
    qualities.setflags(write=False)
    ids.setflags(write=False)
    return VerificationResult(ids, qualities, simulated_ms, real_ms)
