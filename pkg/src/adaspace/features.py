"""Feature pipeline: per-option vector composition, relevance masking, scaling.

The runtime path is compose -> select -> scale. Masks come from tree-based
relevance scores gathered during the design stage; scalers are fitted (or
derived from declared value ranges) at design time and frozen afterwards.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from adaspace import trees
from adaspace.space import AdaptationSpace

SCALER_KINDS = ("none", "min-max", "max-abs", "standard")


class FeatureError(ValueError):
    """Feature pipeline input outside the contract."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FeatureMask:
    """Indices of raw features kept by the selection step, ascending."""

    indices: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.indices:
            raise FeatureError("mask must keep at least one feature")
        if list(self.indices) != sorted(set(self.indices)):
            raise FeatureError("mask indices must be unique and ascending")
        if self.indices[0] < 0:
            raise FeatureError("mask indices must be non-negative")

    def __len__(self) -> int:
        return len(self.indices)

    def apply_names(self, names: Sequence[str]) -> tuple[str, ...]:
        if self.indices[-1] >= len(names):
            raise FeatureError("mask index out of range for names")
        return tuple(names[i] for i in self.indices)


@dataclass(frozen=True)
class LabeledDataset:
    """Paired per-option feature vectors and measured quality vectors."""

    features: np.ndarray
    qualities: np.ndarray
    feature_names: tuple[str, ...]
    quality_names: tuple[str, ...]

    def __post_init__(self) -> None:
        features = _frozen(np.ascontiguousarray(self.features, dtype=np.float64))
        qualities = _frozen(np.ascontiguousarray(self.qualities, dtype=np.float64))
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "qualities", qualities)
        if features.ndim != 2 or qualities.ndim != 2:
            raise FeatureError("features and qualities must be 2-D")
        if features.shape[0] != qualities.shape[0]:
            raise FeatureError("features and qualities row counts differ")
        if len(self.feature_names) != features.shape[1]:
            raise FeatureError("feature names do not match feature width")
        if len(self.quality_names) != qualities.shape[1]:
            raise FeatureError("quality names do not match quality width")
        if not (np.all(np.isfinite(features)) and np.all(np.isfinite(qualities))):
            raise FeatureError("dataset values must be finite")

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    def take(self, rows) -> "LabeledDataset":
        return LabeledDataset(
            self.features[rows],
            self.qualities[rows],
            self.feature_names,
            self.quality_names,
        )


def dataset_from_rows(
    feature_rows: Sequence,
    quality_rows: Sequence,
    feature_names: Sequence[str],
    quality_names: Sequence[str],
) -> LabeledDataset:
    features = np.asarray(feature_rows, dtype=np.float64)
    qualities = np.asarray(quality_rows, dtype=np.float64)
    if features.size == 0:
        features = features.reshape(0, len(feature_names))
    if qualities.size == 0:
        qualities = qualities.reshape(0, len(quality_names))
    return LabeledDataset(features, qualities, tuple(feature_names), tuple(quality_names))


def save_dataset(ds: LabeledDataset, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [f"f_{n}" for n in ds.feature_names] + [f"q_{n}" for n in ds.quality_names]
        )
        for frow, qrow in zip(ds.features, ds.qualities):
            writer.writerow([repr(float(v)) for v in frow] + [repr(float(v)) for v in qrow])


def load_dataset(path) -> LabeledDataset:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FeatureError(f"{path}: empty dataset file") from None
        feature_names = [h[2:] for h in header if h.startswith("f_")]
        quality_names = [h[2:] for h in header if h.startswith("q_")]
        if len(feature_names) + len(quality_names) != len(header):
            raise FeatureError(f"{path}: columns must be f_/q_ prefixed")
        d = len(feature_names)
        feature_rows, quality_rows = [], []
        for row in reader:
            values = [float(v) for v in row]
            feature_rows.append(values[:d])
            quality_rows.append(values[d:])
    return dataset_from_rows(feature_rows, quality_rows, feature_names, quality_names)


def compose_features(space: AdaptationSpace, uncertainty_tail) -> np.ndarray:
    """One row per adaptation option: [config values..., uncertainty tail...],
    the tail identical across rows; row order follows option ids."""
    if space.size == 0:
        raise FeatureError("space must be non-empty")
    config = np.asarray(space.config_matrix, dtype=np.float64)
    tail = np.asarray(uncertainty_tail, dtype=np.float64).reshape(1, -1)
    if tail.shape[1] == 0:
        return config.copy()
    return np.hstack([config, np.repeat(tail, space.size, axis=0)])


def select_features(vectors, mask: FeatureMask) -> np.ndarray:
    arr = np.asarray(vectors, dtype=np.float64)
    width = arr.shape[-1] if arr.ndim > 0 else 0
    if arr.ndim not in (1, 2):
        raise FeatureError("expected a vector or a batch of vectors")
    if mask.indices[-1] >= width:
        raise FeatureError(f"mask index {mask.indices[-1]} out of range for width {width}")
    return arr[..., list(mask.indices)]


def compute_feature_importance(
    ds: LabeledDataset,
    quality_index: int,
    n_trees: int = 100,
    min_leaf: int = 2,
    max_rows: int | None = 2000,
    seed: int = 0,
) -> tuple[np.ndarray, bool]:
    """Relevance score per raw feature for one quality column (sums to 1).
    A constant target yields all-zero scores with the degenerate flag set."""
    if ds.n_rows == 0:
        raise FeatureError("dataset must be non-empty")
    if not 0 <= quality_index < ds.qualities.shape[1]:
        raise FeatureError(f"quality index {quality_index} out of range")
    return trees.feature_importance(
        ds.features,
        ds.qualities[:, quality_index],
        n_trees=n_trees,
        min_leaf=min_leaf,
        max_rows=max_rows,
        seed=seed,
    )


def mask_from_importance(scores, threshold: float | None = None) -> FeatureMask:
    """Keeps features scoring at least the threshold (default: half the mean,
    1/(2d)). All-zero scores keep everything: no evidence, no pruning."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 1 or scores.size == 0:
        raise FeatureError("scores must be a non-empty vector")
    if threshold is None:
        threshold = 1.0 / (2.0 * scores.size)
    kept = tuple(int(i) for i in np.flatnonzero(scores >= threshold))
    if not kept:
        kept = tuple(range(scores.size))
    return FeatureMask(kept)


@dataclass(frozen=True)
class Scaler:
    """Frozen per-feature transform. Zero-range features pass through
    unscaled and are reported via degenerate_indices."""

    kind: str
    n_features: int
    count: int = 0
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None
    amax: np.ndarray | None = None
    mean: np.ndarray | None = None
    m2: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.kind not in SCALER_KINDS:
            raise FeatureError(f"unknown scaler kind {self.kind!r}")
        if self.n_features < 1 or self.count < 0:
            raise FeatureError("scaler needs n_features >= 1 and count >= 0")
        for name in ("lo", "hi", "amax", "mean", "m2"):
            arr = getattr(self, name)
            if arr is not None:
                arr = _frozen(np.ascontiguousarray(arr, dtype=np.float64))
                object.__setattr__(self, name, arr)
                if arr.shape != (self.n_features,):
                    raise FeatureError(f"scaler stat {name} has wrong shape")
        if self.m2 is not None and np.any(self.m2 < 0):
            raise FeatureError("variance accumulator must be >= 0")

    @property
    def degenerate_indices(self) -> tuple[int, ...]:
        if self.kind == "min-max":
            flat = self.hi - self.lo <= 0
        elif self.kind == "max-abs":
            flat = self.amax <= 0
        elif self.kind == "standard":
            flat = self.m2 <= 0
        else:
            return ()
        return tuple(int(i) for i in np.flatnonzero(flat))


def fit_scaler(kind: str, vectors) -> Scaler:
    X = np.asarray(vectors, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise FeatureError("scaler must be fitted on a non-empty batch")
    d = X.shape[1]
    n = X.shape[0]
    if kind == "none":
        return Scaler(kind, d, count=n)
    if kind == "min-max":
        return Scaler(kind, d, count=n, lo=X.min(axis=0), hi=X.max(axis=0))
    if kind == "max-abs":
        return Scaler(kind, d, count=n, amax=np.abs(X).max(axis=0))
    if kind == "standard":
        mean = X.mean(axis=0)
        m2 = ((X - mean) ** 2).sum(axis=0)
        return Scaler(kind, d, count=n, mean=mean, m2=m2)
    raise FeatureError(f"unknown scaler kind {kind!r}")


def scaler_from_ranges(mins, maxs) -> Scaler:
    """Analytic min-max scaler over declared feature ranges (no data fit)."""
    lo = np.asarray(mins, dtype=np.float64)
    hi = np.asarray(maxs, dtype=np.float64)
    if lo.shape != hi.shape or lo.ndim != 1 or lo.size == 0:
        raise FeatureError("range bounds must be matching non-empty vectors")
    if np.any(hi < lo):
        raise FeatureError("range upper bounds must be >= lower bounds")
    return Scaler("min-max", lo.size, count=0, lo=lo, hi=hi)


def update_scaler(scaler: Scaler, vector) -> Scaler:
    """Folds one sample into the running statistics (design-stage streaming)."""
    x = np.asarray(vector, dtype=np.float64)
    if x.shape != (scaler.n_features,):
        raise FeatureError("sample width does not match scaler")
    count = scaler.count + 1
    if scaler.kind == "none":
        return replace(scaler, count=count)
    if scaler.kind == "min-max":
        if scaler.lo is None:
            return replace(scaler, count=count, lo=x.copy(), hi=x.copy())
        return replace(
            scaler,
            count=count,
            lo=np.minimum(scaler.lo, x),
            hi=np.maximum(scaler.hi, x),
        )
    if scaler.kind == "max-abs":
        amax = np.abs(x) if scaler.amax is None else np.maximum(scaler.amax, np.abs(x))
        return replace(scaler, count=count, amax=amax)
    # standard: numerically stable single-pass mean/variance update
    if scaler.mean is None:
        return replace(scaler, count=count, mean=x.copy(), m2=np.zeros_like(x))
    delta = x - scaler.mean
    mean = scaler.mean + delta / count
    m2 = scaler.m2 + delta * (x - mean)
    return replace(scaler, count=count, mean=mean, m2=np.maximum(m2, 0.0))


def apply_scaler(scaler: Scaler, vectors) -> np.ndarray:
    X = np.asarray(vectors, dtype=np.float64)
    if X.shape[-1] != scaler.n_features or X.ndim not in (1, 2):
        raise FeatureError("input width does not match scaler")
    if scaler.kind == "none":
        return X.copy()
    if scaler.kind == "min-max":
        span = scaler.hi - scaler.lo
        return np.where(span > 0, (X - scaler.lo) / np.where(span > 0, span, 1.0), X)
    if scaler.kind == "max-abs":
        amax = scaler.amax
        return np.where(amax > 0, X / np.where(amax > 0, amax, 1.0), X)
    if scaler.count == 0:
        raise FeatureError("standard scaler has no fitted statistics")
    std = np.sqrt(scaler.m2 / scaler.count)
    return np.where(std > 0, (X - scaler.mean) / np.where(std > 0, std, 1.0), X)


def mask_to_json(mask: FeatureMask) -> str:
    return json.dumps(list(mask.indices))


def mask_from_json(text: str) -> FeatureMask:
    data = json.loads(text)
    if not isinstance(data, list):
        raise FeatureError("mask JSON must be an array of indices")
    return FeatureMask(tuple(int(i) for i in data))


def scaler_to_json(scaler: Scaler) -> str:
    record: dict = {
        "kind": scaler.kind,
        "n_features": scaler.n_features,
        "count": scaler.count,
    }
    for name in ("lo", "hi", "amax", "mean", "m2"):
        arr = getattr(scaler, name)
        if arr is not None:
            record[name] = arr.tolist()
    return json.dumps(record)


def scaler_from_json(text: str) -> Scaler:
    data = json.loads(text)
    try:
        return Scaler(
            kind=data["kind"],
            n_features=int(data["n_features"]),
            count=int(data.get("count", 0)),
            lo=_maybe(data.get("lo")),
            hi=_maybe(data.get("hi")),
            amax=_maybe(data.get("amax")),
            mean=_maybe(data.get("mean")),
            m2=_maybe(data.get("m2")),
        )
    except KeyError as exc:
        raise FeatureError(f"scaler record missing field {exc}") from None


def _maybe(values) -> np.ndarray | None:
    return None if values is None else np.asarray(values, dtype=np.float64)
