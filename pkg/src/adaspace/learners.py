"""Online linear classifiers and regressors.

Families: classic perceptron, stochastic gradient descent (SGD) and
passive-aggressive (PA) models, all over a shared immutable snapshot type.
Classifiers are one-vs-rest: one weight row per class, prediction is the
arg-max score, ties resolve to the lowest class index. A classifier is
"cold" until it has seen at least two distinct classes (a regressor until it
has seen one sample); cold predictions return the first class and callers
are expected to fail open.

Update rules (per sample x, target y; intercepts are never regularized):

* perceptron: on each one-vs-rest row with y*score <= 0, w += y*x, b += y.
* sgd: w -= eta*(dL/ds * x + alpha * dP/dw), b -= eta*dL/ds, with losses
  hinge / log / squared (classifier) and squared / epsilon-insensitive /
  squared-epsilon-insensitive (regressor); penalties none / l1 (|w|) /
  l2 (0.5*|w|^2) / elasticnet (l1_ratio*|w| + (1-l1_ratio)*0.5*|w|^2).
* pa: hinge and epsilon-insensitive losses use the PA-I step
  tau = min(C, loss/|x|^2); the squared variants use the PA-II step
  tau = loss/(|x|^2 + 1/(2C)). Zero-norm samples with positive PA-I loss
  are skipped (no update direction exists).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from adaspace._kernels import impl as _kernels
from adaspace._kernels import pykernels as _codes
from adaspace.features import LabeledDataset
from adaspace.goals import GoalSet, evaluate_goal
from adaspace.metrics import (
    ClassificationMetrics,
    RegressionMetrics,
    classification_metrics,
    regression_metrics,
)

FAMILIES = (
    "perceptron",
    "sgd-classifier",
    "pa-classifier",
    "sgd-regressor",
    "pa-regressor",
)
CLASSIFIER_LOSSES = ("hinge", "log", "squared")
REGRESSOR_LOSSES = ("squared", "epsilon-insensitive", "squared-epsilon-insensitive")
PENALTIES = ("none", "l1", "l2", "elasticnet")

_FAMILY_CODES = {
    "perceptron": _codes.FAMILY_PERCEPTRON,
    "sgd": _codes.FAMILY_SGD,
    "pa": _codes.FAMILY_PA,
}
_LOSS_CODES = {
    "hinge": _codes.LOSS_HINGE,
    "log": _codes.LOSS_LOG,
    "squared": _codes.LOSS_SQUARED,
    "epsilon-insensitive": _codes.LOSS_EPSILON_INSENSITIVE,
    "squared-epsilon-insensitive": _codes.LOSS_SQUARED_EPSILON_INSENSITIVE,
}
_PENALTY_CODES = {
    "none": _codes.PENALTY_NONE,
    "l1": _codes.PENALTY_L1,
    "l2": _codes.PENALTY_L2,
    "elasticnet": _codes.PENALTY_ELASTICNET,
}


class LearnerError(ValueError):
    """Model construction or update outside the contract."""


@dataclass(frozen=True)
class Hyperparams:
    eta: float = 0.01
    alpha: float = 1e-4
    l1_ratio: float = 0.15
    cap_c: float = 1.0
    epsilon: float = 0.1

    def __post_init__(self) -> None:
        values = (self.eta, self.alpha, self.l1_ratio, self.cap_c, self.epsilon)
        if not all(math.isfinite(v) for v in values):
            raise LearnerError("hyperparameters must be finite")
        if self.eta <= 0 or self.cap_c <= 0:
            raise LearnerError("eta and C must be > 0")


@dataclass(frozen=True)
class OnlineModel:
    family: str
    loss: str
    penalty: str
    hyperparams: Hyperparams
    classes: tuple[int, ...]
    weights: np.ndarray
    intercepts: np.ndarray
    n_updates: int = 0
    seen_classes: frozenset[int] = field(default_factory=frozenset)

    @property
    def is_classifier(self) -> bool:
        return self.family in ("perceptron", "sgd-classifier", "pa-classifier")

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]

    @property
    def cold(self) -> bool:
        if self.is_classifier:
            return len(self.seen_classes) < 2
        return self.n_updates == 0

    def _codes(self) -> tuple[int, int, int, int]:
        base = self.family.split("-")[0]
        task = _codes.TASK_CLASSIFIER if self.is_classifier else _codes.TASK_REGRESSOR
        return (
            _FAMILY_CODES[base],
            task,
            _LOSS_CODES[self.loss],
            _PENALTY_CODES[self.penalty],
        )


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def make_model(
    family: str,
    n_features: int,
    classes: Sequence[int] = (),
    loss: str = "",
    penalty: str = "none",
    hyperparams: Hyperparams | None = None,
) -> OnlineModel:
    if family not in FAMILIES:
        raise LearnerError(f"unknown family {family!r}")
    if n_features < 1:
        raise LearnerError("n_features must be >= 1")
    is_classifier = family in ("perceptron", "sgd-classifier", "pa-classifier")
    if is_classifier:
        classes = tuple(int(c) for c in classes)
        if len(classes) < 2:
            raise LearnerError("classifiers need >= 2 classes")
        if len(set(classes)) != len(classes):
            raise LearnerError("duplicate class labels")
        if not loss:
            loss = "hinge"
        if family == "perceptron":
            loss = "hinge"  # the perceptron rule ignores the loss field
        elif loss not in CLASSIFIER_LOSSES:
            raise LearnerError(f"loss {loss!r} not valid for classifiers")
        elif family == "pa-classifier" and loss == "log":
            raise LearnerError("pa-classifier needs a hinge or squared loss")
        k = len(classes)
    else:
        if classes:
            raise LearnerError("regressors take no classes")
        if not loss:
            loss = "squared" if family == "sgd-regressor" else "epsilon-insensitive"
        if loss not in REGRESSOR_LOSSES:
            raise LearnerError(f"loss {loss!r} not valid for regressors")
        if family == "pa-regressor" and loss == "squared":
            raise LearnerError("pa-regressor needs an epsilon-insensitive loss")
        classes = ()
        k = 1
    if penalty not in PENALTIES:
        raise LearnerError(f"unknown penalty {penalty!r}")
    return OnlineModel(
        family=family,
        loss=loss,
        penalty=penalty,
        hyperparams=hyperparams or Hyperparams(),
        classes=classes,
        weights=_frozen(np.zeros((k, n_features))),
        intercepts=_frozen(np.zeros(k)),
    )


def _validate_batch(model: OnlineModel, X: np.ndarray, targets: Sequence) -> np.ndarray:
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise LearnerError(f"expected (n, {model.n_features}) features, got {X.shape}")
    if len(targets) != X.shape[0]:
        raise LearnerError("targets misaligned with features")
    encoded = np.empty(len(targets), dtype=np.float64)
    if model.is_classifier:
        index = {c: i for i, c in enumerate(model.classes)}
        for i, t in enumerate(targets):
            try:
                encoded[i] = index[int(t)]
            except (KeyError, ValueError):
                raise LearnerError(f"unknown class label {t!r}") from None
    else:
        for i, t in enumerate(targets):
            t = float(t)
            if not math.isfinite(t):
                raise LearnerError(f"non-finite target {t!r}")
            encoded[i] = t
    if not np.all(np.isfinite(X)):
        raise LearnerError("non-finite feature values")
    return encoded


def learn_batch(model: OnlineModel, X: Sequence, targets: Sequence) -> OnlineModel:
    """Applies one online update per row, in row order; returns a new snapshot."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    encoded = _validate_batch(model, X, targets)
    if X.shape[0] == 0:
        return model
    weights = model.weights.copy()
    intercepts = model.intercepts.copy()
    family, task, loss, penalty = model._codes()
    hp = model.hyperparams
    _kernels.train_pass(
        weights,
        intercepts,
        X,
        encoded,
        family,
        task,
        loss,
        penalty,
        hp.eta,
        hp.alpha,
        hp.l1_ratio,
        hp.cap_c,
        hp.epsilon,
    )
    seen = model.seen_classes
    if model.is_classifier:
        seen = seen | {model.classes[int(i)] for i in encoded}
    return replace(
        model,
        weights=_frozen(weights),
        intercepts=_frozen(intercepts),
        n_updates=model.n_updates + X.shape[0],
        seen_classes=seen,
    )


def learn_online(model: OnlineModel, x: Sequence[float], target) -> OnlineModel:
    """One update step; non-finite targets are rejected with the model unchanged."""
    return learn_batch(model, np.asarray(x, dtype=np.float64).reshape(1, -1), [target])


def decision_scores(model: OnlineModel, X: Sequence) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise LearnerError(f"expected (n, {model.n_features}) features, got {X.shape}")
    return X @ model.weights.T + model.intercepts


def predict(model: OnlineModel, X: Sequence) -> np.ndarray:
    """Class labels (classifier) or values (regressor); cold classifiers
    return the first class everywhere (check model.cold before trusting)."""
    scores = decision_scores(model, X)
    if not model.is_classifier:
        return scores[:, 0]
    if model.cold:
        return np.full(scores.shape[0], model.classes[0], dtype=np.int64)
    labels = np.asarray(model.classes, dtype=np.int64)
    return labels[np.argmax(scores, axis=1)]


def serialize_model(model: OnlineModel) -> dict:
    return {
        "schema": 1,
        "family": model.family,
        "loss": model.loss,
        "penalty": model.penalty,
        "hyperparams": {
            "eta": model.hyperparams.eta,
            "alpha": model.hyperparams.alpha,
            "l1_ratio": model.hyperparams.l1_ratio,
            "cap_c": model.hyperparams.cap_c,
            "epsilon": model.hyperparams.epsilon,
        },
        "classes": list(model.classes),
        "weights": model.weights.tolist(),
        "intercepts": model.intercepts.tolist(),
        "n_updates": model.n_updates,
        "seen_classes": sorted(model.seen_classes),
    }


def deserialize_model(data: dict) -> OnlineModel:
    try:
        return OnlineModel(
            family=data["family"],
            loss=data["loss"],
            penalty=data["penalty"],
            hyperparams=Hyperparams(**data["hyperparams"]),
            classes=tuple(data["classes"]),
            weights=_frozen(np.asarray(data["weights"], dtype=np.float64)),
            intercepts=_frozen(np.asarray(data["intercepts"], dtype=np.float64)),
            n_updates=int(data.get("n_updates", 0)),
            seen_classes=frozenset(data.get("seen_classes", ())),
        )
    except KeyError as exc:
        raise LearnerError(f"model record missing field {exc}") from None


def save_model(model: OnlineModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(serialize_model(model), fh, indent=2)


def load_model(path) -> OnlineModel:
    with open(path, encoding="utf-8") as fh:
        return deserialize_model(json.load(fh))


def split(
    ds: LabeledDataset, train_fraction: float, seed: int
) -> tuple[LabeledDataset, LabeledDataset]:
    """Seeded disjoint train/test partition with |train| = round(w*n).
    Rows keep their feature/quality pairing; order within each part is the
    shuffle order, which doubles as the online training order."""
    n = ds.n_rows
    if n < 2:
        raise LearnerError("need at least 2 rows to split")
    if not 0.0 < train_fraction < 1.0:
        raise LearnerError("train fraction must be in (0, 1)")
    n_train = round(train_fraction * n)
    if n_train < 1 or n_train >= n:
        raise LearnerError(
            f"train fraction {train_fraction} leaves an empty partition for {n} rows"
        )
    order = np.random.default_rng(seed).permutation(n)
    return ds.take(order[:n_train]), ds.take(order[n_train:])


@dataclass(frozen=True)
class EvalTarget:
    """One supervised target derived from the goal set: the joint
    satisfaction class over all threshold goals, or a raw quality value
    for each setpoint/optimization goal."""

    name: str
    kind: str  # "classification" | "regression"
    values: np.ndarray
    classes: tuple[int, ...] = ()


def targets_from_qualities(qualities, goals: GoalSet) -> tuple[EvalTarget, ...]:
    """Supervised targets for a batch of quality vectors: one joint class
    per row over all threshold goals (bit i = i-th goal satisfied), plus
    each setpoint/optimization goal's raw quality column."""
    qualities = np.atleast_2d(np.asarray(qualities, dtype=np.float64))
    n_rows = qualities.shape[0]
    targets: list[EvalTarget] = []
    if goals.thresholds:
        labels = np.zeros(n_rows, dtype=np.int64)
        for bit, goal in enumerate(goals.thresholds):
            column = qualities[:, goal.quality_index]
            sat = np.fromiter(
                (evaluate_goal(goal, q) for q in column), dtype=bool, count=n_rows
            )
            labels += sat.astype(np.int64) << bit
        classes = tuple(range(2 ** len(goals.thresholds)))
        targets.append(EvalTarget("thresholds", "classification", labels, classes))
    for goal in goals.setpoints:
        targets.append(
            EvalTarget(goal.name, "regression", qualities[:, goal.quality_index])
        )
    if goals.optimization is not None:
        goal = goals.optimization
        targets.append(
            EvalTarget(goal.name, "regression", qualities[:, goal.quality_index])
        )
    return tuple(targets)


def derive_targets(ds: LabeledDataset, goals: GoalSet) -> tuple[EvalTarget, ...]:
    return targets_from_qualities(ds.qualities, goals)


@dataclass(frozen=True)
class EvalRecord:
    model_index: int
    family: str
    loss: str
    penalty: str
    target: str
    kind: str
    metrics: ClassificationMetrics | RegressionMetrics
    exploration_rate: float | None = None
    warmup_count: int | None = None


def evaluate_models(
    catalog: Sequence[OnlineModel],
    ds: LabeledDataset,
    goals: GoalSet,
    train_fraction: float = 0.7,
    seed: int = 0,
    epochs: int = 1,
    exploration_rate: float | None = None,
    warmup_count: int | None = None,
) -> tuple[EvalRecord, ...]:
    """Trains each catalog candidate online on a seeded split and scores it
    on the held-out rows, per derived target. Classifier candidates are
    scored on classification targets, regressors on regression targets; a
    fresh model with the candidate's family/loss/penalty/hyperparameters is
    instantiated per target (catalog weights are never reused)."""
    if not catalog:
        raise LearnerError("candidate catalog is empty")
    if ds.n_rows == 0:
        raise LearnerError("dataset is empty")
    if epochs < 1:
        raise LearnerError("epochs must be >= 1")
    targets = derive_targets(ds, goals)
    d = ds.features.shape[1]
    n = ds.n_rows
    order = np.random.default_rng(seed).permutation(n)
    n_train = round(train_fraction * n)
    if n_train < 1 or n_train >= n:
        raise LearnerError("train fraction leaves an empty partition")
    train_rows, test_rows = order[:n_train], order[n_train:]
    X_train, X_test = ds.features[train_rows], ds.features[test_rows]

    records: list[EvalRecord] = []
    for target in targets:
        y_train = target.values[train_rows]
        y_test = target.values[test_rows]
        for index, candidate in enumerate(catalog):
            if candidate.is_classifier != (target.kind == "classification"):
                continue
            model = make_model(
                candidate.family,
                d,
                classes=target.classes,
                loss=candidate.loss,
                penalty=candidate.penalty,
                hyperparams=candidate.hyperparams,
            )
            for _ in range(epochs):
                model = learn_batch(model, X_train, y_train)
            predicted = predict(model, X_test)
            if target.kind == "classification":
                metrics = classification_metrics(y_test, predicted)
            else:
                metrics = regression_metrics(y_test, predicted)
            records.append(
                EvalRecord(
                    model_index=index,
                    family=candidate.family,
                    loss=candidate.loss,
                    penalty=candidate.penalty,
                    target=target.name,
                    kind=target.kind,
                    metrics=metrics,
                    exploration_rate=exploration_rate,
                    warmup_count=warmup_count,
                )
            )
    return tuple(records)


def select_model(records: Sequence[EvalRecord]) -> EvalRecord:
    """Best candidate for one target: highest F1 (classification) or R2
    (regression); ties fall to higher MCC / lower MSE, then catalog order."""
    if not records:
        raise LearnerError("no evaluation records to select from")
    target_names = {r.target for r in records}
    if len(target_names) != 1:
        raise LearnerError(f"records span multiple targets: {sorted(target_names)}")

    def rank(record: EvalRecord):
        m = record.metrics
        if record.kind == "classification":
            return (-m.f1, -m.mcc, record.model_index)
        return (-m.r2, m.mse, record.model_index)

    return min(records, key=rank)


def evaluation_to_rows(records: Sequence[EvalRecord]) -> list[tuple]:
    """Flattens records to (model, goal, metric, value) rows for CSV export."""
    rows: list[tuple] = []
    for r in records:
        for name, value in vars(r.metrics).items():
            rows.append((r.model_index, r.target, name, value))
    return rows
