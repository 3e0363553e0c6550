"""Numpy implementations of the hot kernels.

This module is the reference implementation; the Cython extension
(`_ckernels.pyx`) mirrors the exact same arithmetic. Keep the two in sync:
every formula change here must be replicated there, and the equivalence
tests compare them on random inputs.
"""

from __future__ import annotations

import numpy as np

# Shared integer codes (must match _ckernels.pyx).
FAMILY_PERCEPTRON = 0
FAMILY_SGD = 1
FAMILY_PA = 2

TASK_CLASSIFIER = 0
TASK_REGRESSOR = 1

LOSS_HINGE = 0
LOSS_LOG = 1
LOSS_SQUARED = 2
LOSS_EPSILON_INSENSITIVE = 3
LOSS_SQUARED_EPSILON_INSENSITIVE = 4

PENALTY_NONE = 0
PENALTY_L1 = 1
PENALTY_L2 = 2
PENALTY_ELASTICNET = 3


def _sigmoid(t: np.ndarray) -> np.ndarray:
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _penalty_grad(penalty: int, w: np.ndarray, l1_ratio: float) -> np.ndarray:
    if penalty == PENALTY_L1:
        return np.sign(w)
    if penalty == PENALTY_L2:
        return w
    if penalty == PENALTY_ELASTICNET:
        return l1_ratio * np.sign(w) + (1.0 - l1_ratio) * w
    return np.zeros_like(w)


def _classifier_loss_grad(loss: int, scores: np.ndarray, y: np.ndarray) -> np.ndarray:
    """d(loss)/d(score) per one-vs-rest row."""
    if loss == LOSS_HINGE:
        return np.where(y * scores < 1.0, -y, 0.0)
    if loss == LOSS_LOG:
        return -y * _sigmoid(-y * scores)
    if loss == LOSS_SQUARED:
        return 2.0 * (scores - y)
    raise ValueError(f"loss code {loss} not valid for classifiers")


def _regressor_loss_grad(loss: int, f: float, y: float, epsilon: float) -> float:
    if loss == LOSS_SQUARED:
        return -2.0 * (y - f)
    err = y - f
    if loss == LOSS_EPSILON_INSENSITIVE:
        if abs(err) <= epsilon:
            return 0.0
        return -1.0 if err > 0 else 1.0
    if loss == LOSS_SQUARED_EPSILON_INSENSITIVE:
        excess = abs(err) - epsilon
        if excess <= 0.0:
            return 0.0
        return -2.0 * excess * (1.0 if err > 0 else -1.0)
    raise ValueError(f"loss code {loss} not valid for regressors")


def train_pass(
    weights: np.ndarray,
    intercepts: np.ndarray,
    X: np.ndarray,
    targets: np.ndarray,
    family: int,
    task: int,
    loss: int,
    penalty: int,
    eta: float,
    alpha: float,
    l1_ratio: float,
    cap_c: float,
    epsilon: float,
) -> None:
    """Serial in-place online updates over the rows of X.

    For classifiers, targets hold class indices (0..k-1) and each of the k
    weight rows is updated one-vs-rest with y in {-1, +1}. For regressors
    there is a single weight row and targets hold raw values.
    """
    n = X.shape[0]
    k = weights.shape[0]
    for i in range(n):
        x = X[i]
        if task == TASK_CLASSIFIER:
            y = np.full(k, -1.0)
            y[int(targets[i])] = 1.0
            scores = weights @ x + intercepts
            if family == FAMILY_PERCEPTRON:
                mistakes = y * scores <= 0.0
                if mistakes.any():
                    weights[mistakes] += y[mistakes, None] * x
                    intercepts[mistakes] += y[mistakes]
            elif family == FAMILY_SGD:
                dls = _classifier_loss_grad(loss, scores, y)
                weights -= eta * (
                    dls[:, None] * x + alpha * _penalty_grad(penalty, weights, l1_ratio)
                )
                intercepts -= eta * dls
            else:  # FAMILY_PA
                losses = np.maximum(0.0, 1.0 - y * scores)
                xsq = float(x @ x)
                if loss == LOSS_SQUARED:
                    taus = losses / (xsq + 1.0 / (2.0 * cap_c))
                elif xsq > 0.0:
                    taus = np.minimum(cap_c, losses / xsq)
                else:
                    continue
                active = losses > 0.0
                step = taus * y
                weights[active] += step[active, None] * x
                intercepts[active] += step[active]
        else:
            w = weights[0]
            f = float(w @ x) + intercepts[0]
            yv = targets[i]
            if family == FAMILY_SGD:
                dlf = _regressor_loss_grad(loss, f, yv, epsilon)
                w -= eta * (dlf * x + alpha * _penalty_grad(penalty, w, l1_ratio))
                intercepts[0] -= eta * dlf
            else:  # FAMILY_PA
                err = yv - f
                pa_loss = abs(err) - epsilon
                if pa_loss <= 0.0:
                    continue
                xsq = float(x @ x)
                if loss == LOSS_SQUARED_EPSILON_INSENSITIVE:
                    tau = pa_loss / (xsq + 1.0 / (2.0 * cap_c))
                elif xsq > 0.0:
                    tau = min(cap_c, pa_loss / xsq)
                else:
                    continue
                direction = 1.0 if err > 0 else -1.0
                w += direction * tau * x
                intercepts[0] += direction * tau
