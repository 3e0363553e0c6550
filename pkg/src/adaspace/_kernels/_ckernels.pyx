# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Cython implementations of the hot kernels.

Same arithmetic as pykernels.py, expressed as serial C loops instead of
numpy array expressions. pykernels.py is the reference; every formula
change there must be replicated here, and the equivalence tests compare
the two on random inputs.
"""

from libc.math cimport exp, fabs

import numpy as np

# Shared integer codes (must match pykernels.py).
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


cdef inline double _sigmoid(double t) noexcept:
    cdef double e
    if t >= 0.0:
        return 1.0 / (1.0 + exp(-t))
    e = exp(t)
    return e / (1.0 + e)


cdef inline double _penalty_grad(int penalty, double w, double l1_ratio) noexcept:
    cdef double sign = 0.0
    if w > 0.0:
        sign = 1.0
    elif w < 0.0:
        sign = -1.0
    if penalty == 1:
        return sign
    if penalty == 2:
        return w
    if penalty == 3:
        return l1_ratio * sign + (1.0 - l1_ratio) * w
    return 0.0


cdef inline double _classifier_loss_grad(int loss, double score, double y) except? -1e308:
    if loss == 0:
        return -y if y * score < 1.0 else 0.0
    if loss == 1:
        return -y * _sigmoid(-y * score)
    if loss == 2:
        return 2.0 * (score - y)
    raise ValueError(f"loss code {loss} not valid for classifiers")


cdef inline double _regressor_loss_grad(
    int loss, double f, double y, double epsilon
) except? -1e308:
    cdef double err, excess
    if loss == 2:
        return -2.0 * (y - f)
    err = y - f
    if loss == 3:
        if fabs(err) <= epsilon:
            return 0.0
        return -1.0 if err > 0 else 1.0
    if loss == 4:
        excess = fabs(err) - epsilon
        if excess <= 0.0:
            return 0.0
        return -2.0 * excess * (1.0 if err > 0 else -1.0)
    raise ValueError(f"loss code {loss} not valid for regressors")


def train_pass(
    double[:, ::1] weights,
    double[::1] intercepts,
    double[:, ::1] X,
    double[::1] targets,
    int family,
    int task,
    int loss,
    int penalty,
    double eta,
    double alpha,
    double l1_ratio,
    double cap_c,
    double epsilon,
):
    """Serial in-place online updates over the rows of X.

    For classifiers, targets hold class indices (0..k-1) and each of the k
    weight rows is updated one-vs-rest with y in {-1, +1}. For regressors
    there is a single weight row and targets hold raw values.
    """
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t d = X.shape[1]
    cdef Py_ssize_t k = weights.shape[0]
    cdef Py_ssize_t i, j, f, yi
    cdef double s, yj, dl, xsq, denom, lossv, tau, step
    cdef double fhat, yv, err, pa_loss, direction, w_old
    cdef double[::1] scores = np.empty(k, dtype=np.float64)

    for i in range(n):
        if task == 0:
            yi = <Py_ssize_t> targets[i]
            for j in range(k):
                s = 0.0
                for f in range(d):
                    s += weights[j, f] * X[i, f]
                scores[j] = s + intercepts[j]
            if family == 0:
                for j in range(k):
                    yj = 1.0 if j == yi else -1.0
                    if yj * scores[j] <= 0.0:
                        for f in range(d):
                            weights[j, f] += yj * X[i, f]
                        intercepts[j] += yj
            elif family == 1:
                for j in range(k):
                    yj = 1.0 if j == yi else -1.0
                    dl = _classifier_loss_grad(loss, scores[j], yj)
                    for f in range(d):
                        w_old = weights[j, f]
                        weights[j, f] = w_old - eta * (
                            dl * X[i, f]
                            + alpha * _penalty_grad(penalty, w_old, l1_ratio)
                        )
                    intercepts[j] -= eta * dl
            else:
                xsq = 0.0
                for f in range(d):
                    xsq += X[i, f] * X[i, f]
                if loss == 2:
                    denom = xsq + 1.0 / (2.0 * cap_c)
                elif xsq <= 0.0:
                    continue
                for j in range(k):
                    yj = 1.0 if j == yi else -1.0
                    lossv = 1.0 - yj * scores[j]
                    if lossv <= 0.0:
                        continue
                    if loss == 2:
                        tau = lossv / denom
                    else:
                        tau = lossv / xsq
                        if tau > cap_c:
                            tau = cap_c
                    step = tau * yj
                    for f in range(d):
                        weights[j, f] += step * X[i, f]
                    intercepts[j] += step
        else:
            s = 0.0
            for f in range(d):
                s += weights[0, f] * X[i, f]
            fhat = s + intercepts[0]
            yv = targets[i]
            if family == 1:
                dl = _regressor_loss_grad(loss, fhat, yv, epsilon)
                for f in range(d):
                    w_old = weights[0, f]
                    weights[0, f] = w_old - eta * (
                        dl * X[i, f]
                        + alpha * _penalty_grad(penalty, w_old, l1_ratio)
                    )
                intercepts[0] -= eta * dl
            else:
                err = yv - fhat
                pa_loss = fabs(err) - epsilon
                if pa_loss <= 0.0:
                    continue
                xsq = 0.0
                for f in range(d):
                    xsq += X[i, f] * X[i, f]
                if loss == 4:
                    tau = pa_loss / (xsq + 1.0 / (2.0 * cap_c))
                elif xsq > 0.0:
                    tau = pa_loss / xsq
                    if tau > cap_c:
                        tau = cap_c
                else:
                    continue
                direction = 1.0 if err > 0 else -1.0
                step = direction * tau
                for f in range(d):
                    weights[0, f] += step * X[i, f]
                intercepts[0] += step
