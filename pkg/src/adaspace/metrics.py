"""Learning metrics, benchmark metrics, and the Wilcoxon signed-rank test.

Classification quality is summarized as macro-F1 over the observed classes
plus the generalized (multi-class) Matthews correlation coefficient.
Regression quality is R2, mean squared error, median absolute error (the
median makes it robust to outliers), and maximum absolute error.

Benchmark aggregation: utility penalty is the mean |q_o - q_c| per quality
between the reference-optimal and the chosen option; AASR is the average
adaptation-space reduction (1 - selected/total) * 100; learning overhead is
the mean per-cycle share T_o/(T_o+T_r) * 100; time saved is the mean of
(1 - (T_r+T_o)/T_t) * 100.

The Wilcoxon implementation excludes zero differences, uses average ranks
for ties, enumerates the exact two-sided p for n < 20 (dynamic program over
the doubled ranks, which are integers), and switches to the normal
approximation with continuity correction and tie-corrected variance for
n >= 20.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np


class MetricsError(ValueError):
    """Inputs violated a metrics contract (lengths, emptiness)."""


@dataclass(frozen=True)
class ClassificationMetrics:
    f1: float
    mcc: float
    degenerate: bool = False


@dataclass(frozen=True)
class RegressionMetrics:
    r2: float
    mse: float
    mae: float
    me: float
    degenerate: bool = False


@dataclass(frozen=True)
class WilcoxonResult:
    p_value: float
    significant: bool
    statistic: float
    n_effective: int
    mode: str  # "exact" | "normal" | "degenerate"


@dataclass(frozen=True)
class QuantReport:
    n_cycles: int
    aasr_pct: float
    overhead_pct: float
    time_saved_pct: float
    utility_penalty: Mapping[str, float]
    mean_quality: Mapping[str, float]
    flags: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "n_cycles": self.n_cycles,
            "aasr_pct": self.aasr_pct,
            "overhead_pct": self.overhead_pct,
            "time_saved_pct": self.time_saved_pct,
            "utility_penalty": dict(self.utility_penalty),
            "mean_quality": dict(self.mean_quality),
            "flags": list(self.flags),
        }


def _check_lengths(y_true: Sequence, y_pred: Sequence) -> None:
    if len(y_true) != len(y_pred):
        raise MetricsError(f"length mismatch: {len(y_true)} vs {len(y_pred)}")
    if len(y_true) == 0:
        raise MetricsError("empty inputs")


def accuracy(y_true: Sequence[int], y_pred: Sequence[int]) -> float:
    _check_lengths(y_true, y_pred)
    hits = sum(1 for t, p in zip(y_true, y_pred) if t == p)
    return hits / len(y_true)


def classification_metrics(
    y_true: Sequence[int], y_pred: Sequence[int]
) -> ClassificationMetrics:
    _check_lengths(y_true, y_pred)
    yt = np.asarray(y_true)
    yp = np.asarray(y_pred)
    classes = sorted(set(yt.tolist()) | set(yp.tolist()))

    f1_sum = 0.0
    for c in classes:
        tp = int(np.sum((yt == c) & (yp == c)))
        fp = int(np.sum((yt != c) & (yp == c)))
        fn = int(np.sum((yt == c) & (yp != c)))
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1_sum += 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    f1 = f1_sum / len(classes)

    # Generalized MCC (Gorodkin): correlation between true and predicted
    # class-count vectors over the confusion matrix.
    s = len(yt)
    correct = int(np.sum(yt == yp))
    true_counts = np.array([int(np.sum(yt == c)) for c in classes], dtype=np.float64)
    pred_counts = np.array([int(np.sum(yp == c)) for c in classes], dtype=np.float64)
    cov = correct * s - float(true_counts @ pred_counts)
    denom_sq = (s * s - float(pred_counts @ pred_counts)) * (
        s * s - float(true_counts @ true_counts)
    )
    degenerate = denom_sq <= 0
    mcc = 0.0 if degenerate else cov / math.sqrt(denom_sq)
    return ClassificationMetrics(f1=f1, mcc=mcc, degenerate=degenerate)


def regression_metrics(
    y_true: Sequence[float], y_pred: Sequence[float]
) -> RegressionMetrics:
    _check_lengths(y_true, y_pred)
    yt = np.asarray(y_true, dtype=np.float64)
    yp = np.asarray(y_pred, dtype=np.float64)
    if len(yt) < 2:
        raise MetricsError("R2 needs at least 2 samples")
    residuals = yt - yp
    abs_res = np.abs(residuals)
    ss_res = float(residuals @ residuals)
    centered = yt - yt.mean()
    ss_tot = float(centered @ centered)
    degenerate = ss_tot == 0.0
    r2 = 0.0 if degenerate else 1.0 - ss_res / ss_tot
    return RegressionMetrics(
        r2=r2,
        mse=float(np.mean(residuals**2)),
        mae=float(np.median(abs_res)),
        me=float(np.max(abs_res)),
        degenerate=degenerate,
    )


def learning_time_shares(t_learn_ms: float, t_verify_ms: float) -> tuple[float, float]:
    """(learning share, verification share) of one cycle; sums to 1 exactly."""
    total = t_learn_ms + t_verify_ms
    if total <= 0:
        return 0.0, 1.0
    learn = t_learn_ms / total
    return learn, 1.0 - learn


def quantitative_metrics(
    quality_names: Sequence[str],
    n_total: Sequence[int],
    n_verified: Sequence[int],
    t_total_sim_ms: Sequence[float],
    t_reduced_sim_ms: Sequence[float],
    t_learn_real_ms: Sequence[float],
    chosen_q: np.ndarray,
    reference_q: np.ndarray,
) -> QuantReport:
    """Aggregates aligned per-cycle streams of one approach into a QuantReport."""
    n = len(n_total)
    arrays = [n_verified, t_total_sim_ms, t_reduced_sim_ms, t_learn_real_ms]
    if any(len(a) != n for a in arrays) or len(chosen_q) != n or len(reference_q) != n:
        raise MetricsError("cycle streams are not aligned")
    if n == 0:
        raise MetricsError("empty cycle streams")

    flags: list[str] = []
    total = np.asarray(n_total, dtype=np.float64)
    verified = np.asarray(n_verified, dtype=np.float64)
    aasr = (1.0 - verified.mean() / total.mean()) * 100.0

    t_r = np.asarray(t_reduced_sim_ms, dtype=np.float64)
    t_o = np.asarray(t_learn_real_ms, dtype=np.float64)
    t_t = np.asarray(t_total_sim_ms, dtype=np.float64)
    cycle_total = t_o + t_r
    if np.any(cycle_total <= 0):
        flags.append("zero-verification-time-cycles")
    shares = np.divide(t_o, cycle_total, out=np.zeros_like(t_o), where=cycle_total > 0)
    overhead = float(shares.mean() * 100.0)

    if np.any(t_t <= 0):
        flags.append("zero-total-time-cycles")
        time_saved = math.nan
    else:
        time_saved = float(np.mean(1.0 - (t_r + t_o) / t_t) * 100.0)

    chosen = np.asarray(chosen_q, dtype=np.float64)
    reference = np.asarray(reference_q, dtype=np.float64)
    penalty = np.abs(reference - chosen).mean(axis=0)
    means = chosen.mean(axis=0)
    return QuantReport(
        n_cycles=n,
        aasr_pct=float(aasr),
        overhead_pct=overhead,
        time_saved_pct=time_saved,
        utility_penalty={name: float(p) for name, p in zip(quality_names, penalty)},
        mean_quality={name: float(m) for name, m in zip(quality_names, means)},
        flags=tuple(flags),
    )


def _signed_ranks(xs: Sequence[float], ys: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """Average ranks of the non-zero |differences| and the difference signs."""
    if len(xs) != len(ys):
        raise MetricsError("paired samples must have equal length")
    diffs = np.asarray(xs, dtype=np.float64) - np.asarray(ys, dtype=np.float64)
    diffs = diffs[diffs != 0.0]
    if diffs.size == 0:
        return np.empty(0), np.empty(0)
    magnitudes = np.abs(diffs)
    order = np.argsort(magnitudes, kind="stable")
    ranks = np.empty(diffs.size, dtype=np.float64)
    sorted_mag = magnitudes[order]
    i = 0
    while i < diffs.size:
        j = i
        while j + 1 < diffs.size and sorted_mag[j + 1] == sorted_mag[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks, np.sign(diffs)


def _exact_two_sided_p(ranks: np.ndarray, w_min: float) -> float:
    """P(min(W+, W-) <= w_min) over all equally likely sign assignments.

    Dynamic program over doubled ranks (integers even with tie-averaged
    ranks); counts exactly what the brute-force 2^n enumeration counts.
    """
    doubled = np.rint(ranks * 2).astype(np.int64)
    total = int(doubled.sum())
    counts = np.zeros(total + 1, dtype=object)
    counts[0] = 1
    for r in doubled:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: total + 1 - r]
        counts = counts + shifted
    w2 = int(round(w_min * 2))
    hits = 0
    for s, c in enumerate(counts):
        if min(s, total - s) <= w2:
            hits += int(c)
    return hits / float(2 ** len(doubled))


def _normal_two_sided_p(ranks: np.ndarray, w_min: float) -> float:
    n = ranks.size
    mean = n * (n + 1) / 4.0
    variance = n * (n + 1) * (2 * n + 1) / 24.0
    # Tie correction: each group of t tied ranks removes (t^3 - t)/48.
    _, tie_counts = np.unique(ranks, return_counts=True)
    variance -= float(np.sum(tie_counts.astype(np.float64) ** 3 - tie_counts)) / 48.0
    if variance <= 0:
        return 1.0
    z = (w_min - mean + 0.5) / math.sqrt(variance)
    return min(1.0, 2.0 * 0.5 * math.erfc(-z / math.sqrt(2.0)))


EXACT_MODE_MAX_N = 19


def wilcoxon_signed_rank(
    xs: Sequence[float], ys: Sequence[float], alpha: float = 0.05
) -> WilcoxonResult:
    """Two-sided paired Wilcoxon signed-rank test."""
    if len(xs) < 6:
        raise MetricsError("need at least 6 pairs")
    ranks, signs = _signed_ranks(xs, ys)
    n = ranks.size
    if n == 0:
        return WilcoxonResult(1.0, False, 0.0, 0, "degenerate")
    w_plus = float(ranks[signs > 0].sum())
    w_minus = float(ranks[signs < 0].sum())
    w_min = min(w_plus, w_minus)
    if n <= EXACT_MODE_MAX_N:
        p = _exact_two_sided_p(ranks, w_min)
        mode = "exact"
    else:
        p = _normal_two_sided_p(ranks, w_min)
        mode = "normal"
    return WilcoxonResult(p, p < alpha, w_min, int(n), mode)
