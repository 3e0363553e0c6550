"""Extremely randomized trees for feature relevance scoring.

Regression trees with random split thresholds: at each node a random subset
of ceil(sqrt(d)) candidate features is drawn, one uniform threshold is drawn
per candidate inside the node's value range, and the candidate with the
largest variance reduction wins. Importance is the mean weighted impurity
decrease per feature, normalized per tree and averaged over the ensemble.

All randomness derives from content digests: blake2b over (seed, tree index,
node row set, per-column data digest). Column positions never enter the
stream, so permuting feature columns permutes the scores exactly; columns
with identical content share their credit equally.
"""

from __future__ import annotations

import hashlib
import math

import numpy as np

_U64 = float(2**64)


def _chain(*parts: bytes) -> bytes:
    return hashlib.blake2b(b"|".join(parts), digest_size=16).digest()


def _uniform(*parts: bytes) -> float:
    h = hashlib.blake2b(b"|".join(parts), digest_size=8)
    return int.from_bytes(h.digest(), "big") / _U64


def feature_importance(
    X,
    y,
    n_trees: int = 100,
    min_leaf: int = 2,
    max_rows: int | None = 2000,
    seed: int = 0,
) -> tuple[np.ndarray, bool]:
    """Returns (scores, degenerate). Scores are non-negative and sum to 1
    unless the target is constant (or no split is ever possible), in which
    case all scores are 0 and degenerate is True."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("feature matrix must be non-empty and 2-D")
    if y.shape != (X.shape[0],):
        raise ValueError("target misaligned with features")
    if n_trees < 1 or min_leaf < 1:
        raise ValueError("n_trees and min_leaf must be >= 1")

    if max_rows is not None and X.shape[0] > max_rows:
        rows = np.random.default_rng(seed).choice(X.shape[0], max_rows, replace=False)
        rows.sort()
        X, y = X[rows], y[rows]

    n, d = X.shape
    scores = np.zeros(d)
    if np.ptp(y) == 0.0:
        return scores, True

    digests = [_chain(X[:, j].tobytes()) for j in range(d)]
    groups: dict[bytes, list[int]] = {}
    for j, dig in enumerate(digests):
        groups.setdefault(dig, []).append(j)
    group_items = list(groups.items())
    n_candidates = math.ceil(math.sqrt(d))

    seed_key = int(seed).to_bytes(8, "big", signed=False)
    contributing_trees = 0
    for t in range(n_trees):
        tree_key = t.to_bytes(4, "big")
        tree_scores = np.zeros(d)
        stack = [np.arange(n, dtype=np.int64)]
        while stack:
            rows = stack.pop()
            n_node = rows.size
            if n_node < 2 * min_leaf:
                continue
            ys = y[rows]
            node_var = float(ys.var())
            if node_var <= 0.0:
                continue
            node_key = _chain(rows.tobytes())

            ranked = sorted(
                group_items,
                key=lambda item: (
                    _uniform(seed_key, tree_key, node_key, item[0], b"cand"),
                    item[0],
                ),
            )
            best = None
            for dig, members in ranked[:n_candidates]:
                col = X[rows, members[0]]
                lo = float(col.min())
                hi = float(col.max())
                if hi <= lo:
                    continue
                u = _uniform(seed_key, tree_key, node_key, dig, b"thr")
                threshold = lo + u * (hi - lo)
                left = col < threshold
                n_left = int(left.sum())
                n_right = n_node - n_left
                if n_left < min_leaf or n_right < min_leaf:
                    continue
                children = n_left * ys[left].var() + n_right * ys[~left].var()
                decrease = node_var - float(children) / n_node
                if best is None or (decrease, dig) > (best[0], best[1]):
                    best = (decrease, dig, members, left)
            if best is None:
                continue
            decrease, dig, members, left = best
            weighted = (n_node / n) * decrease
            tree_scores[members] += weighted / len(members)
            stack.append(rows[left])
            stack.append(rows[~left])
        # fsum is order-independent, keeping normalization exactly
        # equivariant under column permutations.
        total = math.fsum(tree_scores)
        if total > 0.0:
            scores += tree_scores / total
            contributing_trees += 1

    if contributing_trees == 0:
        return np.zeros(d), True
    return scores / math.fsum(scores), False
