"""Cover comparison (overlapping F1, ONMI distance) and descriptive statistics.

Covers are passed as iterables of node collections; anything hashable works
as a node ID as long as both sides use the same IDs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp


class UndefinedScoreError(ValueError):
    pass


Communities = Sequence[Iterable[Hashable]]


def _as_sets(cover) -> list[frozenset]:
    if hasattr(cover, "members"):
        return [frozenset(m) for m in cover.members.values()]
    return [frozenset(c) for c in cover]


def _incidence(a: list[frozenset], b: list[frozenset]):
    index: dict = {}
    for group in (*a, *b):
        for node in group:
            index.setdefault(node, len(index))

    def matrix(groups):
        rows = [index[v] for g in groups for v in g]
        cols = [j for j, g in enumerate(groups) for _ in g]
        data = np.ones(len(rows), dtype=np.int64)
        return sp.csc_matrix((data, (rows, cols)), shape=(len(index), len(groups)))

    return matrix(a), matrix(b), len(index)


def intersection_matrix(a: list[frozenset], b: list[frozenset]) -> np.ndarray:
    ma, mb, _ = _incidence(a, b)
    return (ma.T @ mb).toarray()


def f1_overlapping(detected, truth) -> float:
    """Mean over detected communities of the best F1 against any truth community."""
    det, ref = _as_sets(detected), _as_sets(truth)
    if not det:
        raise UndefinedScoreError("detected cover is empty")
    if not ref:
        return 0.0
    inter = intersection_matrix(det, ref).astype(float)
    size_d = np.array([len(c) for c in det], dtype=float)[:, None]
    size_t = np.array([len(c) for c in ref], dtype=float)[None, :]
    # 2pr/(p+r) with p = i/|C'|, r = i/|C| simplifies to 2i/(|C'|+|C|); 0 when i = 0
    denom = size_d + size_t
    f1 = np.divide(2.0 * inter, denom, out=np.zeros_like(inter), where=denom > 0)
    return float(f1.max(axis=1).mean())


def _h(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -p * np.log2(p)
    return np.nan_to_num(out, nan=0.0)


def onmi_directed(detected, truth, n: int) -> float:
    """Average over detected communities of the smallest normalized lack of
    information ``H(X_k | Y_l) / H(X_k)`` against any truth community."""
    if n <= 0:
        raise UndefinedScoreError("node universe is empty")
    det, ref = _as_sets(detected), _as_sets(truth)
    if not det:
        raise UndefinedScoreError("detected cover is empty")
    inter = intersection_matrix(det, ref).astype(float) if ref else np.zeros((len(det), 0))
    sx = np.array([len(c) for c in det], dtype=float)[:, None]
    sy = np.array([len(c) for c in ref], dtype=float)[None, :]
    p11 = inter / n
    p10 = (sx - inter) / n
    p01 = (sy - inter) / n
    p00 = 1.0 - p11 - p10 - p01
    hx = (_h(sx / n) + _h(1.0 - sx / n)).ravel()
    hy = _h(sy / n) + _h(1.0 - sy / n)
    h_joint = _h(p11) + _h(p10) + _h(p01) + _h(p00)
    cond = h_joint - hy
    # pairs that share no information in the right direction cannot be matched
    matchable = _h(p11) + _h(p00) > _h(p01) + _h(p10)
    cond = np.where(matchable, cond, hx[:, None])
    best = cond.min(axis=1) if cond.shape[1] else hx.copy()
    with np.errstate(divide="ignore", invalid="ignore"):
        normalized = np.where(hx > 0, best / hx, 0.0)
    return float(np.clip(normalized, 0.0, 1.0).mean())


def onmi_distance(detected, truth, n: int) -> float:
    """Symmetric ONMI distance: mean of the two directed averages. 0 means identical."""
    return 0.5 * (onmi_directed(detected, truth, n) + onmi_directed(truth, detected, n))


@dataclass(frozen=True)
class CoverStats:
    community_count: int
    size_min: int
    size_max: int
    size_mean: float
    overlap_mean: float
    covered_nodes: int


def cover_stats(cover) -> CoverStats:
    groups = _as_sets(cover)
    if not groups:
        raise UndefinedScoreError("cover is empty")
    sizes = [len(g) for g in groups]
    counts: dict = {}
    for g in groups:
        for v in g:
            counts[v] = counts.get(v, 0) + 1
    overlap = sum(counts.values()) / len(counts) if counts else 0.0
    return CoverStats(
        community_count=len(groups),
        size_min=min(sizes),
        size_max=max(sizes),
        size_mean=sum(sizes) / len(sizes),
        overlap_mean=overlap,
        covered_nodes=len(counts),
    )
