"""Attribute evaluators.

The entropy family (info gain, gain ratio, symmetrical uncertainty) and
the CFS subset merit work on equal-frequency discretized columns; the
correlation, OneR and ReliefF evaluators use the raw numeric columns.
All scores are deterministic for a given dataset and seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..dataset import Dataset, quantile
from ..errors import DegenerateMatrix, SchemaMismatch
from ..rng import sample_without_replacement
from .selection import AttributeScore, PcaModel, SelectionResult


@dataclass
class DiscretizedAttribute:
    edges: tuple[float, ...]  # cut points; a value equal to a cut stays in the lower bin
    indices: np.ndarray

    @property
    def n_bins(self) -> int:
        return len(self.edges) + 1


def discretize_equal_frequency(values, bins: int = 10) -> DiscretizedAttribute:
    """Cut points at the empirical quantiles k/bins; duplicate cut points
    collapse, so constant data ends up in a single bin."""
    if bins < 2:
        raise SchemaMismatch("need at least 2 bins")
    values = np.asarray(values, dtype=float)
    cuts: list[float] = []
    for k in range(1, bins):
        c = quantile(values, k / bins)
        if not cuts or c > cuts[-1]:
            cuts.append(c)
    edges = tuple(cuts)
    indices = np.searchsorted(np.array(edges), values, side="left") if edges else np.zeros(len(values), dtype=int)
    return DiscretizedAttribute(edges=edges, indices=np.asarray(indices, dtype=int))


def _entropy_from_codes(codes: np.ndarray) -> float:
    n = codes.size
    if n == 0:
        return 0.0
    _, counts = np.unique(codes, return_counts=True)
    p = counts / n
    return float(-(p * np.log2(p)).sum())


def _label_codes(labels) -> np.ndarray:
    values = np.asarray(labels, dtype=object)
    _, codes = np.unique(values.astype(str), return_inverse=True)
    return codes


def _mutual_information(a: np.ndarray, b: np.ndarray) -> float:
    joint = a.astype(np.int64) * (b.max() + 1 if b.size else 1) + b
    return _entropy_from_codes(a) + _entropy_from_codes(b) - _entropy_from_codes(joint)


def info_gain(attr: DiscretizedAttribute, labels) -> float:
    """H(class) - H(class | attr), in bits."""
    return _mutual_information(attr.indices, _label_codes(labels))


def gain_ratio(attr: DiscretizedAttribute, labels) -> float:
    """Information gain over the attribute's own entropy; 0 when the
    attribute carries no split at all."""
    split_info = _entropy_from_codes(attr.indices)
    if split_info == 0.0:
        return 0.0
    return info_gain(attr, labels) / split_info


def symm_uncert(attr: DiscretizedAttribute, labels) -> float:
    """2 * IG / (H(attr) + H(class)), in [0, 1]."""
    codes = _label_codes(labels)
    denom = _entropy_from_codes(attr.indices) + _entropy_from_codes(codes)
    if denom == 0.0:
        return 0.0
    return 2.0 * _mutual_information(attr.indices, codes) / denom


def _pearson_abs(column: np.ndarray, indicator: np.ndarray) -> float:
    cx = column - column.mean()
    cy = indicator - indicator.mean()
    sx = math.sqrt(float(cx @ cx))
    sy = math.sqrt(float(cy @ cy))
    if sx == 0.0 or sy == 0.0:
        return 0.0
    return abs(float(cx @ cy) / (sx * sy))


def correlation_eval(column, labels) -> float:
    """|Pearson r| against the class; with more than two classes, the
    support-weighted mean of |r| against each one-vs-rest indicator."""
    column = np.asarray(column, dtype=float)
    values = np.asarray(labels, dtype=object)
    classes = sorted(set(values))
    n = len(values)
    if len(classes) <= 1:
        return 0.0
    if len(classes) == 2:
        return _pearson_abs(column, (values == classes[1]).astype(float))
    total = 0.0
    for cls in classes:
        indicator = (values == cls).astype(float)
        total += indicator.sum() / n * _pearson_abs(column, indicator)
    return total


def one_r_eval(column, labels, min_bucket: int = 6) -> float:
    """Training accuracy of a one-attribute rule: sort by value, cut into
    buckets of at least ``min_bucket`` instances (never splitting equal
    values), merge adjacent buckets sharing a majority label, score the
    fraction of instances matching their bucket's majority."""
    column = np.asarray(column, dtype=float)
    values = np.asarray(labels, dtype=object)
    n = len(column)
    order = sorted(range(n), key=lambda i: (column[i], i))

    buckets: list[list[int]] = []
    current: list[int] = []
    for pos, i in enumerate(order):
        current.append(i)
        full = len(current) >= min_bucket
        boundary = pos + 1 < n and column[order[pos + 1]] != column[i]
        if full and boundary:
            buckets.append(current)
            current = []
    if current:
        if buckets and len(current) < min_bucket:
            buckets[-1].extend(current)
        else:
            buckets.append(current)

    def majority(idx: list[int]) -> str:
        counts: dict[str, int] = {}
        for i in idx:
            counts[str(values[i])] = counts.get(str(values[i]), 0) + 1
        top = max(counts.values())
        return sorted(lab for lab, c in counts.items() if c == top)[0]

    merged: list[tuple[list[int], str]] = []
    for bucket in buckets:
        lab = majority(bucket)
        if merged and merged[-1][1] == lab:
            merged[-1][0].extend(bucket)
        else:
            merged.append((bucket, lab))

    correct = sum(1 for bucket, lab in merged for i in bucket if str(values[i]) == lab)
    return correct / n if n else 0.0


def relieff_scores(
    X: np.ndarray,
    labels,
    attribute_names,
    k: int = 10,
    sample: int | None = None,
    seed: int = 42,
) -> list[AttributeScore]:
    """ReliefF weights: reward attributes that differ on nearest misses
    and agree on nearest hits. Distances are Euclidean over all columns;
    per-attribute differences are range-normalized. k is truncated for
    classes with fewer members."""
    X = np.asarray(X, dtype=float)
    values = np.asarray(labels, dtype=object)
    n, d = X.shape
    ranges = X.max(axis=0) - X.min(axis=0) if n else np.zeros(d)
    safe = np.where(ranges == 0, 1.0, ranges)

    classes = sorted(set(values))
    members = {c: np.flatnonzero(values == c) for c in classes}
    priors = {c: len(members[c]) / n for c in classes}

    if sample is None or sample >= n:
        chosen = list(range(n))
    else:
        chosen = sorted(sample_without_replacement(n, sample, seed))
    m = len(chosen)

    weights = np.zeros(d)
    for r in chosen:
        diffs = np.abs(X - X[r]) / safe
        diffs[:, ranges == 0] = 0.0
        dist = np.sqrt((diffs * diffs).sum(axis=1))

        def nearest(pool: np.ndarray, count: int) -> np.ndarray:
            order = np.lexsort((pool, dist[pool]))
            return pool[order][:count]

        own = values[r]
        hits_pool = members[own][members[own] != r]
        k_hit = min(k, len(hits_pool))
        if k_hit:
            hit_idx = nearest(hits_pool, k_hit)
            weights -= diffs[hit_idx].sum(axis=0) / (m * k_hit)
        denom = 1.0 - priors[own]
        for other in classes:
            if other == own:
                continue
            pool = members[other]
            k_miss = min(k, len(pool))
            if not k_miss:
                continue
            miss_idx = nearest(pool, k_miss)
            weights += (priors[other] / denom) * diffs[miss_idx].sum(axis=0) / (m * k_miss)

    return [AttributeScore(name, float(w)) for name, w in zip(attribute_names, weights)]


def relieff_eval(ds: Dataset, k: int = 10, sample: int | None = None, seed: int = 42) -> list[AttributeScore]:
    return relieff_scores(ds.X, ds.labels, ds.attributes, k=k, sample=sample, seed=seed)


def pca_eval(
    ds: Dataset,
    matrix: str = "correlation",
    variance_cover: float = 0.95,
) -> tuple[PcaModel, SelectionResult]:
    """Eigendecompose the correlation or covariance matrix of the feature
    columns and keep the smallest eigenvalue-descending prefix covering
    the requested share of total variance.

    Per-attribute ranking does not survive the transformation, so the
    result is excluded from rank aggregation; projected datasets name
    their columns pc1, pc2, ...
    """
    if ds.n_attributes < 2:
        raise DegenerateMatrix("principal components need at least 2 attributes")
    if matrix not in ("correlation", "covariance"):
        raise SchemaMismatch(f"unknown matrix kind {matrix!r}")
    X = ds.X
    means = X.mean(axis=0)
    centred = X - means
    stds = None
    if matrix == "correlation":
        # sample standard deviation, so the matrix has a unit diagonal
        raw_std = np.sqrt((centred * centred).sum(axis=0) / max(ds.n_instances - 1, 1))
        stds = np.where(raw_std == 0, 1.0, raw_std)
        centred = centred / stds
    cov = centred.T @ centred / max(ds.n_instances - 1, 1)
    eigenvalues, vectors = np.linalg.eigh(cov)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = np.maximum(eigenvalues[order], 0.0)
    vectors = vectors[:, order]
    # deterministic sign: largest-magnitude loading is positive
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        lead = np.argmax(np.abs(col))
        if col[lead] < 0:
            vectors[:, j] = -col

    total = eigenvalues.sum()
    retained = len(eigenvalues)
    if total > 0:
        cum = np.cumsum(eigenvalues) / total
        retained = int(np.searchsorted(cum, variance_cover - 1e-12) + 1)
        retained = min(retained, len(eigenvalues))
    model = PcaModel(
        means=tuple(float(v) for v in means),
        stds=None if stds is None else tuple(float(v) for v in stds),
        eigenvalues=tuple(float(v) for v in eigenvalues[:retained]),
        loadings=[[float(v) for v in row] for row in vectors[:, :retained]],
        source_attributes=ds.attributes,
    )
    names = tuple(f"pc{j + 1}" for j in range(retained))
    scores = tuple(AttributeScore(name, float(eigenvalues[j])) for j, name in enumerate(names))
    result = SelectionResult(
        evaluator="pca",
        search="ranker",
        retained=names,
        scores=scores,
        threshold=None,
        params={"matrix": matrix, "variance_cover": variance_cover},
        pca=model,
    )
    return model, result


class CfsMeritScorer:
    """CFS merit over a dataset: k * mean(attr-class correlation) divided
    by sqrt(k + k(k-1) * mean(attr-attr correlation)), correlations being
    symmetrical uncertainty over discretized columns. Caches pairwise
    terms so subset searches stay cheap."""

    def __init__(self, ds: Dataset, bins: int = 10):
        self.attributes = ds.attributes
        self._codes = {
            name: discretize_equal_frequency(ds.X[:, j], bins).indices
            for j, name in enumerate(ds.attributes)
        }
        self._labels = _label_codes(ds.labels)
        self._cf: dict[str, float] = {}
        self._ff: dict[tuple[str, str], float] = {}

    def _su(self, a: np.ndarray, b: np.ndarray) -> float:
        denom = _entropy_from_codes(a) + _entropy_from_codes(b)
        if denom == 0.0:
            return 0.0
        return 2.0 * _mutual_information(a, b) / denom

    def class_correlation(self, name: str) -> float:
        if name not in self._cf:
            self._cf[name] = self._su(self._codes[name], self._labels)
        return self._cf[name]

    def pair_correlation(self, a: str, b: str) -> float:
        key = (a, b) if a <= b else (b, a)
        if key not in self._ff:
            self._ff[key] = self._su(self._codes[key[0]], self._codes[key[1]])
        return self._ff[key]

    def merit(self, subset) -> float:
        subset = list(subset)
        k = len(subset)
        if k == 0:
            return 0.0
        r_cf = sum(self.class_correlation(a) for a in subset) / k
        if k == 1:
            return merit_from_correlations(1, r_cf, 0.0)
        pairs = [(subset[i], subset[j]) for i in range(k) for j in range(i + 1, k)]
        r_ff = sum(self.pair_correlation(a, b) for a, b in pairs) / len(pairs)
        return merit_from_correlations(k, r_cf, r_ff)

    __call__ = merit


def merit_from_correlations(k: int, mean_class_corr: float, mean_pair_corr: float) -> float:
    """The CFS merit formula itself."""
    if k == 0:
        return 0.0
    return k * mean_class_corr / math.sqrt(k + k * (k - 1) * mean_pair_corr)


def cfs_merit(subset, ds: Dataset, bins: int = 10) -> float:
    return CfsMeritScorer(ds, bins=bins).merit(subset)


def rank_attributes(
    ds: Dataset,
    evaluator: str,
    bins: int = 10,
    min_bucket: int = 6,
    relieff_k: int = 10,
    relieff_sample: int | None = None,
    seed: int = 42,
) -> list[AttributeScore]:
    """Per-attribute scores for the ranker search."""
    if evaluator == "relieff":
        return relieff_scores(ds.X, ds.labels, ds.attributes,
                              k=relieff_k, sample=relieff_sample, seed=seed)
    scores = []
    for j, name in enumerate(ds.attributes):
        col = ds.X[:, j]
        if evaluator == "info_gain":
            s = info_gain(discretize_equal_frequency(col, bins), ds.labels)
        elif evaluator == "gain_ratio":
            s = gain_ratio(discretize_equal_frequency(col, bins), ds.labels)
        elif evaluator == "symm_uncert":
            s = symm_uncert(discretize_equal_frequency(col, bins), ds.labels)
        elif evaluator == "correlation":
            s = correlation_eval(col, ds.labels)
        elif evaluator == "one_r":
            s = one_r_eval(col, ds.labels, min_bucket=min_bucket)
        else:
            raise SchemaMismatch(f"evaluator {evaluator!r} does not produce a per-attribute ranking")
        scores.append(AttributeScore(name, float(s)))
    return scores
