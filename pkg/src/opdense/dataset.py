"""Instance matrix assembly and preprocessing.

A Dataset is an immutable (attributes, matrix, labels) triple where
every cell is an opcode density: count / total, rounded half-up to 8
decimals. Eight decimals keep a count of 5 among a million instructions
distinguishable from a true zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    EmptyResult,
    SchemaMismatch,
    TooFewInstances,
    UnknownMnemonic,
    ZeroTotal,
)
from .labels import ClassLabel, LabelScheme, infer_scheme
from .reports import LabeledHistogram
from .rng import permutation
from .rounding import round_half_up_fraction

DENSITY_DECIMALS = 8


@dataclass(frozen=True)
class ScalingParams:
    """Per-attribute (min, max) pairs captured from a training set."""

    mins: tuple[float, ...]
    maxs: tuple[float, ...]

    def __post_init__(self):
        if len(self.mins) != len(self.maxs):
            raise SchemaMismatch("scaling min/max lengths differ")
        for lo, hi in zip(self.mins, self.maxs):
            if lo > hi:
                raise SchemaMismatch("scaling has min > max")


@dataclass(frozen=True)
class Dataset:
    attributes: tuple[str, ...]
    X: np.ndarray
    labels: tuple[str, ...]
    scheme: LabelScheme
    scaling: ScalingParams | None = None

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        if X.ndim != 2:
            raise SchemaMismatch("instance matrix must be two dimensional")
        if X.shape[0] != len(self.labels):
            raise SchemaMismatch("label count does not match instance count")
        if X.shape[1] != len(self.attributes):
            raise SchemaMismatch("attribute count does not match matrix width")
        if len(set(self.attributes)) != len(self.attributes):
            raise SchemaMismatch("attribute names must be unique")
        if X.size and (not np.isfinite(X).all() or (X < 0).any()):
            raise SchemaMismatch("matrix entries must be finite and non-negative")
        for value in self.labels:
            ClassLabel(self.scheme, value)
        if self.scaling is not None and len(self.scaling.mins) != len(self.attributes):
            raise SchemaMismatch("scaling width does not match attribute count")
        X.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "attributes", tuple(self.attributes))
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def n_instances(self) -> int:
        return self.X.shape[0]

    @property
    def n_attributes(self) -> int:
        return self.X.shape[1]

    def label_array(self) -> np.ndarray:
        return np.array(self.labels, dtype=object)


def density(count: int, total: int) -> float:
    """count/total rounded half-up to 8 decimals."""
    if total == 0:
        raise ZeroTotal("total opcode count is zero")
    if not 0 <= count <= total:
        raise SchemaMismatch(f"count {count} outside [0, total={total}]")
    return round_half_up_fraction(count, total, DENSITY_DECIMALS)


def build_master_list(histograms: Sequence[LabeledHistogram]) -> list[str]:
    """Union of all mnemonics, deduplicated and sorted A to Z."""
    if not histograms:
        raise EmptyResult("no histograms to build a master list from")
    names: set[str] = set()
    for lh in histograms:
        names.update(lh.histogram.counts)
    return sorted(names)


def assemble(
    histograms: Sequence[LabeledHistogram],
    master_list: Sequence[str],
    dedupe: bool = False,
) -> Dataset:
    """One density row per histogram, in sample_id order, over the master
    attribute list; opcodes a sample never used get density zero."""
    if not histograms:
        raise EmptyResult("no histograms to assemble")
    master = list(master_list)
    index = {name: i for i, name in enumerate(master)}
    ordered = sorted(histograms, key=lambda lh: lh.histogram.sample_id)

    rows: list[np.ndarray] = []
    labels: list[str] = []
    seen_rows: set[bytes] = set()
    for lh in ordered:
        h = lh.histogram
        row = np.zeros(len(master))
        for name, count in h.counts.items():
            if name not in index:
                raise UnknownMnemonic(name)
            row[index[name]] = density(count, h.total)
        if dedupe:
            key = row.tobytes()
            if key in seen_rows:
                continue
            seen_rows.add(key)
        rows.append(row)
        labels.append(lh.label.value)

    scheme = infer_scheme(labels)
    X = np.vstack(rows) if rows else np.zeros((0, len(master)))
    return Dataset(attributes=tuple(master), X=X, labels=tuple(labels), scheme=scheme)


def sort_attributes_by_mean_density(ds: Dataset) -> Dataset:
    """Reorder columns by descending column mean, ties alphabetical."""
    means = ds.X.mean(axis=0) if ds.n_instances else np.zeros(ds.n_attributes)
    order = sorted(range(ds.n_attributes), key=lambda j: (-means[j], ds.attributes[j]))
    scaling = None
    if ds.scaling is not None:
        scaling = ScalingParams(
            mins=tuple(ds.scaling.mins[j] for j in order),
            maxs=tuple(ds.scaling.maxs[j] for j in order),
        )
    return Dataset(
        attributes=tuple(ds.attributes[j] for j in order),
        X=ds.X[:, order],
        labels=ds.labels,
        scheme=ds.scheme,
        scaling=scaling,
    )


def _scale_matrix(X: np.ndarray, params: ScalingParams, clamp: bool) -> np.ndarray:
    mins = np.array(params.mins)
    maxs = np.array(params.maxs)
    span = maxs - mins
    safe = np.where(span == 0, 1.0, span)
    out = (X - mins) / safe
    out[:, span == 0] = 0.0
    if clamp:
        out = np.clip(out, 0.0, 1.0)
    return out


def minmax_scale(ds: Dataset) -> tuple[Dataset, ScalingParams]:
    """Linear (0, 1) scaling per attribute; constant columns map to 0."""
    if ds.n_instances == 0:
        raise EmptyResult("cannot scale an empty dataset")
    params = ScalingParams(
        mins=tuple(float(v) for v in ds.X.min(axis=0)),
        maxs=tuple(float(v) for v in ds.X.max(axis=0)),
    )
    scaled = _scale_matrix(ds.X, params, clamp=False)
    return replace(ds, X=scaled, scaling=params), params


def apply_scaling(ds: Dataset, params: ScalingParams) -> Dataset:
    """Scale with stored training-set parameters, clamping into [0, 1]."""
    if len(params.mins) != ds.n_attributes:
        raise SchemaMismatch("scaling width does not match dataset")
    return replace(ds, X=_scale_matrix(ds.X, params, clamp=True), scaling=params)


def quantile(values: Sequence[float] | np.ndarray, q: float) -> float:
    """Linear interpolation between order statistics at position (n+1)*q,
    clamped to [1, n]. This is the one quantile rule used everywhere."""
    data = np.sort(np.asarray(values, dtype=float))
    n = data.size
    if n == 0:
        raise EmptyResult("quantile of empty data")
    pos = min(max((n + 1) * q, 1.0), float(n))
    lo = int(math.floor(pos))
    frac = pos - lo
    if lo >= n:
        return float(data[-1])
    return float(data[lo - 1] + frac * (data[lo] - data[lo - 1]))


@dataclass(frozen=True)
class IqrFlags:
    outlier: np.ndarray
    extreme: np.ndarray
    outlier_factor: float = 3.0
    extreme_factor: float = 6.0

    def __post_init__(self):
        if (self.extreme & ~self.outlier).any():
            raise SchemaMismatch("extreme flag without outlier flag")


def iqr_flag(ds: Dataset, outlier_factor: float = 3.0, extreme_factor: float = 6.0) -> IqrFlags:
    """Interquartile-range flags, information only; nothing is removed.

    A cell beyond [Q1 - f*IQR, Q3 + f*IQR] flags its instance, with f the
    outlier factor (3) or the extreme factor (6).
    """
    if ds.n_instances < 4:
        raise TooFewInstances("need at least 4 instances for quartiles")
    outlier = np.zeros(ds.n_instances, dtype=bool)
    extreme = np.zeros(ds.n_instances, dtype=bool)
    for j in range(ds.n_attributes):
        col = ds.X[:, j]
        q1 = quantile(col, 0.25)
        q3 = quantile(col, 0.75)
        iqr = q3 - q1
        out_mask = (col < q1 - outlier_factor * iqr) | (col > q3 + outlier_factor * iqr)
        ext_mask = (col < q1 - extreme_factor * iqr) | (col > q3 + extreme_factor * iqr)
        outlier |= out_mask
        extreme |= ext_mask
    outlier |= extreme
    return IqrFlags(outlier=outlier, extreme=extreme,
                    outlier_factor=outlier_factor, extreme_factor=extreme_factor)


def shuffle(ds: Dataset, seed: int = 42) -> Dataset:
    """Fisher-Yates permutation of the instances driven by SplitMix64."""
    order = permutation(ds.n_instances, seed)
    return replace(ds, X=ds.X[order], labels=tuple(ds.labels[i] for i in order))


def split_percentage(ds: Dataset, percent: float, invert: bool) -> Dataset:
    """Drop (or, inverted, keep) the first ceil(n*percent/100) instances.

    The plain call yields the training side, the inverted call the test
    side; together they partition the dataset.
    """
    if not 0 < percent < 100:
        raise SchemaMismatch("percent must be strictly between 0 and 100")
    n_removed = math.ceil(ds.n_instances * percent / 100.0)
    idx = range(n_removed) if invert else range(n_removed, ds.n_instances)
    idx = list(idx)
    if not idx:
        raise EmptyResult("split leaves one side empty")
    return replace(ds, X=ds.X[idx], labels=tuple(ds.labels[i] for i in idx))


def project(ds: Dataset, attribute_order: Iterable[str]) -> Dataset:
    """Columns restricted (and reordered) to ``attribute_order``."""
    names = list(attribute_order)
    index = {name: j for j, name in enumerate(ds.attributes)}
    cols = []
    for name in names:
        if name not in index:
            raise UnknownMnemonic(name)
        cols.append(index[name])
    scaling = None
    if ds.scaling is not None:
        scaling = ScalingParams(
            mins=tuple(ds.scaling.mins[j] for j in cols),
            maxs=tuple(ds.scaling.maxs[j] for j in cols),
        )
    return Dataset(
        attributes=tuple(names),
        X=ds.X[:, cols],
        labels=ds.labels,
        scheme=ds.scheme,
        scaling=scaling,
    )
