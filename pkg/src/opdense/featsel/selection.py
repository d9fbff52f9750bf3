"""Selection result container and its on-disk form."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import SchemaMismatch

EVALUATORS = (
    "cfs_subset",
    "correlation",
    "gain_ratio",
    "info_gain",
    "one_r",
    "pca",
    "relieff",
    "symm_uncert",
)
SEARCHES = ("best_first", "greedy_stepwise", "ranker")
SELECTION_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class AttributeScore:
    attribute: str
    score: float

    def __post_init__(self):
        if not np.isfinite(self.score):
            raise SchemaMismatch(f"score for {self.attribute!r} is not finite")


@dataclass
class PcaModel:
    """Enough of a principal-component decomposition to project new data."""

    means: tuple[float, ...]
    stds: tuple[float, ...] | None  # None for the covariance matrix variant
    eigenvalues: tuple[float, ...]
    loadings: list[list[float]]  # attributes x retained components
    source_attributes: tuple[str, ...]

    def transform_matrix(self, X: np.ndarray) -> np.ndarray:
        Z = X - np.array(self.means)
        if self.stds is not None:
            Z = Z / np.array(self.stds)
        return Z @ np.array(self.loadings)


@dataclass
class SelectionResult:
    evaluator: str
    search: str
    retained: tuple[str, ...]
    scores: tuple[AttributeScore, ...] | None = None
    threshold: float | None = None
    num_to_select: int | None = None
    params: dict = field(default_factory=dict)
    pca: PcaModel | None = None

    def __post_init__(self):
        if self.evaluator not in EVALUATORS:
            raise SchemaMismatch(f"unknown evaluator {self.evaluator!r}")
        if self.search not in SEARCHES:
            raise SchemaMismatch(f"unknown search {self.search!r}")


def save_selection(result: SelectionResult) -> str:
    doc = {
        "schema": SELECTION_SCHEMA_VERSION,
        "evaluator": result.evaluator,
        "search": result.search,
        "retained": list(result.retained),
        "scores": None if result.scores is None else [
            {"attribute": s.attribute, "score": round(float(s.score), 8)} for s in result.scores
        ],
        "threshold": result.threshold,
        "num_to_select": result.num_to_select,
        "params": result.params,
        "pca": None if result.pca is None else {
            "means": list(result.pca.means),
            "stds": None if result.pca.stds is None else list(result.pca.stds),
            "eigenvalues": list(result.pca.eigenvalues),
            "loadings": result.pca.loadings,
            "source_attributes": list(result.pca.source_attributes),
        },
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def load_selection(text: str) -> SelectionResult:
    doc = json.loads(text)
    if doc.get("schema") != SELECTION_SCHEMA_VERSION:
        raise SchemaMismatch(f"unsupported selection schema {doc.get('schema')!r}")
    scores = None
    if doc["scores"] is not None:
        scores = tuple(AttributeScore(s["attribute"], s["score"]) for s in doc["scores"])
    pca = None
    if doc["pca"] is not None:
        p = doc["pca"]
        pca = PcaModel(
            means=tuple(p["means"]),
            stds=None if p["stds"] is None else tuple(p["stds"]),
            eigenvalues=tuple(p["eigenvalues"]),
            loadings=p["loadings"],
            source_attributes=tuple(p["source_attributes"]),
        )
    return SelectionResult(
        evaluator=doc["evaluator"],
        search=doc["search"],
        retained=tuple(doc["retained"]),
        scores=scores,
        threshold=doc["threshold"],
        num_to_select=doc["num_to_select"],
        params=doc.get("params", {}),
        pca=pca,
    )
