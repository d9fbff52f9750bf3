"""Search strategies over attribute subsets and rankings."""

from __future__ import annotations

import heapq
from typing import Callable, Sequence

import numpy as np

from ..dataset import Dataset, project
from ..errors import EmptyResult, SchemaMismatch, UnknownAttribute
from .selection import AttributeScore, SelectionResult

MeritFn = Callable[[tuple[str, ...]], float]


def _sorted_scores(scores: Sequence[AttributeScore]) -> list[AttributeScore]:
    return sorted(scores, key=lambda s: (-s.score, s.attribute))


def search_best_first(
    attributes: Sequence[str],
    merit_fn: MeritFn,
    backtrack_limit: int = 5,
    direction: str = "forward",
    evaluator: str = "cfs_subset",
) -> SelectionResult:
    """Hill climb with a priority queue: repeatedly expand the most
    promising unexpanded subset by single-attribute additions (forward)
    or removals (backward); give up after ``backtrack_limit`` consecutive
    expansions that fail to improve on the best subset seen."""
    if direction not in ("forward", "backward"):
        raise SchemaMismatch(f"unknown direction {direction!r}")
    attrs = tuple(attributes)
    start: tuple[str, ...] = attrs if direction == "backward" else ()

    cache: dict[tuple[str, ...], float] = {}

    def merit(subset: tuple[str, ...]) -> float:
        if subset not in cache:
            cache[subset] = merit_fn(subset)
        return cache[subset]

    best_subset = start
    best_merit = merit(start)
    heap: list[tuple[float, tuple[str, ...]]] = [(-best_merit, start)]
    expanded: set[tuple[str, ...]] = set()
    stall = 0
    while heap and stall < backtrack_limit:
        _, node = heapq.heappop(heap)
        if node in expanded:
            continue
        expanded.add(node)
        improved = False
        if direction == "forward":
            children = [tuple(sorted(node + (a,))) for a in attrs if a not in node]
        else:
            children = [tuple(x for x in node if x != a) for a in node]
        for child in children:
            if child in expanded:
                continue
            m = merit(child)
            heapq.heappush(heap, (-m, child))
            if m > best_merit:
                best_merit = m
                best_subset = child
                improved = True
        stall = 0 if improved else stall + 1
    return SelectionResult(
        evaluator=evaluator,
        search="best_first",
        retained=tuple(sorted(best_subset)),
        params={"backtrack_limit": backtrack_limit, "direction": direction,
                "merit": best_merit},
    )


def search_greedy_stepwise(
    attributes: Sequence[str],
    merit_fn: MeritFn,
    num_to_select: int | None = None,
    threshold: float | None = None,
    generate_ranking: bool = False,
    evaluator: str = "cfs_subset",
) -> SelectionResult:
    """Strictly greedy forward selection: keep adding the single best
    attribute while that improves the merit. With ``generate_ranking``
    the walk continues through the whole attribute space, the selection
    order becomes a ranking (scored by the merit at addition) and the
    threshold / num_to_select cutoffs apply to it."""
    attrs = tuple(attributes)
    current: tuple[str, ...] = ()
    current_merit = merit_fn(current)
    order: list[AttributeScore] = []
    remaining = list(attrs)
    while remaining:
        scored = sorted(
            ((merit_fn(tuple(sorted(current + (a,)))), a) for a in remaining),
            key=lambda t: (-t[0], t[1]),
        )
        best_m, best_a = scored[0]
        if not generate_ranking and best_m <= current_merit:
            break
        current = tuple(sorted(current + (best_a,)))
        current_merit = best_m if best_m > current_merit or generate_ranking else current_merit
        order.append(AttributeScore(best_a, float(best_m)))
        remaining.remove(best_a)

    if generate_ranking:
        retained = [s.attribute for s in order]
        if threshold is not None:
            retained = [s.attribute for s in order if s.score > threshold]
        if num_to_select is not None:
            retained = retained[:num_to_select]
        return SelectionResult(
            evaluator=evaluator,
            search="greedy_stepwise",
            retained=tuple(retained),
            scores=tuple(order),
            threshold=threshold,
            num_to_select=num_to_select,
            params={"generate_ranking": True},
        )
    return SelectionResult(
        evaluator=evaluator,
        search="greedy_stepwise",
        retained=tuple(sorted(current)),
        params={"generate_ranking": False, "merit": current_merit},
    )


def ranker_select(
    scores: Sequence[AttributeScore],
    threshold: float,
    num_to_select: int | None = None,
    evaluator: str = "correlation",
) -> SelectionResult:
    """Sort score-descending (ties alphabetical), discard scores less
    than or equal to the threshold, then truncate to num_to_select."""
    ranked = _sorted_scores(scores)
    retained = [s.attribute for s in ranked if s.score > threshold]
    if num_to_select is not None:
        retained = retained[:num_to_select]
    return SelectionResult(
        evaluator=evaluator,
        search="ranker",
        retained=tuple(retained),
        scores=tuple(ranked),
        threshold=threshold,
        num_to_select=num_to_select,
    )


def reduce_dataset(ds: Dataset, selection: SelectionResult) -> Dataset:
    """Project the dataset onto the retained attributes (class kept).

    A principal-component selection instead projects onto component
    space and rescales each component linearly into [0, 1] so the result
    still satisfies the dataset contract.
    """
    if selection.pca is not None:
        if selection.pca.source_attributes != ds.attributes:
            raise UnknownAttribute("pca source attributes do not match the dataset")
        Z = selection.pca.transform_matrix(ds.X)
        lo = Z.min(axis=0)
        hi = Z.max(axis=0)
        span = np.where(hi - lo == 0, 1.0, hi - lo)
        Z = (Z - lo) / span
        reduced = Dataset(
            attributes=selection.retained,
            X=Z,
            labels=ds.labels,
            scheme=ds.scheme,
        )
        return reduced
    return project(ds, selection.retained)


def tune_threshold(
    ds_train: Dataset,
    ds_test: Dataset,
    scores: Sequence[AttributeScore],
    classifier_fn,
    metric: str = "precision",
    evaluator: str = "correlation",
):
    """Decremental threshold sweep.

    Walks the sorted unique score values from low to high (each step
    discards more attributes), evaluates ``classifier_fn(train, test)``
    on the reduced data and returns the smallest retained attribute set
    whose metric has not dropped below the full-feature baseline, plus
    the full sweep for reporting.
    """
    from ..evaluation import report_metric  # local import: evaluation builds on featsel-free modules

    baseline_report = classifier_fn(ds_train, ds_test)
    baseline = report_metric(baseline_report, metric)
    score_list = list(scores)
    floor = min(s.score for s in score_list) - 1.0

    sweep: list[dict] = [{
        "threshold": floor,
        "retained": len(score_list),
        "metric": baseline,
    }]
    best: tuple[int, float] | None = None  # (retained count, threshold)
    for t in sorted({s.score for s in score_list}):
        selection = ranker_select(score_list, threshold=t, evaluator=evaluator)
        if not selection.retained:
            break
        reduced_train = reduce_dataset(ds_train, selection)
        reduced_test = reduce_dataset(ds_test, selection)
        try:
            value = report_metric(classifier_fn(reduced_train, reduced_test), metric)
        except EmptyResult:
            break
        sweep.append({"threshold": float(t), "retained": len(selection.retained), "metric": value})
        if value >= baseline - 1e-12:
            if best is None or len(selection.retained) < best[0]:
                best = (len(selection.retained), float(t))
    if best is None:
        chosen = ranker_select(score_list, threshold=floor, evaluator=evaluator)
        return floor, chosen, sweep
    threshold = best[1]
    return threshold, ranker_select(score_list, threshold=threshold, evaluator=evaluator), sweep
