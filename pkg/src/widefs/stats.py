"""Rank statistics over benchmark results: blocked Friedman analysis.

Errors are compared across treatments (selectors, or whole classifier x
ranker x selector combinations) by ranking them within each block (one
dataset x run row), since raw errors are not commensurable across
datasets.  The Friedman test uses the tie-corrected statistic, and the
sequential best-group procedure grows the set of treatments that are
statistically indistinguishable from the best one.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .samplesize import chi2_sf

SELECTOR_TABLE_ORDER = ("BEST3", "EX10", "RND20", "TOP3", "TOP10", "TOP20", "ALL")


@dataclass(frozen=True)
class RankMatrix:
    """Per-block midranks of k treatments; each row sums to k(k+1)/2."""

    ranks: np.ndarray
    treatments: tuple[str, ...] | None = None

    def __post_init__(self):
        ranks = np.asarray(self.ranks, dtype=np.float64)
        if ranks.ndim != 2 or ranks.size == 0:
            raise ValueError("rank matrix must be a non-empty 2-D array")
        object.__setattr__(self, "ranks", ranks)

    @property
    def n_blocks(self) -> int:
        return self.ranks.shape[0]

    @property
    def k_treatments(self) -> int:
        return self.ranks.shape[1]

    def average_ranks(self) -> np.ndarray:
        return self.ranks.mean(axis=0)


@dataclass(frozen=True)
class FriedmanResult:
    statistic: float
    dof: int
    p_value: float
    n_blocks: int
    k_treatments: int


def midranks(values: np.ndarray) -> np.ndarray:
    """Ascending ranks 1..k with ties replaced by their average rank."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def rank_rows(errors) -> RankMatrix:
    """Rank each row of an error matrix (lower error = rank 1, ties midranked)."""
    errors = np.asarray(errors, dtype=np.float64)
    if errors.ndim != 2 or errors.size == 0:
        raise ValueError("need a non-empty 2-D error matrix")
    return RankMatrix(np.vstack([midranks(row) for row in errors]))


def friedman_test(ranks) -> FriedmanResult:
    """Blocked Friedman test with tie correction.

    Accepts a RankMatrix (or raw midrank array).  The statistic is
    (k-1) * sum_j (R_j - n(k+1)/2)^2 / (A - C) with A the sum of squared
    midranks and C = n k (k+1)^2 / 4; it reduces to the classic formula
    without ties and follows chi-squared with k-1 dof under the null.
    A fully tied matrix yields statistic 0 and p-value 1.
    """
    R = ranks.ranks if isinstance(ranks, RankMatrix) else np.asarray(ranks, dtype=np.float64)
    n, k = R.shape
    if n < 2 or k < 2:
        raise ValueError("need at least 2 blocks and 2 treatments")
    col_sums = R.sum(axis=0)
    a = float(np.sum(R * R))
    c = n * k * (k + 1) ** 2 / 4.0
    s = float(np.sum((col_sums - n * (k + 1) / 2.0) ** 2))
    denom = a - c
    if denom <= 1e-12:
        return FriedmanResult(statistic=0.0, dof=k - 1, p_value=1.0, n_blocks=n, k_treatments=k)
    stat = (k - 1) * s / denom
    return FriedmanResult(
        statistic=stat, dof=k - 1, p_value=chi2_sf(stat, k - 1), n_blocks=n, k_treatments=k
    )


def best_group(avg_ranks, ranks, alpha: float = 0.05) -> set[int]:
    """Treatments statistically indistinguishable from the best one.

    Treatments are sorted by average rank; prefixes of growing length are
    Friedman-tested (re-ranking the restricted columns) until the first
    significant difference.  Returns original column indices; contains at
    least the best treatment.
    """
    avg_ranks = np.asarray(avg_ranks, dtype=np.float64)
    R = ranks.ranks if isinstance(ranks, RankMatrix) else np.asarray(ranks, dtype=np.float64)
    k = R.shape[1]
    if len(avg_ranks) != k:
        raise ValueError("avg_ranks length must match the number of treatments")
    order = np.lexsort((np.arange(k), avg_ranks))
    for m in range(2, k + 1):
        sub = rank_rows(R[:, order[:m]])
        if friedman_test(sub).p_value < alpha:
            return {int(t) for t in order[: m - 1]}
    return {int(t) for t in order}


# ---------------------------------------------------------------------------
# benchmark-record analysis
# ---------------------------------------------------------------------------

def _record_error(record, metric: str) -> float | None:
    value = record.true_error if metric == "true" else record.est_error
    if value is None or getattr(record, "error", None):
        return None
    return float(value)


def _block_keys(records):
    return sorted({(r.dataset, r.run) for r in records})


def selector_rank_table(records, metric: str = "true", alpha: float = 0.05):
    """Average selector ranks per (classifier, ranker) pair, plus best groups.

    Blocks are (dataset, run) rows; the ALL column (selector without a
    ranker) is shared across the rankers of its classifier.  Returns a
    list of row dicts ordered by (classifier, ranker).
    """
    by_key = {}
    classifiers, rankers, observed = set(), set(), set()
    for r in records:
        by_key[(r.dataset, r.run, r.classifier, r.ranker, r.selector)] = r
        classifiers.add(r.classifier)
        observed.add(r.selector)
        if r.ranker is not None:
            rankers.add(r.ranker)
    selectors = tuple(s for s in SELECTOR_TABLE_ORDER if s in observed)
    blocks = _block_keys(records)
    rows = []
    for ctag in sorted(classifiers):
        for rtag in sorted(rankers):
            block_errors = []
            for ds, run in blocks:
                errs = []
                for stag in selectors:
                    rk = None if stag == "ALL" else rtag
                    rec = by_key.get((ds, run, ctag, rk, stag))
                    value = _record_error(rec, metric) if rec is not None else None
                    errs.append(value)
                if all(v is not None for v in errs):
                    block_errors.append(errs)
            if not block_errors:
                warnings.warn(f"no complete blocks for {ctag}/{rtag}; row skipped")
                continue
            matrix = rank_rows(np.asarray(block_errors))
            avg = matrix.average_ranks()
            group = best_group(avg, matrix, alpha=alpha)
            rows.append(
                {
                    "classifier": ctag,
                    "ranker": rtag,
                    "selectors": selectors,
                    "avg_ranks": {s: float(a) for s, a in zip(selectors, avg)},
                    "best_group": {selectors[i] for i in group},
                    "n_blocks": matrix.n_blocks,
                }
            )
    return rows


def combination_universe(classifiers, rankers, selectors):
    """All (classifier, ranker, selector) combinations; ALL pairs with no ranker."""
    combos = [(c, None, "ALL") for c in classifiers]
    for c in classifiers:
        for r in rankers:
            for s in selectors:
                if s != "ALL":
                    combos.append((c, r, s))
    return combos


def combination_ranking(records, metric: str = "true"):
    """Rank every classifier/ranker/selector combination within each
    (dataset, run) column and average; ascending by average rank.

    Columns missing any combination are skipped with a warning.
    """
    classifiers = sorted({r.classifier for r in records})
    rankers = sorted({r.ranker for r in records if r.ranker is not None})
    selectors = sorted({r.selector for r in records if r.selector != "ALL"})
    combos = combination_universe(classifiers, rankers, selectors)
    by_key = {(r.dataset, r.run, r.classifier, r.ranker, r.selector): r for r in records}
    columns = []
    skipped = 0
    for ds, run in _block_keys(records):
        errs = []
        for c, rk, s in combos:
            rec = by_key.get((ds, run, c, rk, s))
            value = _record_error(rec, metric) if rec is not None else None
            errs.append(value)
        if all(v is not None for v in errs):
            columns.append(errs)
        else:
            skipped += 1
    if not columns:
        raise ValueError("no complete (dataset, run) column to rank")
    if skipped:
        warnings.warn(f"{skipped} incomplete (dataset, run) columns skipped")
    ranks = np.vstack([midranks(np.asarray(col)) for col in columns])
    avg = ranks.mean(axis=0)
    order = np.lexsort((np.arange(len(combos)), avg))
    return [
        (combos[i][0], combos[i][1], combos[i][2], float(avg[i])) for i in order
    ]


def glyph_rank_series(records, axis: str, metric: str = "true"):
    """Per-dataset average ranks of classifiers, rankers, or selectors.

    axis "classifier": rank the classifiers within each (dataset, run,
    ranker-or-none, selector) block.  axis "ranker": rank the rankers plus
    the no-selection baseline within (dataset, run, classifier, selector)
    blocks.  axis "selector": rank all selectors (ALL included) within
    (dataset, run, classifier, ranker) blocks.  Returns (dataset names,
    {series name: per-dataset average rank list}).
    """
    datasets = sorted({r.dataset for r in records})
    by_key = {(r.dataset, r.run, r.classifier, r.ranker, r.selector): r for r in records}
    runs = sorted({r.run for r in records})
    classifiers = sorted({r.classifier for r in records})
    rankers = sorted({r.ranker for r in records if r.ranker is not None})
    selectors = [s for s in SELECTOR_TABLE_ORDER if s in {r.selector for r in records}]
    if axis == "classifier":
        series_names = classifiers
        blocks = [
            (rk, s)
            for s in selectors
            for rk in (rankers if s != "ALL" else [None])
        ]
        def lookup(ds, run, name, blk):
            rk, s = blk
            return by_key.get((ds, run, name, rk, s))
    elif axis == "ranker":
        series_names = rankers + ["ALL"]
        blocks = [(c, s) for c in classifiers for s in selectors if s != "ALL"]
        def lookup(ds, run, name, blk):
            c, s = blk
            if name == "ALL":
                return by_key.get((ds, run, c, None, "ALL"))
            return by_key.get((ds, run, c, name, s))
    elif axis == "selector":
        series_names = selectors
        blocks = [(c, rk) for c in classifiers for rk in rankers]
        def lookup(ds, run, name, blk):
            c, rk = blk
            return by_key.get((ds, run, c, None if name == "ALL" else rk, name))
    else:
        raise ValueError("axis must be one of: classifier, ranker, selector")
    series = {name: [] for name in series_names}
    for ds in datasets:
        sums = np.zeros(len(series_names))
        count = 0
        for run in runs:
            for blk in blocks:
                errs = [_record_error(lookup(ds, run, nm, blk), metric) if lookup(ds, run, nm, blk) else None for nm in series_names]
                if any(v is None for v in errs):
                    continue
                sums += midranks(np.asarray(errs))
                count += 1
        if count == 0:
            raise ValueError(f"no complete blocks for dataset {ds}")
        for nm, total in zip(series_names, sums):
            series[nm].append(float(total / count))
    return datasets, series
