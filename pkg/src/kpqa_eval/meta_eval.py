"""Human-judgment processing and metric-quality statistics.

Ratings arrive as 1-5 integer scores from multiple annotators per sample.
They are outlier-filtered, averaged, and normalized to [0, 1]; metric quality
is then measured against them with correlation and rank-pair statistics.
Corpus sizes are small (~10^3), so everything here runs single-threaded.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy import stats as _scipy_stats

from .core import InputError, LoadError, QASample

AGREEMENT_LEVELS = ("interval", "ordinal")
BREAKDOWN_KEYS = ("question_type", "model_tag")


def filter_ratings(raw: Sequence[float], z_max: float = 1.0, max_remove: int = 5,
                   iterative: bool = False) -> list[float]:
    """Drop outlier ratings whose |z-score| exceeds ``z_max``.

    z-scores use the population standard deviation over the raw ratings.
    At most ``max_remove`` ratings are removed, most extreme first (ties
    broken by input position). Zero-variance input is kept unchanged.
    With ``iterative=True`` z-scores are recomputed after each removal
    instead of once over the raw list.
    """
    if not raw:
        raise InputError("empty ratings")
    if iterative:
        kept = list(raw)
        for _ in range(max_remove):
            sigma = float(np.std(kept))
            if sigma == 0.0:
                break
            mean = float(np.mean(kept))
            z = [abs(value - mean) / sigma for value in kept]
            worst = max(range(len(kept)), key=lambda i: (z[i], -i))
            if z[worst] <= z_max:
                break
            del kept[worst]
        return kept
    values = np.asarray(raw, dtype=np.float64)
    sigma = float(values.std())
    if sigma == 0.0:
        return list(raw)
    z = np.abs(values - values.mean()) / sigma
    flagged = [i for i in range(len(raw)) if z[i] > z_max]
    flagged.sort(key=lambda i: (-z[i], i))
    removed = set(flagged[:max_remove])
    return [value for i, value in enumerate(raw) if i not in removed]


def aggregate_human(kept: Sequence[float]) -> float:
    """Normalize the mean 1-5 rating to [0, 1]: (mean - 1) / 4."""
    if not kept:
        raise InputError("empty ratings")
    return (float(np.mean(kept)) - 1.0) / 4.0


@dataclass(frozen=True)
class JudgmentRecord:
    """Per-sample annotator ratings with the filtered, normalized score."""

    sample_id: str
    raw_ratings: tuple[int, ...]
    kept_ratings: tuple[int, ...]
    human_score: float  # (mean of kept - 1) / 4, in [0, 1]

    @property
    def kept_mean(self) -> float:
        """Mean kept rating on the original 1-5 scale."""
        return 1.0 + 4.0 * self.human_score

    @classmethod
    def from_ratings(cls, sample_id: str, ratings: Sequence[int],
                     z_max: float = 1.0, max_remove: int = 5) -> JudgmentRecord:
        kept = filter_ratings(ratings, z_max=z_max, max_remove=max_remove)
        return cls(
            sample_id=sample_id,
            raw_ratings=tuple(ratings),
            kept_ratings=tuple(kept),
            human_score=aggregate_human(kept),
        )


def load_judgments(path: str | Path, z_max: float = 1.0,
                   max_remove: int = 5) -> dict[str, JudgmentRecord]:
    """Read a judgments.jsonl file: ``{"id": str, "ratings": [int 1..5]}``."""
    records: dict[str, JudgmentRecord] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise LoadError(f"invalid JSON ({exc.msg})", path=path, line=lineno)
            try:
                sample_id = record["id"]
                ratings = record["ratings"]
            except KeyError as exc:
                raise LoadError(f"missing field {exc.args[0]!r}", path=path, line=lineno)
            if not ratings or not all(isinstance(r, int) and 1 <= r <= 5 for r in ratings):
                raise LoadError(f"ratings for {sample_id!r} must be non-empty integers in 1..5",
                                path=path, line=lineno)
            if sample_id in records:
                raise LoadError(f"duplicate judgment for sample {sample_id!r}",
                                path=path, line=lineno)
            records[sample_id] = JudgmentRecord.from_ratings(
                sample_id, ratings, z_max=z_max, max_remove=max_remove)
    if not records:
        raise LoadError("no judgments", path=path)
    return records


@dataclass(frozen=True)
class ReliabilityMatrix:
    """Items x annotators grid of 1-5 ratings; None marks a missing cell."""

    ratings: tuple[tuple[float | None, ...], ...]

    def __post_init__(self) -> None:
        widths = {len(row) for row in self.ratings}
        if len(widths) > 1:
            raise InputError("ratings grid must be rectangular")
        for row in self.ratings:
            for value in row:
                if value is not None and not 1 <= value <= 5:
                    raise InputError(f"rating {value!r} outside [1, 5]")

    @classmethod
    def from_rating_lists(cls, lists: Sequence[Sequence[float]]) -> ReliabilityMatrix:
        """Build from per-item rating lists, padding short rows with None.

        Annotator identity does not matter to the agreement statistic, so
        position within a row is arbitrary.
        """
        width = max((len(row) for row in lists), default=0)
        return cls(tuple(
            tuple(row) + (None,) * (width - len(row)) for row in lists))


def krippendorff_alpha(matrix: ReliabilityMatrix, level: str = "interval") -> float:
    """Chance-corrected inter-annotator agreement, tolerant of missing cells.

    Coincidence-matrix formulation: items with fewer than two present ratings
    are unusable and dropped; fewer than two usable items is an error. With
    no observed disagreement (or no value variation at all) alpha is exactly
    1.0. Interval distance (v - v')^2 by default; ordinal distance uses the
    squared difference of cumulative value frequencies.
    """
    if level not in AGREEMENT_LEVELS:
        raise InputError(f"level must be one of {AGREEMENT_LEVELS}, got {level!r}")
    units = [[v for v in row if v is not None] for row in matrix.ratings]
    units = [u for u in units if len(u) >= 2]
    if len(units) < 2:
        raise InputError("need at least 2 items with 2+ ratings each")

    coincidence: dict[tuple[float, float], float] = defaultdict(float)
    for unit in units:
        pair_weight = 1.0 / (len(unit) - 1)
        for i, v in enumerate(unit):
            for j, w in enumerate(unit):
                if i != j:
                    coincidence[(v, w)] += pair_weight
    values = sorted({v for v, _ in coincidence})
    marginals = {v: sum(coincidence[(v, w)] for w in values if (v, w) in coincidence)
                 for v in values}
    n = sum(marginals.values())

    if level == "interval":
        def distance_sq(v: float, w: float) -> float:
            return (v - w) ** 2
    else:
        index = {v: k for k, v in enumerate(values)}

        def distance_sq(v: float, w: float) -> float:
            lo, hi = sorted((index[v], index[w]))
            between = sum(marginals[values[g]] for g in range(lo, hi + 1))
            return (between - (marginals[v] + marginals[w]) / 2.0) ** 2

    observed = sum(count * distance_sq(v, w) for (v, w), count in coincidence.items())
    expected = sum(
        marginals[v] * marginals[w] * distance_sq(v, w)
        for v in values for w in values if v != w)
    if expected == 0.0:
        return 1.0  # no value variation: no disagreement is observable
    if observed == 0.0:
        return 1.0
    return 1.0 - (n - 1.0) * observed / expected


def pearson(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float]:
    """Sample Pearson r and the two-sided t-test p-value (H0: no association)."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise InputError("inputs must be 1-d and of equal length")
    n = x.size
    if n < 3:
        raise InputError(f"need at least 3 points, got {n}")
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float(xc @ xc) * float(yc @ yc))
    if denom == 0.0:
        raise InputError("degenerate input")
    r = float(xc @ yc) / denom
    r = max(-1.0, min(1.0, r))
    if 1.0 - r * r <= 0.0:
        return r, 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    p = 2.0 * float(_scipy_stats.t.sf(abs(t), n - 2))
    return r, p


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Pearson correlation over average-ranked data (ties get the mean rank)."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise InputError("inputs must be 1-d and of equal length")
    if x.size < 3:
        raise InputError(f"need at least 3 points, got {x.size}")
    ranks_x = _scipy_stats.rankdata(x, method="average")
    ranks_y = _scipy_stats.rankdata(y, method="average")
    rho, _ = pearson(ranks_x, ranks_y)
    return rho


def rank_pair_match(human_a: Sequence[float], human_b: Sequence[float],
                    metric_a: Sequence[float], metric_b: Sequence[float],
                    gap_threshold: float = 2.0) -> tuple[float, int]:
    """Win/lose agreement between a metric and human preference across two models.

    Inputs are index-aligned per-question scores; human scores are raw 1-5
    means (pre-normalization). Only questions where the human gap exceeds
    ``gap_threshold`` count; a metric tie on an eligible question is a
    non-match (failure to discriminate). Returns (match percentage,
    eligible count).
    """
    lengths = {len(human_a), len(human_b), len(metric_a), len(metric_b)}
    if len(lengths) != 1:
        raise InputError("score lists must be index-aligned over the same questions")
    matches = 0
    eligible = 0
    for ha, hb, ma, mb in zip(human_a, human_b, metric_a, metric_b):
        human_gap = ha - hb
        if abs(human_gap) <= gap_threshold:
            continue
        eligible += 1
        metric_gap = ma - mb
        if metric_gap != 0.0 and (metric_gap > 0) == (human_gap > 0):
            matches += 1
    if eligible == 0:
        raise InputError("empty comparison set")
    return 100.0 * matches / eligible, eligible


@dataclass(frozen=True)
class GroupStats:
    """Per-group correlation report row; warning set when the group was skipped."""

    group: str
    n: int
    pearson_r: float | None = None
    p_value: float | None = None
    spearman_rho: float | None = None
    warning: str | None = None


def breakdown(samples: Sequence[QASample], human_scores: Mapping[str, float],
              metric_scores: Mapping[str, float], key: str) -> list[GroupStats]:
    """Correlations per question type or per model tag.

    Every sample must carry the grouping key. Groups with fewer than 3
    samples, or with degenerate score variance, are reported as warning
    entries rather than aborting the run.
    """
    if key not in BREAKDOWN_KEYS:
        raise InputError(f"key must be one of {BREAKDOWN_KEYS}, got {key!r}")
    groups: dict[str, list[str]] = defaultdict(list)
    for sample in samples:
        label = getattr(sample, key)
        if label is None:
            raise InputError(f"sample {sample.id!r} is missing {key}")
        groups[label].append(sample.id)
    report = []
    for label in sorted(groups):
        ids = groups[label]
        if len(ids) < 3:
            report.append(GroupStats(group=label, n=len(ids),
                                     warning="fewer than 3 samples"))
            continue
        humans = [human_scores[i] for i in ids]
        metrics = [metric_scores[i] for i in ids]
        try:
            r, p = pearson(humans, metrics)
            rho = spearman(humans, metrics)
        except InputError as exc:
            report.append(GroupStats(group=label, n=len(ids), warning=str(exc)))
            continue
        report.append(GroupStats(group=label, n=len(ids), pearson_r=r,
                                 p_value=p, spearman_rho=rho))
    return report
