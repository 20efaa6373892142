"""Sampling-quality metrics: KFR, SHR, BSR, BDS, per-sample score, UKSS.

All metrics live in [0, 1].  The per-sample score is the geometric mean of
KFR, BSR and BDS; UKSS aggregates epsilon-truncated sample scores with a
geometric mean across samples.  SHR is kept for diagnostics only and does
not enter the sample score.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import UndefinedCorrelationError, UndefinedMetricError
from .types import AnnotationSample, SampleSet, per_scene_counts

DEFAULT_EPSILON = 0.01

# Interpolation grid for the target per-scene distribution, from uniform
# (beta=0) to duration-proportional (beta=1).
BDS_BETA_GRID = np.round(np.arange(0, 11) * 0.1, 10)


@dataclass(frozen=True)
class SampleMetrics:
    """All per-sample metrics plus their geometric-mean score."""

    kfr: float
    shr: float
    bsr: float
    bds: float
    score: float


@dataclass(frozen=True)
class UkssReport:
    """Per-sample metrics plus the aggregate UKSS value."""

    per_sample: tuple[tuple[str, SampleMetrics], ...]
    ukss: float
    epsilon: float = DEFAULT_EPSILON


def key_frame_rate(sample: SampleSet, ann: AnnotationSample) -> float:
    """Fraction of sampled frames that lie inside an annotated segment."""
    frames = sample.as_array()
    key = ann.key_frames()
    hits = np.isin(frames, key).sum()
    return float(hits) / len(frames)


def scene_hit_rate(sample: SampleSet, ann: AnnotationSample) -> float:
    """Fraction of scenes containing at least one sampled frame."""
    if ann.n_scenes == 0:
        raise UndefinedMetricError(f"sample {ann.id}: SHR undefined with no scenes")
    counts = per_scene_counts(sample, ann)
    return float(np.mean(counts >= 1))


def scene_thresholds(counts: np.ndarray, durations: np.ndarray) -> np.ndarray:
    """Minimum per-scene frame count for a scene to count as covered.

    A scene is covered when it holds at least its duration-proportional
    share of the in-scene frames, capped at the uniform share, and never
    less than one frame.
    """
    counts = np.asarray(counts, dtype=int)
    durations = np.asarray(durations, dtype=float)
    m = len(durations)
    if m < 1:
        raise UndefinedMetricError("thresholds undefined with no scenes")
    if np.any(durations < 1):
        raise UndefinedMetricError("scene durations must be >= 1")
    total = int(counts.sum())
    share = np.minimum(durations / durations.sum(), 1.0 / m)
    return np.maximum(1, np.floor(total * share)).astype(int)


def balanced_scene_recall(sample: SampleSet, ann: AnnotationSample) -> float:
    """Fraction of scenes whose sampled-frame count meets its threshold."""
    if ann.n_scenes == 0:
        raise UndefinedMetricError(f"sample {ann.id}: BSR undefined with no scenes")
    counts = per_scene_counts(sample, ann)
    theta = scene_thresholds(counts, ann.scene_durations)
    return float(np.mean(counts >= theta))


def balanced_distribution_similarity(sample: SampleSet, ann: AnnotationSample) -> float:
    """Best cosine match between the per-scene sample distribution and the
    duration^beta-interpolated target distributions over the beta grid.

    Returns 0 when no sampled frame lands in any scene (cosine undefined on
    the zero vector; worst-sampling convention).
    """
    if ann.n_scenes == 0:
        raise UndefinedMetricError(f"sample {ann.id}: BDS undefined with no scenes")
    counts = per_scene_counts(sample, ann).astype(float)
    total = counts.sum()
    if total == 0:
        return 0.0
    observed = counts / total
    durations = ann.scene_durations.astype(float)
    best = 0.0
    for beta in BDS_BETA_GRID:
        target = durations**beta
        target = target / target.sum()
        cos = float(
            np.dot(observed, target)
            / (np.linalg.norm(observed) * np.linalg.norm(target))
        )
        best = max(best, cos)
    return min(best, 1.0)


def sample_score(kfr: float, bsr: float, bds: float) -> float:
    """Geometric mean of the three per-sample components."""
    if kfr == 0.0 or bsr == 0.0 or bds == 0.0:
        return 0.0
    return math.exp((math.log(kfr) + math.log(bsr) + math.log(bds)) / 3.0)


def evaluate_sample(sample: SampleSet, ann: AnnotationSample) -> SampleMetrics:
    """Compute all per-sample metrics for one (sample set, annotation) pair."""
    kfr = key_frame_rate(sample, ann)
    shr = scene_hit_rate(sample, ann)
    bsr = balanced_scene_recall(sample, ann)
    bds = balanced_distribution_similarity(sample, ann)
    return SampleMetrics(kfr=kfr, shr=shr, bsr=bsr, bds=bds, score=sample_score(kfr, bsr, bds))


def ukss(scores, epsilon: float = DEFAULT_EPSILON) -> float:
    """Geometric mean of epsilon-truncated sample scores, in log space."""
    scores = list(scores)
    if not scores:
        raise UndefinedMetricError("UKSS requires at least one sample score")
    if not 0.0 < epsilon < 1.0:
        raise UndefinedMetricError(f"epsilon must lie in (0, 1), got {epsilon}")
    logs = [math.log(max(epsilon, s)) for s in scores]
    return math.exp(sum(logs) / len(logs))


def build_report(
    per_sample: dict[str, SampleMetrics], epsilon: float = DEFAULT_EPSILON
) -> UkssReport:
    """Aggregate per-sample metrics into a UKSS report, ordered by sample id."""
    items = tuple(sorted(per_sample.items()))
    value = ukss([m.score for _, m in items], epsilon)
    return UkssReport(per_sample=items, ukss=value, epsilon=epsilon)


def _average_ranks(x: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties replaced by their average rank."""
    x = np.asarray(x, dtype=float)
    order = np.argsort(x, kind="stable")
    ranks = np.empty(len(x))
    sorted_x = x[order]
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and sorted_x[j + 1] == sorted_x[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman_rho(x, y) -> float:
    """Spearman rank correlation with average ties."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 3:
        raise UndefinedCorrelationError(
            f"need two equal-length vectors of >= 3 values, got {x.shape} and {y.shape}"
        )
    rx = _average_ranks(x)
    ry = _average_ranks(y)
    if np.ptp(rx) == 0 or np.ptp(ry) == 0:
        raise UndefinedCorrelationError("zero rank variance; correlation undefined")
    rx = rx - rx.mean()
    ry = ry - ry.mean()
    return float(np.dot(rx, ry) / np.sqrt(np.dot(rx, rx) * np.dot(ry, ry)))
