"""Core domain types shared by all modules.

Conventions: videos are sampled at 1 fps, so frame index ``i`` (0-based)
covers the second ``[i, i+1)``.  Annotated segments are half-open integer
intervals ``[start, end)`` in seconds; a frame belongs to a segment iff
``start <= i < end``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import AnnotationError


@dataclass(frozen=True)
class Scene:
    """A group of disjoint segments carrying the same key information."""

    scene_id: int
    segments: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple((int(s), int(e)) for s, e in self.segments))
        if not self.segments:
            raise AnnotationError(f"scene {self.scene_id}: at least one segment required")
        for start, end in self.segments:
            if start < 0 or end <= start:
                raise AnnotationError(
                    f"scene {self.scene_id}: bad segment [{start}, {end})"
                )
        spans = sorted(self.segments)
        for (s0, e0), (s1, e1) in zip(spans, spans[1:]):
            if s1 < e0:
                raise AnnotationError(
                    f"scene {self.scene_id}: segments [{s0}, {e0}) and [{s1}, {e1}) overlap"
                )

    @property
    def duration(self) -> int:
        """Total annotated seconds in this scene (sum of segment lengths)."""
        return sum(e - s for s, e in self.segments)

    def frames(self) -> np.ndarray:
        """All frame indices covered by this scene, sorted ascending."""
        parts = [np.arange(s, e) for s, e in sorted(self.segments)]
        return np.concatenate(parts) if parts else np.empty(0, dtype=int)

    def contains(self, frame: int) -> bool:
        return any(s <= frame < e for s, e in self.segments)


@dataclass(frozen=True)
class AnnotationSample:
    """Ground-truth scene annotation for one (video, question) pair."""

    id: str
    duration_s: int
    scenes: tuple[Scene, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "scenes", tuple(self.scenes))
        if self.duration_s < 1:
            raise AnnotationError(f"sample {self.id}: duration_s must be positive")
        ids = [sc.scene_id for sc in self.scenes]
        if len(set(ids)) != len(ids):
            raise AnnotationError(f"sample {self.id}: duplicate scene ids {ids}")
        all_segments = []
        for sc in self.scenes:
            for seg in sc.segments:
                if seg[1] > self.duration_s:
                    raise AnnotationError(
                        f"sample {self.id}: scene {sc.scene_id} segment "
                        f"[{seg[0]}, {seg[1]}) exceeds duration {self.duration_s}"
                    )
                all_segments.append((seg, sc.scene_id))
        all_segments.sort()
        for (seg0, id0), (seg1, id1) in zip(all_segments, all_segments[1:]):
            if seg1[0] < seg0[1]:
                raise AnnotationError(
                    f"sample {self.id}: segment [{seg1[0]}, {seg1[1]}) of scene {id1} "
                    f"overlaps segment [{seg0[0]}, {seg0[1]}) of scene {id0}"
                )

    @property
    def n_scenes(self) -> int:
        return len(self.scenes)

    @property
    def scene_durations(self) -> np.ndarray:
        return np.array([sc.duration for sc in self.scenes], dtype=int)

    def key_frames(self) -> np.ndarray:
        """Union of all annotated segments as sorted frame indices."""
        parts = [sc.frames() for sc in self.scenes]
        if not parts:
            return np.empty(0, dtype=int)
        return np.sort(np.concatenate(parts))

    def non_key_frames(self) -> np.ndarray:
        """Frames outside every annotated segment."""
        mask = np.ones(self.duration_s, dtype=bool)
        mask[self.key_frames()] = False
        return np.nonzero(mask)[0]


@dataclass(frozen=True)
class SampleSet:
    """An ordered set of distinct sampled frame indices for one sample."""

    frames: tuple[int, ...]
    budget: int

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(int(f) for f in self.frames))
        if self.budget < 1:
            raise AnnotationError("budget must be positive")
        if not self.frames:
            raise AnnotationError("sample set must contain at least one frame")
        if any(b <= a for a, b in zip(self.frames, self.frames[1:])):
            raise AnnotationError(f"frames must be strictly increasing: {self.frames}")
        if self.frames[0] < 0:
            raise AnnotationError(f"negative frame index: {self.frames[0]}")
        if len(self.frames) > self.budget:
            raise AnnotationError(
                f"{len(self.frames)} frames exceed budget {self.budget}"
            )

    def __len__(self) -> int:
        return len(self.frames)

    def as_array(self) -> np.ndarray:
        return np.array(self.frames, dtype=int)


@dataclass(frozen=True)
class SimilarityProfile:
    """Per-frame question-frame similarity scores (one value per second)."""

    scores: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.scores, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise AnnotationError("scores must be a non-empty 1-d vector")
        if not np.all(np.isfinite(arr)):
            raise AnnotationError("scores contain non-finite values")
        arr.setflags(write=False)
        object.__setattr__(self, "scores", arr)

    def __len__(self) -> int:
        return len(self.scores)


@dataclass(frozen=True)
class FeatureMatrix:
    """Per-frame feature vectors, one row per frame."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=float)
        if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] < 1:
            raise AnnotationError("feature matrix must be 2-d with at least one column")
        if not np.all(np.isfinite(arr)):
            raise AnnotationError("feature matrix contains non-finite values")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def n_frames(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class SamplingCdf:
    """Monotone nondecreasing cumulative distribution over frame indices."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise AnnotationError("cdf must be a non-empty 1-d vector")
        if np.any(arr < 0):
            raise AnnotationError("cdf values must be nonnegative")
        if np.any(np.diff(arr) < 0):
            raise AnnotationError("cdf must be nondecreasing")
        if abs(arr[-1] - 1.0) > 1e-9:
            raise AnnotationError(f"cdf must end at 1, got {arr[-1]!r}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return len(self.values)


def frame_in_key(frame: int, ann: AnnotationSample) -> bool:
    """True iff ``frame`` lies inside any annotated segment of ``ann``."""
    if frame < 0 or frame >= ann.duration_s:
        raise AnnotationError(
            f"sample {ann.id}: frame {frame} out of range [0, {ann.duration_s})"
        )
    return any(sc.contains(frame) for sc in ann.scenes)


def per_scene_counts(sample: SampleSet, ann: AnnotationSample) -> np.ndarray:
    """Number of sampled frames falling inside each scene, in scene order.

    Scenes with no sampled frame appear as explicit zeros.
    """
    frames = sample.as_array()
    if len(frames) and frames[-1] >= ann.duration_s:
        raise AnnotationError(
            f"sample {ann.id}: frame {frames[-1]} out of range [0, {ann.duration_s})"
        )
    counts = np.zeros(ann.n_scenes, dtype=int)
    for i, sc in enumerate(ann.scenes):
        hit = np.zeros(len(frames), dtype=bool)
        for s, e in sc.segments:
            hit |= (frames >= s) & (frames < e)
        counts[i] = int(hit.sum())
    return counts
