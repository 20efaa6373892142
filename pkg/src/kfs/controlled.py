"""Frame-set generation with prescribed key-frame rate, scene coverage and
Dirichlet-controlled per-scene distributions.

Used to probe how sampling quality drives downstream QA accuracy: the
generator places a controlled fraction of the budget inside annotated
scenes, spreads those frames across a chosen subset of scenes according
to a Dirichlet draw, and fills the rest of the budget from unannotated
regions.

Randomness comes from a counter-based generator (Philox) keyed on
(seed, sample id), so results are reproducible per sample.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .exceptions import CapacityError, InfeasibleError, KfsError
from .types import AnnotationSample, SampleSet


@dataclass(frozen=True)
class ControlSpec:
    """Targets and knobs for one controlled generation run."""

    target_kfr: float
    target_shr: float
    concentration: float  # Dirichlet concentration C
    beta: float  # duration-weighting exponent
    budget: int
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.target_kfr <= 1.0 or not 0.0 <= self.target_shr <= 1.0:
            raise KfsError("target_kfr and target_shr must lie in [0, 1]")
        if self.concentration <= 0 or self.beta < 0:
            raise KfsError("concentration must be > 0 and beta >= 0")
        if self.budget < 1:
            raise KfsError("budget must be >= 1")


@dataclass(frozen=True)
class ControlledDraw:
    """A generated sample set plus bookkeeping about the draw."""

    sample: SampleSet
    hit_scenes: tuple[int, ...]  # positions into ann.scenes
    nominal_shr: float
    n_key: int
    clamped: bool


def _rng_for(seed: int, sample_id: str) -> np.random.Generator:
    digest = hashlib.sha256(sample_id.encode()).digest()
    key = int.from_bytes(digest[:8], "little")
    return np.random.Generator(np.random.Philox(key=[seed & (2**64 - 1), key]))


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def dirichlet_weights(durations: np.ndarray, beta: float) -> np.ndarray:
    """Normalized duration^beta weights (uniform when beta is 0)."""
    w = np.asarray(durations, dtype=float) ** beta
    return w / w.sum()


def _draw_proportions(
    durations: np.ndarray, concentration: float, beta: float, rng: np.random.Generator
) -> np.ndarray:
    w = dirichlet_weights(durations, beta)
    if len(w) == 1:
        return np.array([1.0])
    # Per-component gamma variates normalized to the simplex.  numpy's
    # standard_gamma uses rejection sampling with the small-shape boost,
    # which keeps draws reproducible across platforms for a fixed stream.
    g = rng.standard_gamma(concentration * w)
    total = g.sum()
    if total <= 0:
        return w.copy()  # extreme underflow; fall back to the mean
    return g / total


def dirichlet_proportions(
    durations, concentration: float, beta: float, seed: int
) -> np.ndarray:
    """One draw of per-scene proportions from Dir(C * duration^beta weights)."""
    durations = np.asarray(durations, dtype=float)
    if len(durations) < 1 or np.any(durations < 1):
        raise KfsError("durations must be a non-empty vector of values >= 1")
    if concentration <= 0:
        raise KfsError("concentration must be positive")
    rng = np.random.Generator(np.random.Philox(key=seed & (2**64 - 1)))
    return _draw_proportions(durations, concentration, beta, rng)


def allocate_scene_counts(proportions: np.ndarray, n_key: int) -> np.ndarray:
    """Integer frame counts per scene from fractional proportions.

    Uses largest-remainder rounding of n_key * p, then enforces at least
    one frame per scene.  When n_key < m, only the n_key highest-proportion
    scenes receive a (single) frame.
    """
    p = np.asarray(proportions, dtype=float)
    m = len(p)
    if n_key < 1:
        raise KfsError("n_key must be >= 1")
    if abs(p.sum() - 1.0) > 1e-6 or np.any(p < 0):
        raise KfsError("proportions must be nonnegative and sum to 1")
    if n_key < m:
        counts = np.zeros(m, dtype=int)
        order = np.argsort(-p, kind="stable")
        counts[order[:n_key]] = 1
        return counts
    raw = n_key * p
    counts = np.floor(raw).astype(int)
    remainders = raw - counts
    deficit = n_key - int(counts.sum())
    # ties on remainder break toward larger proportion, then smaller index
    order = sorted(range(m), key=lambda i: (-remainders[i], -p[i], i))
    for i in order[:deficit]:
        counts[i] += 1
    # enforce the one-frame floor by taking from the largest counts
    while np.any(counts == 0):
        zero = int(np.nonzero(counts == 0)[0][0])
        donor = int(np.argmax(counts))
        counts[donor] -= 1
        counts[zero] += 1
    return counts


def _clamp_to_capacity(
    counts: np.ndarray, capacities: np.ndarray
) -> tuple[np.ndarray, int, bool]:
    """Clamp counts at per-scene capacities; return leftover excess."""
    counts = counts.copy()
    clamped = bool(np.any(counts > capacities))
    excess = int(np.maximum(counts - capacities, 0).sum())
    counts = np.minimum(counts, capacities)
    # redistribute excess to scenes with spare room, fullest-spare first
    while excess > 0:
        spare = capacities - counts
        if spare.max() <= 0:
            break
        target = int(np.argmax(spare))
        take = min(excess, int(spare[target]))
        counts[target] += take
        excess -= take
    return counts, excess, clamped


def controlled_frame_set(ann: AnnotationSample, spec: ControlSpec) -> ControlledDraw:
    """Generate a frame set matching the spec's targets on ``ann``.

    Key frames are distributed over a uniformly chosen subset of scenes
    (the "hit" scenes, each guaranteed at least one frame) according to a
    Dirichlet draw over scene durations; the rest of the budget is drawn
    uniformly from unannotated regions.  Deterministic per (ann, spec).
    """
    n = ann.duration_s
    m = ann.n_scenes
    if spec.budget > n:
        raise InfeasibleError(
            f"sample {ann.id}: budget {spec.budget} exceeds duration {n}"
        )
    if m == 0 and spec.target_kfr > 0:
        raise InfeasibleError(
            f"sample {ann.id}: no scenes, cannot place key frames"
        )
    rng = _rng_for(spec.seed, ann.id)
    n_key = _round_half_up(spec.target_kfr * spec.budget)

    nominal_shr = spec.target_shr
    if spec.target_shr == 0.0 or n_key == 0:
        n_hit = 0
    else:
        n_hit = min(m, max(1, _round_half_up(spec.target_shr * m)))

    hit = np.sort(rng.choice(m, size=n_hit, replace=False)) if n_hit else np.empty(0, dtype=int)
    if n_key and n_key < len(hit):
        # keep only the longest hit scenes when the key budget is tighter
        durs = ann.scene_durations[hit]
        keep = sorted(range(len(hit)), key=lambda i: (-durs[i], i))[:n_key]
        hit = np.sort(hit[keep])

    clamped = False
    key_frames: list[int] = []
    if n_key and len(hit):
        durations = ann.scene_durations[hit].astype(float)
        capacities = ann.scene_durations[hit]
        p = _draw_proportions(durations, spec.concentration, spec.beta, rng)
        counts = allocate_scene_counts(p, n_key)
        counts, excess, clamped = _clamp_to_capacity(counts, capacities)
        if excess > 0:
            achievable = int(min(spec.budget, ann.scene_durations.sum()))
            raise CapacityError(
                f"sample {ann.id}: {n_key} key frames exceed hit-scene capacity; "
                f"at most {achievable} achievable",
                achievable_max=achievable,
            )
        for pos, c in zip(hit, counts):
            pool = ann.scenes[pos].frames()
            chosen = rng.choice(pool, size=int(c), replace=False)
            key_frames.extend(int(f) for f in chosen)
    elif n_key:
        raise InfeasibleError(
            f"sample {ann.id}: target_kfr {spec.target_kfr} > 0 with no hit scenes"
        )

    n_rest = spec.budget - len(key_frames)
    rest_frames: list[int] = []
    if n_rest > 0:
        pool = ann.non_key_frames()
        if len(pool) < n_rest:
            raise CapacityError(
                f"sample {ann.id}: only {len(pool)} frames outside scenes, "
                f"need {n_rest}",
                achievable_max=len(pool),
            )
        chosen = rng.choice(pool, size=n_rest, replace=False)
        rest_frames = [int(f) for f in chosen]

    frames = tuple(sorted(key_frames + rest_frames))
    return ControlledDraw(
        sample=SampleSet(frames=frames, budget=spec.budget),
        hit_scenes=tuple(int(h) for h in hit),
        nominal_shr=nominal_shr,
        n_key=len(key_frames),
        clamped=clamped,
    )
