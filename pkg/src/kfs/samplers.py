"""Frame-selection strategies.

Primitives build sampling CDFs from similarity scores or clustering
results and draw frames at uniform quantiles of a CDF (inverse transform
sampling).  The adaptive strategy interpolates the similarity CDF and the
inverse-cluster-frequency CDF, weighted by a question-video relevance
score estimated from the shape of the similarity distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .clustering import kmeans_fit
from .exceptions import (
    BinningError,
    DegenerateWeightsError,
    InvalidClusteringError,
    KfsError,
)
from .types import FeatureMatrix, SampleSet, SamplingCdf, SimilarityProfile

# Defaults: similarity exponent tuned per dataset (7.0 long-video, 2.0
# shorter clips); relevance-score temperature and coverage mass.
DEFAULT_ALPHA = 7.0
DEFAULT_TAU = 0.3
DEFAULT_GAMMA = 0.7

MAD_EPS = 1e-12
_MASS_SLACK = 1e-12


@dataclass(frozen=True)
class SamplerConfig:
    """One sampling configuration for sweep/evaluation harnesses."""

    method: str
    budget: int
    alpha: float = DEFAULT_ALPHA
    tau: float = DEFAULT_TAU
    gamma: float = DEFAULT_GAMMA
    seed: int = 0

    def __post_init__(self):
        if self.method not in {"uniform", "topk", "its", "icf", "ascs"}:
            raise KfsError(f"unknown sampling method {self.method!r}")
        if self.budget < 1:
            raise KfsError("budget must be >= 1")
        if self.alpha <= 0 or self.tau <= 0:
            raise KfsError("alpha and tau must be positive")
        if not 0.0 < self.gamma < 1.0:
            raise KfsError("gamma must lie in (0, 1)")


@dataclass(frozen=True)
class FrameDistribution:
    """A probability distribution over frame indices."""

    probs: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.probs, dtype=float)
        if np.any(arr < 0) or abs(arr.sum() - 1.0) > 1e-9:
            raise KfsError("probabilities must be nonnegative and sum to 1")
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    def __len__(self) -> int:
        return len(self.probs)


def uniform_sample(n_frames: int, k: int) -> SampleSet:
    """Evenly spaced frames at interval midpoints; all frames if k >= n."""
    if n_frames < 1 or k < 1:
        raise KfsError("n_frames and k must be >= 1")
    if k >= n_frames:
        return SampleSet(frames=tuple(range(n_frames)), budget=k)
    idx = sorted({int((j + 0.5) * n_frames / k) for j in range(k)})
    return SampleSet(frames=tuple(idx), budget=k)


def topk_sample(profile: SimilarityProfile, k: int) -> SampleSet:
    """The k highest-scoring frames; ties broken toward smaller indices."""
    if k < 1:
        raise KfsError("k must be >= 1")
    s = profile.scores
    k = min(k, len(s))
    # stable sort on -s keeps smaller indices first among ties
    order = np.argsort(-s, kind="stable")[:k]
    return SampleSet(frames=tuple(sorted(int(i) for i in order)), budget=k)


def its_normalize(profile: SimilarityProfile, alpha: float) -> np.ndarray:
    """Min-max normalize scores and raise to the power alpha.

    Constant scores carry no signal and map to all-ones (uniform weights).
    """
    if alpha <= 0:
        raise KfsError("alpha must be positive")
    s = profile.scores
    lo, hi = float(s.min()), float(s.max())
    if hi == lo:
        return np.ones(len(s))
    return ((s - lo) / (hi - lo)) ** alpha


def build_cdf(weights: np.ndarray) -> SamplingCdf:
    """Normalized running sum of nonnegative weights."""
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0):
        raise DegenerateWeightsError("weights must be nonnegative")
    # accumulate in extended precision so equal-weight prefixes normalize to
    # exact quantile boundaries (e.g. half the mass -> exactly 0.5)
    cs = np.cumsum(w.astype(np.longdouble))
    if cs[-1] <= 0:
        raise DegenerateWeightsError("all-zero weight vector")
    return SamplingCdf(values=(cs / cs[-1]).astype(float))


def _resolve_duplicate(idx: int, taken: set[int], n: int) -> int:
    # Nearest unselected index; at equal distance the larger one wins.
    for d in range(1, n):
        hi, lo = idx + d, idx - d
        if hi < n and hi not in taken:
            return hi
        if lo >= 0 and lo not in taken:
            return lo
    raise AssertionError("no free index left")  # unreachable: k < n guaranteed


def inverse_transform_sample(cdf: SamplingCdf, k: int) -> SampleSet:
    """Frames at the k uniform quantiles j/k of the CDF.

    Each quantile selects the smallest index whose CDF value reaches it;
    collisions move to the nearest unselected index (larger side preferred
    on ties).  Returns min(k, n) distinct sorted indices.
    """
    if k < 1:
        raise KfsError("k must be >= 1")
    values = cdf.values
    n = len(values)
    if k >= n:
        return SampleSet(frames=tuple(range(n)), budget=k)
    taken: set[int] = set()
    for j in range(1, k + 1):
        q = j / k
        idx = int(np.searchsorted(values, q, side="left"))
        if idx >= n:
            idx = n - 1
        if idx in taken:
            idx = _resolve_duplicate(idx, taken, n)
        taken.add(idx)
    return SampleSet(frames=tuple(sorted(taken)), budget=k)


def its_sample(profile: SimilarityProfile, alpha: float, k: int) -> SampleSet:
    """Inverse transform sampling on the power-normalized similarity CDF."""
    return inverse_transform_sample(build_cdf(its_normalize(profile, alpha)), k)


def icf_distribution(assignments: np.ndarray, k_clusters: int) -> FrameDistribution:
    """Per-frame probability 1 / (cluster size * cluster count)."""
    assignments = np.asarray(assignments, dtype=int)
    if np.any(assignments < 0) or np.any(assignments >= k_clusters):
        raise InvalidClusteringError("cluster ids out of range")
    sizes = np.bincount(assignments, minlength=k_clusters)
    if np.any(sizes == 0):
        empty = int(np.nonzero(sizes == 0)[0][0])
        raise InvalidClusteringError(f"cluster {empty} is empty")
    probs = 1.0 / (sizes[assignments] * k_clusters)
    return FrameDistribution(probs=probs)


def icf_cdf(features: FeatureMatrix, k: int, seed: int) -> SamplingCdf:
    """CDF of the inverse-cluster-frequency distribution for k clusters."""
    result = kmeans_fit(features, k, seed)
    return build_cdf(icf_distribution(result.assignments, k).probs)


def icf_sample(features: FeatureMatrix, k: int, seed: int) -> SampleSet:
    """Cluster frames, then inverse-transform-sample the ICF distribution."""
    if k < 1:
        raise KfsError("k must be >= 1")
    n = features.n_frames
    if k >= n:
        return SampleSet(frames=tuple(range(n)), budget=k)
    return inverse_transform_sample(icf_cdf(features, k, seed), k)


def mad_normalize(profile: SimilarityProfile) -> np.ndarray:
    """Center at the median and scale by the median absolute deviation.

    A (near-)zero MAD means the scores carry no usable signal; the result
    is then an all-zero vector.
    """
    s = profile.scores
    med = float(np.median(s))
    mad = float(np.median(np.abs(s - med)))
    if mad < MAD_EPS:
        return np.zeros(len(s))
    return (s - med) / mad


def softmax_distribution(z: np.ndarray, tau: float) -> FrameDistribution:
    """Temperature softmax with max-subtraction for stability."""
    if tau <= 0:
        raise KfsError("tau must be positive")
    z = np.asarray(z, dtype=float) / tau
    z = z - z.max()
    e = np.exp(z)
    return FrameDistribution(probs=e / e.sum())


def temporal_bin_entropy(dist: FrameDistribution, k: int) -> float:
    """Entropy of the mass aggregated into k equal-width index bins."""
    n = len(dist)
    if k < 2:
        raise BinningError("need at least 2 bins")
    if n < k:
        raise BinningError(f"cannot split {n} frames into {k} bins")
    q = dist.probs
    h = 0.0
    for b in range(1, k + 1):
        lo = (b - 1) * n // k
        hi = b * n // k
        mass = float(q[lo:hi].sum())
        if mass > 0:
            h -= mass * math.log(mass)
    return min(max(h, 0.0), math.log(k))


def mass_bin_entropy(dist: FrameDistribution, k: int) -> float:
    """Entropy of the temporal span lengths of k equal-mass bins.

    Bin edges are the first (1-based) indices where the cumulative mass
    reaches b/k; spans shorter than the full timeline under-sum, so the
    result is clamped to [0, log k].
    """
    n = len(dist)
    if k < 2 or n < 2:
        raise BinningError("need k >= 2 and n >= 2")
    if n < k:
        raise BinningError(f"cannot split {n} frames into {k} bins")
    cum = np.cumsum(dist.probs)
    h = 0.0
    prev = 1  # 1-based edge before the first bin
    for b in range(1, k + 1):
        idx = int(np.searchsorted(cum, b / k, side="left"))
        u = min(idx, n - 1) + 1  # to 1-based, clamped for rounding dust at b=k
        span = u - prev
        prev = u
        if span > 0:
            frac = span / (n - 1)
            h -= frac * math.log(frac)
    return min(max(h, 0.0), math.log(k))


def shortest_coverage_window(dist: FrameDistribution, gamma: float) -> int:
    """Length of the shortest contiguous window holding mass >= gamma."""
    if not 0.0 < gamma < 1.0:
        raise KfsError("gamma must lie in (0, 1)")
    q = dist.probs
    n = len(q)
    best = n
    mass = 0.0
    left = 0
    for right in range(n):
        mass += q[right]
        while mass >= gamma - _MASS_SLACK:
            best = min(best, right - left + 1)
            mass -= q[left]
            left += 1
    return best


def relevance_score(
    profile: SimilarityProfile, k: int, tau: float = DEFAULT_TAU, gamma: float = DEFAULT_GAMMA
) -> float:
    """Question-video relevance in [0, 1] from the similarity distribution.

    High when the softmax-normalized similarity mass is concentrated
    (spiky, informative scores), zero when the scores are constant.
    """
    if k < 2:
        raise BinningError("need k >= 2")
    n = len(profile)
    if n < k:
        raise BinningError(f"need at least {k} frames, got {n}")
    z = mad_normalize(profile)
    if not np.any(z):
        return 0.0
    q = softmax_distribution(z, tau)
    log_k = math.log(k)
    f_time = min(max(1.0 - temporal_bin_entropy(q, k) / log_k, 0.0), 1.0)
    f_mass = min(max(1.0 - mass_bin_entropy(q, k) / log_k, 0.0), 1.0)
    f_cov = min(max(1.0 - shortest_coverage_window(q, gamma) / n, 0.0), 1.0)
    return (f_time * f_mass * f_cov) ** (1.0 / 3.0)


def balanced_cdf(
    sim_cdf: SamplingCdf, cluster_cdf: SamplingCdf, relevance: float
) -> SamplingCdf:
    """Pointwise interpolation of the two CDFs, weighted by relevance."""
    if not 0.0 <= relevance <= 1.0:
        raise KfsError("relevance must lie in [0, 1]")
    values = (1.0 - relevance) * cluster_cdf.values + relevance * sim_cdf.values
    return SamplingCdf(values=values)


def ascs_sample(
    profile: SimilarityProfile,
    features: FeatureMatrix,
    k: int,
    alpha: float = DEFAULT_ALPHA,
    tau: float = DEFAULT_TAU,
    gamma: float = DEFAULT_GAMMA,
    seed: int = 0,
    relevance: float | None = None,
) -> SampleSet:
    """Adaptive sampling from the relevance-balanced CDF.

    With zero relevance this reduces exactly to :func:`icf_sample`; with
    relevance one it reduces exactly to :func:`its_sample`.  ``relevance``
    may be injected for testing; by default it is estimated from the
    similarity profile.
    """
    if len(profile) != features.n_frames:
        raise KfsError(
            f"similarity length {len(profile)} != feature rows {features.n_frames}"
        )
    n = features.n_frames
    if k >= n:
        return SampleSet(frames=tuple(range(n)), budget=k)
    if relevance is None:
        # a single-frame budget leaves nothing to bin; fall back to clustering
        relevance = relevance_score(profile, k, tau, gamma) if k >= 2 else 0.0
    f_sim = build_cdf(its_normalize(profile, alpha))
    f_icf = icf_cdf(features, k, seed)
    return inverse_transform_sample(balanced_cdf(f_sim, f_icf, relevance), k)


def run_sampler(
    cfg: SamplerConfig,
    n_frames: int,
    profile: SimilarityProfile | None = None,
    features: FeatureMatrix | None = None,
) -> SampleSet:
    """Dispatch a SamplerConfig to the matching strategy."""
    if cfg.method == "uniform":
        return uniform_sample(n_frames, cfg.budget)
    if cfg.method == "topk":
        if profile is None:
            raise KfsError("topk requires similarity scores")
        return topk_sample(profile, cfg.budget)
    if cfg.method == "its":
        if profile is None:
            raise KfsError("its requires similarity scores")
        return its_sample(profile, cfg.alpha, cfg.budget)
    if cfg.method == "icf":
        if features is None:
            raise KfsError("icf requires frame features")
        return icf_sample(features, cfg.budget, cfg.seed)
    if profile is None or features is None:
        raise KfsError("ascs requires both similarity scores and frame features")
    return ascs_sample(
        profile, features, cfg.budget, cfg.alpha, cfg.tau, cfg.gamma, cfg.seed
    )


class BaseFrameSampler(BaseEstimator):
    """Stateless estimator-style sampler with sklearn parameter handling.

    Samplers have no fitted state: ``fit`` is a no-op kept for pipeline
    compatibility, and ``select`` performs the actual frame selection.
    """

    method = "uniform"

    def fit(self, X=None, y=None):
        return self

    def config(self, n_frames: int) -> SamplerConfig:
        params = {k: v for k, v in self.get_params().items() if k != "n_frames"}
        return SamplerConfig(method=self.method, **params)

    def select(self, n_frames, profile=None, features=None) -> SampleSet:
        return run_sampler(self.config(n_frames), n_frames, profile, features)


class UniformSampler(BaseFrameSampler):
    method = "uniform"

    def __init__(self, budget: int = 32):
        self.budget = budget


class TopKSampler(BaseFrameSampler):
    method = "topk"

    def __init__(self, budget: int = 32):
        self.budget = budget


class SimilaritySampler(BaseFrameSampler):
    """Inverse transform sampling on the similarity CDF ("its")."""

    method = "its"

    def __init__(self, budget: int = 32, alpha: float = DEFAULT_ALPHA):
        self.budget = budget
        self.alpha = alpha


class ClusterSampler(BaseFrameSampler):
    """Inverse transform sampling on the ICF distribution ("icf")."""

    method = "icf"

    def __init__(self, budget: int = 32, seed: int = 0):
        self.budget = budget
        self.seed = seed


class AdaptiveSampler(BaseFrameSampler):
    """Relevance-balanced similarity/cluster sampling ("ascs")."""

    method = "ascs"

    def __init__(
        self,
        budget: int = 32,
        alpha: float = DEFAULT_ALPHA,
        tau: float = DEFAULT_TAU,
        gamma: float = DEFAULT_GAMMA,
        seed: int = 0,
    ):
        self.budget = budget
        self.alpha = alpha
        self.tau = tau
        self.gamma = gamma
        self.seed = seed
