"""Keyframe sampling strategies and sampling-quality metrics for long-video
QA pipelines operating on precomputed per-frame scores and features."""

__version__ = "0.1.0"

from .types import (
    AnnotationSample,
    FeatureMatrix,
    SampleSet,
    SamplingCdf,
    Scene,
    SimilarityProfile,
    frame_in_key,
    per_scene_counts,
)
from .metrics import (
    SampleMetrics,
    UkssReport,
    balanced_distribution_similarity,
    balanced_scene_recall,
    build_report,
    evaluate_sample,
    key_frame_rate,
    sample_score,
    scene_hit_rate,
    scene_thresholds,
    spearman_rho,
    ukss,
)
from .samplers import (
    AdaptiveSampler,
    ClusterSampler,
    FrameDistribution,
    SamplerConfig,
    SimilaritySampler,
    TopKSampler,
    UniformSampler,
    ascs_sample,
    build_cdf,
    icf_distribution,
    icf_sample,
    inverse_transform_sample,
    its_normalize,
    its_sample,
    mad_normalize,
    relevance_score,
    run_sampler,
    softmax_distribution,
    topk_sample,
    uniform_sample,
)
from .clustering import ClusteringResult, FrameKMeans, kmeans_fit, nearest_center
from .controlled import (
    ControlSpec,
    ControlledDraw,
    allocate_scene_counts,
    controlled_frame_set,
    dirichlet_proportions,
)
from .synth import (
    OracleModel,
    StudyResult,
    SynthSample,
    SynthSpec,
    correlation_study,
    oracle_accuracy,
    synth_corpus,
)

__all__ = [name for name in dir() if not name.startswith("_")]
