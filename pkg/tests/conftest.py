"""Shared fixtures and generators for the test suite."""

import numpy as np
import pytest

from kfs import AnnotationSample, FeatureMatrix, Scene, SimilarityProfile


@pytest.fixture
def two_scene_ann():
    """Duration 200, scene 0 = [0,10) (l=10), scene 1 = [100,130) (l=30)."""
    return AnnotationSample(
        id="two-scene",
        duration_s=200,
        scenes=(
            Scene(scene_id=0, segments=((0, 10),)),
            Scene(scene_id=1, segments=((100, 130),)),
        ),
    )


def random_annotation(rng, max_scenes=4, min_duration=40, max_duration=120):
    """A valid random annotation with disjoint single-segment scenes."""
    n = int(rng.integers(min_duration, max_duration + 1))
    m = int(rng.integers(1, max_scenes + 1))
    # carve m disjoint segments out of [0, n)
    cuts = np.sort(rng.choice(np.arange(1, n), size=2 * m, replace=False))
    scenes = []
    for i in range(m):
        start, end = int(cuts[2 * i]), int(cuts[2 * i + 1])
        scenes.append(Scene(scene_id=i, segments=((start, end),)))
    return AnnotationSample(
        id=f"rand-{rng.integers(1 << 30)}", duration_s=n, scenes=tuple(scenes)
    )


def random_profile(rng, n):
    return SimilarityProfile(scores=rng.normal(0.0, 1.0, size=n))


def random_features(rng, n, d=4):
    return FeatureMatrix(data=rng.normal(0.0, 1.0, size=(n, d)) + 1e-3)
