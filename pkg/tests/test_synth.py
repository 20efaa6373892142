import numpy as np
import pytest

from kfs import (
    OracleModel,
    SamplerConfig,
    StudyResult,
    SynthSpec,
    correlation_study,
    oracle_accuracy,
    synth_corpus,
)
from kfs.exceptions import KfsError, UndefinedCorrelationError
from kfs.metrics import SampleMetrics


def metrics_of(kfr, shr, bds):
    from kfs.metrics import sample_score

    return SampleMetrics(kfr=kfr, shr=shr, bsr=1.0, bds=bds, score=sample_score(kfr, 1.0, bds))


class TestOracleModel:
    def test_floor_corner(self):
        model = OracleModel()
        assert model.probability(0.0, 0.0, 1.0) == pytest.approx(0.538, abs=1e-12)

    def test_top_corner(self):
        model = OracleModel()
        assert model.probability(1.0, 1.0, 1.0) == pytest.approx(0.732, abs=1e-12)

    def test_interior_grid_point(self):
        model = OracleModel()
        assert model.probability(0.6, 0.8, 1.0) == pytest.approx(0.689, abs=1e-12)

    def test_distribution_factor_extremes(self):
        model = OracleModel()
        full = model.probability(1.0, 1.0, 1.0)
        worst = model.probability(1.0, 1.0, 0.0)
        assert worst / full == pytest.approx(68.2 / 73.1, abs=1e-12)

    def test_monotone_along_axes(self):
        model = OracleModel()
        grid = np.linspace(0, 1, 21)
        for shr in grid:
            vals = [model.probability(k, shr, 1.0) for k in grid]
            assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
        for kfr in grid:
            vals = [model.probability(kfr, s, 1.0) for s in grid]
            assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_probability_in_unit_interval(self):
        model = OracleModel()
        rng = np.random.default_rng(0)
        for _ in range(200):
            p = model.probability(*rng.uniform(0, 1, size=3))
            assert 0.0 <= p <= 1.0


class TestOracleAccuracy:
    def test_deterministic_per_seed(self):
        model = OracleModel(seed=5)
        m = metrics_of(0.5, 0.5, 0.9)
        draws = [oracle_accuracy(m, model, seed=123) for _ in range(5)]
        assert len(set(draws)) == 1

    def test_empirical_rate_tracks_probability(self):
        model = OracleModel(seed=1)
        m = metrics_of(0.6, 0.8, 1.0)
        p = model.probability(0.6, 0.8, 1.0)
        hits = sum(oracle_accuracy(m, model, seed=i) for i in range(4000))
        assert hits / 4000 == pytest.approx(p, abs=0.02)


class TestSynthSpec:
    def test_defaults_valid(self):
        SynthSpec()

    def test_rejects_bad_values(self):
        with pytest.raises(KfsError):
            SynthSpec(n_samples=0)
        with pytest.raises(KfsError):
            SynthSpec(duration_range=(10, 100))
        with pytest.raises(KfsError):
            SynthSpec(scene_count_probs=(0.5, 0.5, 0.5, 0.0, 0.0))
        with pytest.raises(KfsError):
            SynthSpec(relevance_range=(0.5, 0.2))
        with pytest.raises(KfsError):
            SynthSpec(feature_dim=1)


class TestSynthCorpus:
    def test_deterministic(self):
        spec = SynthSpec(n_samples=5, seed=3)
        a = synth_corpus(spec)
        b = synth_corpus(spec)
        for x, y in zip(a, b):
            assert x.annotation == y.annotation
            assert np.array_equal(x.similarity.scores, y.similarity.scores)
            assert np.array_equal(x.features.data, y.features.data)

    def test_sizes_and_shapes(self):
        spec = SynthSpec(n_samples=10, duration_range=(60, 120), feature_dim=8, seed=1)
        corpus = synth_corpus(spec)
        assert len(corpus) == 10
        for item in corpus:
            n = item.annotation.duration_s
            assert 60 <= n <= 120
            assert len(item.similarity) == n
            assert item.features.n_frames == n and item.features.dim == 8
            assert 1 <= item.annotation.n_scenes <= 5

    def test_single_scene_point_mass(self):
        spec = SynthSpec(
            n_samples=10, scene_count_probs=(1.0, 0.0, 0.0, 0.0, 0.0), seed=2
        )
        for item in synth_corpus(spec):
            assert item.annotation.n_scenes == 1

    def test_zero_relevance_scores_uninformative(self):
        spec = SynthSpec(n_samples=40, relevance_range=(0.0, 0.0), seed=4)
        in_scene, out_scene = [], []
        for item in synth_corpus(spec):
            key = item.annotation.key_frames()
            mask = np.zeros(item.annotation.duration_s, dtype=bool)
            mask[key] = True
            in_scene.extend(item.similarity.scores[mask])
            out_scene.extend(item.similarity.scores[~mask])
        assert abs(np.mean(in_scene) - np.mean(out_scene)) < 0.01

    def test_high_relevance_scores_informative(self):
        spec = SynthSpec(n_samples=40, relevance_range=(0.9, 1.0), seed=5)
        deltas = []
        for item in synth_corpus(spec):
            key = item.annotation.key_frames()
            mask = np.zeros(item.annotation.duration_s, dtype=bool)
            mask[key] = True
            deltas.append(
                np.mean(item.similarity.scores[mask])
                - np.mean(item.similarity.scores[~mask])
            )
        assert np.mean(deltas) > 0.1


class TestCorrelationStudy:
    def test_preconditions(self):
        corpus = synth_corpus(SynthSpec(n_samples=60, seed=0))
        few_configs = [SamplerConfig(method="uniform", budget=8)] * 5
        with pytest.raises(UndefinedCorrelationError):
            correlation_study(corpus, few_configs, OracleModel())
        enough = [SamplerConfig(method="uniform", budget=8)] * 20
        with pytest.raises(UndefinedCorrelationError):
            correlation_study(corpus[:10], enough, OracleModel())

    def test_duplicate_configs_identical_ukss(self):
        corpus = synth_corpus(SynthSpec(n_samples=60, duration_range=(60, 180), seed=1))
        configs = [
            SamplerConfig(method="its", budget=8, alpha=a)
            for a in (0.5, 1.0, 2.0, 4.0, 8.0)
        ] * 4
        result = correlation_study(corpus, configs, OracleModel(seed=2))
        assert isinstance(result, StudyResult)
        for i in range(5):
            group = {result.ukss_values[i + 5 * j] for j in range(4)}
            assert len(group) == 1
            accs = {result.accuracies[i + 5 * j] for j in range(4)}
            assert len(accs) == 1

    def test_deterministic(self):
        corpus = synth_corpus(SynthSpec(n_samples=60, duration_range=(60, 180), seed=3))
        configs = [
            SamplerConfig(method="its", budget=8, alpha=0.2 * (i + 1)) for i in range(20)
        ]
        a = correlation_study(corpus, configs, OracleModel(seed=7))
        b = correlation_study(corpus, configs, OracleModel(seed=7))
        assert a.ukss_values == b.ukss_values
        assert a.accuracies == b.accuracies
        assert a.rho == b.rho
