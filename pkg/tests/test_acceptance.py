"""End-to-end acceptance gate.

Each test prints one PASS/FAIL line (visible with ``pytest -s`` or on
failure) and asserts the criterion it covers.  Tolerances and corpus
sizes are stated inline.
"""

import json
import math

import numpy as np
import pytest

from kfs import (
    AnnotationSample,
    ControlSpec,
    FeatureMatrix,
    OracleModel,
    SamplerConfig,
    SampleSet,
    Scene,
    SimilarityProfile,
    SynthSpec,
    balanced_distribution_similarity,
    balanced_scene_recall,
    build_report,
    controlled_frame_set,
    correlation_study,
    evaluate_sample,
    icf_sample,
    inverse_transform_sample,
    its_sample,
    key_frame_rate,
    kmeans_fit,
    per_scene_counts,
    relevance_score,
    run_sampler,
    synth_corpus,
    ukss,
)
from kfs import ascs_sample, dirichlet_proportions
from kfs import io as kfs_io
from kfs.controlled import dirichlet_weights
from kfs.exceptions import CapacityError, FormatError

from conftest import random_annotation
from test_samplers import brute_force_inverse_transform, random_cdf


def verdict(num: int, ok: bool, detail: str) -> None:
    print(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num}: {detail}"


def test_criterion_01_metric_hand_values(two_scene_ann):
    skewed = SampleSet(frames=(2, 3, 4, 105), budget=4)  # counts (3,1), l=(10,30)
    bsr = balanced_scene_recall(skewed, two_scene_ann)
    bds = balanced_distribution_similarity(skewed, two_scene_ann)
    u = ukss([0.04, 0.0001], epsilon=0.01)
    ok = (
        bsr == 0.5
        and abs(bds - 2 / math.sqrt(5)) < 1e-3
        and abs(u - 0.02) < 1e-12
    )
    verdict(1, ok, f"BSR={bsr}, BDS={bds:.6f} (target 0.894 +- 1e-3), UKSS={u:.6f}")


def test_criterion_02_inverse_transform_matches_brute_force():
    rng = np.random.default_rng(2024)
    mismatches = 0
    for _ in range(1000):
        n = int(rng.integers(2, 201))
        k = int(rng.integers(1, 65))
        cdf = random_cdf(rng, n)
        got = list(inverse_transform_sample(cdf, k).frames)
        if got != brute_force_inverse_transform(cdf.values, k):
            mismatches += 1
    verdict(2, mismatches == 0, f"{mismatches} mismatches over 1000 random CDFs")


def test_criterion_03_relevance_endpoints():
    flat = relevance_score(SimilarityProfile(scores=np.full(600, 0.5)), 64, tau=0.1)
    scores = np.zeros(600)
    scores[300] = 10.0
    scores += np.linspace(0, 1e-3, 600)
    spike = relevance_score(SimilarityProfile(scores=scores), 64, tau=0.1)
    ok = flat == 0.0 and spike >= 0.9
    verdict(3, ok, f"constant similarity -> {flat} (exact 0), spike -> {spike:.4f} (>= 0.9)")


def test_criterion_04_ascs_endpoint_consistency():
    spec = SynthSpec(n_samples=100, duration_range=(60, 240), seed=123)
    corpus = synth_corpus(spec)
    k = 16
    bad = 0
    for i, item in enumerate(corpus):
        n = item.annotation.duration_s
        flat = SimilarityProfile(scores=np.full(n, 0.5))
        a = ascs_sample(flat, item.features, k, seed=i)
        b = icf_sample(item.features, k, seed=i)
        if json.dumps(a.frames).encode() != json.dumps(b.frames).encode():
            bad += 1
        c = ascs_sample(item.similarity, item.features, k, seed=i, relevance=1.0)
        d = its_sample(item.similarity, 7.0, k)
        if json.dumps(c.frames).encode() != json.dumps(d.frames).encode():
            bad += 1
    verdict(4, bad == 0, f"{bad} byte-level mismatches over 100 samples x 2 endpoints")


def test_criterion_05_dirichlet_moments():
    durations = np.array([10.0, 20.0, 30.0, 40.0])
    w = dirichlet_weights(durations, 1.0)
    draws = np.array(
        [dirichlet_proportions(durations, 5.0, 1.0, seed=i) for i in range(10_000)]
    )
    mean_err = float(np.abs(draws.mean(axis=0) - w).max())
    loose = np.array(
        [dirichlet_proportions(durations, 0.05, 1.0, seed=i) for i in range(1000)]
    ).var(axis=0)
    tight = np.array(
        [dirichlet_proportions(durations, 20.0, 1.0, seed=i) for i in range(1000)]
    ).var(axis=0)
    ok = mean_err < 0.02 and bool(np.all(tight < loose))
    verdict(
        5,
        ok,
        f"max |mean - w| = {mean_err:.4f} (< 0.02), "
        f"var(C=20) < var(C=0.05) per component: {np.all(tight < loose)}",
    )


def test_criterion_06_controlled_generator_fidelity():
    rng = np.random.default_rng(6)
    kfr_bad = hit_bad = checked = 0
    while checked < 1000:
        ann = random_annotation(rng)
        budget = int(rng.integers(4, min(ann.duration_s, 40)))
        spec = ControlSpec(
            target_kfr=float(rng.uniform(0, 1)),
            target_shr=float(rng.uniform(0, 1)),
            concentration=float(rng.choice([0.05, 1.0, 5.0, 20.0])),
            beta=float(rng.choice([0.0, 0.5, 1.0])),
            budget=budget,
            seed=int(rng.integers(1 << 30)),
        )
        try:
            draw = controlled_frame_set(ann, spec)
        except CapacityError:
            continue
        n_key = int(np.floor(spec.target_kfr * budget + 0.5))
        if not draw.clamped and key_frame_rate(draw.sample, ann) != n_key / len(draw.sample):
            kfr_bad += 1
        counts = per_scene_counts(draw.sample, ann)
        if any(counts[i] < 1 for i in draw.hit_scenes):
            hit_bad += 1
        checked += 1
    ok = kfr_bad == 0 and hit_bad == 0
    verdict(
        6,
        ok,
        f"{kfr_bad} KFR mismatches, {hit_bad} unfilled hit scenes over 1000 annotations",
    )


def test_criterion_07_correlation_replay():
    corpus = synth_corpus(SynthSpec(n_samples=300, seed=42))
    model = OracleModel(seed=7)
    its_configs = [
        SamplerConfig(method="its", budget=32, alpha=round(0.05 * i, 10))
        for i in range(1, 201)
    ]
    its_rho = correlation_study(corpus, its_configs, model).rho
    ascs_configs = [
        SamplerConfig(method="ascs", budget=32, tau=round(0.5 + 0.1 * i, 10))
        for i in range(20)
    ]
    ascs_rho = correlation_study(corpus, ascs_configs, model).rho
    ok = its_rho >= 0.5 and ascs_rho >= 0.5
    verdict(
        7,
        ok,
        f"spearman(UKSS, accuracy): ITS 200-point alpha sweep rho={its_rho:.4f}, "
        f"ASCS 20-point tau sweep rho={ascs_rho:.4f} (each >= 0.5)",
    )


def test_criterion_08_sampler_ordering_trend():
    methods = ("uniform", "its", "icf", "ascs")
    means = {}
    per_seed = {m: [] for m in methods}
    for seed in range(10):
        corpus = synth_corpus(
            SynthSpec(n_samples=60, relevance_range=(0.7, 1.0), seed=seed)
        )
        for method in methods:
            cfg = SamplerConfig(method=method, budget=32, seed=seed)
            scores = [
                evaluate_sample(
                    run_sampler(cfg, it.annotation.duration_s, it.similarity, it.features),
                    it.annotation,
                ).score
                for it in corpus
            ]
            per_seed[method].append(ukss(scores))
    means = {m: float(np.mean(v)) for m, v in per_seed.items()}
    ordering = (
        means["ascs"] >= means["its"] >= means["uniform"]
        or means["ascs"] >= means["icf"] >= means["uniform"]
    )
    margin = means["ascs"] >= means["uniform"] + 0.02
    ok = ordering and margin
    verdict(
        8,
        ok,
        "mean UKSS over 10 seeds: "
        + ", ".join(f"{m}={means[m]:.4f}" for m in methods)
        + " (ascs >= its-or-icf >= uniform, ascs - uniform >= 0.02)",
    )


def test_criterion_09_kmeans_properties():
    rng = np.random.default_rng(9)
    monotone_bad = 0
    for _ in range(100):
        n = int(rng.integers(10, 60))
        k = int(rng.integers(2, min(n, 10)))
        f = FeatureMatrix(data=rng.normal(size=(n, 3)) + 2.0)
        hist = kmeans_fit(f, k, seed=int(rng.integers(1 << 30))).inertia_history
        if any(b > a + 1e-9 for a, b in zip(hist, hist[1:])):
            monotone_bad += 1

    blob = np.vstack(
        [
            rng.normal(0, 0.05, size=(25, 3)) + np.array([5.0, 0.0, 0.0]),
            rng.normal(0, 0.05, size=(25, 3)) + np.array([0.0, 5.0, 0.0]),
        ]
    )
    result = kmeans_fit(FeatureMatrix(data=blob), 2, seed=0)
    recovery = (
        len(set(result.assignments[:25].tolist())) == 1
        and len(set(result.assignments[25:].tolist())) == 1
        and result.assignments[0] != result.assignments[25]
    )

    f = FeatureMatrix(data=rng.normal(size=(40, 4)) + 2.0)
    a = kmeans_fit(f, 5, seed=17)
    b = kmeans_fit(f, 5, seed=17)
    deterministic = (
        np.array_equal(a.assignments, b.assignments)
        and np.array_equal(a.centers, b.centers)
        and a.inertia == b.inertia
    )
    ok = monotone_bad == 0 and recovery and deterministic
    verdict(
        9,
        ok,
        f"{monotone_bad}/100 non-monotone inertia runs, two-blob recovery={recovery}, "
        f"determinism={deterministic}",
    )


def test_criterion_10_format_round_trips(tmp_path):
    anns = [
        AnnotationSample(
            id="a", duration_s=60, scenes=(Scene(scene_id=0, segments=((5, 15),)),)
        ),
        AnnotationSample(
            id="b",
            duration_s=90,
            scenes=(
                Scene(scene_id=0, segments=((0, 10),)),
                Scene(scene_id=1, segments=((40, 70),)),
            ),
        ),
    ]
    kfs_io.write_annotations(anns, tmp_path / "ann.json")
    ann_ok = kfs_io.load_annotations(tmp_path / "ann.json") == anns

    rng = np.random.default_rng(10)
    data = rng.normal(size=(30, 8)).astype(np.float32).astype(float)
    kfs_io.write_features(FeatureMatrix(data=data), tmp_path / "f.kfsfeat")
    feat_ok = np.array_equal(kfs_io.load_features(tmp_path / "f.kfsfeat").data, data)

    sets = {"a": SampleSet(frames=(1, 7, 20), budget=4)}
    kfs_io.write_sample_sets(sets, 4, tmp_path / "sets.json")
    sets_ok = kfs_io.load_sample_sets(tmp_path / "sets.json") == sets

    per_sample = {
        "a": evaluate_sample(SampleSet(frames=(6, 30), budget=2), anns[0]),
        "b": evaluate_sample(SampleSet(frames=(5, 45), budget=2), anns[1]),
    }
    report = build_report(per_sample)
    kfs_io.write_report(report, tmp_path / "r.json", "json")
    kfs_io.write_report(report, tmp_path / "r.csv", "csv")
    report_ok = (
        kfs_io.read_report(tmp_path / "r.json") == report
        and kfs_io.read_report(tmp_path / "r.csv") == report
    )

    (tmp_path / "bad.kfsfeat").write_bytes(b"WRONGMAG" + b"\x00" * 8)
    errors_ok = False
    try:
        kfs_io.load_features(tmp_path / "bad.kfsfeat")
    except FormatError:
        errors_ok = True

    ok = ann_ok and feat_ok and sets_ok and report_ok and errors_ok
    verdict(
        10,
        ok,
        f"annotations={ann_ok}, features={feat_ok}, sample sets={sets_ok}, "
        f"reports={report_ok}, corrupt input rejection={errors_ok}",
    )
