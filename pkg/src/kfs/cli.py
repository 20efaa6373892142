"""Command-line interface.

Subcommands: sample, score, controlled, sweep, synth, validate.
Exit codes: 0 success, 1 runtime failure, 2 usage error.
Set KFS_THREADS to bound the per-sample worker pool.
"""

from __future__ import annotations

import functools
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click
import numpy as np

from . import __version__
from . import io as kfs_io
from .controlled import ControlSpec, controlled_frame_set
from .exceptions import KfsError
from .metrics import DEFAULT_EPSILON, build_report, evaluate_sample
from .samplers import (
    DEFAULT_ALPHA,
    DEFAULT_GAMMA,
    DEFAULT_TAU,
    SamplerConfig,
    run_sampler,
)
from .synth import OracleModel, SynthSpec, correlation_study, synth_corpus

METHODS = ("uniform", "topk", "its", "icf", "ascs")


def _worker_count() -> int:
    env = os.environ.get("KFS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise KfsError(f"KFS_THREADS must be an integer, got {env!r}")
    return min(8, os.cpu_count() or 1)


def _pmap(fn, items):
    """Map over items with a bounded pool; order of results follows items."""
    workers = _worker_count()
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _fail_on_kfs_error(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except KfsError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)

    return wrapper


def _write_run_manifest(command, inputs, outputs, parameters, out_path):
    manifest = kfs_io.RunManifest(
        command=command,
        inputs=tuple(str(p) for p in inputs),
        outputs=tuple(str(p) for p in outputs),
        parameters=parameters,
        version=__version__,
    )
    manifest.validate_inputs()
    kfs_io.write_manifest(manifest, out_path)


def _load_features_dir(path, ids):
    features = {}
    for sid in ids:
        fpath = Path(path) / f"{sid}.kfsfeat"
        if fpath.exists():
            features[sid] = kfs_io.load_features(fpath)
    return features


@click.group()
@click.version_option(__version__)
def main():
    """Keyframe sampling strategies and sampling-quality metrics."""


@main.command()
@click.option("--method", type=click.Choice(METHODS), required=True)
@click.option("--budget", type=int, required=True)
@click.option("--alpha", type=float, default=DEFAULT_ALPHA, show_default=True)
@click.option("--tau", type=float, default=DEFAULT_TAU, show_default=True)
@click.option("--gamma", type=float, default=DEFAULT_GAMMA, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--annotations", "annotations_path", type=click.Path(exists=True), required=True)
@click.option("--similarity", "similarity_path", type=click.Path(exists=True), default=None)
@click.option("--features", "features_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_path", type=click.Path(), required=True)
@_fail_on_kfs_error
def sample(method, budget, alpha, tau, gamma, seed, annotations_path, similarity_path, features_path, out_path):
    """Select frames for every annotated sample and write the sets."""
    anns = kfs_io.load_annotations(annotations_path)
    sims = kfs_io.load_similarities(similarity_path) if similarity_path else {}
    feats = (
        _load_features_dir(features_path, [a.id for a in anns]) if features_path else {}
    )
    cfg = SamplerConfig(
        method=method, budget=budget, alpha=alpha, tau=tau, gamma=gamma, seed=seed
    )

    def select(ann):
        return ann.id, run_sampler(
            cfg, ann.duration_s, sims.get(ann.id), feats.get(ann.id)
        )

    results = dict(_pmap(select, sorted(anns, key=lambda a: a.id)))
    kfs_io.write_sample_sets(results, budget, out_path)
    inputs = [annotations_path] + [p for p in (similarity_path, features_path) if p]
    _write_run_manifest(
        "sample",
        inputs,
        [out_path],
        {
            "method": method,
            "budget": budget,
            "alpha": alpha,
            "tau": tau,
            "gamma": gamma,
            "seed": seed,
        },
        str(out_path) + ".manifest.json",
    )


@main.command()
@click.option("--annotations", "annotations_path", type=click.Path(exists=True), required=True)
@click.option("--samples", "samples_path", type=click.Path(exists=True), required=True)
@click.option("--epsilon", type=float, default=DEFAULT_EPSILON, show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@_fail_on_kfs_error
def score(annotations_path, samples_path, epsilon, out_path, fmt):
    """Score sampled frame sets against annotations and emit a report."""
    anns = {a.id: a for a in kfs_io.load_annotations(annotations_path)}
    sample_sets = kfs_io.load_sample_sets(samples_path)
    missing = sorted(set(sample_sets) - set(anns))
    if missing:
        raise KfsError(f"sample sets reference unknown annotation ids: {missing}")

    def score_one(item):
        sid, s = item
        return sid, evaluate_sample(s, anns[sid])

    per_sample = dict(_pmap(score_one, sorted(sample_sets.items())))
    report = build_report(per_sample, epsilon)
    kfs_io.write_report(report, out_path, fmt)
    _write_run_manifest(
        "score",
        [annotations_path, samples_path],
        [out_path],
        {"epsilon": epsilon, "format": fmt},
        str(out_path) + ".manifest.json",
    )
    click.echo(f"ukss={report.ukss:.6f} n={len(report.per_sample)}")


@main.command()
@click.option("--annotations", "annotations_path", type=click.Path(exists=True), required=True)
@click.option("--kfr", type=float, required=True)
@click.option("--shr", type=float, required=True)
@click.option("--c", "concentration", type=float, required=True)
@click.option("--beta", type=float, required=True)
@click.option("--budget", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@_fail_on_kfs_error
def controlled(annotations_path, kfr, shr, concentration, beta, budget, seed, out_path):
    """Generate frame sets with prescribed KFR/SHR/distribution targets."""
    anns = kfs_io.load_annotations(annotations_path)
    spec = ControlSpec(
        target_kfr=kfr,
        target_shr=shr,
        concentration=concentration,
        beta=beta,
        budget=budget,
        seed=seed,
    )
    results = {}
    for ann in sorted(anns, key=lambda a: a.id):
        results[ann.id] = controlled_frame_set(ann, spec).sample
    kfs_io.write_sample_sets(results, budget, out_path)
    _write_run_manifest(
        "controlled",
        [annotations_path],
        [out_path],
        {"kfr": kfr, "shr": shr, "c": concentration, "beta": beta, "budget": budget, "seed": seed},
        str(out_path) + ".manifest.json",
    )


def parse_grid(spec: str) -> tuple[str, list[float]]:
    """Parse 'name=start:step:stop' into (name, inclusive value list)."""
    try:
        name, _, rng = spec.partition("=")
        start_s, step_s, stop_s = rng.split(":")
        start, step, stop = float(start_s), float(step_s), float(stop_s)
    except ValueError:
        raise KfsError(f"bad grid spec {spec!r}, expected name=start:step:stop")
    if not name or step <= 0 or stop < start:
        raise KfsError(f"bad grid spec {spec!r}")
    count = int(np.floor((stop - start) / step + 0.5)) + 1
    values = [round(start + i * step, 10) for i in range(count)]
    return name, values


@main.command()
@click.option("--method", type=click.Choice(METHODS), required=True)
@click.option("--grid", "grid_spec", type=str, default=None,
              help="Hyperparameter grid, e.g. alpha=0.05:0.05:10.0")
@click.option("--budget", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--epsilon", type=float, default=DEFAULT_EPSILON, show_default=True)
@click.option("--annotations", "annotations_path", type=click.Path(exists=True), required=True)
@click.option("--similarity", "similarity_path", type=click.Path(exists=True), default=None)
@click.option("--features", "features_path", type=click.Path(exists=True), default=None)
@click.option("--out-dir", "out_dir", type=click.Path(), required=True)
@_fail_on_kfs_error
def sweep(method, grid_spec, budget, seed, epsilon, annotations_path, similarity_path, features_path, out_dir):
    """Run a hyperparameter sweep; one report per config plus a summary."""
    anns = kfs_io.load_annotations(annotations_path)
    sims = kfs_io.load_similarities(similarity_path) if similarity_path else {}
    feats = (
        _load_features_dir(features_path, [a.id for a in anns]) if features_path else {}
    )
    base = {"method": method, "budget": budget, "seed": seed}
    if grid_spec:
        name, values = parse_grid(grid_spec)
        if name not in {"alpha", "tau", "gamma"}:
            raise KfsError(f"cannot sweep parameter {name!r}")
        configs = [SamplerConfig(**base, **{name: v}) for v in values]
        labels = [f"{name}={v:g}" for v in values]
    else:
        configs = [SamplerConfig(**base)]
        labels = ["default"]

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary_rows = []
    for i, (cfg, label) in enumerate(zip(configs, labels)):
        per_sample = {}
        for ann in sorted(anns, key=lambda a: a.id):
            s = run_sampler(cfg, ann.duration_s, sims.get(ann.id), feats.get(ann.id))
            per_sample[ann.id] = evaluate_sample(s, ann)
        report = build_report(per_sample, epsilon)
        report_path = out / f"config_{i:04d}.json"
        kfs_io.write_report(report, report_path, "json")
        summary_rows.append((label, report.ukss))
    summary_path = out / "summary.csv"
    with open(summary_path, "w") as fh:
        fh.write("config,ukss\n")
        for label, value in summary_rows:
            fh.write(f"{label},{value!r}\n")
    inputs = [annotations_path] + [p for p in (similarity_path, features_path) if p]
    _write_run_manifest(
        "sweep",
        inputs,
        [str(summary_path)],
        {**base, "grid": grid_spec, "epsilon": epsilon},
        out / "manifest.json",
    )
    click.echo(f"{len(configs)} configs -> {summary_path}")


@main.command()
@click.option("--spec", "spec_path", type=click.Path(exists=True), required=True)
@click.option("--out-dir", "out_dir", type=click.Path(), required=True)
@_fail_on_kfs_error
def synth(spec_path, out_dir):
    """Generate a synthetic corpus described by a spec file."""
    doc = json.loads(Path(spec_path).read_text())
    spec = SynthSpec(
        n_samples=int(doc.get("n_samples", 100)),
        duration_range=tuple(doc.get("duration_range", (60, 240))),
        scene_count_probs=tuple(doc.get("scene_count_probs", (0.45, 0.25, 0.15, 0.1, 0.05))),
        relevance_range=tuple(doc.get("relevance_range", (0.0, 1.0))),
        feature_dim=int(doc.get("feature_dim", 16)),
        noise_scale=float(doc.get("noise_scale", 0.25)),
        seed=int(doc.get("seed", 0)),
    )
    corpus = synth_corpus(spec)
    out = Path(out_dir)
    (out / "features").mkdir(parents=True, exist_ok=True)
    kfs_io.write_annotations([c.annotation for c in corpus], out / "annotations.json")
    kfs_io.write_similarities(
        {c.annotation.id: c.similarity for c in corpus}, out / "similarity.json"
    )
    for c in corpus:
        kfs_io.write_features(c.features, out / "features" / f"{c.annotation.id}.kfsfeat")
    _write_run_manifest(
        "synth",
        [spec_path],
        [str(out / "annotations.json"), str(out / "similarity.json")],
        doc,
        out / "manifest.json",
    )
    click.echo(f"{len(corpus)} samples -> {out}")


@main.command()
@click.option("--corpus", "corpus_dir", type=click.Path(exists=True), required=True)
@click.option("--sweep", "sweep_path", type=click.Path(exists=True), required=True)
@click.option("--oracle-seed", type=int, default=0, show_default=True)
@click.option("--min-rho", type=float, default=0.5, show_default=True)
@_fail_on_kfs_error
def validate(corpus_dir, sweep_path, oracle_seed, min_rho):
    """Correlate UKSS with the synthetic QA oracle over a config sweep."""
    from .synth import SynthSample  # lazy: only needed here

    corpus_dir = Path(corpus_dir)
    anns = kfs_io.load_annotations(corpus_dir / "annotations.json")
    sims = kfs_io.load_similarities(corpus_dir / "similarity.json")
    corpus = []
    for ann in anns:
        feats = kfs_io.load_features(corpus_dir / "features" / f"{ann.id}.kfsfeat")
        corpus.append(
            SynthSample(
                annotation=ann,
                similarity=sims[ann.id],
                features=feats,
                relevance=float("nan"),
            )
        )
    doc = json.loads(Path(sweep_path).read_text())
    base = {
        "method": doc["method"],
        "budget": int(doc["budget"]),
        "seed": int(doc.get("seed", 0)),
    }
    name, values = parse_grid(f"{doc['grid']}")
    configs = [SamplerConfig(**base, **{name: v}) for v in values]
    result = correlation_study(corpus, configs, OracleModel(seed=oracle_seed))
    click.echo(f"rho={result.rho:.4f} over {len(configs)} configs")
    if result.rho < min_rho:
        click.echo(f"correlation below threshold {min_rho}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
