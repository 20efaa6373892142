"""On-disk formats: annotations, similarity scores, features, sample sets,
metric reports, and run manifests.

Annotations, similarity scores, sample sets and reports are JSON (small,
diff-able); features are a compact binary format:

    8 bytes  magic  b"KFSFEAT\\0"
    4 bytes  uint32 little-endian  n_frames
    4 bytes  uint32 little-endian  dim
    n_frames * dim * 4 bytes  float32 little-endian, row-major
"""

from __future__ import annotations

import csv
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import AnnotationError, FormatError, KfsError
from .metrics import SampleMetrics, UkssReport
from .types import AnnotationSample, FeatureMatrix, SampleSet, Scene, SimilarityProfile

FEATURE_MAGIC = b"KFSFEAT\x00"


# -- annotations -------------------------------------------------------------


def load_annotations(path) -> list[AnnotationSample]:
    """Load and validate an annotation file; raises with sample id on error."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "samples" not in doc:
        raise FormatError(f"{path}: missing top-level 'samples' list")
    samples = []
    for entry in doc["samples"]:
        sid = entry.get("id", "<missing id>")
        try:
            scenes = tuple(
                Scene(
                    scene_id=int(sc["scene_id"]),
                    segments=tuple((int(s), int(e)) for s, e in sc["segments"]),
                )
                for sc in entry.get("scenes", [])
            )
            samples.append(
                AnnotationSample(
                    id=str(sid), duration_s=int(entry["duration_s"]), scenes=scenes
                )
            )
        except (KeyError, TypeError) as exc:
            raise FormatError(f"{path}: sample {sid}: malformed entry: {exc}") from exc
        except AnnotationError as exc:
            raise AnnotationError(f"{path}: {exc}") from exc
    return samples


def write_annotations(samples: list[AnnotationSample], path) -> None:
    doc = {
        "samples": [
            {
                "id": ann.id,
                "duration_s": ann.duration_s,
                "scenes": [
                    {"scene_id": sc.scene_id, "segments": [list(seg) for seg in sc.segments]}
                    for sc in ann.scenes
                ],
            }
            for ann in samples
        ]
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


# -- similarity scores -------------------------------------------------------


def load_similarities(path) -> dict[str, SimilarityProfile]:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "samples" not in doc:
        raise FormatError(f"{path}: missing top-level 'samples' list")
    out = {}
    for entry in doc["samples"]:
        sid = str(entry.get("id", "<missing id>"))
        try:
            out[sid] = SimilarityProfile(scores=np.asarray(entry["scores"], dtype=float))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"{path}: sample {sid}: bad scores: {exc}") from exc
    return out


def write_similarities(profiles: dict[str, SimilarityProfile], path) -> None:
    doc = {
        "samples": [
            {"id": sid, "scores": [float(v) for v in p.scores]}
            for sid, p in sorted(profiles.items())
        ]
    }
    Path(path).write_text(json.dumps(doc) + "\n")


# -- features (binary) -------------------------------------------------------


def write_features(features: FeatureMatrix, path) -> None:
    payload = np.ascontiguousarray(features.data, dtype="<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(FEATURE_MAGIC)
        fh.write(struct.pack("<II", features.n_frames, features.dim))
        fh.write(payload)


def load_features(path) -> FeatureMatrix:
    raw = Path(path).read_bytes()
    if raw[:8] != FEATURE_MAGIC:
        raise FormatError(f"{path}: bad magic {raw[:8]!r}, expected {FEATURE_MAGIC!r}")
    if len(raw) < 16:
        raise FormatError(f"{path}: truncated header ({len(raw)} bytes)")
    n, d = struct.unpack("<II", raw[8:16])
    expected = 16 + n * d * 4
    if len(raw) != expected:
        raise FormatError(
            f"{path}: truncated payload: expected {expected} bytes, got {len(raw)}"
        )
    data = np.frombuffer(raw, dtype="<f4", offset=16).reshape(n, d).astype(float)
    if not np.all(np.isfinite(data)):
        raise FormatError(f"{path}: payload contains non-finite values")
    return FeatureMatrix(data=data)


# -- sample sets -------------------------------------------------------------


def load_sample_sets(path) -> dict[str, SampleSet]:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "samples" not in doc or "budget" not in doc:
        raise FormatError(f"{path}: missing 'samples' mapping or 'budget'")
    budget = int(doc["budget"])
    out = {}
    for sid, frames in doc["samples"].items():
        try:
            out[sid] = SampleSet(frames=tuple(int(f) for f in frames), budget=budget)
        except (TypeError, AnnotationError) as exc:
            raise FormatError(f"{path}: sample {sid}: {exc}") from exc
    return out


def write_sample_sets(samples: dict[str, SampleSet], budget: int, path) -> None:
    doc = {
        "budget": budget,
        "samples": {sid: list(s.frames) for sid, s in sorted(samples.items())},
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


# -- reports -----------------------------------------------------------------

_REPORT_FIELDS = ("kfr", "shr", "bsr", "bds", "score")


def _aggregate(report: UkssReport) -> dict:
    agg = {
        "ukss": report.ukss,
        "epsilon": report.epsilon,
        "n": len(report.per_sample),
    }
    for field in _REPORT_FIELDS:
        agg[f"mean_{field}"] = float(
            np.mean([getattr(m, field) for _, m in report.per_sample])
        )
    return agg


def write_report(report: UkssReport, path, fmt: str = "json") -> None:
    """Serialize per-sample rows plus the aggregate block (json or csv)."""
    if not report.per_sample:
        raise KfsError("cannot write an empty report")
    if fmt == "json":
        doc = {
            "per_sample": [
                {"id": sid, **{f: getattr(m, f) for f in _REPORT_FIELDS}}
                for sid, m in report.per_sample
            ],
            "aggregate": _aggregate(report),
        }
        Path(path).write_text(json.dumps(doc, indent=2) + "\n")
    elif fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(("id",) + _REPORT_FIELDS)
            for sid, m in report.per_sample:
                writer.writerow(
                    [sid] + [repr(getattr(m, f)) for f in _REPORT_FIELDS]
                )
            for key, value in _aggregate(report).items():
                fh.write(f"# {key}={value!r}\n")
    else:
        raise KfsError(f"unknown report format {fmt!r}")


def read_report(path) -> UkssReport:
    """Read back a report written by :func:`write_report` (either format)."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        per_sample = tuple(
            (
                row["id"],
                SampleMetrics(**{f: float(row[f]) for f in _REPORT_FIELDS}),
            )
            for row in doc["per_sample"]
        )
        agg = doc["aggregate"]
        return UkssReport(
            per_sample=per_sample, ukss=float(agg["ukss"]), epsilon=float(agg["epsilon"])
        )
    rows = []
    agg: dict[str, float] = {}
    lines = text.splitlines()
    for line in lines:
        if line.startswith("# "):
            key, _, value = line[2:].partition("=")
            agg[key] = float(value)
    body = [ln for ln in lines if ln and not ln.startswith("#")]
    reader = csv.DictReader(body)
    for row in reader:
        rows.append(
            (
                row["id"],
                SampleMetrics(**{f: float(row[f]) for f in _REPORT_FIELDS}),
            )
        )
    if "ukss" not in agg:
        raise FormatError(f"{path}: missing aggregate block")
    return UkssReport(per_sample=tuple(rows), ukss=agg["ukss"], epsilon=agg["epsilon"])


# -- run manifest ------------------------------------------------------------


@dataclass(frozen=True)
class RunManifest:
    """Provenance for one CLI run: inputs, configuration, seeds, outputs."""

    command: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    parameters: dict
    version: str

    def validate_inputs(self) -> None:
        for p in self.inputs:
            if not Path(p).exists():
                raise FormatError(f"manifest input does not exist: {p}")


def write_manifest(manifest: RunManifest, path) -> None:
    doc = {
        "command": manifest.command,
        "inputs": list(manifest.inputs),
        "outputs": list(manifest.outputs),
        "parameters": manifest.parameters,
        "version": manifest.version,
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def read_manifest(path) -> RunManifest:
    doc = json.loads(Path(path).read_text())
    return RunManifest(
        command=doc["command"],
        inputs=tuple(doc["inputs"]),
        outputs=tuple(doc["outputs"]),
        parameters=doc["parameters"],
        version=doc["version"],
    )
