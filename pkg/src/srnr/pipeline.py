"""End-to-end experiment driver.

normalise -> trim -> window -> filterbank -> encode (calibrated on the
training fold) -> reservoir -> spike counts -> readout -> metrics, run per
subject and per fold.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field, fields, is_dataclass, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__, _kernels
from .encoding import LifParams, calibrate_encoder, encode_rows
from .filterbank import DEFAULT_CUTOFFS_HZ, FilterBank
from .metrics import MetricsReport, compute_metrics
from .raster import SpikeRaster, downsample_raster
from .readout import bin_counts_array, train_delta_softmax, train_linear_svm
from .reservoir import make_bank_configs, run_reservoir_batch
from .signal import (
    RawRecording,
    SplitSpec,
    Window,
    balance_classes,
    normalize_recording,
    segment_windows,
    split_indices,
    split_runs,
    trim_repetition,
)

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1

__all__ = [
    "ConfigError",
    "DataError",
    "PipelineConfig",
    "DatasetManifest",
    "RunReport",
    "load_config",
    "ingest_dataset",
    "write_dataset",
    "prepare_windows",
    "run_pipeline",
    "sweep_network_size",
    "export_features",
]


class ConfigError(ValueError):
    pass


class DataError(ValueError):
    pass


# --------------------------------------------------------------------------
# configuration


@dataclass
class BandsConfig:
    cutoffs: List[float] = field(default_factory=lambda: list(DEFAULT_CUTOFFS_HZ))
    order: int = 4


@dataclass
class EncoderConfig:
    r: float = 5.0
    c: float = 3e-3
    v_thr: float = 0.5
    rate_cap: float = 300.0
    statistic: str = "window"
    tol_hz: float = 5.0
    max_iter: int = 40


@dataclass
class ReservoirSection:
    n_neurons: int = 10
    density: float = 0.5
    spike_current: float = 1.0
    shared_mask: bool = False
    # "raster": reservoir steps at the sampling period with tau = RC unchanged;
    # "1ms": rasters OR-downsampled to the 1 ms step.
    clock: str = "raster"


@dataclass
class ReadoutConfig:
    classifier: str = "delta"
    alpha: float = 0.005
    batch: int = 1
    epochs: int = 200
    n_bins: int = 1
    svm_c: float = 1.0
    svm_epochs: int = 50


@dataclass
class SplitConfig:
    train_fraction: float = 0.8
    folds: int = 5
    mode: str = "kfold"


@dataclass
class PipelineConfig:
    bands: BandsConfig = field(default_factory=BandsConfig)
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    reservoir: ReservoirSection = field(default_factory=ReservoirSection)
    readout: ReadoutConfig = field(default_factory=ReadoutConfig)
    split: SplitConfig = field(default_factory=SplitConfig)
    window_ms: float = 200.0
    trim_ms: float = 600.0
    include_rest: bool = True
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.readout.classifier not in ("delta", "svm"):
            raise ConfigError(f"readout.classifier must be 'delta' or 'svm', got {self.readout.classifier!r}")
        if self.reservoir.clock not in ("raster", "1ms"):
            raise ConfigError(f"reservoir.clock must be 'raster' or '1ms', got {self.reservoir.clock!r}")
        if self.encoder.statistic not in ("window", "mean"):
            raise ConfigError(f"encoder.statistic must be 'window' or 'mean'")
        if self.reservoir.n_neurons < 1:
            raise ConfigError("reservoir.n_neurons must be >= 1")
        if not 0.0 < self.reservoir.density <= 1.0:
            raise ConfigError("reservoir.density must be in (0, 1]")
        if self.readout.epochs < 0 or self.readout.n_bins < 1 or self.readout.batch < 1:
            raise ConfigError("readout.epochs >= 0, n_bins >= 1 and batch >= 1 required")
        if self.window_ms <= 0 or self.trim_ms < 0:
            raise ConfigError("window_ms must be positive and trim_ms non-negative")
        try:
            SplitSpec(self.split.train_fraction, self.split.folds, self.seed, self.split.mode)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        return _build(cls, d, "")

    def with_seed(self, seed: int) -> "PipelineConfig":
        return replace(self, seed=seed)


def _build(cls, d, prefix):
    if not isinstance(d, dict):
        raise ConfigError(f"section {prefix or '<root>'} must be a table")
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(d) - set(known))
    if unknown:
        raise ConfigError(f"unknown config keys in {prefix or '<root>'}: {unknown}")
    kwargs = {}
    for name, value in d.items():
        default = known[name].default_factory() if callable(known[name].default_factory) else known[name].default
        if is_dataclass(default):
            kwargs[name] = _build(type(default), value, f"{prefix}{name}.")
        else:
            kwargs[name] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid config {prefix or '<root>'}: {exc}") from exc


def load_config(path) -> PipelineConfig:
    """Read a TOML or JSON config; both map onto the same nested tables."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        if path.suffix == ".json":
            data = json.loads(text)
        else:
            try:
                import tomllib
            except ModuleNotFoundError:  # Python < 3.11
                import tomli as tomllib
            data = tomllib.loads(text)
    except Exception as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    return PipelineConfig.from_dict(data)


# --------------------------------------------------------------------------
# dataset ingestion


@dataclass
class DatasetManifest:
    """JSON manifest describing one CSV file per subject.

    ``{"sample_rate": 2000, "n_channels": 12, "label_column": "label",
    "repetition_column": "repetition", "classes": [0, 1, ...],
    "subjects": [{"id": 1, "path": "s01.csv"}, ...]}``. Paths are relative to
    the manifest. ``classes`` is optional; when given, unknown labels are
    rejected.
    """

    subjects: List[dict]
    sample_rate: float
    n_channels: int
    label_column: str = "label"
    repetition_column: str = "repetition"
    classes: Optional[List[int]] = None
    root: Path = Path(".")

    @classmethod
    def load(cls, path) -> "DatasetManifest":
        path = Path(path)
        try:
            d = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read manifest {path}: {exc}") from exc
        try:
            m = cls(
                subjects=list(d["subjects"]),
                sample_rate=float(d["sample_rate"]),
                n_channels=int(d["n_channels"]),
                label_column=d.get("label_column", "label"),
                repetition_column=d.get("repetition_column", "repetition"),
                classes=d.get("classes"),
                root=path.parent,
            )
        except KeyError as exc:
            raise DataError(f"manifest {path} is missing field {exc}") from exc
        m.validate()
        return m

    def validate(self):
        if self.sample_rate <= 0:
            raise DataError("manifest sample_rate must be positive")
        if not self.subjects:
            raise DataError("manifest lists no subjects")
        for s in self.subjects:
            if "path" not in s:
                raise DataError(f"subject entry {s} has no path")
            p = self.resolve(s["path"])
            if not p.exists():
                raise DataError(f"subject {s.get('id')}: file {p} does not exist")
            rate = s.get("sample_rate", self.sample_rate)
            if float(rate) != self.sample_rate:
                raise DataError(
                    f"{p}: column sample_rate {rate} disagrees with manifest rate {self.sample_rate}"
                )

    def resolve(self, p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else self.root / p

    def to_dict(self) -> dict:
        return {
            "sample_rate": self.sample_rate,
            "n_channels": self.n_channels,
            "label_column": self.label_column,
            "repetition_column": self.repetition_column,
            "classes": self.classes,
            "subjects": self.subjects,
        }


def _read_subject_csv(path: Path, manifest: DatasetManifest, subject_id: int) -> RawRecording:
    with open(path, newline="") as fh:
        header = fh.readline().strip()
        if not header:
            raise DataError(f"{path}: file is empty")
        cols = [c.strip() for c in header.split(",")]
        want = [f"ch{i}" for i in range(manifest.n_channels)]
        for col in want + [manifest.label_column, manifest.repetition_column]:
            if col not in cols:
                raise DataError(f"{path}: missing column {col!r}")
        try:
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise DataError(f"{path}: malformed row ({exc})") from exc
    if data.size == 0:
        raise DataError(f"{path}: no samples")
    if data.shape[1] != len(cols):
        raise DataError(f"{path}: rows have {data.shape[1]} fields, header has {len(cols)}")
    samples = data[:, [cols.index(c) for c in want]].T
    raw_labels = data[:, cols.index(manifest.label_column)]
    reps = data[:, cols.index(manifest.repetition_column)]
    for name, arr in ((manifest.label_column, raw_labels), (manifest.repetition_column, reps)):
        if not np.all(arr == np.round(arr)):
            bad = np.flatnonzero(arr != np.round(arr))[:10] + 2
            raise DataError(f"{path}: column {name!r} has non-integer values at rows {bad.tolist()}")
    labels = raw_labels.astype(np.int64)
    if manifest.classes is not None:
        unknown = ~np.isin(labels, manifest.classes)
        if unknown.any():
            rows = np.flatnonzero(unknown)
            raise DataError(
                f"{path}: column {manifest.label_column!r} has unknown class ids "
                f"{sorted(set(labels[rows].tolist()))} at rows {(rows[:10] + 2).tolist()}"
                + (" ..." if rows.size > 10 else "")
            )
    return RawRecording(samples, manifest.sample_rate, labels, reps.astype(np.int64), subject_id)


def ingest_dataset(manifest) -> List[RawRecording]:
    """Load every subject listed in a manifest (object or path)."""
    if not isinstance(manifest, DatasetManifest):
        manifest = DatasetManifest.load(manifest)
    recs = []
    for i, s in enumerate(manifest.subjects):
        rec = _read_subject_csv(manifest.resolve(s["path"]), manifest, int(s.get("id", i + 1)))
        labels, counts = np.unique(rec.gesture_label, return_counts=True)
        log.info("subject %s: %d samples, class counts %s", rec.subject_id, rec.n_samples,
                 dict(zip(labels.tolist(), counts.tolist())))
        recs.append(rec)
    return recs


def class_counts(rec: RawRecording) -> Dict[int, int]:
    labels, counts = np.unique(rec.gesture_label, return_counts=True)
    return dict(zip(labels.tolist(), counts.tolist()))


def write_dataset(recordings: Sequence[RawRecording], out_dir, classes=None) -> Path:
    """Write recordings as subject CSVs plus ``manifest.json``; returns the manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    subjects = []
    for rec in recordings:
        name = f"subject_{rec.subject_id:02d}.csv"
        header = ",".join([f"ch{i}" for i in range(rec.n_channels)] + ["label", "repetition"])
        table = np.column_stack([rec.samples.T, rec.gesture_label, rec.repetition_id])
        fmt = ["%.9g"] * rec.n_channels + ["%d", "%d"]
        np.savetxt(out / name, table, delimiter=",", header=header, comments="", fmt=fmt)
        subjects.append({"id": rec.subject_id, "path": name})
    manifest = {
        "sample_rate": recordings[0].sample_rate,
        "n_channels": recordings[0].n_channels,
        "label_column": "label",
        "repetition_column": "repetition",
        "classes": classes,
        "subjects": subjects,
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2))
    return path


# --------------------------------------------------------------------------
# run machinery


class StageTimer:
    def __init__(self):
        self.totals: Dict[str, float] = {}

    @contextmanager
    def stage(self, name):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.totals[name] = self.totals.get(name, 0.0) + time.perf_counter() - t0

    def merge(self, other: Dict[str, float]):
        for k, v in other.items():
            self.totals[k] = self.totals.get(k, 0.0) + v


def prepare_windows(rec: RawRecording, config: PipelineConfig) -> List[Window]:
    """Normalise, trim every run, window it and balance the classes."""
    rec = normalize_recording(rec)
    windows = []
    for run in split_runs(rec):
        is_rest = run.gesture_label[0] == 0
        if is_rest and not config.include_rest:
            continue
        try:
            trimmed = trim_repetition(run, config.trim_ms)
        except ValueError as exc:
            if is_rest:
                continue
            raise DataError(f"subject {rec.subject_id}: {exc}") from exc
        windows += segment_windows(trimmed, config.window_ms, balance=False)
    return balance_classes(windows)


def _encoder_params(config: PipelineConfig, sample_rate: float) -> LifParams:
    e = config.encoder
    return LifParams(r=e.r, c=e.c, v_thr=e.v_thr, dt=1.0 / sample_rate)


def _reservoir_features(enc: np.ndarray, config: PipelineConfig, dt: float, chunk: int = 64) -> np.ndarray:
    """Spike-count features of the reservoir driven by ``enc`` ``(windows, banks, L)``."""
    rs = config.reservoir
    factor = 1
    if rs.clock == "1ms":
        factor = max(1, int(round(1e-3 / dt)))
    configs = make_bank_configs(
        enc.shape[1], rs.n_neurons, rs.density, config.seed, dt * factor, rs.spike_current, rs.shared_mask
    )
    feats = []
    for start in range(0, len(enc), chunk):
        block = enc[start : start + chunk]
        if factor > 1:
            block = np.stack([downsample_raster(SpikeRaster(b, dt), factor).spikes for b in block])
        out = run_reservoir_batch(block, configs)
        feats.append(bin_counts_array(out, config.readout.n_bins))
    return np.concatenate(feats).astype(np.float64)


def _run_subject(rec: RawRecording, config: PipelineConfig) -> dict:
    timer = StageTimer()
    with timer.stage("preprocess"):
        windows = prepare_windows(rec, config)
        if not windows:
            raise DataError(f"subject {rec.subject_id}: no usable windows")
        classes = sorted({w.label for w in windows})
        index = {c: i for i, c in enumerate(classes)}
        labels = np.array([index[w.label] for w in windows])
        spec = SplitSpec(config.split.train_fraction, config.split.folds, config.seed, config.split.mode)
        try:
            folds = split_indices(labels, spec)
        except ValueError as exc:
            raise DataError(f"subject {rec.subject_id}: {exc}") from exc

    with timer.stage("filterbank"):
        fb = FilterBank.standard(rec.sample_rate, config.bands.cutoffs, config.bands.order)
        bands = fb.expand(np.stack([w.samples for w in windows]))

    base = _encoder_params(config, rec.sample_rate)
    k = len(classes)
    results = []
    for f, (tr, te) in enumerate(folds):
        with timer.stage("calibrate"):
            cal = calibrate_encoder(
                bands[tr], base, config.encoder.rate_cap, config.encoder.statistic,
                config.encoder.tol_hz, config.encoder.max_iter,
            )
        with timer.stage("encode"):
            enc = encode_rows(bands, cal.params)
        with timer.stage("reservoir"):
            feats = _reservoir_features(enc, config, base.dt)
        with timer.stage("train"):
            ro = config.readout
            curve = []
            if ro.classifier == "delta":
                model, curve = train_delta_softmax(
                    feats[tr], labels[tr], ro.epochs, ro.alpha, ro.batch, config.seed, k
                )
            else:
                model = train_linear_svm(feats[tr], labels[tr], ro.svm_c, ro.svm_epochs, config.seed, k)
        with timer.stage("evaluate"):
            pred = model.predict(feats[te])
            metrics = compute_metrics(pred, labels[te], k)
            train_acc = float(np.mean(model.predict(feats[tr]) == labels[tr]) * 100.0)
        results.append(
            {
                "subject": rec.subject_id,
                "fold": f,
                "n_train": int(len(tr)),
                "n_test": int(len(te)),
                "classes": classes,
                "encoder_gain": cal.params.input_gain,
                "encoder_max_rate_hz": cal.max_rate,
                "calibration_warning": cal.warning,
                "train_accuracy": train_acc,
                "loss_curve": [float(v) for v in curve],
                "metrics": metrics.to_dict(),
            }
        )
    return {"folds": results, "timings": timer.totals}


def _run_subject_star(args):
    return _run_subject(*args)


_METRIC_KEYS = ("accuracy", "pp", "sp", "se", "f1")


def _mean_std(values):
    values = [float(v) for v in values]
    out = {"mean": float(np.mean(values)) if values else None, "n": len(values)}
    if len(values) >= 2:
        out["std"] = float(np.std(values, ddof=1))
    return out


@dataclass
class RunReport:
    folds: List[dict]
    summary: dict
    config: dict
    timings: Dict[str, float]
    version: str = __version__
    backend: str = ""
    schema_version: int = SCHEMA_VERSION

    def to_dict(self, include_timings: bool = True) -> dict:
        d = {
            "schema_version": self.schema_version,
            "version": self.version,
            "backend": self.backend,
            "config": self.config,
            "summary": self.summary,
            "folds": self.folds,
        }
        if include_timings:
            d["timings"] = self.timings
        return d

    def to_json(self, include_timings: bool = True) -> str:
        return json.dumps(self.to_dict(include_timings), indent=2, sort_keys=True)

    @property
    def accuracy(self) -> float:
        return self.summary["over_folds"]["accuracy"]["mean"]

    def metrics_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["subject", "fold"] + list(_METRIC_KEYS) + ["train_accuracy"])
        for r in self.folds:
            m = r["metrics"]
            w.writerow([r["subject"], r["fold"]] + [f"{m[k]:.4f}" for k in _METRIC_KEYS]
                       + [f"{r['train_accuracy']:.4f}"])
        return buf.getvalue()

    def loss_curves_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["subject", "fold", "epoch", "ce_loss"])
        for r in self.folds:
            for e, v in enumerate(r["loss_curve"], start=1):
                w.writerow([r["subject"], r["fold"], e, f"{v:.6g}"])
        return buf.getvalue()

    def pooled_confusion(self) -> np.ndarray:
        cms = [np.array(r["metrics"]["confusion"]) for r in self.folds]
        shapes = {c.shape for c in cms}
        if len(shapes) != 1:
            raise ValueError("folds have different class counts; cannot pool confusion matrices")
        return sum(cms)

    def to_markdown(self) -> str:
        s = self.summary
        lines = [
            "# Run report",
            "",
            f"- version {self.version}, kernels: {self.backend}, schema {self.schema_version}",
            f"- subjects: {s['n_subjects']}, folds: {len(self.folds)}",
            "",
            "| metric | mean over folds | std | mean over subjects | std |",
            "|---|---|---|---|---|",
        ]
        for k in _METRIC_KEYS:
            a, b = s["over_folds"][k], s["over_subjects"][k]
            fmt = lambda d: (f"{d['mean']:.1f}", f"{d['std']:.1f}" if "std" in d else "-")
            lines.append(f"| {k} | {fmt(a)[0]} | {fmt(a)[1]} | {fmt(b)[0]} | {fmt(b)[1]} |")
        lines += ["", "| subject | fold | acc | PP | Sp | Se | F1 |", "|---|---|---|---|---|---|---|"]
        for r in self.folds:
            m = r["metrics"]
            lines.append(f"| {r['subject']} | {r['fold']} | " + " | ".join(f"{m[k]:.1f}" for k in _METRIC_KEYS) + " |")
        lines += ["", "Stage timings (s): " + ", ".join(f"{k} {v:.2f}" for k, v in self.timings.items())]
        return "\n".join(lines) + "\n"

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(self.to_json())
        (out / "report.md").write_text(self.to_markdown())
        (out / "metrics.csv").write_text(self.metrics_csv())
        (out / "loss_curves.csv").write_text(self.loss_curves_csv())
        try:
            cm = self.pooled_confusion()
            (out / "confusion.csv").write_text(MetricsReport(0, 0, 0, 0, 0, cm).confusion_csv(self.folds[0]["classes"]))
        except ValueError:
            pass
        return out


def _summarise(folds: List[dict]) -> dict:
    over_folds = {k: _mean_std([r["metrics"][k] for r in folds]) for k in _METRIC_KEYS}
    subjects = sorted({r["subject"] for r in folds})
    per_subject = {
        k: [np.mean([r["metrics"][k] for r in folds if r["subject"] == s]) for s in subjects]
        for k in _METRIC_KEYS
    }
    over_subjects = {k: _mean_std(v) for k, v in per_subject.items()}
    return {"n_subjects": len(subjects), "over_folds": over_folds, "over_subjects": over_subjects}


def run_pipeline(config: PipelineConfig, dataset, workers: int = 1) -> RunReport:
    """Run every subject in ``dataset`` (a recording or a list of them).

    With ``workers > 1`` subjects run in a process pool; results do not
    depend on the worker count.
    """
    t0 = time.perf_counter()
    timer = StageTimer()
    with timer.stage("setup"):
        recs = [dataset] if isinstance(dataset, RawRecording) else list(dataset)
        if not recs:
            raise DataError("dataset has no subjects")
        config.validate()
    if workers > 1 and len(recs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outs = list(pool.map(_run_subject_star, [(r, config) for r in recs]))
    else:
        outs = [_run_subject(r, config) for r in recs]
    with timer.stage("report"):
        folds = [f for o in outs for f in o["folds"]]
        for o in outs:
            timer.merge(o["timings"])
        summary = _summarise(folds)
    timings = dict(timer.totals)
    timings["wall"] = time.perf_counter() - t0
    return RunReport(folds, summary, config.to_dict(), timings, backend=_kernels.BACKEND)


def sweep_network_size(config: PipelineConfig, sizes: Sequence[int], dataset, workers: int = 1) -> List[dict]:
    """Accuracy versus reservoir size; all other settings and seeds shared."""
    if not sizes:
        raise ConfigError("sizes must be non-empty")
    rows = []
    for n in sizes:
        cfg = replace(config, reservoir=replace(config.reservoir, n_neurons=int(n)))
        rep = run_pipeline(cfg, dataset, workers)
        accs = [r["metrics"]["accuracy"] for r in rep.folds]
        rows.append({
            "size": int(n),
            "mean_acc": float(np.mean(accs)),
            "std_acc": float(np.std(accs, ddof=1)) if len(accs) > 1 else 0.0,
        })
    return rows


def sweep_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["size", "mean_acc", "std_acc"], lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({"size": r["size"], "mean_acc": f"{r['mean_acc']:.4f}", "std_acc": f"{r['std_acc']:.4f}"})
    return buf.getvalue()


def export_features(stage: str, dataset, config: PipelineConfig):
    """Labelled feature matrix before or after the reservoir.

    The encoder is calibrated on all of a subject's windows. Returns
    ``(features, labels)``; ``features`` has one row per window.
    """
    if stage not in ("pre-reservoir", "post-reservoir"):
        raise ConfigError(f"stage must be 'pre-reservoir' or 'post-reservoir', got {stage!r}")
    recs = [dataset] if isinstance(dataset, RawRecording) else list(dataset)
    mats, labs = [], []
    for rec in recs:
        windows = prepare_windows(rec, config)
        fb = FilterBank.standard(rec.sample_rate, config.bands.cutoffs, config.bands.order)
        bands = fb.expand(np.stack([w.samples for w in windows]))
        base = _encoder_params(config, rec.sample_rate)
        cal = calibrate_encoder(bands, base, config.encoder.rate_cap, config.encoder.statistic,
                                config.encoder.tol_hz, config.encoder.max_iter)
        enc = encode_rows(bands, cal.params)
        if stage == "pre-reservoir":
            mats.append(bin_counts_array(enc, config.readout.n_bins).astype(np.float64))
        else:
            mats.append(_reservoir_features(enc, config, base.dt))
        labs.append(np.array([w.label for w in windows]))
    return np.concatenate(mats), np.concatenate(labs)


def features_csv(features: np.ndarray, labels: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"f{i}" for i in range(features.shape[1])] + ["label"])
    for row, lab in zip(features, labels):
        w.writerow([f"{v:g}" for v in row] + [int(lab)])
    return buf.getvalue()


def version_stamp() -> dict:
    return {"version": __version__, "python": platform.python_version(), "kernels": _kernels.BACKEND}
