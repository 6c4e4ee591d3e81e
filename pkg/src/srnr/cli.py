"""Command-line entry point: ``srnr <subcommand> [options]``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import pipeline as pl
from .encoding import calibrate_encoder
from .filterbank import FilterBank
from .synth import synthesize_subjects

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_RUNTIME = 0, 2, 3, 4

log = logging.getLogger("srnr")


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="srnr", description="Spiking rotating-neuron reservoir pipeline for sEMG gestures.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, data=True):
        sp.add_argument("--config", type=Path, help="TOML or JSON pipeline config")
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--out-dir", type=Path, default=Path("out"))
        if data:
            g = sp.add_mutually_exclusive_group()
            g.add_argument("--manifest", type=Path, help="dataset manifest.json")
            g.add_argument("--synthetic", action="store_true", help="use a generated dataset (default without --manifest)")
            sp.add_argument("--subjects", type=_int_list, help="subject ids to use (comma separated)")
            sp.add_argument("--classes", type=int, default=5, help="gesture classes for synthetic data")
            sp.add_argument("--reps", type=int, default=6, help="repetitions per gesture for synthetic data")
            sp.add_argument("--n-subjects", type=int, default=1, help="synthetic subjects when --subjects is absent")
        return sp

    sp = sub.add_parser("ingest", help="validate a dataset manifest and print class counts")
    sp.add_argument("--manifest", type=Path, required=True)
    sp.add_argument("--config", type=Path)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--subjects", type=_int_list)
    sp.add_argument("--out-dir", type=Path)

    sp = common(sub.add_parser("synth", help="write a synthetic dataset as CSV plus manifest"), data=False)
    sp.add_argument("--subjects", type=int, default=1, help="number of subjects")
    sp.add_argument("--classes", type=int, default=5)
    sp.add_argument("--reps", type=int, default=6)

    sp = common(sub.add_parser("run", help="run the full pipeline and write reports"))
    sp.add_argument("--workers", type=int, default=1)

    sp = common(sub.add_parser("sweep", help="accuracy versus reservoir size"))
    sp.add_argument("--sizes", type=_int_list, default=[1, 2, 5, 10, 20])
    sp.add_argument("--workers", type=int, default=1)

    sp = common(sub.add_parser("export-features", help="dump labelled features to CSV"))
    sp.add_argument("--stage", choices=["pre-reservoir", "post-reservoir"], default="post-reservoir")

    common(sub.add_parser("calibrate", help="calibrate the encoder gain per subject"))
    return p


def _config(args) -> pl.PipelineConfig:
    cfg = pl.load_config(args.config) if getattr(args, "config", None) else pl.PipelineConfig()
    if getattr(args, "seed", None) is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def _dataset(args, cfg):
    if getattr(args, "manifest", None):
        recs = pl.ingest_dataset(args.manifest)
        if args.subjects:
            wanted = set(args.subjects)
            missing = wanted - {r.subject_id for r in recs}
            if missing:
                raise pl.DataError(f"subjects not in manifest: {sorted(missing)}")
            recs = [r for r in recs if r.subject_id in wanted]
        return recs
    n = len(args.subjects) if args.subjects else args.n_subjects
    recs = synthesize_subjects(n, args.classes, args.reps, cfg.seed)
    if args.subjects:
        for r, sid in zip(recs, args.subjects):
            r.subject_id = sid
    return recs


def _cmd_ingest(args):
    manifest = pl.DatasetManifest.load(args.manifest)
    manifest.validate()
    recs = pl.ingest_dataset(manifest)
    if args.subjects:
        recs = [r for r in recs if r.subject_id in set(args.subjects)]
    summary = {
        "sample_rate": manifest.sample_rate,
        "n_channels": manifest.n_channels,
        "subjects": {str(r.subject_id): pl.class_counts(r) for r in recs},
    }
    text = json.dumps(summary, indent=2)
    print(text)
    if args.out_dir:
        args.out_dir.mkdir(parents=True, exist_ok=True)
        (args.out_dir / "ingest.json").write_text(text)


def _cmd_synth(args):
    cfg = _config(args)
    recs = synthesize_subjects(args.subjects, args.classes, args.reps, cfg.seed)
    path = pl.write_dataset(recs, args.out_dir, classes=list(range(args.classes + 1)))
    print(path)


def _cmd_run(args):
    cfg = _config(args)
    report = pl.run_pipeline(cfg, _dataset(args, cfg), workers=args.workers)
    out = report.write(args.out_dir)
    print(f"accuracy {report.accuracy:.2f}% over {len(report.folds)} folds; reports in {out}")


def _cmd_sweep(args):
    cfg = _config(args)
    rows = pl.sweep_network_size(cfg, args.sizes, _dataset(args, cfg), workers=args.workers)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    (args.out_dir / "sweep.csv").write_text(pl.sweep_csv(rows))
    for r in rows:
        print(f"N={r['size']:>3}  {r['mean_acc']:.2f} +/- {r['std_acc']:.2f}")


def _cmd_export(args):
    cfg = _config(args)
    x, y = pl.export_features(args.stage, _dataset(args, cfg), cfg)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    path = args.out_dir / f"features_{args.stage}.csv"
    path.write_text(pl.features_csv(x, y))
    print(f"{x.shape[0]} x {x.shape[1]} features -> {path}")


def _cmd_calibrate(args):
    cfg = _config(args)
    e = cfg.encoder
    rows = []
    for rec in _dataset(args, cfg):
        windows = pl.prepare_windows(rec, cfg)
        fb = FilterBank.standard(rec.sample_rate, cfg.bands.cutoffs, cfg.bands.order)
        bands = fb.expand(np.stack([w.samples for w in windows]))
        base = pl._encoder_params(cfg, rec.sample_rate)
        cal = calibrate_encoder(bands, base, e.rate_cap, e.statistic, e.tol_hz, e.max_iter)
        rows.append({
            "subject": rec.subject_id,
            "input_gain": cal.params.input_gain,
            "max_rate_hz": cal.max_rate,
            "evaluations": cal.evaluations,
            "warning": cal.warning,
        })
        print(f"subject {rec.subject_id}: gain {cal.params.input_gain:.6g}, max rate {cal.max_rate:.1f} Hz"
              + (f" ({cal.warning})" if cal.warning else ""))
    args.out_dir.mkdir(parents=True, exist_ok=True)
    (args.out_dir / "calibration.json").write_text(json.dumps(rows, indent=2))


_COMMANDS = {
    "ingest": _cmd_ingest,
    "synth": _cmd_synth,
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "export-features": _cmd_export,
    "calibrate": _cmd_calibrate,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _COMMANDS[args.command](args)
    except pl.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except pl.DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        log.debug("runtime failure", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
