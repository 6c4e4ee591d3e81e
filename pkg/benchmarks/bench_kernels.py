"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 3] [--json out.json]

Workloads match one 200 ms window batch of the default pipeline: 64
windows x 48 band channels x 400 samples.
"""
from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from srnr._kernels import available_backends
from srnr.filterbank import FilterBank


def _workloads(rng):
    windows, channels, steps = 64, 48, 400
    bands = np.abs(rng.standard_normal((windows * channels, steps)))
    spikes = (rng.random((windows * channels, steps)) < 0.1).astype(np.uint8)
    masks = (rng.random((windows * channels, 10)) < 0.5).astype(np.uint8)
    sos = FilterBank.standard(2000.0).cascades[1].sections
    raw = rng.standard_normal((windows * 12, steps))
    x = rng.poisson(5.0, size=(2000, 480)).astype(np.float64)
    y = rng.integers(0, 5, size=2000)
    order = rng.permutation(2000)
    lif = dict(dt=5e-4, tau=0.015, c=3e-3, gain=0.15, v_thr=0.5, v_reset=0.0, v_rest=0.0)

    def delta(k):
        w = np.zeros((5, 480))
        b = np.zeros(5)
        k.delta_epoch(w, b, x, y, order, 0.005)

    return {
        "sosfilt_rows": lambda k: k.sosfilt_rows(sos, raw),
        "lif_encode_rows": lambda k: k.lif_encode_rows(bands, **lif),
        "rotating_reservoir": lambda k: k.rotating_reservoir(
            spikes, masks, 5e-4, 0.015, 3e-3, 1.0, 1.0, 0.5, 0.0, 0.0
        ),
        "delta_epoch": delta,
    }


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", help="write results here")
    args = ap.parse_args(argv)

    backends = available_backends()
    if "cython" not in backends:
        print("compiled extension not built; timing the fallback only", file=sys.stderr)
    work = _workloads(np.random.default_rng(0))
    results = {}
    for name, fn in work.items():
        results[name] = {}
        for bname, mod in backends.items():
            best = float("inf")
            for _ in range(args.repeat):
                t0 = time.perf_counter()
                fn(mod)
                best = min(best, time.perf_counter() - t0)
            results[name][bname] = best

    print(f"{'kernel':<20} " + " ".join(f"{b:>10}" for b in backends) + "   speedup")
    for name, row in results.items():
        speed = row["python"] / row["cython"] if "cython" in row else float("nan")
        print(f"{name:<20} " + " ".join(f"{row[b] * 1e3:>8.1f}ms" for b in backends) + f"   {speed:7.1f}x")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(results, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
