"""Compiled kernels vs the numpy fallback on workloads shaped like a k=10^4 sweep point.

    python benchmarks/bench_kernels.py            # default sizes
    python benchmarks/bench_kernels.py --scale 0.2

Prints wall time per call for each backend and the speed-up.
"""

from __future__ import annotations

import argparse
import time
from fractions import Fraction

import numpy as np

from edgelatency import _pycore
from edgelatency.bounds import ldu_lower_array
from edgelatency.fountain import csr_to_masks, robust_soliton, sample_rows
from edgelatency.model import SystemParams, delta
from edgelatency.placement import cyclic_assignment

try:
    from edgelatency import _core
except ImportError:  # pragma: no cover
    _core = None


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def workloads(scale: float, rng: np.random.Generator):
    params = SystemParams()
    k = params.k
    d = delta(params)
    trials = max(5, int(200 * scale))
    lam = rng.exponential(params.beta, (trials, params.e))

    A = cyclic_assignment(k, params.e, Fraction(1, 3), 1)
    n = A.rows_per_en * params.e
    scan_args = (lam, d, A.zero_based(), A.n1, k + 2000, k + 2000, n, True, 1e-7, 2e-4, 1e-4, 0.0, 2e-5, 0.0)
    yield f"scan_accumulate ({trials} trials, n={n})", "scan_accumulate", scan_args

    cap = params.storage_rows
    p = np.arange(k, params.e * cap + 1)
    ldu = ldu_lower_array(p, k, 1e-7)
    yield f"lower_bound_scan ({trials} trials, {p.size} thresholds)", "lower_bound_scan", (lam, d, cap, k, ldu)

    kd = max(200, int(k * scale))
    dist = robust_soliton(kd, min(210, kd), 1e-4)
    row_ptr, cols = sample_rows(dist, kd, int(1.2 * kd), rng)
    yield (f"inactivation_decode (k={kd}, {int(1.2 * kd)} rows)", "inactivation_decode",
           (np.ascontiguousarray(row_ptr, dtype=np.int64), np.ascontiguousarray(cols, dtype=np.int32), kd, None))

    kr, tr = 50, max(100, int(5000 * scale))
    dist = robust_soliton(kr, 12, 0.1)
    rp, cs = sample_rows(dist, kr, tr * 75, rng)
    masks = np.ascontiguousarray(csr_to_masks(rp, cs).reshape(tr, 75))
    yield f"first_full_rank (k={kr}, {tr} trials)", "first_full_rank", (masks, kr)

    kk = max(1000, int(15000 * scale))
    omega = np.ascontiguousarray(robust_soliton(kk, 210, 1e-4).omega, dtype=np.float64)
    yield f"krawtchouk_ratio_q2 (n={kk})", "krawtchouk_ratio_q2", (omega, kk)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scale", type=float, default=1.0, help="shrink workloads for a quick look")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if _core is None:
        raise SystemExit("compiled extension not built; run: python setup.py build_ext --inplace")
    rng = np.random.default_rng(0)
    print(f"{'kernel':58s} {'compiled s':>11s} {'fallback s':>11s} {'speed-up':>9s}")
    for label, name, args_ in workloads(args.scale, rng):
        tc = _time(lambda: getattr(_core, name)(*args_), args.repeat)
        tp = _time(lambda: getattr(_pycore, name)(*args_), 1)
        print(f"{label:58s} {tc:11.4f} {tp:11.4f} {tp / tc:8.1f}x", flush=True)


if __name__ == "__main__":
    main()
