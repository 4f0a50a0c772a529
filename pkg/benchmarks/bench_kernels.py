"""Compare the numba and numpy windowed-resultant kernels.

Times the raw kernel on a single long phase-difference series and the full
pipeline on an all-pairs panel sized like a 50-region study. Run:

    python benchmarks/bench_kernels.py
"""

import os
import time

import numpy as np

from phasesync import FilterBand, PipelineConfig, RegimeSpec, gen_regime_panel, run_pipeline
from phasesync._kernels import HAS_NUMBA, _resultant_numpy, _resultant_sliding, warm_up


def time_call(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernel():
    rng = np.random.default_rng(42)
    psi = rng.uniform(-np.pi, np.pi, size=200_000)
    cos_psi, sin_psi = np.cos(psi), np.sin(psi)
    window = 13

    rows = [("numpy", time_call(lambda: _resultant_numpy(cos_psi, sin_psi, window)))]
    if HAS_NUMBA:
        warm_up()
        _resultant_sliding(cos_psi, sin_psi, window)  # compile for this signature
        rows.append(("numba", time_call(lambda: _resultant_sliding(cos_psi, sin_psi, window))))
    print(f"kernel: n={psi.size}, window={window}")
    base = rows[0][1]
    for name, seconds in rows:
        print(f"  {name:6s} {seconds * 1e3:8.2f} ms   x{base / seconds:.1f}")


def bench_pipeline():
    spec = RegimeSpec(
        segments=((168, "coupled"), (168, "uncoupled"), (169, "coupled")),
        seed=11,
    )
    panel = gen_regime_panel(50, spec)  # 1,225 pairs over 505 months
    config = PipelineConfig(band=FilterBand(4, 18), window=13)

    backends = ["numpy"] + (["numba"] if HAS_NUMBA else [])
    print(f"pipeline: {len(panel)} members, {panel.n} months, "
          f"{50 * 49 // 2} pairs, window {config.window}")
    saved = os.environ.get("PHASESYNC_BACKEND")
    try:
        results = {}
        for backend in backends:
            os.environ["PHASESYNC_BACKEND"] = backend
            run_pipeline(panel, config)  # once unmeasured (JIT, caches)
            seconds = time_call(lambda: run_pipeline(panel, config), repeats=3)
            results[backend] = seconds
            print(f"  {backend:6s} {seconds * 1e3:8.2f} ms")
        if len(results) == 2:
            print(f"  numba speedup x{results['numpy'] / results['numba']:.1f}")
    finally:
        if saved is None:
            os.environ.pop("PHASESYNC_BACKEND", None)
        else:
            os.environ["PHASESYNC_BACKEND"] = saved


if __name__ == "__main__":
    bench_kernel()
    bench_pipeline()
