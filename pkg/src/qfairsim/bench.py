"""Benchmark the numba kernel lane against the pure-NumPy lane.

Times the three hot kernels on a forged-share state and one end-to-end
detection estimate per lane, checking along the way that both lanes agree
numerically.  Run as ``python -m qfairsim.bench``.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from . import backend
from .adversary import ForgeArbitraryQubit
from .analysis import estimate_detection
from .kernels import BELL_RHOS
from .protocols import GreaterThanInputs
from .quantum import P1


def _forged_state() -> np.ndarray:
    from .kernels import pure_rho, tensor

    return tensor(BELL_RHOS[2], pure_rho(0.6, 0.8))


def _time_kernels(reps: int) -> dict:
    rho = _forged_state()
    timings = {}
    t0 = time.perf_counter()
    for _ in range(reps):
        probs = backend.bell_probs(rho, 1, 2)
    timings["bell_probs_us"] = (time.perf_counter() - t0) / reps * 1e6
    t0 = time.perf_counter()
    for _ in range(reps):
        m, p = backend.bell_collapse(rho, 1, 2, 0)
    timings["bell_collapse_us"] = (time.perf_counter() - t0) / reps * 1e6
    t0 = time.perf_counter()
    for _ in range(reps):
        backend.tensor(BELL_RHOS[2], BELL_RHOS[0])
    timings["tensor_us"] = (time.perf_counter() - t0) / reps * 1e6
    timings["_probs"] = probs
    timings["_collapse"] = (m, p)
    return timings


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="compare kernel lanes")
    parser.add_argument("--reps", type=int, default=20000)
    parser.add_argument("--trials", type=int, default=5000)
    args = parser.parse_args(argv)

    results = {}
    for lane in backend.available():
        backend.use(lane)
        if lane == "numba":
            from . import kernels_numba

            kernels_numba.warmup()
        kern = _time_kernels(args.reps)
        t0 = time.perf_counter()
        est = estimate_detection(
            "qrmp",
            ForgeArbitraryQubit(),
            GreaterThanInputs(2, 3),
            args.trials,
            seed=7,
            gamma=0.25,
            forger=P1,
        )
        kern["detection_trial_us"] = (time.perf_counter() - t0) / args.trials * 1e6
        kern["detection_estimate"] = est.estimate
        results[lane] = kern

    lanes = list(results)
    if len(lanes) == 2:
        a, b = results[lanes[0]], results[lanes[1]]
        assert np.allclose(a["_probs"], b["_probs"], atol=1e-12), "lanes disagree on probs"
        assert np.allclose(a["_collapse"][0], b["_collapse"][0], atol=1e-12)
        assert a["detection_estimate"] == b["detection_estimate"], "lanes disagree on estimate"
        print("lanes agree: probabilities, collapse, detection estimate identical\n")

    header = f"{'metric':<22}" + "".join(f"{lane:>14}" for lane in lanes)
    print(header)
    print("-" * len(header))
    for metric in ("bell_probs_us", "bell_collapse_us", "tensor_us", "detection_trial_us"):
        row = f"{metric:<22}"
        for lane in lanes:
            row += f"{results[lane][metric]:>14.2f}"
        print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
