"""Smoke test for the probe_py extension module.

Build and run from the repository root:

    cargo build --release -p probe-python --features extension-module
    cp target/release/libprobe_py.so python/probe_py.so
    python3 python/smoke_test.py
"""

import json
import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import probe_py as pp


def main():
    sharp = pp.test_card(64, 64)
    assert (sharp.width, sharp.height) == (64, 64)
    rows = sharp.to_rows()
    assert pp.Image(rows).to_rows() == rows

    k = pp.Kernel.gaussian(1.5, 11)
    assert k.support == 11
    assert abs(sum(k.weights) - 1.0) < 1e-12

    blurred = pp.convolve(sharp, k, boundary="periodic")
    restored = pp.deblur(blurred, k, c=1e-3, boundary="periodic")
    assert pp.psnr(sharp, restored) > pp.psnr(sharp, blurred)

    run = pp.run_probe(blurred, true_kernel=k, truth=sharp, iters=3, boundary="periodic")
    assert len(run.kernels) == 3
    assert all(b > a for a, b in zip(run.psnr, run.psnr[1:])), run.psnr
    assert json.loads(run.summary_json())["estimator"] == "oracle"

    blind = pp.run_probe(blurred, iters=2, support=9)
    assert blind.final_image.width == 64

    lo, hi = pp.fixed_points(0.01)[1:]
    assert abs(pp.oracle_step(hi, 0.01) - hi) < 1e-12
    assert abs(pp.trace(0.5, 0.01, 60)[-1] - hi) < 1e-9
    assert pp.trace(lo * 0.9, 0.01, 200)[-1] < 1e-12
    flags = pp.check_conditions(0.5, 0.01)
    assert not (flags["alpha_condition"] and flags["beta_condition"])

    pred = pp.predict(sharp, k, sigma_n=0.0, c=0.01, iters=3)
    for l in range(2):
        assert math.isclose(pred["boost"][l], pred["mse"][l] - pred["mse"][l + 1], abs_tol=1e-12)

    try:
        pp.Kernel(4, [1.0] * 16)
    except ValueError:
        pass
    else:
        raise AssertionError("even support accepted")

    print("smoke test ok: oracle psnr " + " -> ".join(f"{p:.2f}" for p in run.psnr))


if __name__ == "__main__":
    main()
