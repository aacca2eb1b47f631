#!/usr/bin/env python3
"""Smoke test for the stereopipe_py native module.

Build the extension first:

    cargo build -p stereopipe-python --release

then run this script with any Python >= 3.9:

    python3 python/smoke_test.py
"""

import math
import os
import random
import shutil
import sys
import tempfile


def load_module():
    """Import stereopipe_py from the cargo target directory."""
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    candidates = [
        os.path.join(root, "target", profile, name)
        for profile in ("release", "debug")
        for name in ("libstereopipe_py.so", "libstereopipe_py.dylib", "stereopipe_py.dll")
    ]
    built = next((p for p in candidates if os.path.exists(p)), None)
    if built is None:
        sys.exit("build the extension first: cargo build -p stereopipe-python --release")

    stage = tempfile.mkdtemp(prefix="stereopipe_py_")
    ext = ".pyd" if built.endswith(".dll") else ".so"
    shutil.copy(built, os.path.join(stage, "stereopipe_py" + ext))
    sys.path.insert(0, stage)
    import stereopipe_py

    return stereopipe_py


def shifted_pair(sp, width, height, shift, seed=1234):
    """Random texture pair where the right view is shifted by `shift`."""
    rng = random.Random(seed)
    texture = [[0] * (width + shift) for _ in range(height)]
    for y in range(height):
        row = texture[y]
        for x in range(width + shift):
            while True:
                v = rng.randrange(256)
                if v not in row[max(0, x - 16) : x]:
                    row[x] = v
                    break
    left = bytes(texture[y][x] for y in range(height) for x in range(width))
    right = bytes(texture[y][x + shift] for y in range(height) for x in range(width))
    return (
        sp.GrayImage(width, height, left),
        sp.GrayImage(width, height, right),
    )


def main():
    sp = load_module()
    width, height, shift = 128, 64, 4

    # scalar operations
    assert sp.hamming6(0b101010, 0b010101) == 6
    assert sp.cost_mc(0) == 0.0
    assert abs(sp.cost_ad(76, 0) - (1 - math.exp(-(76 / 255) / 0.3))) < 1e-12
    assert sp.disparity_to_depth(50.0, 1000.0, 0.1) == 2.0
    assert math.isinf(sp.disparity_to_depth(0.0, 1000.0, 0.1))
    print("ok: scalar cost and depth operations")

    # parameters
    params = sp.Params(8, w_x=5, w_y=5)
    assert params.scaled_max_disparity() == 4
    round_tripped = sp.Params.from_config_string(params.to_config_string())
    assert round_tripped.to_config_string() == params.to_config_string()
    print("ok: Params kwargs and config round-trip")

    # full pipeline on a known shift, with and without downscaling
    left, right = shifted_pair(sp, width, height, shift)
    for downscale in (False, True):
        disp = sp.compute_disparity(left, right, params, downscale=downscale)
        assert disp.width == width and disp.height == height
        margin = shift + params.w_x + 2
        exact = total = 0
        for y in range(margin, height - margin):
            for x in range(margin, width - margin):
                total += 1
                if abs(disp.get(x, y) - shift) <= (1.0 if downscale else 0.0):
                    exact += 1
        frac = exact / total
        assert frac >= 0.95, f"downscale={downscale}: only {frac:.1%} recovered"
        print(f"ok: pipeline recovers shift {shift} (downscale={downscale}, {frac:.1%})")

    # oracle agreement
    disp = sp.compute_disparity(left, right, params, downscale=True)
    ref = sp.oracle_disparity(left, right, params, downscale=True)
    assert disp.to_list() == ref.to_list()
    print("ok: oracle pipeline agrees exactly")

    # mean pooling
    flat = sp.GrayImage(8, 6, bytes([100] * 48))
    small = sp.mean_pool_downscale(flat, 2, 1)
    assert (small.width, small.height) == (4, 3)
    assert set(small.to_bytes()) == {100}
    print("ok: mean-pool downscale")

    # PFM round-trip and evaluation
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "disp.pfm")
        sp.write_pfm(disp, path)
        back = sp.read_pfm(path)
        assert back.to_list() == disp.to_list()
    gt = sp.DisparityMap(width, height, [float(shift)] * (width * height))
    report = sp.eval_bad(disp, gt, threshold=2.0)
    assert report["bad_rate_all"] < 20.0
    assert report["coverage"] == 1.0
    print(f"ok: PFM round-trip and eval (bad-2.0 = {report['bad_rate_all']:.2f}%)")

    print("smoke test passed")


if __name__ == "__main__":
    main()
