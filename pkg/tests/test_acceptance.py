"""Acceptance gate: one test per release criterion.

Each test prints a single [PASS]/[FAIL] line (visible with -s or on
failure) and the verbose test id doubles as the per-criterion verdict.
"""

import time

import numpy as np

from lfdepth import (DispRange, EstimatorConfig, Layer, LightField,
                     NoiseTexture, SceneSpec, bench_cost, build_mosaic,
                     estimate, evaluate, masked_stat_cost,
                     modulated_conv_grad, oacc_forward, occluded_scene_spec,
                     ones_masks, read_pfm, render, required_pad,
                     shift_and_concat_gather, textured_mask, uniform_weights,
                     write_pfm)
from lfdepth.lfio import export_scene, load_scene

DRANGE = DispRange(-4, 4)


def _verdict(num, name, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num} ({name})"
    if detail:
        line += f": {detail}"
    print(line)
    assert ok, line


def _plane_spec(noise, seed):
    return SceneSpec(U=9, V=9, H=64, W=64,
                     layers=(Layer(disparity=1, region=None,
                                   texture=NoiseTexture(scale=3, seed=seed + 10)),),
                     noise_sigma=noise)


def test_criterion_1_oracle_equivalence():
    # dilated mosaic reads must equal the materialized shifted-volume mean
    t0 = time.time()
    r = np.random.default_rng(20240)
    worst = 0.0
    for trial in range(100):
        uv = int(r.choice([3, 5, 9]))
        H = int(r.integers(8, 33))
        W = int(r.integers(8, 33))
        lf = LightField.from_array(r.random((uv, uv, H, W, 1), dtype=np.float32))
        mos = build_mosaic(lf, required_pad(uv, uv, DRANGE))
        got = oacc_forward(mos, uniform_weights(uv, uv),
                           ones_masks(uv, uv, H, W), DRANGE)
        vol = shift_and_concat_gather(lf, DRANGE)
        ref = vol[..., 0].mean(axis=1)
        worst = max(worst, float(np.abs(got - ref).max()))
    ok = worst <= 1e-6 and time.time() - t0 < 60
    _verdict(1, "oracle equivalence", ok,
             f"max |diff| {worst:.3g} over 100 instances, {time.time() - t0:.1f}s")


def test_criterion_2_occlusion_behavior():
    # noise-free textured occluder: unmasked matching breaks on occluded
    # pixels, masked matching restores a zero cost at the true disparity
    lf, gt = render(occluded_scene_spec(H=64, W=64, seed=0), seed=0)
    vol = masked_stat_cost(lf, ones_masks(9, 9, 64, 64), DRANGE)
    volm = masked_stat_cost(lf, gt.occ_masks, DRANGE)
    didx = (gt.disparity - DRANGE.d_min).astype(int)
    hh, ww = np.meshgrid(np.arange(64), np.arange(64), indexing="ij")
    cost_gt = vol[didx, hh, ww]
    cost_gt_masked = volm[didx, hh, ww]
    tex = textured_mask(lf.center_sai()[:, :, 0])
    vis = gt.occ_masks.min(axis=0) == 1

    occluded = tex & ~vis
    argmin_wrong = vol.argmin(axis=0) != didx
    helped = argmin_wrong | (cost_gt_masked < cost_gt)
    frac = float(helped[occluded].mean())
    visible_peak = float(cost_gt[tex & vis].max())
    ok = frac >= 0.95 and visible_peak <= 1e-6
    _verdict(2, "occluder breaks unmasked cost, masks repair it", ok,
             f"occluded-pixel fraction {frac:.3f} (n={int(occluded.sum())}), "
             f"visible cost@GT max {visible_peak:.3g}")


def test_criterion_3_iterative_trend():
    res = {"i1": [], "i2": [], "gt": []}
    for s in range(10):
        lf, gt = render(occluded_scene_spec(H=64, W=64, seed=s), seed=s)
        for key, src, iters, ext in (("i1", "iterative", 1, None),
                                     ("i2", "iterative", 2, None),
                                     ("gt", "external", 1, gt.disparity)):
            cfg = EstimatorConfig(drange=DRANGE, iterations=iters,
                                  mode="argmin", window=1, mask_source=src)
            d, _, _ = estimate(lf, cfg, external_disp=ext)
            res[key].append(evaluate(d, gt.disparity).mse_x100)
    m1, m2, mg = (float(np.mean(res[k])) for k in ("i1", "i2", "gt"))
    viol_12 = sum(a < b for a, b in zip(res["i1"], res["i2"]))
    viol_2g = sum(a < b for a, b in zip(res["i2"], res["gt"]))
    ok = m2 <= m1 and mg <= m2 and viol_12 <= 2 and viol_2g <= 2
    _verdict(3, "refinement lowers MSE, oracle masks lower it further", ok,
             f"mean MSEx100 iter1 {m1:.3f} >= iter2 {m2:.3f} >= gt-mask {mg:.3f}; "
             f"per-scene violations {viol_12}/{viol_2g}")


def _sweep_mse(lf, gt_disp, q, window=5):
    cfg = EstimatorConfig(drange=DRANGE, iterations=2, q=q, mode="argmin",
                          window=window, mask_source="iterative")
    d, _, _ = estimate(lf, cfg)
    return evaluate(d, gt_disp).mse_x100


def test_criterion_4_decay_rate_tradeoff():
    # heavy occlusion, no noise: aggressive decay wins
    lf, gt = render(occluded_scene_spec(H=64, W=64, seed=0), seed=0)
    clean_q1 = _sweep_mse(lf, gt.disparity, 1.0)
    clean_q5 = _sweep_mse(lf, gt.disparity, 5.0)
    # sigma = 0.1 noise, no occlusion: gentle decay is more robust
    lf_n, gt_n = render(_plane_spec(0.1, 0), seed=0)
    noisy_q1 = _sweep_mse(lf_n, gt_n.disparity, 1.0)
    noisy_q5 = _sweep_mse(lf_n, gt_n.disparity, 5.0)
    ok = clean_q5 <= clean_q1 and noisy_q1 <= noisy_q5
    _verdict(4, "decay-rate trade-off", ok,
             f"occluded MSEx100 q5 {clean_q5:.3f} <= q1 {clean_q1:.3f}; "
             f"noisy q1 {noisy_q1:.3f} <= q5 {noisy_q5:.3f}")


def test_criterion_5_gradient_check():
    r = np.random.default_rng(99)
    drange = DispRange(-1, 1)
    step = 1e-3
    worst = 0.0
    for _ in range(20):
        H = int(r.integers(4, 7))
        W = int(r.integers(4, 7))
        lf = LightField.from_array(r.random((3, 3, H, W, 1)))
        mos = build_mosaic(lf, required_pad(3, 3, drange))
        mos64 = type(mos)(data=mos.data.astype(np.float64), U=3, V=3,
                          H=H, W=W, pad=mos.pad)
        weights = r.random((3, 3)) + 0.2
        masks = r.random((9, H, W)) + 0.1
        upstream = r.random((drange.count, H, W))

        def loss(plane, w, m):
            mz = type(mos)(data=plane, U=3, V=3, H=H, W=W, pad=mos.pad)
            return float(np.sum(upstream * oacc_forward(
                mz, w, m, drange, out_dtype=np.float64)))

        gp, gw, gm = modulated_conv_grad(mos64, weights, masks, drange, upstream)
        for _ in range(6):
            which = int(r.integers(3))
            if which == 0:
                idx = tuple(int(r.integers(s)) for s in mos64.data.shape)
                an = gp[idx[1:]]
                hi = mos64.data.copy(); hi[idx] += step
                lo = mos64.data.copy(); lo[idx] -= step
                fd = (loss(hi, weights, masks) - loss(lo, weights, masks)) / (2 * step)
            elif which == 1:
                idx = (int(r.integers(3)), int(r.integers(3)))
                an = gw[idx]
                hi = weights.copy(); hi[idx] += step
                lo = weights.copy(); lo[idx] -= step
                fd = (loss(mos64.data, hi, masks) - loss(mos64.data, lo, masks)) / (2 * step)
            else:
                idx = tuple(int(r.integers(s)) for s in masks.shape)
                an = gm[idx]
                hi = masks.copy(); hi[idx] += step
                lo = masks.copy(); lo[idx] -= step
                fd = (loss(mos64.data, weights, hi) - loss(mos64.data, weights, lo)) / (2 * step)
            rel = abs(fd - an) / max(abs(fd), abs(an), 1.0)
            worst = max(worst, rel)
    ok = worst <= 1e-4
    _verdict(5, "analytic gradients match finite differences", ok,
             f"max relative error {worst:.3g} over 20 instances")


def test_criterion_6_structural_efficiency():
    lf, _ = render(occluded_scene_spec(H=512, W=512, seed=1), seed=1)
    report = bench_cost(lf, DRANGE)  # raises if the equality gate fails
    shift, oacc = report.entries
    vol_bytes = DRANGE.count * 81 * 512 * 512 * 4
    ok = oacc.peak_bytes * 20 < vol_bytes and shift.checksum == oacc.checksum
    print(report.format())
    _verdict(6, "mosaic route avoids the materialized volume", ok,
             f"oacc peak {oacc.peak_bytes / 1e6:.1f} MB vs volume "
             f"{vol_bytes / 1e6:.1f} MB ({vol_bytes / max(oacc.peak_bytes, 1):.0f}x); "
             f"times shift {shift.seconds:.3f}s / oacc {oacc.seconds:.3f}s")


def test_criterion_7_exact_recovery():
    bad = []
    for spec in (_plane_spec(0.0, 0), occluded_scene_spec(H=64, W=64, seed=3)):
        lf, gt = render(spec, seed=0)
        cfg = EstimatorConfig(drange=DRANGE, iterations=1, mode="argmin",
                              window=1, mask_source="all-ones")
        disp, _, _ = estimate(lf, cfg)
        sel = textured_mask(lf.center_sai()[:, :, 0]) & (gt.occ_masks.min(axis=0) == 1)
        bad.append(evaluate(disp, gt.disparity, sel).badpix[0.07])
    ok = all(b == 0.0 for b in bad)
    _verdict(7, "integer planes recovered exactly", ok,
             f"BadPix(0.07) single-plane {bad[0]:.4f} / two-plane {bad[1]:.4f}")


def test_criterion_8_io_round_trips(tmp_path):
    r = np.random.default_rng(5)
    bit_exact = True
    for _ in range(10):
        grid = (r.standard_normal((int(r.integers(1, 40)),
                                   int(r.integers(1, 40)))) * 4).astype(np.float32)
        back, _ = read_pfm(write_pfm(grid))
        bit_exact &= bool(np.array_equal(back, grid))
    lf, gt = render(occluded_scene_spec(H=32, W=32, seed=2), seed=2)
    d = str(tmp_path / "scene")
    export_scene(d, lf, DRANGE, gt_disp=gt.disparity)
    lf2, cfg, gt2 = load_scene(d)
    png_err = float(np.abs(lf2.data - lf.data).max())
    ok = (bit_exact and png_err <= 1.0 / 255
          and np.array_equal(gt2, gt.disparity) and cfg.drange == DRANGE)
    _verdict(8, "disk round trips", ok,
             f"PFM bit-exact {bit_exact}, PNG max err {png_err:.5f} <= 1/255")
