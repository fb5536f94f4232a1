"""Command-line front end.

Subcommands: estimate, eval, masks, synth, bench, sweep-q. All file
outputs are deterministic given the flags (seeds are explicit).
"""

import argparse
import os
import sys

import numpy as np
from PIL import Image

from . import estimator, lfio, metrics, occlusion, synth
from .lightfield import DispRange


class StageError(RuntimeError):
    def __init__(self, stage, cause):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage


def _run(stage, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except Exception as e:
        raise StageError(stage, e) from e


def _estimator_config(args, drange):
    return estimator.EstimatorConfig(
        drange=drange, iterations=args.iters, q=args.q, mode=args.mode,
        alpha=args.alpha, window=args.window,
        mask_source="iterative" if args.iters > 1 else "all-ones")


def cmd_estimate(args):
    lf, cfg, _ = _run("scene load", lfio.load_scene, args.scene_dir)
    econf = _estimator_config(args, cfg.drange)
    disp, _, trace = _run("depth estimation", estimator.estimate, lf, econf)
    _run("output write", lfio.save_pfm, args.output, disp)
    base, ext = os.path.splitext(args.output)
    for i, d in enumerate(trace, 1):
        _run("output write", lfio.save_pfm, f"{base}_iter{i}{ext}", d)
    print(f"wrote {args.output} ({len(trace)} iteration(s))")
    return 0


def cmd_eval(args):
    est = _run("estimate load", lfio.load_pfm, args.est)
    gt = _run("ground-truth load", lfio.load_pfm, args.gt)
    thresholds = tuple(float(t) for t in args.badpix.split(","))
    report = _run("evaluation", metrics.evaluate, est, gt, thresholds=thresholds)
    print(report.format())
    if args.error_map:
        _run("error-map write", _write_error_map, args.error_map, est, gt)
        print(f"wrote {args.error_map}")
    return 0


def _write_error_map(path, est, gt, thresh=0.07):
    # |err| as grayscale, bad pixels (> thresh) marked red
    err = np.abs(np.asarray(est, dtype=np.float64) - gt)
    g = np.clip(err / max(thresh * 4, 1e-9), 0, 1)
    rgb = np.stack([g, g, g], axis=-1)
    rgb[err > thresh] = (1.0, 0.0, 0.0)
    Image.fromarray(np.rint(rgb * 255).astype(np.uint8), mode="RGB").save(path)


def cmd_masks(args):
    lf, _, _ = _run("scene load", lfio.load_scene, args.scene_dir)
    disp = _run("disparity load", lfio.load_pfm, args.disp)
    masks = _run("mask generation", occlusion.compute_masks, lf, disp, args.q)
    os.makedirs(args.outdir, exist_ok=True)
    for k in range(masks.shape[0]):
        _run("mask write", lfio.save_gray_png,
             os.path.join(args.outdir, f"mask_Cam{k:03d}.png"), masks[k])
    print(f"wrote {masks.shape[0]} mask images to {args.outdir}")
    return 0


def cmd_synth(args):
    with open(args.spec) as f:
        spec = _run("scene-spec parse", synth.parse_scene_spec, f.read())
    lf, gt = _run("render", synth.render, spec, args.seed)
    dmin = min(-4, *(layer.disparity for layer in spec.layers))
    dmax = max(4, *(layer.disparity for layer in spec.layers))
    _run("scene export", lfio.export_scene, args.outdir, lf,
         DispRange(dmin, dmax), gt_disp=gt.disparity)
    print(f"wrote scene to {args.outdir}")
    return 0


def cmd_bench(args):
    lf, cfg, _ = _run("scene load", lfio.load_scene, args.scene_dir)
    report = _run("benchmark", metrics.bench_cost, lf, cfg.drange,
                  repeats=args.repeats, threads=args.threads)
    print(report.format())
    return 0


def cmd_sweep_q(args):
    lf, cfg, _ = _run("scene load", lfio.load_scene, args.scene_dir)
    gt = _run("ground-truth load", lfio.load_pfm, args.gt)
    qs = [float(s) for s in args.q_list.split(",")]
    print("q      MSE x100")
    for q in qs:
        econf = estimator.EstimatorConfig(
            drange=cfg.drange, iterations=args.iters, q=q, mode=args.mode,
            alpha=args.alpha, window=args.window, mask_source="iterative")
        disp, _, _ = _run(f"depth estimation (q={q:g})", estimator.estimate, lf, econf)
        report = _run("evaluation", metrics.evaluate, disp, gt)
        print(f"{q:<6g} {report.mse_x100:.6f}")
    return 0


def _add_estimator_flags(p):
    p.add_argument("--iters", type=int, default=2)
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--alpha", type=float, default=10.0)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--mode", choices=("softmax", "argmin"), default="softmax")


def build_parser():
    ap = argparse.ArgumentParser(prog="lfdepth",
                                 description="Occlusion-aware light-field depth estimation")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate a disparity map for a scene directory")
    p.add_argument("scene_dir")
    p.add_argument("-o", "--output", required=True)
    _add_estimator_flags(p)
    p.set_defaults(fn=cmd_estimate)

    p = sub.add_parser("eval", help="compare an estimated PFM against ground truth")
    p.add_argument("est")
    p.add_argument("gt")
    p.add_argument("--badpix", default="0.07,0.03,0.01")
    p.add_argument("--error-map", default=None)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("masks", help="dump per-view occlusion masks as PNGs")
    p.add_argument("scene_dir")
    p.add_argument("--disp", required=True)
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("-o", "--outdir", default="masks")
    p.set_defaults(fn=cmd_masks)

    p = sub.add_parser("synth", help="render a synthetic scene to a scene directory")
    p.add_argument("spec")
    p.add_argument("-o", "--outdir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("bench", help="benchmark the two cost-construction routes")
    p.add_argument("scene_dir")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("sweep-q", help="MSE x100 for a list of decaying rates")
    p.add_argument("scene_dir")
    p.add_argument("--gt", required=True)
    p.add_argument("--q-list", default="1,2,3,4,5")
    p.add_argument("--iters", type=int, default=2)
    p.add_argument("--alpha", type=float, default=10.0)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--mode", choices=("softmax", "argmin"), default="softmax")
    p.set_defaults(fn=cmd_sweep_q)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.fn(args)
    except StageError as e:
        print(f"error in {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
