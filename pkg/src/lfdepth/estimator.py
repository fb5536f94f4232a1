"""End-to-end disparity estimation.

Pipeline: masked std-dev cost -> box aggregation -> regression, run
iteratively: the first pass assumes no occlusions (all-ones masks), each
later pass recomputes the masks from the previous disparity estimate.
This resolves the circular dependency between mask generation and depth
estimation. Feeding an external (e.g. ground-truth) disparity instead
gives the upper-bound "gt-mask" configuration.
"""

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import uniform_filter

from . import cost as costmod
from . import occlusion


@dataclass(frozen=True)
class EstimatorConfig:
    drange: object
    iterations: int = 2
    q: float = 2.0
    mode: str = "softmax"       # or "argmin"
    alpha: float = 10.0
    window: int = 5
    mask_source: str = "iterative"  # or "all-ones", "external"

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.q <= 0:
            raise ValueError("q must be > 0")
        if self.mode not in ("softmax", "argmin"):
            raise ValueError(f"unknown regression mode {self.mode!r}")
        if self.mode == "softmax" and self.alpha <= 0:
            raise ValueError("alpha must be > 0 for softmax regression")
        if self.window < 1 or self.window % 2 == 0:
            raise ValueError(f"aggregation window must be odd and >= 1, got {self.window}")
        if self.mask_source not in ("iterative", "all-ones", "external"):
            raise ValueError(f"unknown mask source {self.mask_source!r}")


def aggregate(cost, window):
    """Per-slice spatial box mean with edge clamping; window 1 is identity."""
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be odd and >= 1, got {window}")
    if window == 1:
        return cost
    out = np.empty_like(cost)
    for i in range(cost.shape[0]):
        out[i] = uniform_filter(cost[i].astype(np.float64), size=window,
                                mode="nearest").astype(cost.dtype)
    return out


def regress(cost, drange, mode="softmax", alpha=10.0):
    """Collapse a (D, H, W) cost volume to a disparity map; lower cost wins.

    softmax: expectation of d under softmax(-alpha * cost); argmin:
    winner-take-all with ties broken toward smaller d.
    """
    if cost.shape[0] != drange.count:
        raise ValueError(f"cost has {cost.shape[0]} slices, range has {drange.count}")
    dvals = drange.values().astype(np.float64)
    if mode == "argmin":
        idx = np.argmin(cost, axis=0)  # first minimum = smallest d
        return dvals[idx].astype(np.float32)
    if mode != "softmax":
        raise ValueError(f"unknown regression mode {mode!r}")
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    scores = -alpha * cost.astype(np.float64)
    scores -= scores.max(axis=0, keepdims=True)
    w = np.exp(scores)
    w /= w.sum(axis=0, keepdims=True)
    return np.tensordot(dvals, w, axes=(0, 0)).astype(np.float32)


def textured_mask(image, window=3, thresh=0.02):
    """Pixels whose local standard deviation exceeds ``thresh``.

    Matching is ill-posed on flat texture, so accuracy assertions gate
    on this.
    """
    img = np.asarray(image, dtype=np.float64)
    mean = uniform_filter(img, size=window, mode="nearest")
    mean_sq = uniform_filter(img * img, size=window, mode="nearest")
    std = np.sqrt(np.maximum(mean_sq - mean * mean, 0.0))
    return std > thresh


def estimate(lf, cfg, external_disp=None):
    """Run the iterative pipeline.

    Returns (final disparity, final mask set, per-iteration disparity
    list). ``iterative`` mode runs cfg.iterations passes; ``all-ones``
    and ``external`` run a single pass with fixed masks.
    """
    if lf.C != 1:
        raise ValueError("estimate expects a single-channel light field")
    if (external_disp is None) != (cfg.mask_source != "external"):
        raise ValueError("external_disp is required iff mask_source == 'external'")

    if cfg.mask_source == "external":
        masks = occlusion.compute_masks(lf, np.asarray(external_disp, dtype=np.float32), cfg.q)
        passes = 1
    else:
        masks = costmod.ones_masks(lf.U, lf.V, lf.H, lf.W)
        passes = cfg.iterations if cfg.mask_source == "iterative" else 1

    trace = []
    for it in range(passes):
        if it > 0:
            masks = occlusion.compute_masks(lf, trace[-1], cfg.q)
        vol = costmod.masked_stat_cost(lf, masks, cfg.drange)
        vol = aggregate(vol, cfg.window)
        disp = regress(vol, cfg.drange, mode=cfg.mode, alpha=cfg.alpha)
        trace.append(disp)
    return trace[-1], masks, trace
