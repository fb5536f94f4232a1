"""Photometric occlusion-mask generation.

Each surrounding view is warped to the center view with a candidate
disparity map; the absolute residual against the center image is then
remapped to a modulation scalar in [0, 1] by (1 - res)^q. A pixel that
is occluded in view k cannot find its counterpart there, leaves a large
residual, and gets a small scalar. No parameters are learned.
"""

import numpy as np


def warp_to_center(lf, u, v, disp):
    """Backward-warp view (u, v) to the center view under ``disp``.

    Bilinear sampling at (h + (u_c-u) disp, w + (v_c-v) disp). Samples
    whose 2x2 footprint leaves the image are invalid and set to 0.
    Returns (image (H, W) float32, valid (H, W) bool).
    """
    if lf.C != 1:
        raise ValueError("warp_to_center expects a single-channel light field")
    H, W = lf.H, lf.W
    img = lf.data[u, v, :, :, 0]
    hh, ww = np.meshgrid(np.arange(H, dtype=np.float32),
                         np.arange(W, dtype=np.float32), indexing="ij")
    y = hh + np.float32(lf.u_c - u) * disp
    x = ww + np.float32(lf.v_c - v) * disp
    valid = (y >= 0) & (y <= H - 1) & (x >= 0) & (x <= W - 1)

    # clip the base corner so integer coordinates (weight 0 or 1) stay exact
    y0 = np.clip(np.floor(y).astype(np.int64), 0, H - 2)
    x0 = np.clip(np.floor(x).astype(np.int64), 0, W - 2)
    fy = (y - y0).astype(np.float32)
    fx = (x - x0).astype(np.float32)
    out = ((1 - fy) * (1 - fx) * img[y0, x0]
           + (1 - fy) * fx * img[y0, x0 + 1]
           + fy * (1 - fx) * img[y0 + 1, x0]
           + fy * fx * img[y0 + 1, x0 + 1]).astype(np.float32)
    out[~valid] = 0.0
    return out, valid


def compute_masks(lf, disp, q=2.0):
    """Modulation scalars (U*V, H, W) from photometric residuals.

    mask_k = (1 - clip(|warp_k - I_c|, 0, 1))^q; invalid warps get 0;
    the center view is identically 1. Larger q decays faster, i.e. is
    more occlusion-sensitive but less noise-tolerant.
    """
    if q <= 0:
        raise ValueError(f"decaying rate q must be > 0, got {q}")
    if lf.C != 1:
        raise ValueError("compute_masks expects a single-channel light field")
    center = lf.center_sai()[:, :, 0]
    masks = np.empty((lf.U * lf.V, lf.H, lf.W), dtype=np.float32)
    for u in range(lf.U):
        for v in range(lf.V):
            k = u * lf.V + v
            if u == lf.u_c and v == lf.v_c:
                masks[k] = 1.0
                continue
            warped, valid = warp_to_center(lf, u, v, disp)
            res = np.clip(np.abs(warped - center), 0.0, 1.0)
            mk = (1.0 - res) ** np.float32(q)
            mk[~valid] = 0.0
            masks[k] = mk
    return masks
