"""Matching-cost construction.

Two routes build the same per-disparity view averages:

* ``shift_and_concat_gather`` materializes the classic shifted-view
  volume (D, U*V, H, W, C) and serves as the oracle and benchmark
  baseline.
* ``oacc_forward`` reads the same samples straight out of a padded SAI
  mosaic with a U x V kernel whose dilation depends on the candidate
  disparity, modulating each view by a per-pixel occlusion scalar. No
  shifted copy of the light field is ever allocated.

``masked_stat_cost`` turns the modulated averages into the masked
standard-deviation consistency cost, and ``modulated_conv_grad``
supplies analytic derivatives of the modulated kernel.
"""

import numpy as np

from .alloc import NULL_LEDGER
from .lightfield import LightField, Mosaic, build_mosaic

# Regularizer added to the modulation-scalar sum; defines the all-masked
# case as zero output while perturbing scale invariance by < 1e-5.
DEFAULT_EPS = 1e-8


def uniform_weights(U, V):
    """Kernel with every tap weight exactly 1/(U*V)."""
    return np.full((U, V), 1.0 / (U * V), dtype=np.float32)


def ones_masks(U, V, H, W):
    """All-ones modulation scalars (the non-occlusion assumption)."""
    return np.ones((U * V, H, W), dtype=np.float32)


def dilation_for(d, sai_h, sai_w):
    """Kernel dilation integrating the angular patch at disparity d.

    sai_h/sai_w are the *padded* per-SAI extents of the mosaic the kernel
    runs on; larger disparities give smaller dilations.
    """
    if d >= sai_h or d >= sai_w:
        raise ValueError(f"disparity {d} too large for SAI extents {sai_h}x{sai_w}")
    return (sai_h - d, sai_w - d)


def required_pad(U, V, drange):
    """Smallest SAI padding that keeps every gather inside its own block."""
    u_c = (U - 1) // 2
    v_c = (V - 1) // 2
    reach = max(u_c, U - 1 - u_c, v_c, V - 1 - v_c)
    return reach * drange.abs_max


def _check_pad(mosaic, drange):
    row_reach = max(mosaic.u_c, mosaic.U - 1 - mosaic.u_c) * drange.abs_max
    col_reach = max(mosaic.v_c, mosaic.V - 1 - mosaic.v_c) * drange.abs_max
    if mosaic.pad < row_reach or mosaic.pad < col_reach:
        raise ValueError(
            f"mosaic pad {mosaic.pad} insufficient for disparities "
            f"[{drange.d_min},{drange.d_max}]; need >= {max(row_reach, col_reach)}")


def shift_and_concat_gather(lf, drange, ledger=NULL_LEDGER):
    """Materialize the shifted-view volume (D, U*V, H, W, C).

    Entry (d, k, h, w, c) holds view k resampled at its disparity-d
    offset, zero where the shifted index leaves the image.
    """
    U, V, H, W, C = lf.data.shape
    D = drange.count
    vol = ledger.zeros((D, U * V, H, W, C), np.float32)
    for di, d in enumerate(range(drange.d_min, drange.d_max + 1)):
        for u in range(U):
            for v in range(V):
                dh = (lf.u_c - u) * d
                dw = (lf.v_c - v) * d
                # destination rows h map to source rows h+dh
                h0, h1 = max(0, -dh), min(H, H - dh)
                w0, w1 = max(0, -dw), min(W, W - dw)
                if h0 >= h1 or w0 >= w1:
                    continue
                vol[di, u * V + v, h0:h1, w0:w1] = \
                    lf.data[u, v, h0 + dh:h1 + dh, w0 + dw:w1 + dw]
    return vol


def _window(plane, mosaic, u, v, d):
    """Mosaic window of view (u, v) whose pixel (h, w) is the Eq.-style
    disparity-d gather for center pixel (h, w).

    This anchoring is the single source of truth for kernel placement:
    block origin u*(H+2p), border offset p, disparity shift (u_c-u)*d.
    """
    r0 = u * mosaic.sai_h + mosaic.pad + (mosaic.u_c - u) * d
    c0 = v * mosaic.sai_w + mosaic.pad + (mosaic.v_c - v) * d
    return plane[r0:r0 + mosaic.H, c0:c0 + mosaic.W]


def oacc_forward(mosaic, weights, masks, drange, eps=DEFAULT_EPS,
                 ledger=NULL_LEDGER, out_dtype=np.float32):
    """Modulated dilated-kernel cost construction on an SAI mosaic.

    Output (D, H, W); entry (d, h, w) is
    sum_k w_k * A_k * dm_k / (sum_k w_k * dm_k + eps) where A is the
    angular patch read in place from the mosaic: the weight-normalized
    modulated average, so the uniform kernel with all-ones masks is the
    plain view mean. Accumulation is float64; the working set is two
    H x W accumulators plus the output.
    """
    if eps <= 0:
        raise ValueError("eps must be > 0")
    if mosaic.C != 1:
        raise ValueError(f"cost construction expects a 1-channel mosaic, got C={mosaic.C}")
    _check_pad(mosaic, drange)
    U, V, H, W = mosaic.U, mosaic.V, mosaic.H, mosaic.W
    if weights.shape != (U, V):
        raise ValueError(f"weights shape {weights.shape} != ({U},{V})")
    if masks.shape != (U * V, H, W):
        raise ValueError(f"masks shape {masks.shape} != ({U * V},{H},{W})")
    for d in range(drange.d_min, drange.d_max + 1):
        dilation_for(d, mosaic.sai_h, mosaic.sai_w)
    plane = mosaic.data[0]

    den = ledger.zeros((H, W), np.float64)
    for u in range(U):
        for v in range(V):
            den += np.float64(weights[u, v]) * masks[u * V + v]
    den += eps
    num = ledger.zeros((H, W), np.float64)
    out = ledger.empty((drange.count, H, W), out_dtype)
    for di, d in enumerate(range(drange.d_min, drange.d_max + 1)):
        num[:] = 0.0
        for u in range(U):
            for v in range(V):
                win = _window(plane, mosaic, u, v, d)
                num += np.float64(weights[u, v]) * masks[u * V + v] * win
        out[di] = num / den
    ledger.release(num)
    ledger.release(den)
    return out


def masked_stat_cost(lf, masks, drange, eps=DEFAULT_EPS, pad=None, ledger=NULL_LEDGER):
    """Masked standard-deviation consistency cost, (D, H, W), lower is better.

    cost(d, h, w) = sqrt(max(0, E[A^2] - E[A]^2)) with E the
    modulation-weighted mean over views (uniform kernel), computed as
    two modulated kernel passes over the mosaic and the element-squared
    mosaic. The eps in E's denominator would leak a sqrt(eps)-sized
    floor into the variance of a perfectly consistent patch, so the
    E[A]^2 term carries the exact (den + eps)/den correction.
    """
    if lf.C != 1:
        raise ValueError("masked_stat_cost expects a single-channel light field")
    if pad is None:
        pad = required_pad(lf.U, lf.V, drange)
    w = uniform_weights(lf.U, lf.V)
    mos = build_mosaic(lf, pad)
    ledger.add(mos.data)
    # square in float64: an f32-rounded square would put an x*2^-12
    # floor under the std-dev of a perfectly consistent patch
    sq = mos.data.astype(np.float64)
    np.multiply(sq, sq, out=sq)
    mos_sq = Mosaic(data=ledger.add(sq), U=mos.U, V=mos.V,
                    H=mos.H, W=mos.W, pad=mos.pad)
    mean = oacc_forward(mos, w, masks, drange, eps=eps, ledger=ledger, out_dtype=np.float64)
    mean_sq = oacc_forward(mos_sq, w, masks, drange, eps=eps, ledger=ledger, out_dtype=np.float64)
    den = np.tensordot(w.reshape(-1).astype(np.float64), masks, axes=(0, 0))
    corr = np.ones_like(den)
    nz = den > 0
    corr[nz] = (den[nz] + eps) / den[nz]
    var = np.maximum(mean_sq - mean * mean * corr, 0.0)
    cost = np.sqrt(var).astype(np.float32)
    ledger.release(mean)
    ledger.release(mean_sq)
    ledger.release(mos.data)
    ledger.release(mos_sq.data)
    return cost


def modulated_conv_grad(mosaic, weights, masks, drange, upstream, eps=DEFAULT_EPS):
    """Analytic gradients of oacc_forward contracted with ``upstream``.

    Returns (grad_mosaic, grad_weights, grad_masks) as float64 arrays
    shaped like the mosaic plane, the kernel, and the mask set. The
    forward map per disparity is y = num/den with
    num = sum_k w_k A_k m_k and den = sum_k w_k m_k + eps, so
        dy/dw_k = m_k (A_k - y) / den
        dy/dA_k = w_k m_k / den
        dy/dm_k = w_k (A_k - y) / den.
    """
    _check_pad(mosaic, drange)
    U, V, H, W = mosaic.U, mosaic.V, mosaic.H, mosaic.W
    if upstream.shape != (drange.count, H, W):
        raise ValueError(f"upstream shape {upstream.shape} != ({drange.count},{H},{W})")
    plane = mosaic.data[0].astype(np.float64)
    m = masks.astype(np.float64)
    w = weights.astype(np.float64)
    den = np.tensordot(w.reshape(-1), m, axes=(0, 0)) + eps

    grad_plane = np.zeros_like(plane)
    grad_w = np.zeros((U, V), dtype=np.float64)
    grad_m = np.zeros_like(m)
    for di, d in enumerate(range(drange.d_min, drange.d_max + 1)):
        gdiv = upstream[di].astype(np.float64) / den
        num = np.zeros((H, W), dtype=np.float64)
        for u in range(U):
            for v in range(V):
                win = _window(plane, mosaic, u, v, d)
                num += w[u, v] * m[u * V + v] * win
        y = num / den
        for u in range(U):
            for v in range(V):
                k = u * V + v
                win = _window(plane, mosaic, u, v, d)
                grad_w[u, v] += np.sum(gdiv * m[k] * (win - y))
                _window(grad_plane, mosaic, u, v, d)[...] += gdiv * w[u, v] * m[k]
                grad_m[k] += gdiv * w[u, v] * (win - y)
    return grad_plane, grad_w, grad_m
