"""Light-field data model: 4D view grids, angular patches, SAI mosaics.

A light field is stored as a dense float32 array of shape (U, V, H, W, C)
with intensities normalized to [0, 1]. The center view sits at
(u_c, v_c) = (floor((U-1)/2), floor((V-1)/2)), which stays well-defined
for even view grids.
"""

from dataclasses import dataclass

import numpy as np

# BT.601 luma coefficients used for the grayscale pipeline.
GRAY_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass(frozen=True)
class LightField:
    """Dense grid of sub-aperture images, indexed (u, v, h, w, c)."""

    data: np.ndarray

    def __post_init__(self):
        d = self.data
        if d.ndim != 5:
            raise ValueError(f"light field data must be 5D (U,V,H,W,C), got shape {d.shape}")
        if any(s < 1 for s in d.shape):
            raise ValueError(f"all light field extents must be >= 1, got {d.shape}")
        if d.dtype != np.float32:
            raise ValueError(f"light field data must be float32, got {d.dtype}")
        if not np.all(np.isfinite(d)):
            raise ValueError("light field contains non-finite samples")

    @property
    def U(self):
        return self.data.shape[0]

    @property
    def V(self):
        return self.data.shape[1]

    @property
    def H(self):
        return self.data.shape[2]

    @property
    def W(self):
        return self.data.shape[3]

    @property
    def C(self):
        return self.data.shape[4]

    @property
    def u_c(self):
        return (self.U - 1) // 2

    @property
    def v_c(self):
        return (self.V - 1) // 2

    def sai(self, u, v):
        """Sub-aperture image (H, W, C) of view (u, v)."""
        return self.data[u, v]

    def center_sai(self):
        return self.data[self.u_c, self.v_c]

    @staticmethod
    def from_array(arr):
        """Build a LightField from any finite array, casting to float32."""
        return LightField(np.ascontiguousarray(arr, dtype=np.float32))

    @staticmethod
    def from_uint8(arr):
        """Ingest 8-bit samples, normalizing to [0, 1]."""
        return LightField(np.ascontiguousarray(arr, dtype=np.float32) / np.float32(255.0))


@dataclass(frozen=True)
class DispRange:
    """Inclusive integer candidate-disparity range."""

    d_min: int
    d_max: int

    def __post_init__(self):
        if int(self.d_min) != self.d_min or int(self.d_max) != self.d_max:
            raise ValueError("disparity bounds must be integers")
        if self.d_min > self.d_max:
            raise ValueError(f"d_min={self.d_min} > d_max={self.d_max}")

    @property
    def count(self):
        return self.d_max - self.d_min + 1

    def values(self):
        return np.arange(self.d_min, self.d_max + 1)

    @property
    def abs_max(self):
        return max(abs(self.d_min), abs(self.d_max))


@dataclass(frozen=True)
class AngularPatch:
    """U x V samples gathered for one center-view pixel under one disparity.

    Out-of-bounds gathers are zero-valued with valid=False, matching the
    zero-padded mosaic so the gather path and the convolution path agree.
    """

    values: np.ndarray  # (U, V) float32
    valid: np.ndarray   # (U, V) bool


def angular_patch(lf, h, w, d, c=0):
    """Gather the angular patch at center-view pixel (h, w) under disparity d.

    values[u, v] = L(u, v, h + (u_c - u) d, w + (v_c - v) d, c) where the
    shifted index is in bounds, else 0 with valid=False.
    """
    if not (0 <= h < lf.H and 0 <= w < lf.W):
        raise ValueError(f"pixel ({h},{w}) outside {lf.H}x{lf.W}")
    us = np.arange(lf.U)[:, None]
    vs = np.arange(lf.V)[None, :]
    hh = h + (lf.u_c - us) * d + np.zeros_like(vs)
    ww = w + (lf.v_c - vs) * d + np.zeros_like(us)
    valid = (hh >= 0) & (hh < lf.H) & (ww >= 0) & (ww < lf.W)
    values = np.zeros((lf.U, lf.V), dtype=np.float32)
    uu = np.broadcast_to(us, (lf.U, lf.V))
    vv = np.broadcast_to(vs, (lf.U, lf.V))
    values[valid] = lf.data[uu[valid], vv[valid], hh[valid], ww[valid], c]
    return AngularPatch(values=values, valid=valid)


@dataclass(frozen=True)
class Mosaic:
    """All padded SAIs of one light field laid out in a U x V block grid.

    data has shape (C, U*(H+2p), V*(W+2p)); block (u, v) holds SAI (u, v)
    surrounded by a p-wide zero border. The zero borders are what keep
    disparity-shifted kernel taps from reading a neighboring view.
    """

    data: np.ndarray
    U: int
    V: int
    H: int
    W: int
    pad: int

    @property
    def sai_h(self):
        return self.H + 2 * self.pad

    @property
    def sai_w(self):
        return self.W + 2 * self.pad

    @property
    def u_c(self):
        return (self.U - 1) // 2

    @property
    def v_c(self):
        return (self.V - 1) // 2

    @property
    def C(self):
        return self.data.shape[0]


def build_mosaic(lf, pad):
    """Arrange all SAIs into a zero-padded mosaic image."""
    if pad < 0:
        raise ValueError(f"pad must be >= 0, got {pad}")
    sh, sw = lf.H + 2 * pad, lf.W + 2 * pad
    data = np.zeros((lf.C, lf.U * sh, lf.V * sw), dtype=np.float32)
    for u in range(lf.U):
        for v in range(lf.V):
            r0 = u * sh + pad
            c0 = v * sw + pad
            data[:, r0:r0 + lf.H, c0:c0 + lf.W] = np.moveaxis(lf.data[u, v], -1, 0)
    return Mosaic(data=data, U=lf.U, V=lf.V, H=lf.H, W=lf.W, pad=pad)


def extract_sai(mosaic, u, v):
    """Read back SAI (u, v) from a mosaic, shape (H, W, C)."""
    sh, sw = mosaic.sai_h, mosaic.sai_w
    r0 = u * sh + mosaic.pad
    c0 = v * sw + mosaic.pad
    block = mosaic.data[:, r0:r0 + mosaic.H, c0:c0 + mosaic.W]
    return np.moveaxis(block, 0, -1).copy()


def to_grayscale(lf):
    """Collapse an RGB light field to one channel (BT.601 weights).

    Single-channel input is returned unchanged.
    """
    if lf.C == 1:
        return lf
    if lf.C != 3:
        raise ValueError(f"grayscale conversion expects C in {{1,3}}, got C={lf.C}")
    r, g, b = GRAY_WEIGHTS
    gray = (r * lf.data[..., 0] + g * lf.data[..., 1] + b * lf.data[..., 2]).astype(np.float32)
    return LightField(np.ascontiguousarray(gray[..., None]))
