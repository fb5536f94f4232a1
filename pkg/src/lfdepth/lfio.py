"""Disk formats: PFM disparity maps, PNG scene directories, scene.cfg.

The scene directory layout follows the HCI benchmark convention:
row-major view images ``input_Cam%03d.png``, a ``gt_disp_lowres.pfm``
ground truth when available, and a flat ``key = value`` ``scene.cfg``.
"""

import os
import re
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .lightfield import DispRange, LightField, to_grayscale


class PfmError(ValueError):
    pass


def _next_token(data, pos):
    while pos < len(data) and data[pos:pos + 1].isspace():
        pos += 1
    start = pos
    while pos < len(data) and not data[pos:pos + 1].isspace():
        pos += 1
    if start == pos:
        raise PfmError("truncated PFM header")
    return data[start:pos], pos


def read_pfm(data):
    """Decode a single-channel PFM. Returns (grid (H, W) float32, scale).

    Rows come back top-to-bottom (the file stores them bottom-to-top);
    a negative scale marks a little-endian payload. Three-channel 'PF'
    files are rejected.
    """
    magic, pos = _next_token(data, 0)
    if magic == b"PF":
        raise PfmError("3-channel 'PF' files are not supported, expected 'Pf'")
    if magic != b"Pf":
        raise PfmError(f"bad PFM magic {magic!r}")
    wtok, pos = _next_token(data, pos)
    htok, pos = _next_token(data, pos)
    stok, pos = _next_token(data, pos)
    try:
        w, h = int(wtok), int(htok)
        scale = float(stok)
    except ValueError as e:
        raise PfmError(f"malformed PFM header: {e}") from None
    if w <= 0 or h <= 0 or w > 1 << 20 or h > 1 << 20:
        raise PfmError(f"bad PFM dimensions {w}x{h}")
    if scale == 0 or not np.isfinite(scale):
        raise PfmError(f"bad PFM scale {scale}")
    pos += 1  # single whitespace after the scale line
    need = w * h * 4
    payload = data[pos:pos + need]
    if len(payload) < need:
        raise PfmError(f"truncated PFM payload: need {need} bytes, have {len(payload)}")
    dtype = "<f4" if scale < 0 else ">f4"
    grid = np.frombuffer(payload, dtype=dtype).reshape(h, w)
    return np.ascontiguousarray(grid[::-1].astype(np.float32)), scale


def write_pfm(grid):
    """Encode an (H, W) float32 grid as little-endian PFM bytes."""
    grid = np.asarray(grid, dtype=np.float32)
    if grid.ndim != 2 or grid.shape[0] < 1 or grid.shape[1] < 1:
        raise PfmError(f"expected a 2D grid, got shape {grid.shape}")
    if not np.all(np.isfinite(grid)):
        raise PfmError("PFM writer rejects non-finite values")
    h, w = grid.shape
    header = f"Pf\n{w} {h}\n-1.0\n".encode("ascii")
    return header + grid[::-1].astype("<f4").tobytes()


def load_pfm(path):
    with open(path, "rb") as f:
        grid, _ = read_pfm(f.read())
    return grid


def save_pfm(path, grid):
    with open(path, "wb") as f:
        f.write(write_pfm(grid))


@dataclass(frozen=True)
class SceneConfig:
    U: int
    V: int
    d_min: int
    d_max: int
    focal_length: float = None
    baseline: float = None

    def __post_init__(self):
        DispRange(self.d_min, self.d_max)
        if self.U < 1 or self.V < 1:
            raise ValueError(f"bad view grid {self.U}x{self.V}")
        if self.focal_length is not None and self.focal_length <= 0:
            raise ValueError("focal_length must be > 0")
        if self.baseline is not None and self.baseline <= 0:
            raise ValueError("baseline must be > 0")

    @property
    def drange(self):
        return DispRange(self.d_min, self.d_max)


@dataclass(frozen=True)
class ScenePaths:
    directory: str
    view_pattern: str = "input_Cam%03d.png"
    gt_name: str = "gt_disp_lowres.pfm"
    config_name: str = "scene.cfg"

    def view(self, idx):
        return os.path.join(self.directory, self.view_pattern % idx)

    @property
    def gt(self):
        return os.path.join(self.directory, self.gt_name)

    @property
    def config(self):
        return os.path.join(self.directory, self.config_name)


def parse_scene_config(text):
    """Parse flat ``key = value`` config text; '#' starts a comment line."""
    kv = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.match(r"^(\w+)\s*=\s*(\S+)$", line)
        if not m:
            raise ValueError(f"scene.cfg line {lineno}: expected 'key = value', got {raw!r}")
        kv[m.group(1)] = m.group(2)
    try:
        cfg = SceneConfig(
            U=int(kv["U"]), V=int(kv["V"]),
            d_min=int(kv["disp_min"]), d_max=int(kv["disp_max"]),
            focal_length=float(kv["focal_length"]) if "focal_length" in kv else None,
            baseline=float(kv["baseline"]) if "baseline" in kv else None,
        )
    except KeyError as e:
        raise ValueError(f"scene.cfg missing key {e.args[0]}") from None
    return cfg


def format_scene_config(cfg):
    lines = [f"U = {cfg.U}", f"V = {cfg.V}",
             f"disp_min = {cfg.d_min}", f"disp_max = {cfg.d_max}"]
    if cfg.focal_length is not None:
        lines.append(f"focal_length = {cfg.focal_length}")
    if cfg.baseline is not None:
        lines.append(f"baseline = {cfg.baseline}")
    return "\n".join(lines) + "\n"


def load_scene(paths):
    """Load a scene directory. Returns (LightField C=1, SceneConfig, gt or None).

    View index i maps to (u, v) = (i // V, i mod V); images are
    normalized to [0, 1] and collapsed to grayscale.
    """
    if isinstance(paths, str):
        paths = ScenePaths(directory=paths)
    if not os.path.isfile(paths.config):
        raise FileNotFoundError(f"missing scene config {paths.config}")
    with open(paths.config) as f:
        cfg = parse_scene_config(f.read())

    views = []
    shape = None
    for idx in range(cfg.U * cfg.V):
        p = paths.view(idx)
        if not os.path.isfile(p):
            raise FileNotFoundError(f"missing view image {p} (expected {cfg.U * cfg.V} views)")
        arr = np.asarray(Image.open(p))
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if shape is None:
            shape = arr.shape
        elif arr.shape != shape:
            raise ValueError(f"view {p} has shape {arr.shape}, expected {shape}")
        views.append(arr)

    stack = np.stack(views).reshape(cfg.U, cfg.V, *shape)
    lf = to_grayscale(LightField.from_uint8(stack))

    gt = None
    if os.path.isfile(paths.gt):
        gt = load_pfm(paths.gt)
        if gt.shape != (lf.H, lf.W):
            raise ValueError(f"ground truth shape {gt.shape} != views {(lf.H, lf.W)}")
    return lf, cfg, gt


def save_gray_png(path, img):
    """Write a [0, 1] float image as 8-bit grayscale PNG."""
    arr = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0)
    Image.fromarray(np.rint(arr * 255.0).astype(np.uint8), mode="L").save(path)


def export_scene(directory, lf, drange, gt_disp=None):
    """Write a light field as a loadable scene directory."""
    os.makedirs(directory, exist_ok=True)
    paths = ScenePaths(directory=directory)
    for u in range(lf.U):
        for v in range(lf.V):
            save_gray_png(paths.view(u * lf.V + v), lf.data[u, v, :, :, 0])
    if gt_disp is not None:
        save_pfm(paths.gt, gt_disp)
    cfg = SceneConfig(U=lf.U, V=lf.V, d_min=drange.d_min, d_max=drange.d_max)
    with open(paths.config, "w") as f:
        f.write(format_scene_config(cfg))
    return paths
