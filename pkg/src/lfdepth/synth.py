"""Synthetic layered light fields with exact ground truth.

Scenes are fronto-parallel layers at integer disparities, textured with
a hash-based value-noise pattern (Lambertian: every view sees the same
texture value). Visibility is evaluated exactly by integer reprojection,
so the ground-truth occlusion masks are binary and free of rasterization
ambiguity. These scenes are the oracle behind the occlusion and
consistency tests.
"""

from dataclasses import dataclass, field

import numpy as np

from .lightfield import LightField


def _hash01(ih, iw, seed):
    """Deterministic pseudo-random value in [0, 1) per integer lattice point."""
    seed_term = np.uint64((int(seed) * 0x165667B19E3779F9) % (1 << 64))
    with np.errstate(over="ignore"):
        x = (np.asarray(ih, dtype=np.uint64) * np.uint64(0x9E3779B97F4A7C15)
             + np.asarray(iw, dtype=np.uint64) * np.uint64(0xC2B2AE3D27D4EB4F)
             + seed_term)
        x ^= x >> np.uint64(30)
        x *= np.uint64(0xBF58476D1CE4E5B9)
        x ^= x >> np.uint64(27)
        x *= np.uint64(0x94D049BB133111EB)
        x ^= x >> np.uint64(31)
    return (x >> np.uint64(11)).astype(np.float64) / float(1 << 53)


@dataclass(frozen=True)
class NoiseTexture:
    """Value noise: hashed lattice values, smoothstep-interpolated.

    scale is the lattice cell size in pixels; defined on all of Z^2 so
    layers can be sampled outside the center-view frame.
    """

    scale: int = 4
    seed: int = 0
    lo: float = 0.05
    hi: float = 0.95

    def at(self, hh, ww):
        hh = np.asarray(hh, dtype=np.int64)
        ww = np.asarray(ww, dtype=np.int64)
        s = max(1, int(self.scale))
        ch, rh = np.divmod(hh, s)
        cw, rw = np.divmod(ww, s)
        fy = rh / s
        fx = rw / s
        fy = fy * fy * (3 - 2 * fy)
        fx = fx * fx * (3 - 2 * fx)
        v00 = _hash01(ch, cw, self.seed)
        v01 = _hash01(ch, cw + 1, self.seed)
        v10 = _hash01(ch + 1, cw, self.seed)
        v11 = _hash01(ch + 1, cw + 1, self.seed)
        v = (v00 * (1 - fy) * (1 - fx) + v01 * (1 - fy) * fx
             + v10 * fy * (1 - fx) + v11 * fy * fx)
        return (self.lo + (self.hi - self.lo) * v).astype(np.float32)


@dataclass(frozen=True)
class ConstTexture:
    """Flat texture (matching on it is inherently ambiguous)."""

    value: float = 0.5

    def at(self, hh, ww):
        return np.full(np.broadcast(hh, ww).shape, self.value, dtype=np.float32)


@dataclass(frozen=True)
class Rect:
    """Half-open box [h0, h1) x [w0, w1) in center-view coordinates."""

    h0: int
    h1: int
    w0: int
    w1: int

    def covers(self, hh, ww):
        return (hh >= self.h0) & (hh < self.h1) & (ww >= self.w0) & (ww < self.w1)


@dataclass(frozen=True)
class Disk:
    ch: int
    cw: int
    r: float

    def covers(self, hh, ww):
        return (hh - self.ch) ** 2 + (ww - self.cw) ** 2 <= self.r * self.r


@dataclass(frozen=True)
class Layer:
    """One fronto-parallel plane: integer disparity, region, texture.

    region=None means full coverage (the background).
    """

    disparity: int
    region: object = None
    texture: object = field(default_factory=NoiseTexture)

    def covers(self, hh, ww):
        if self.region is None:
            return np.ones(np.broadcast(hh, ww).shape, dtype=bool)
        return self.region.covers(hh, ww)


@dataclass(frozen=True)
class SceneSpec:
    """Layer stack ordered front to back; the last layer must be the
    full-coverage background."""

    U: int
    V: int
    H: int
    W: int
    layers: tuple
    noise_sigma: float = 0.0

    def __post_init__(self):
        if not self.layers:
            raise ValueError("scene needs at least a background layer")
        if self.layers[-1].region is not None:
            raise ValueError("last layer must be the full-coverage background")
        for i, layer in enumerate(self.layers[:-1]):
            if layer.region is None:
                raise ValueError(f"only the last layer may have full coverage (layer {i})")
        for layer in self.layers:
            if int(layer.disparity) != layer.disparity:
                raise ValueError(f"layer disparity must be integer, got {layer.disparity}")


@dataclass(frozen=True)
class GroundTruth:
    """Exact disparity and binary per-view visibility of the center surface."""

    disparity: np.ndarray  # (H, W) float32
    occ_masks: np.ndarray  # (U*V, H, W) float32 in {0, 1}


def _layer_id_map(spec, u, v, u_c, v_c, hh, ww):
    """Index of the frontmost layer at each pixel of view (u, v)."""
    lid = np.full(hh.shape, len(spec.layers) - 1, dtype=np.int32)
    unset = np.ones(hh.shape, dtype=bool)
    for i, layer in enumerate(spec.layers):
        dh = (u_c - u) * layer.disparity
        dw = (v_c - v) * layer.disparity
        cov = layer.covers(hh - dh, ww - dw) & unset
        lid[cov] = i
        unset &= ~cov
    return lid


def render(spec, seed=0):
    """Render the scene. Returns (LightField C=1, GroundTruth).

    A center-view point on a layer with disparity d appears in view
    (u, v) at (h + (u_c-u) d, w + (v_c-v) d); each view pixel shows the
    frontmost layer covering it. Gaussian noise (clamped to [0, 1]) is
    added last.
    """
    U, V, H, W = spec.U, spec.V, spec.H, spec.W
    u_c, v_c = (U - 1) // 2, (V - 1) // 2
    hh, ww = np.meshgrid(np.arange(H), np.arange(W), indexing="ij")

    data = np.empty((U, V, H, W, 1), dtype=np.float32)
    lids = np.empty((U, V, H, W), dtype=np.int32)
    for u in range(U):
        for v in range(V):
            lid = _layer_id_map(spec, u, v, u_c, v_c, hh, ww)
            lids[u, v] = lid
            img = np.empty((H, W), dtype=np.float32)
            for i, layer in enumerate(spec.layers):
                sel = lid == i
                if not sel.any():
                    continue
                dh = (u_c - u) * layer.disparity
                dw = (v_c - v) * layer.disparity
                img[sel] = layer.texture.at(hh[sel] - dh, ww[sel] - dw)
            data[u, v, :, :, 0] = img

    lid_center = lids[u_c, v_c]
    layer_d = np.array([layer.disparity for layer in spec.layers], dtype=np.float32)
    disparity = layer_d[lid_center]

    occ = np.zeros((U * V, H, W), dtype=np.float32)
    d_int = layer_d[lid_center].astype(np.int64)
    for u in range(U):
        for v in range(V):
            yy = hh + (u_c - u) * d_int
            xx = ww + (v_c - v) * d_int
            inb = (yy >= 0) & (yy < H) & (xx >= 0) & (xx < W)
            vis = np.zeros((H, W), dtype=bool)
            vis[inb] = lids[u, v][yy[inb], xx[inb]] == lid_center[inb]
            occ[u * V + v] = vis.astype(np.float32)

    if spec.noise_sigma > 0:
        rng = np.random.default_rng(seed)
        data = data + rng.normal(0.0, spec.noise_sigma, size=data.shape).astype(np.float32)
        np.clip(data, 0.0, 1.0, out=data)
    return LightField(np.ascontiguousarray(data)), GroundTruth(disparity=disparity, occ_masks=occ)


def parse_scene_spec(text):
    """Parse the flat scene description format.

    Keys U/V/H/W/noise_sigma plus repeated ``layer = <kind> k=v ...``
    lines, front to back, e.g.::

        layer = rect d=2 h=16:40 w=16:40 tex=noise scale=5 seed=3
        layer = disk d=1 c=32,20 r=9 tex=noise scale=4 seed=5
        layer = bg d=0 tex=noise scale=6 seed=7
    """
    fields = {}
    layers = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key == "layer":
            layers.append(_parse_layer(val, lineno))
        else:
            fields[key] = val
    try:
        U, V = int(fields["U"]), int(fields["V"])
        H, W = int(fields["H"]), int(fields["W"])
    except KeyError as e:
        raise ValueError(f"missing scene key {e.args[0]}") from None
    sigma = float(fields.get("noise_sigma", 0.0))
    return SceneSpec(U=U, V=V, H=H, W=W, layers=tuple(layers), noise_sigma=sigma)


def _parse_layer(val, lineno):
    parts = val.split()
    kind = parts[0]
    kv = {}
    for p in parts[1:]:
        if "=" not in p:
            raise ValueError(f"line {lineno}: bad layer field {p!r}")
        k, v = p.split("=", 1)
        kv[k] = v
    d = int(kv.pop("d", "0"))
    tex_kind = kv.pop("tex", "noise")
    if tex_kind == "noise":
        texture = NoiseTexture(scale=int(kv.pop("scale", "4")), seed=int(kv.pop("seed", "0")))
    elif tex_kind == "const":
        texture = ConstTexture(value=float(kv.pop("value", "0.5")))
    else:
        raise ValueError(f"line {lineno}: unknown texture {tex_kind!r}")
    if kind == "bg":
        region = None
    elif kind == "rect":
        h0, h1 = (int(s) for s in kv.pop("h").split(":"))
        w0, w1 = (int(s) for s in kv.pop("w").split(":"))
        region = Rect(h0=h0, h1=h1, w0=w0, w1=w1)
    elif kind == "disk":
        ch, cw = (int(s) for s in kv.pop("c").split(","))
        region = Disk(ch=ch, cw=cw, r=float(kv.pop("r")))
    else:
        raise ValueError(f"line {lineno}: unknown layer kind {kind!r}")
    if kv:
        raise ValueError(f"line {lineno}: unexpected layer fields {sorted(kv)}")
    return Layer(disparity=d, region=region, texture=texture)


def occluded_scene_spec(H=64, W=64, seed=0, noise_sigma=0.0, fg_d=2, bg_d=0,
                        scale=3):
    """Convenience two-plane scene: textured square over textured background."""
    h0, w0 = H // 4, W // 4
    h1, w1 = H - H // 4, W - W // 4
    return SceneSpec(
        U=9, V=9, H=H, W=W,
        layers=(
            Layer(disparity=fg_d, region=Rect(h0, h1, w0, w1),
                  texture=NoiseTexture(scale=scale, seed=seed * 2 + 1)),
            Layer(disparity=bg_d, region=None,
                  texture=NoiseTexture(scale=scale, seed=seed * 2 + 2)),
        ),
        noise_sigma=noise_sigma,
    )
