"""Occlusion-aware light-field depth estimation.

Core idea: matching cost for every candidate disparity is read straight
out of a zero-padded sub-aperture-image mosaic with a U x V kernel whose
dilation encodes the disparity, while per-view modulation scalars
derived from photometric warping residuals suppress occluded views.
"""

from .alloc import AllocationLedger, NullLedger
from .lightfield import (AngularPatch, DispRange, LightField, Mosaic,
                         angular_patch, build_mosaic, extract_sai, to_grayscale)
from .cost import (dilation_for, masked_stat_cost, modulated_conv_grad,
                   oacc_forward, ones_masks, required_pad,
                   shift_and_concat_gather, uniform_weights)
from .occlusion import compute_masks, warp_to_center
from .estimator import EstimatorConfig, aggregate, estimate, regress, textured_mask
from .metrics import BenchReport, EvalReport, bench_cost, evaluate
from .synth import (ConstTexture, GroundTruth, Layer, NoiseTexture, Rect,
                    SceneSpec, occluded_scene_spec, parse_scene_spec, render)
from .lfio import (PfmError, SceneConfig, ScenePaths, export_scene, load_pfm,
                   load_scene, parse_scene_config, read_pfm, save_pfm,
                   write_pfm)

__all__ = [
    "AllocationLedger", "NullLedger",
    "AngularPatch", "DispRange", "LightField", "Mosaic", "angular_patch",
    "build_mosaic", "extract_sai", "to_grayscale",
    "dilation_for", "masked_stat_cost", "modulated_conv_grad", "oacc_forward",
    "ones_masks", "required_pad", "shift_and_concat_gather", "uniform_weights",
    "compute_masks", "warp_to_center",
    "EstimatorConfig", "aggregate", "estimate", "regress", "textured_mask",
    "BenchReport", "EvalReport", "bench_cost", "evaluate",
    "ConstTexture", "GroundTruth", "Layer", "NoiseTexture", "Rect",
    "SceneSpec", "occluded_scene_spec", "parse_scene_spec", "render",
    "PfmError", "SceneConfig", "ScenePaths", "export_scene", "load_pfm",
    "load_scene", "parse_scene_config", "read_pfm", "save_pfm", "write_pfm",
]
