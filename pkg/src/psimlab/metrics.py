"""Comparison metrics: windowed SSIM, RMS error, offset alignment, profiles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .image import PhaseMap
from .simulate import InterferogramStack


def gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    """Normalized 2D Gaussian window (weights sum to 1)."""
    half = (size - 1) / 2.0
    x = np.arange(size, dtype=np.float64) - half
    g = np.exp(-(x ** 2) / (2.0 * sigma ** 2))
    win = np.outer(g, g)
    return win / win.sum()


@dataclass
class SsimParams:
    window_size: int = 11
    sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 1.0

    def __post_init__(self):
        if self.k1 <= 0 or self.k2 <= 0:
            raise ValueError("k1 and k2 must be positive")
        if self.dynamic_range <= 0:
            raise ValueError("dynamic range must be positive")


@dataclass
class Profile:
    """A stitched line profile with frame-boundary markers."""

    values: np.ndarray
    boundaries: tuple = field(default_factory=tuple)


def _grid(a) -> np.ndarray:
    data = a.data if hasattr(a, "data") else a
    return np.asarray(data, dtype=np.float64)


def ssim(a, b, params: SsimParams = None):
    """Classic windowed SSIM; returns (mean score, per-window SSIM map).

    Statistics are Gaussian-weighted within each fully-valid window; the mean
    runs over valid windows only (no padding).
    """
    a = _grid(a)
    b = _grid(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    params = params or SsimParams()
    n = params.window_size
    if a.shape[0] < n or a.shape[1] < n:
        raise ValueError(f"images must be at least {n}x{n}")
    win = gaussian_window(n, params.sigma)

    wa = sliding_window_view(a, (n, n))
    wb = sliding_window_view(b, (n, n))
    mu_a = np.einsum('ijkl,kl->ij', wa, win)
    mu_b = np.einsum('ijkl,kl->ij', wb, win)
    e_aa = np.einsum('ijkl,kl->ij', wa * wa, win)
    e_bb = np.einsum('ijkl,kl->ij', wb * wb, win)
    e_ab = np.einsum('ijkl,kl->ij', wa * wb, win)
    var_a = e_aa - mu_a ** 2
    var_b = e_bb - mu_b ** 2
    cov = e_ab - mu_a * mu_b

    c1 = (params.k1 * params.dynamic_range) ** 2
    c2 = (params.k2 * params.dynamic_range) ** 2
    ssim_map = ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) / \
        ((mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2))
    return float(ssim_map.mean()), ssim_map


def rms_error(a, b) -> float:
    """Root-mean-square difference."""
    a = _grid(a)
    b = _grid(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.sqrt(np.mean((a - b) ** 2)))


def align_global_offset(pred: PhaseMap, truth: PhaseMap) -> PhaseMap:
    """Remove the global 2-pi branch: subtract round(median(pred - truth) / 2pi) * 2pi."""
    if pred.shape != truth.shape:
        raise ValueError("phase maps must share dimensions")
    if pred.wrapped or truth.wrapped:
        raise ValueError("alignment applies to unwrapped phase maps")
    two_pi = 2.0 * math.pi
    offset = two_pi * np.round(np.median(pred.data - truth.data) / two_pi)
    return PhaseMap(pred.data - offset, wrapped=False,
                    meta=dict(pred.meta, branch_offset=float(offset)))


def stitched_line_profile(stack: InterferogramStack, row: int) -> Profile:
    """Concatenate one row from each of the five frames, in frame order."""
    height, width = stack.shape
    if not 0 <= row < height:
        raise ValueError(f"row {row} out of range for height {height}")
    values = np.concatenate([f.data[row] for f in stack.frames])
    boundaries = tuple(width * k for k in range(1, 5))
    return Profile(values, boundaries)


def foreground_mask(truth: PhaseMap, fraction: float = 0.05) -> np.ndarray:
    """Pixels whose phase exceeds ``fraction`` of the map's peak-to-peak range."""
    t = truth.data
    lo = t.min()
    span = t.max() - lo
    if span == 0:
        return np.ones_like(t, dtype=bool)
    return (t - lo) > fraction * span


def masked_mean_ssim(a, b, mask: np.ndarray, params: SsimParams = None) -> float:
    """Mean SSIM over windows whose center pixel is in the mask."""
    score, ssim_map = ssim(a, b, params)
    params = params or SsimParams()
    half = params.window_size // 2
    centers = mask[half:half + ssim_map.shape[0], half:half + ssim_map.shape[1]]
    if not centers.any():
        return score
    return float(ssim_map[centers].mean())
