"""Pair construction, augmentation, and train/test splitting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from ..metrics import align_global_offset
from ..reconstruct import five_step_wrapped_phase, modulation_amplitude, \
    unwrap_phase


@dataclass
class PairedSample:
    """One normalized (input, target) training pair.

    ``norm`` records, per role, the (offset, scale) affine used so that
    denormalize(normalize(x)) round-trips: normalized = (x - offset) / scale.
    """

    input: np.ndarray
    target: np.ndarray
    norm: dict = field(default_factory=dict)

    def denorm_input(self):
        off, scale = self.norm["input"]
        return self.input * scale + off

    def denorm_target(self):
        off, scale = self.norm["target"]
        return self.target * scale + off


def _affine_to_unit(lo, hi):
    """(offset, scale) mapping [lo, hi] -> [-1, 1]."""
    off = 0.5 * (hi + lo)
    scale = 0.5 * (hi - lo)
    if scale == 0.0:
        scale = 1.0
    return off, scale


def normalize(x, lo, hi):
    off, scale = _affine_to_unit(lo, hi)
    return (x - off) / scale


def denormalize(x, lo, hi):
    off, scale = _affine_to_unit(lo, hi)
    return x * scale + off


def dataset_intensity_range(dataset):
    lo = min(f.data.min() for stack, _ in dataset for f in stack.frames)
    hi = max(f.data.max() for stack, _ in dataset for f in stack.frames)
    return float(lo), float(hi)


def dataset_phase_range(dataset, margin=0.05):
    """Fixed phase range over the whole dataset's ground truth, with headroom."""
    lo = min(truth.data.min() for _, truth in dataset)
    hi = max(truth.data.max() for _, truth in dataset)
    pad = margin * max(hi - lo, 1.0)
    return float(lo - pad), float(hi + pad)


def build_pairs(dataset, mode, phase_range=None, use_ground_truth_phase=True):
    """Turn (stack, truth) samples into normalized training pairs.

    mode ``frames``: four pairs per stack, frame k -> frame k+1 (one shared
    generator learns the constant advance).  mode ``phase``: one pair per
    stack, frame 1 -> unwrapped aligned phase, target normalized by a
    dataset-wide fixed phase range.  Intensities always use the dataset-wide
    range so inference from a single frame normalizes consistently.

    Returns (pairs, norm_info) where norm_info records the dataset-wide
    intensity range and, for mode phase, the phase range used.
    """
    if not dataset:
        raise ValueError("empty dataset")
    if mode not in ("frames", "phase"):
        raise ValueError(f"unknown mode {mode!r}")

    intensity_range = dataset_intensity_range(dataset)
    norm_info = {"mode": mode, "intensity_range": intensity_range}
    pairs = []

    lo, hi = intensity_range
    if mode == "frames":
        for stack, _ in dataset:
            rec = {"input": _affine_to_unit(lo, hi),
                   "target": _affine_to_unit(lo, hi)}
            for k in range(4):
                pairs.append(PairedSample(
                    normalize(stack.frames[k].data, lo, hi),
                    normalize(stack.frames[k + 1].data, lo, hi),
                    dict(rec)))
        return pairs, norm_info

    if phase_range is None:
        phase_range = dataset_phase_range(dataset)
    norm_info["phase_range"] = phase_range
    plo, phi = phase_range
    for stack, truth in dataset:
        if use_ground_truth_phase:
            target = truth
        else:
            wrapped = five_step_wrapped_phase(stack)
            quality = modulation_amplitude(stack)
            target = align_global_offset(unwrap_phase(wrapped, quality), truth)
        rec = {"input": _affine_to_unit(lo, hi),
               "target": _affine_to_unit(plo, phi)}
        pairs.append(PairedSample(
            normalize(stack.frames[0].data, lo, hi),
            np.clip(normalize(target.data, plo, phi), -1.0, 1.0),
            rec))
    return pairs, norm_info


AUGMENT_OPS = tuple(f"rotate{30 * k}" for k in range(12)) + ("flip_h", "flip_v",
                                                             "identity")


def _transform(grid, op):
    if op == "identity" or op == "rotate0":
        return grid.copy()
    if op == "flip_h":
        return grid[:, ::-1].copy()
    if op == "flip_v":
        return grid[::-1, :].copy()
    if op.startswith("rotate"):
        deg = int(op[len("rotate"):])
        if deg % 90 == 0:
            return np.rot90(grid, k=(deg // 90) % 4).copy()
        # bilinear about the center, reflect padding, same output size
        return ndimage.rotate(grid, deg, reshape=False, order=1,
                              mode="reflect")
    raise ValueError(f"unknown augmentation op {op!r}")


def augment(sample: PairedSample, op: str) -> PairedSample:
    """Apply the same geometric transform to input and target."""
    return PairedSample(_transform(sample.input, op),
                        _transform(sample.target, op),
                        dict(sample.norm))


def rotations_12(samples):
    """The 12-fold 30-degree rotation family applied to every sample."""
    out = []
    for s in samples:
        for k in range(12):
            out.append(augment(s, f"rotate{30 * k}"))
    return out


def split_dataset(dataset, train_fraction=0.8, seed=0, train_count=None):
    """Deterministic shuffled split into (train, test).

    ``train_count`` overrides the fraction with an explicit size.
    """
    n = len(dataset)
    if n < 2:
        raise ValueError("need at least 2 samples to split")
    order = np.random.default_rng(seed).permutation(n)
    if train_count is None:
        train_count = math.ceil(train_fraction * n)
    if not 1 <= train_count < n:
        raise ValueError(f"train count {train_count} out of range for {n}")
    train = [dataset[i] for i in order[:train_count]]
    test = [dataset[i] for i in order[train_count:]]
    return train, test
