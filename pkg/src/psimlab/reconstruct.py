"""Classical five-step phase reconstruction and quality-guided unwrapping."""

from __future__ import annotations

import heapq
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .image import Image, PhaseMap, wrap_to_pi
from .simulate import InterferogramStack


@dataclass
class QualityMap:
    """Per-pixel fringe modulation amplitude, used as unwrapping quality."""

    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if not np.all(np.isfinite(self.data)) or np.any(self.data < 0):
            raise ValueError("quality map must be finite and >= 0")

    @property
    def shape(self):
        return self.data.shape


@dataclass
class HeightMap:
    """Surface height in nm."""

    data: np.ndarray
    lambda0: float = 520.0

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if not np.all(np.isfinite(self.data)):
            raise ValueError("height map must be finite")

    @property
    def shape(self):
        return self.data.shape


def _five_frames(stack: InterferogramStack):
    if len(stack.frames) != 5:
        raise ValueError("five-step reconstruction needs exactly 5 frames")
    return [f.data for f in stack.frames]


def five_step_wrapped_phase(stack: InterferogramStack) -> PhaseMap:
    """Wrapped phase estimate phi = atan2(2(I2 - I4), 2 I3 - I1 - I5).

    The tangent of the result equals 2(I4 - I2) / (I1 - 2 I3 + I5) wherever
    the denominator is nonzero; atan2 fixes the quadrant so the estimate
    round-trips the simulator's ground truth under the default
    (-pi, -pi/2, 0, pi/2, pi) schedule.  Pixels with zero modulation
    (numerator = denominator = 0) get phi = 0.
    """
    i1, i2, i3, i4, i5 = _five_frames(stack)
    num = 2.0 * (i2 - i4)
    den = 2.0 * i3 - i1 - i5
    phi = np.arctan2(num, den)
    phi[(num == 0.0) & (den == 0.0)] = 0.0
    # atan2 returns [-pi, pi]; fold -pi onto +pi to keep the (-pi, pi] contract
    phi[phi == -np.pi] = np.pi
    return PhaseMap(phi, wrapped=True)


def modulation_amplitude(stack: InterferogramStack) -> QualityMap:
    """Fringe modulation B = sqrt((2(I2 - I4))^2 + (2 I3 - I1 - I5)^2) / 4."""
    i1, i2, i3, i4, i5 = _five_frames(stack)
    num = 2.0 * (i2 - i4)
    den = 2.0 * i3 - i1 - i5
    return QualityMap(0.25 * np.hypot(num, den))


def unwrap_phase(wrapped: PhaseMap, quality: QualityMap) -> PhaseMap:
    """Quality-guided flood-fill unwrapping.

    Seeds at the highest-quality pixel (row-major tie-break), then grows the
    solved region by repeatedly popping the highest-quality frontier pixel and
    assigning neighbor value + wrapped difference.  The seed keeps its wrapped
    value, so output - input is a multiple of 2 pi everywhere.
    """
    if not wrapped.wrapped:
        raise ValueError("input phase must be wrapped")
    if wrapped.shape != quality.shape:
        raise ValueError("quality map dimensions must match the phase map")
    q = quality.data
    w = wrapped.data
    rows, cols = w.shape

    if np.all(q == 0.0):
        warnings.warn("all-zero quality map; unwrapping in raster order",
                      stacklevel=2)
        out = _raster_itoh(w)
        return PhaseMap(out, wrapped=False,
                        meta={"seed_pixel": (0, 0), "seed_branch": 0})

    seed_flat = int(np.argmax(q))  # argmax breaks ties row-major
    sr, sc = divmod(seed_flat, cols)
    out = np.empty_like(w)
    solved = np.zeros(w.shape, dtype=bool)
    queued = np.zeros(w.shape, dtype=bool)
    out[sr, sc] = w[sr, sc]
    solved[sr, sc] = True

    # max-heap on quality; row-major index is the deterministic tie-break
    frontier = []

    def push_neighbors(r, c):
        for nr, nc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
            if 0 <= nr < rows and 0 <= nc < cols and not solved[nr, nc] \
                    and not queued[nr, nc]:
                queued[nr, nc] = True
                heapq.heappush(frontier, (-q[nr, nc], nr * cols + nc))

    push_neighbors(sr, sc)
    two_pi = 2.0 * math.pi
    while frontier:
        _, flat = heapq.heappop(frontier)
        r, c = divmod(flat, cols)
        if solved[r, c]:
            continue
        best_q = -1.0
        ref = None
        for nr, nc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
            if 0 <= nr < rows and 0 <= nc < cols and solved[nr, nc]:
                if q[nr, nc] > best_q:
                    best_q = q[nr, nc]
                    ref = (nr, nc)
        d = w[r, c] - w[ref]
        d -= two_pi * np.round(d / two_pi)
        out[r, c] = out[ref] + d
        solved[r, c] = True
        push_neighbors(r, c)

    return PhaseMap(out, wrapped=False,
                    meta={"seed_pixel": (sr, sc), "seed_branch": 0})


def _raster_itoh(w: np.ndarray) -> np.ndarray:
    """Row-by-row cumulative unwrapping, first column unwrapped vertically."""
    two_pi = 2.0 * math.pi

    def cum_unwrap(line):
        d = np.diff(line)
        d -= two_pi * np.round(d / two_pi)
        out = np.empty_like(line)
        out[0] = line[0]
        out[1:] = line[0] + np.cumsum(d)
        return out

    out = np.empty_like(w)
    first_col = cum_unwrap(w[:, 0])
    for r in range(w.shape[0]):
        row = cum_unwrap(w[r])
        out[r] = row + (first_col[r] - row[0])
    return out


def phase_to_height(phase: PhaseMap, lambda0: float) -> HeightMap:
    """Reflection-mode conversion h = lambda0 * phi / (4 pi), nm."""
    if phase.wrapped:
        raise ValueError("phase must be unwrapped before height conversion")
    return HeightMap(lambda0 * phase.data / (4.0 * math.pi), lambda0=lambda0)


def reconstruct_stack(stack: InterferogramStack, lambda0: float = None):
    """Full classical pipeline: wrapped phase, quality, unwrapped phase, height."""
    wrapped = five_step_wrapped_phase(stack)
    quality = modulation_amplitude(stack)
    unwrapped = unwrap_phase(wrapped, quality)
    height = None
    if lambda0 is not None:
        height = phase_to_height(unwrapped, lambda0)
    return wrapped, quality, unwrapped, height
