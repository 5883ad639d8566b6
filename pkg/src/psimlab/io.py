"""File formats: PFM rasters with JSON sidecars, profiles as CSV."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .image import Image, PhaseMap
from .metrics import Profile


def write_pfm(path, data: np.ndarray):
    """Grayscale PFM: 'Pf' header, little-endian float32, bottom-up scanlines."""
    data = np.asarray(data, dtype=np.float32)
    if data.ndim != 2:
        raise ValueError("PFM writer expects a 2D array")
    height, width = data.shape
    with open(path, "wb") as fh:
        fh.write(b"Pf\n")
        fh.write(f"{width} {height}\n".encode("ascii"))
        fh.write(b"-1.0\n")  # negative scale marks little-endian
        fh.write(np.flipud(data).astype("<f4").tobytes())


def read_pfm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        if fh.readline().strip() != b"Pf":
            raise ValueError(f"{path}: not a grayscale PFM file")
        width, height = map(int, fh.readline().split())
        scale = float(fh.readline())
        dtype = "<f4" if scale < 0 else ">f4"
        raw = np.frombuffer(fh.read(4 * width * height), dtype=dtype)
    return np.flipud(raw.reshape(height, width)).astype(np.float64)


def write_sidecar(pfm_path, role: str, units: str, **extra):
    """JSON sidecar next to a PFM, carrying role/units/provenance fields."""
    meta = {"role": role, "units": units}
    meta.update(extra)
    path = Path(str(pfm_path) + ".json")
    path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path


def read_sidecar(pfm_path) -> dict:
    path = Path(str(pfm_path) + ".json")
    if not path.exists():
        return {}
    return json.loads(path.read_text())


def save_image(path, image: Image, **meta):
    write_pfm(path, image.data)
    write_sidecar(path, role="intensity", units="arbitrary", **meta)


def save_phase(path, phase: PhaseMap, **meta):
    write_pfm(path, phase.data)
    write_sidecar(path, role="phase", units="radians",
                  wrapped=phase.wrapped, **meta)


def load_phase(path) -> PhaseMap:
    meta = read_sidecar(path)
    return PhaseMap(read_pfm(path), wrapped=bool(meta.get("wrapped", False)),
                    meta=meta)


def write_profile_csv(path, profile: Profile):
    """Two-column CSV (pixel_index, value); segment comments at boundaries."""
    boundaries = set(profile.boundaries)
    segment = 0
    with open(path, "w") as fh:
        fh.write("pixel_index,value\n")
        for i, v in enumerate(profile.values):
            if i in boundaries:
                segment += 1
                fh.write(f"# segment={segment}\n")
            fh.write(f"{i},{float(v)!r}\n")


def read_profile_csv(path) -> Profile:
    values = []
    boundaries = []
    with open(path) as fh:
        next(fh)  # header
        for line in fh:
            if line.startswith("# segment="):
                boundaries.append(len(values))
                continue
            _, v = line.rstrip("\n").split(",")
            values.append(float(v))
    return Profile(np.array(values), tuple(boundaries))
