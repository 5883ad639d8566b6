"""Checkpoints: JSON header + raw little-endian float64 parameter blob.

The header records layer parameter names/shapes in declaration order plus
arbitrary metadata; it carries a SHA-256 of the blob so corruption and
mismatched loads fail loudly.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np


class CheckpointError(RuntimeError):
    pass


def save_checkpoint(path, params, meta=None):
    """``params`` is a list of (name, float64 array) in declaration order."""
    blob = b"".join(np.ascontiguousarray(p, dtype="<f8").tobytes()
                    for _, p in params)
    header = {
        "format": "psimlab-checkpoint-v1",
        "params": [{"name": n, "shape": list(p.shape)} for n, p in params],
        "blob_sha256": hashlib.sha256(blob).hexdigest(),
        "meta": meta or {},
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(len(header_bytes).to_bytes(8, "little"))
        fh.write(header_bytes)
        fh.write(blob)


def load_checkpoint(path):
    """Returns (list of (name, array), meta dict)."""
    with open(path, "rb") as fh:
        hlen = int.from_bytes(fh.read(8), "little")
        header = json.loads(fh.read(hlen).decode("utf-8"))
        blob = fh.read()
    if header.get("format") != "psimlab-checkpoint-v1":
        raise CheckpointError(f"{path}: unknown checkpoint format")
    if hashlib.sha256(blob).hexdigest() != header["blob_sha256"]:
        raise CheckpointError(f"{path}: parameter blob hash mismatch")
    params = []
    offset = 0
    for entry in header["params"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(blob, dtype="<f8", count=count,
                            offset=offset).reshape(shape).copy()
        params.append((entry["name"], arr))
        offset += count * 8
    if offset != len(blob):
        raise CheckpointError(f"{path}: blob length does not match header")
    return params, header["meta"]


def restore_into(model, params):
    """Copy checkpoint arrays into a model with matching parameter layout."""
    own = model.parameters()
    if len(own) != len(params):
        raise CheckpointError("parameter count mismatch")
    for (name, dst), (cname, src) in zip(own, params):
        if name != cname or dst.shape != src.shape:
            raise CheckpointError(f"parameter mismatch: {name} vs {cname}")
        dst[...] = src
