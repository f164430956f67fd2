"""Model checkpoints: versioned JSON header + raw row-major payload.

Layout: magic line, 4-byte big-endian header length, UTF-8 JSON header,
then every parameter's bytes concatenated in header order.  The header
records the model/feature configs, each tensor's name/shape/dtype, and a
free-form meta dict (training provenance).  Writes go through a temp file
and os.replace, so a crash never leaves a half-written checkpoint behind.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .models import ModelConfig, SeparationModel

MAGIC = b"PARTSEP-CKPT\n"
VERSION = 1


def save_checkpoint(path, model: SeparationModel, meta: dict | None = None) -> None:
    path = Path(path)
    params = model.params()
    entries = []
    blobs = []
    for name, tensor in params.items():
        arr = np.ascontiguousarray(tensor.data)
        entries.append({"name": name, "shape": list(arr.shape),
                        "dtype": str(arr.dtype)})
        blobs.append(arr.tobytes())
    header = {
        "version": VERSION,
        "model_config": model.config.to_dict(),
        "params": entries,
        "meta": meta or {},
    }
    payload = json.dumps(header, sort_keys=True).encode("utf-8")

    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(MAGIC)
            f.write(len(payload).to_bytes(4, "big"))
            f.write(payload)
            for blob in blobs:
                f.write(blob)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_checkpoint(path) -> tuple[SeparationModel, dict]:
    """Rebuild the model a checkpoint describes; returns (model, meta)."""
    data = Path(path).read_bytes()
    if not data.startswith(MAGIC):
        raise ValueError(f"{path}: not a checkpoint file")
    offset = len(MAGIC)
    header_len = int.from_bytes(data[offset:offset + 4], "big")
    offset += 4
    header = json.loads(data[offset:offset + header_len].decode("utf-8"))
    offset += header_len
    if header["version"] != VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version "
                         f"{header['version']}")

    config = ModelConfig.from_dict(header["model_config"])
    model = SeparationModel(config, seed=0)
    params = model.params()
    for entry in header["params"]:
        name = entry["name"]
        if name not in params:
            raise ValueError(f"{path}: unknown parameter {name!r}")
        shape = tuple(entry["shape"])
        dtype = np.dtype(entry["dtype"])
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        nbytes = count * dtype.itemsize
        arr = np.frombuffer(data[offset:offset + nbytes], dtype=dtype)
        offset += nbytes
        if params[name].data.shape != shape:
            raise ValueError(f"{path}: parameter {name!r} shape {shape} does "
                             f"not match model {params[name].data.shape}")
        params[name].data = arr.reshape(shape).astype(params[name].data.dtype)
    if offset != len(data):
        raise ValueError(f"{path}: {len(data) - offset} trailing bytes")
    return model, header["meta"]
