"""Checkpoint file format.

One UTF-8 JSON manifest line (config, normalizer statistics, and the
parameter table of names, shapes, and byte offsets), a newline, then the
raw little-endian float32 payload with every parameter at its offset in
manifest order.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

CHECKPOINT_FORMAT = "modpolicy-checkpoint-v1"


class CheckpointError(RuntimeError):
    pass


def save_checkpoint(path, model, config: dict, normalizers: dict[str, dict]):
    """Write model parameters plus their config and normalizer statistics."""
    entries = []
    payloads = []
    offset = 0
    for name, p in model.named_parameters():
        arr = np.ascontiguousarray(p.data, dtype="<f4")
        entries.append({"name": name, "shape": list(arr.shape), "offset": offset})
        payloads.append(arr.tobytes())
        offset += arr.nbytes
    manifest = {
        "format": CHECKPOINT_FORMAT,
        "config": config,
        "normalizers": normalizers,
        "payload_bytes": offset,
        "params": entries,
    }
    blob = json.dumps(manifest, sort_keys=True).encode("utf-8") + b"\n" + b"".join(payloads)
    Path(path).write_bytes(blob)


def load_checkpoint(path) -> tuple[dict, dict[str, np.ndarray]]:
    """Read a checkpoint; returns (manifest, name -> float32 array)."""
    raw = Path(path).read_bytes()
    nl = raw.find(b"\n")
    if nl < 0:
        raise CheckpointError(f"{path}: no manifest line found")
    try:
        manifest = json.loads(raw[:nl].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: bad manifest: {exc}") from exc
    if manifest.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError(f"{path}: unknown format {manifest.get('format')!r}")
    payload = raw[nl + 1:]
    if len(payload) != manifest["payload_bytes"]:
        raise CheckpointError(
            f"{path}: payload is {len(payload)} bytes, manifest says "
            f"{manifest['payload_bytes']}")
    params = {}
    for entry in manifest["params"]:
        shape = tuple(entry["shape"])
        n = int(np.prod(shape)) if shape else 1
        start = entry["offset"]
        arr = np.frombuffer(payload, dtype="<f4", count=n, offset=start)
        params[entry["name"]] = arr.reshape(shape).copy()
    return manifest, params


def restore_parameters(model, params: dict[str, np.ndarray]):
    """Copy loaded arrays into the model, validating names and shapes."""
    model_params = dict(model.named_parameters())
    missing = set(model_params) - set(params)
    extra = set(params) - set(model_params)
    if missing or extra:
        raise CheckpointError(
            f"checkpoint/config mismatch: missing={sorted(missing)[:4]} "
            f"extra={sorted(extra)[:4]}")
    for name, p in model_params.items():
        arr = params[name]
        if tuple(arr.shape) != tuple(p.data.shape):
            raise CheckpointError(
                f"checkpoint/config mismatch: {name} has shape {arr.shape}, "
                f"model expects {p.data.shape}")
        p.data = arr.astype(p.data.dtype)
