"""Self-describing binary checkpoints.

Layout: an 8-byte magic, a little-endian uint64 header length, a canonical
JSON header (version, model config, vocabulary, parameter manifest), then the
raw little-endian float64 parameter buffers in manifest order.  Canonical
JSON plus fixed buffer order makes save(load(x)) byte-identical.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .corpus import Vocabulary
from .model import ModelConfig, ModelParams, init_params

__all__ = ["CheckpointError", "FORMAT_VERSION", "save_checkpoint", "load_checkpoint"]

MAGIC = b"LADLCKPT"
FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


def save_checkpoint(params: ModelParams, config: ModelConfig, vocab: Vocabulary, path) -> None:
    named = params.named()
    manifest = [
        {"name": n, "shape": list(t.data.shape), "dtype": "f8"} for n, t in named.items()
    ]
    header = {
        "version": FORMAT_VERSION,
        "config": config.to_dict(),
        "vocab": vocab.to_dict(),
        "params": manifest,
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for n, t in named.items():
            fh.write(np.ascontiguousarray(t.data, dtype="<f8").tobytes())


def load_checkpoint(path, precision: str = "f64"):
    """Load (params, config, vocab); ``precision='f32'`` rounds the stored
    values through float32 for a lighter inference profile."""
    if precision not in ("f64", "f32"):
        raise ValueError("precision must be 'f64' or 'f32'")
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < len(MAGIC) + 8 or raw[: len(MAGIC)] != MAGIC:
        raise CheckpointError("not a checkpoint file")
    (header_len,) = struct.unpack("<Q", raw[len(MAGIC) : len(MAGIC) + 8])
    body_start = len(MAGIC) + 8
    if len(raw) < body_start + header_len:
        raise CheckpointError("truncated checkpoint header")
    try:
        header = json.loads(raw[body_start : body_start + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"corrupt header: {exc}") from exc
    if header.get("version") != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {header.get('version')!r}")

    config = ModelConfig.from_dict(header["config"])
    vocab = Vocabulary.from_dict(header["vocab"])
    if len(vocab) != config.vocab_size:
        raise CheckpointError(
            f"vocabulary size {len(vocab)} does not match config {config.vocab_size}"
        )

    params = init_params(config, seed=0)
    named = params.named()
    offset = body_start + header_len
    for entry in header["params"]:
        name, shape = entry["name"], tuple(entry["shape"])
        if name not in named:
            raise CheckpointError(f"unknown parameter {name!r}")
        want = named[name].data.shape
        if shape != want:
            raise CheckpointError(f"shape mismatch for {name}: file {shape} vs config {want}")
        count = int(np.prod(shape)) if shape else 1
        end = offset + 8 * count
        if end > len(raw):
            raise CheckpointError("truncated checkpoint data")
        arr = np.frombuffer(raw[offset:end], dtype="<f8").reshape(shape).copy()
        if precision == "f32":
            arr = arr.astype(np.float32).astype(np.float64)
        named[name].data = arr
        named[name].grad = None
        offset = end
    if offset != len(raw):
        raise CheckpointError("trailing bytes after parameter data")
    return params, config, vocab
