"""Model persistence: a JSON manifest plus one little-endian float64 blob.

A saved directory holds:
    manifest.json   format tag, tensor names/shapes in blob order, and a
                    free-form "meta" object (architecture, head, config
                    echo, ...)
    params.bin      every tensor's raw bytes, concatenated in manifest
                    order

Round-trips are exact: float64 bytes in, identical float64 bytes out.
"""

import json
import os

import numpy as np

from .tensor import DTYPE, ShapeError

MANIFEST_NAME = "manifest.json"
BLOB_NAME = "params.bin"
FORMAT_TAG = "marginnet-tensors"
FORMAT_VERSION = 1


class ManifestError(ValueError):
    """Manifest missing, malformed, or inconsistent with the blob."""


def save_tensors(dir_path, tensors, meta=None):
    """Write named tensors and metadata to ``dir_path`` (created if
    needed).  Blob order is the dict's insertion order."""
    os.makedirs(dir_path, exist_ok=True)
    entries = []
    blobs = []
    for name, arr in tensors.items():
        arr = np.ascontiguousarray(arr, dtype=DTYPE)
        entries.append({"name": name, "shape": list(arr.shape)})
        blobs.append(arr.astype("<f8", copy=False).tobytes())
    manifest = {
        "format": FORMAT_TAG,
        "version": FORMAT_VERSION,
        "dtype": "float64",
        "byte_order": "little",
        "tensors": entries,
        "meta": meta or {},
    }
    with open(os.path.join(dir_path, MANIFEST_NAME), "w") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")
    with open(os.path.join(dir_path, BLOB_NAME), "wb") as f:
        f.write(b"".join(blobs))


def load_tensors(dir_path):
    """Read a saved directory back as (tensors dict, meta dict)."""
    manifest_path = os.path.join(dir_path, MANIFEST_NAME)
    try:
        with open(manifest_path) as f:
            manifest = json.load(f)
    except FileNotFoundError:
        raise ManifestError(f"no {MANIFEST_NAME} in {dir_path}") from None
    except json.JSONDecodeError as e:
        raise ManifestError(f"{manifest_path}: invalid JSON ({e})") from None
    if manifest.get("format") != FORMAT_TAG:
        raise ManifestError(
            f"{manifest_path}: format {manifest.get('format')!r}, "
            f"expected {FORMAT_TAG!r}"
        )
    with open(os.path.join(dir_path, BLOB_NAME), "rb") as f:
        blob = f.read()
    tensors = {}
    offset = 0
    for entry in manifest["tensors"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * 8
        if offset + nbytes > len(blob):
            raise ManifestError(
                f"{BLOB_NAME} holds {len(blob)} bytes; tensor "
                f"{entry['name']!r} needs bytes up to {offset + nbytes}"
            )
        arr = np.frombuffer(
            blob, dtype="<f8", count=count, offset=offset
        ).reshape(shape)
        tensors[entry["name"]] = arr.astype(DTYPE, copy=True)
        offset += nbytes
    if offset != len(blob):
        raise ManifestError(
            f"{BLOB_NAME} has {len(blob) - offset} trailing bytes"
        )
    return tensors, manifest.get("meta", {})


def assign_tensor(target, source, name):
    """Copy ``source`` into ``target`` in place, shapes checked."""
    if target.shape != source.shape:
        raise ShapeError(
            f"tensor {name!r}: stored shape {source.shape} vs "
            f"model shape {target.shape}"
        )
    target[...] = source
