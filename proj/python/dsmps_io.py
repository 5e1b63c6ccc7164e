"""Readers for dsm-grid-v1 files and dsm-dataset-v1 directories."""

import json
from pathlib import Path

import numpy as np

GRID_FORMAT = "dsm-grid-v1"
DATASET_FORMAT = "dsm-dataset-v1"

_DTYPES = {"float64": np.dtype("<f8"), "complex128": np.dtype("<c16")}


def read_grid(stem):
    """Return (arrays, metadata) for STEM.json / STEM.bin."""
    stem = Path(stem)
    side = json.loads(stem.with_name(stem.name + ".json").read_text())
    if side.get("format") != GRID_FORMAT:
        raise ValueError(f"{stem}: not a {GRID_FORMAT} sidecar")
    if side.get("byte_order") != "little":
        raise ValueError(f"{stem}: unsupported byte order")
    raw = (stem.parent / side["data_file"]).read_bytes()
    arrays = {}
    for a in side["arrays"]:
        dtype = _DTYPES[a["dtype"]]
        count = int(np.prod(a["shape"], dtype=np.int64))
        end = a["offset"] + count * dtype.itemsize
        if end > len(raw):
            raise ValueError(f"{stem}: data file truncated at array {a['name']}")
        arrays[a["name"]] = np.frombuffer(raw, dtype=dtype, count=count, offset=a["offset"]).reshape(a["shape"])
    return arrays, side.get("metadata", {})


def read_manifest(directory):
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text())
    if manifest.get("format") != DATASET_FORMAT:
        raise ValueError(f"{directory}: not a {DATASET_FORMAT} manifest")
    return manifest


def read_dataset(directory):
    """Yield (inputs [N_i, res, res], target [res, res], metadata) per record."""
    directory = Path(directory)
    manifest = read_manifest(directory)
    for rec in manifest["records"]:
        arrays, meta = read_grid(directory / rec["stem"])
        yield arrays["inputs"], arrays["target"], meta
