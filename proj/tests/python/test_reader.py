"""Reads CLI output with numpy and checks it against the file-format contract."""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema
import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[2] / "python"))
import dsmps_io  # noqa: E402

cli, scenes = sys.argv[1], Path(sys.argv[2])


def run(*args, expect=0):
    p = subprocess.run([cli, *map(str, args)], capture_output=True, text=True)
    assert p.returncode == expect, f"{args}: exit {p.returncode}\n{p.stdout}\n{p.stderr}"
    return p


schema = json.loads((scenes.parent / "docs" / "scene.schema.json").read_text())
for scene in sorted(scenes.glob("*.json")):
    jsonschema.validate(json.loads(scene.read_text()), schema)

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)

    run("simulate", scenes / "example1.json", "-o", tmp / "f", "--incidences", 3, "--receivers", 40)
    a, meta = dsmps_io.read_grid(tmp / "f")
    assert meta["kind"] == "field"
    for name in ("u_inc", "u_scat", "u_total", "u_inf"):
        assert a[name].dtype == np.complex128 and a[name].shape == (3, 40), (name, a[name].shape)
    assert np.array_equal(a["u_total"], a["u_inc"] + a["u_scat"])
    assert np.abs(a["u_scat"]).max() > 1e-3
    assert meta["config"]["scene"]["receivers"]["count"] == 40
    jsonschema.validate(meta["config"]["scene"], schema)

    run("simulate", scenes / "example1.json", "-o", tmp / "p", "--phaseless", "--incidences", 3, "--receivers", 40)
    b, pmeta = dsmps_io.read_grid(tmp / "p")
    assert pmeta["kind"] == "phaseless"
    assert b["magnitude"].dtype == np.float64
    assert np.allclose(b["magnitude"], np.abs(a["u_total"]), rtol=0, atol=1e-15)

    run("probe", tmp / "p", "-o", tmp / "i", "--average", "--resolution", 32)
    c, imeta = dsmps_io.read_grid(tmp / "i")
    assert c["index"].shape == (3, 32, 32) and c["average"].shape == (32, 32)
    assert np.isclose(c["index"].max(axis=(1, 2)), 1.0).all()
    assert imeta["index_function"] == "phaseless"

    # a phaseless file without the incident field must be refused
    side = json.loads((tmp / "p.json").read_text())
    side["arrays"] = [x for x in side["arrays"] if x["name"] != "u_inc"]
    (tmp / "q.json").write_text(json.dumps(side))
    run("probe", tmp / "q", "-o", tmp / "j", expect=1)

    run("dataset", "--family", "mixed", "--count", 2, "--ni", 3, "--seed", 4, "--noise", 0.05, "--out", tmp / "ds")
    manifest = dsmps_io.read_manifest(tmp / "ds")
    assert manifest["count"] == 2 and manifest["split"] == "train"
    peak = 0.0
    for inputs, target, rmeta in dsmps_io.read_dataset(tmp / "ds"):
        assert inputs.shape == (3, 64, 64) and target.shape == (64, 64)
        assert rmeta["scale_W"] == manifest["scale_W"]
        peak = max(peak, inputs.max())
    assert peak == 2.0

    run("dataset", "--family", "mixed", "--count", 0, "--out", tmp / "empty")
    assert dsmps_io.read_manifest(tmp / "empty")["count"] == 0
    assert not (tmp / "empty" / "records").exists()

print("python reader: ok")
