"""Run manifests: config hashing and output checksums."""

import json

import pandas as pd

from forced_heteroclinic import __version__
from forced_heteroclinic.pipeline.manifest import RunManifest, canonical_json, config_hash
from forced_heteroclinic.utils.files import file_sha256, timestamped_filename, write_csv


def test_config_hash_ignores_key_order():
    assert config_hash({"a": 1, "b": [1.5, 2]}) == config_hash({"b": [1.5, 2], "a": 1})
    assert config_hash({"a": 1}) != config_hash({"a": 2})
    assert canonical_json({"b": 1, "a": 2}) == '{"a":2,"b":1}'


def test_manifest_round_trip_and_verify(tmp_path):
    output = write_csv(pd.DataFrame({"omega": [0.1, 1 / 3]}), tmp_path / "out.csv")
    manifest = RunManifest.start({"task": "lyapunov", "omega": [0.1, 0.2]}).finish([output])
    path = manifest.write(tmp_path / "run.manifest.json")
    loaded = RunManifest.read(path)
    assert loaded == manifest
    assert loaded.version == __version__
    assert loaded.verify() == []
    assert json.loads(path.read_text(encoding="utf-8"))["files"][0]["sha256"] == file_sha256(output)

    output.write_text("omega\n0.5\n", encoding="utf-8")
    assert loaded.verify() == [f"changed file {output}"]
    output.unlink()
    assert loaded.verify() == [f"missing file {output}"]


def test_tampered_config_is_detected(tmp_path):
    manifest = RunManifest.start({"seed": 0})
    manifest.config["seed"] = 1
    assert manifest.verify() == ["config hash does not match the stored config"]


def test_csv_keeps_full_precision(tmp_path):
    path = write_csv(pd.DataFrame({"x": [1 / 3]}), tmp_path / "nested" / "x.csv")
    assert float(path.read_text(encoding="utf-8").splitlines()[1]) == 1 / 3
    assert timestamped_filename("sweep_{timestamp}.csv", "20240101_000000") == "sweep_20240101_000000.csv"
