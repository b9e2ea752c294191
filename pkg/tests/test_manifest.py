import os

import pytest

from ringwalk import __version__
from ringwalk.manifest import THREADS_ENV, RunManifest, load_manifest, scan_threads


@pytest.mark.parametrize(
    "value,expected",
    [("3", 3), ("0", None), ("many", None), ("", None)],
    ids=["set", "zero", "not_int", "empty"],
)
def test_scan_threads(value, expected, monkeypatch):
    monkeypatch.setenv(THREADS_ENV, value)
    assert scan_threads() == (expected or os.cpu_count() or 1)


def test_manifest_round_trip(tmp_path):
    path = tmp_path / "run.yml"
    manifest = RunManifest("walk", [], {"tbar": 47, "variant": "start-stop"}, ["out.csv"])
    manifest.write(path)
    assert load_manifest(path) == manifest
    assert manifest.version == __version__


def test_manifest_dump_order():
    text = RunManifest("trace", ["prog.yml"], seed=3).dump()
    keys = [line.split(":")[0] for line in text.splitlines() if not line.startswith(("-", " "))]
    assert keys == ["command", "inputs", "parameters", "outputs", "seed", "version"]


def test_manifest_validation():
    with pytest.raises(TypeError):
        RunManifest("trace", inputs=[1])
