import os
from pathlib import Path
import re
from typing import List

import pytest
import yaml
from click.testing import CliRunner

from ringwalk import __version__
from ringwalk.cli import APPENDIX_TRACE, main
from ringwalk.manifest import load_manifest
from ringwalk.rules import compare_dumps

TESTS = Path(__file__).parent


def _path(*parts: str) -> str:
    return os.path.abspath(TESTS.joinpath(*parts))


@pytest.fixture()
def invoke_cli():
    """Run CLI and do standard checks."""

    def _func(args: List[str], assert_exit: bool = True):
        runner = CliRunner()
        result = runner.invoke(main, args)
        if assert_exit:
            assert result.exit_code == 0, result.output
        return result

    yield _func


def test_version(invoke_cli):
    result = invoke_cli(["--version"])
    assert __version__ in result.output


def test_verify_appendix(invoke_cli, file_regression):
    result = invoke_cli(["verify-appendix"])
    file_regression.check(result.output.rstrip())


def test_compile(invoke_cli):
    result = invoke_cli(["compile", _path("_circuit_files", "appendix.txt")])
    data = yaml.safe_load(result.output)
    assert data["swap_bits"] == "0001"
    assert data["hadamard_bits"] == "1000"
    assert data["data_order"] == [1, 0, 2]


def test_compile_unsupported_gate(invoke_cli):
    result = invoke_cli(
        ["compile", _path("_bad_circuit_files", "unsupported_gate.txt")], assert_exit=False
    )
    assert result.exit_code == 2
    assert "unsupported gate" in result.output


def test_trace(tmp_path, invoke_cli):
    output = tmp_path / "trace.txt"
    invoke_cli(["trace", _path("_program_files", "appendix.yml"), "-o", str(output)])
    dump = output.read_text(encoding="utf8")
    assert compare_dumps(dump, APPENDIX_TRACE.read_text(encoding="utf8")) == (48, 48)


def test_walk_single_hop(tmp_path, invoke_cli):
    output = tmp_path / "walk.csv"
    result = invoke_cli(
        ["walk", "--tbar", "1", "--variant", "start-stop", "--tmax", "3.2", "-o", str(output)]
    )
    lines = output.read_text(encoding="utf8").splitlines()
    assert lines[0] == "t,abs_amp,re,im"
    assert len(lines) == 101
    peak = max(lines[1:], key=lambda line: float(line.split(",")[1]))
    assert float(peak.split(",")[0]) == pytest.approx(1.5708, abs=0.02)
    match = re.search(r"\|amp\| = ([0-9.]+) at t = ([0-9.]+)", result.output)
    assert match is not None, result.output
    assert float(match.group(1)) == pytest.approx(1.0, abs=1e-6)
    assert float(match.group(2)) == pytest.approx(1.570796, abs=1e-5)
    assert "repetitions for 99% success: 1" in result.output


def test_walk_program(tmp_path, invoke_cli):
    output = tmp_path / "walk.csv"
    result = invoke_cli(
        [
            "walk",
            _path("_program_files", "single_cs.yml"),
            "--variant",
            "runway-landing",
            "-o",
            str(output),
        ]
    )
    assert "tbar: 4" in result.output
    assert "arrival probability at peak" in result.output
    assert output.read_text(encoding="utf8").startswith("t,abs_amp,re,im\n")


@pytest.mark.parametrize(
    "args",
    [[], ["--tbar", "3", _path("_program_files", "single_cs.yml")], ["--tbar", "0"]],
    ids=["neither", "both", "zero_tbar"],
)
def test_walk_bad_input(args, invoke_cli):
    result = invoke_cli(["walk"] + args, assert_exit=False)
    assert result.exit_code == 2


def test_adiabatic(tmp_path, invoke_cli):
    gaps, summary = tmp_path / "gap.csv", tmp_path / "summary.yml"
    result = invoke_cli(
        ["adiabatic", "--tbar", "2", "--run", "-o", str(gaps), "--summary", str(summary)]
    )
    assert "passed: True" in result.output
    assert gaps.read_text(encoding="utf8").splitlines()[0] == "s,gap"
    data = yaml.safe_load(summary.read_text(encoding="utf8"))
    assert list(data) == ["tbar", "min_gap", "gap_bound", "passed", "runtime", "fidelity", "steps"]
    assert data["passed"] is True
    assert data["fidelity"] >= 0.99


def test_adiabatic_too_few_steps(invoke_cli):
    result = invoke_cli(["adiabatic", "--tbar", "2", "--run", "--steps", "1"], assert_exit=False)
    assert result.exit_code == 2
    assert "too coarse" in result.output


def test_equiv(tmp_path, invoke_cli):
    coo = tmp_path / "h.coo"
    result = invoke_cli(["equiv", _path("_program_files", "single_cs.yml"), "--coo", str(coo)])
    assert "basis states: 20" in result.output
    assert "steps: 5" in result.output
    assert "max deviation:" in result.output
    assert coo.read_text(encoding="utf8").count("\n") > 0


def test_hinit_scan(invoke_cli):
    result = invoke_cli(["hinit", _path("_program_files", "single_cs.yml"), "--scan"])
    assert "terms: 4" in result.output
    assert "zero-penalty configurations: 1 (exhaustive)" in result.output


def test_hinit_without_anchor(invoke_cli):
    result = invoke_cli(
        [
            "hinit",
            _path("_program_files", "single_cs.yml"),
            "--scan",
            "--no-anchor",
            "--method",
            "transfer-matrix",
        ]
    )
    assert "terms: 3" in result.output
    count = re.search(r"zero-penalty configurations: (\d+)", result.output)
    assert int(count.group(1)) > 1


def test_hinit_bad_data(invoke_cli):
    result = invoke_cli(
        ["hinit", _path("_program_files", "single_cs.yml"), "--data", "101"], assert_exit=False
    )
    assert result.exit_code == 2
    assert "2-bit string" in result.output


def test_manifest(tmp_path, invoke_cli):
    manifest, output = tmp_path / "run.yml", tmp_path / "prog.yml"
    circuit = _path("_circuit_files", "single_cs.txt")
    invoke_cli(["--manifest", str(manifest), "compile", circuit, "-o", str(output)])
    record = load_manifest(manifest)
    assert record.command == "compile"
    assert record.inputs == [circuit]
    assert record.outputs == [str(output)]
    assert record.version == __version__
