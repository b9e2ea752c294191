from pathlib import Path

import pytest

from ringwalk.parsing import (
    MalformedError,
    circuit_to_text,
    dump_program,
    load_program,
    parse_circuit_file,
    parse_circuit_text,
    parse_program_data,
    program_to_dict,
)
from ringwalk.qcore import GateKind
from ringwalk.vprog import compile_circuit

CIRCUIT_FILES = list(Path(__file__).parent.joinpath("_circuit_files").glob("*.txt"))
PROGRAM_FILES = list(Path(__file__).parent.joinpath("_program_files").glob("*.yml"))


@pytest.mark.parametrize(
    "path", CIRCUIT_FILES, ids=[path.name.rsplit(".", 1)[0] for path in CIRCUIT_FILES]
)
def test_compile_file(path: Path, data_regression):
    prog = compile_circuit(parse_circuit_file(path))
    data_regression.check(program_to_dict(prog))


@pytest.mark.parametrize(
    "path", CIRCUIT_FILES, ids=[path.name.rsplit(".", 1)[0] for path in CIRCUIT_FILES]
)
def test_circuit_text_round_trip(path: Path):
    circuit = parse_circuit_file(path)
    assert parse_circuit_text(circuit_to_text(circuit)) == circuit


def test_comments_and_blank_lines():
    circuit = parse_circuit_text("# header comment\n\nqubits 3  # three\nH 2\n\n  CS 0 1 # pair\n")
    assert circuit.n == 3
    assert [gate.kind for gate in circuit.gates] == [GateKind.H, GateKind.CONTROLLED_S]
    assert circuit.gates[1].wires == (0, 1)


CIRCUIT_FILES_BAD = list(Path(__file__).parent.joinpath("_bad_circuit_files").glob("*.txt"))
ERROR_MESSAGES = {
    "bad_index.txt": "qubit index is not an integer @ 'line 2'",
    "bad_qubit_count.txt": "qubit count is not an integer @ 'line 1'",
    "empty.txt": "no 'qubits <n>' line found",
    "index_out_of_range.txt": "qubit index out of range for qubits 2: CS 1 2 @ 'line 3'",
    "negative_index.txt": "gate validation @ 'line 2': gate wires must be non-negative",
    "no_header.txt": "first line is not 'qubits <n>' @ 'line 1'",
    "repeated_wire.txt": "gate validation @ 'line 2': gate wires are not distinct",
    "unsupported_gate.txt": "unsupported gate 'CZ' @ 'line 2'",
    "wrong_arity.txt": "gate 'CS' expects 2 qubit index.* got 1 @ 'line 2'",
    "zero_qubits.txt": "circuit validation @ 'line 1': circuit needs at least one qubit",
}


@pytest.mark.parametrize(
    "path",
    CIRCUIT_FILES_BAD,
    ids=[path.name.rsplit(".", 1)[0] for path in CIRCUIT_FILES_BAD],
)
def test_malformed_circuit_parse(path: Path):
    message = ERROR_MESSAGES[path.name]
    with pytest.raises(MalformedError, match=message):
        parse_circuit_file(path)


@pytest.mark.parametrize(
    "path", PROGRAM_FILES, ids=[path.name.rsplit(".", 1)[0] for path in PROGRAM_FILES]
)
def test_program_file_round_trip(path: Path):
    prog = load_program(path)
    assert parse_program_data(program_to_dict(prog)) == prog


def test_program_defaults():
    prog = load_program(Path(__file__).parent.joinpath("_program_files", "single_cs.yml"))
    assert prog.data_order == (0, 1)
    assert prog.source is None
    assert "source" not in program_to_dict(prog)


def test_dump_program_key_order():
    prog = load_program(Path(__file__).parent.joinpath("_program_files", "appendix.yml"))
    lines = dump_program(prog, meta={"origin": "appendix"}).splitlines()
    assert lines[:4] == ["n: 3", "iterations: 4", "swap_bits: '0001'", "hadamard_bits: '1000'"]
    assert lines[-2:] == ["meta:", "  origin: appendix"]


PROGRAM_FILES_BAD = list(Path(__file__).parent.joinpath("_bad_program_files").glob("*.yml"))
PROGRAM_ERROR_MESSAGES = {
    "bad_data_order.yml": "program validation @ '/': data_order is not a permutation",
    "bad_source_gate.yml": "unsupported gate 'SWAP' @ '/source/0'",
    "last_swap_bit_zero.yml": "program validation @ '/': the last swap-program bit must be 1",
    "length_mismatch.yml": "program validation @ '/': program lengths",
    "list.yml": "program is not a mapping:",
    "no_iterations.yml": "'iterations' key not found @ '/'",
    "non_binary_bits.yml": "program validation @ '/': 'swap_bits' must match regex",
    "unknown_keys.yml": "Unknown keys found: .* @ '/'",
    "unquoted_bits.yml": "'swap_bits' must be a quoted bit string @ '/swap_bits'",
}


@pytest.mark.parametrize(
    "path",
    PROGRAM_FILES_BAD,
    ids=[path.name.rsplit(".", 1)[0] for path in PROGRAM_FILES_BAD],
)
def test_malformed_program_parse(path: Path):
    message = PROGRAM_ERROR_MESSAGES[path.name]
    with pytest.raises(MalformedError, match=message):
        load_program(path)
