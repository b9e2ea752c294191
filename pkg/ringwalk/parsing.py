"""Parse circuit text files and YAML program files."""
from collections.abc import Mapping
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import yaml

from .qcore import GATE_ARITY, KITAEV_BASIS, Circuit, Gate, GateKind
from .vprog import VProgram

COMMENT_CHAR = "#"
HEADER_WORD = "qubits"

N_KEY = "n"
ITERATIONS_KEY = "iterations"
SWAP_KEY = "swap_bits"
HADAMARD_KEY = "hadamard_bits"
ORDER_KEY = "data_order"
SOURCE_KEY = "source"
META_KEY = "meta"
REQUIRED_KEYS = (N_KEY, ITERATIONS_KEY, SWAP_KEY, HADAMARD_KEY)
PROGRAM_KEYS = (*REQUIRED_KEYS, ORDER_KEY, SOURCE_KEY, META_KEY)


class MalformedError(Exception):
    """Raised if a circuit or program file is malformed."""


def parse_circuit_file(path: Union[str, Path], encoding: str = "utf8") -> Circuit:
    """Parse a circuit file."""
    return parse_circuit_text(Path(path).read_text(encoding=encoding))


def _gate_from_words(words: Sequence[str], where: str) -> Gate:
    name, *args = words
    try:
        kind = GateKind(name)
    except ValueError:
        kind = None
    if kind not in KITAEV_BASIS:
        raise MalformedError(f"unsupported gate {name!r} @ '{where}'")
    arity = GATE_ARITY[kind]
    if len(args) != arity:
        raise MalformedError(
            f"gate '{name}' expects {arity} qubit index(es), got {len(args)} @ '{where}'"
        )
    try:
        wires = [int(arg) for arg in args]
    except ValueError as exc:
        raise MalformedError(f"qubit index is not an integer @ '{where}'") from exc
    try:
        return Gate(kind, wires)
    except (ValueError, TypeError) as exc:
        exc_arg = exc.args[0] if exc.args else ""
        raise MalformedError(f"gate validation @ '{where}': {exc_arg}") from exc


def parse_circuit_text(text: str) -> Circuit:
    """Parse the circuit text format.

    The first meaningful line is ``qubits <n>``, then one gate per line,
    ``H <q>`` or ``CS <control> <target>``. ``#`` starts a comment.
    """
    n: Optional[int] = None
    gates: List[Gate] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        words = raw.split(COMMENT_CHAR, 1)[0].split()
        if not words:
            continue
        where = f"line {lineno}"
        if n is None:
            if len(words) != 2 or words[0] != HEADER_WORD:
                raise MalformedError(f"first line is not '{HEADER_WORD} <n>' @ '{where}'")
            try:
                n = int(words[1])
            except ValueError as exc:
                raise MalformedError(f"qubit count is not an integer @ '{where}'") from exc
            header = where
            continue
        gate = _gate_from_words(words, where)
        if max(gate.wires) >= n:
            raise MalformedError(
                f"qubit index out of range for {HEADER_WORD} {n}: {gate} @ '{where}'"
            )
        gates.append(gate)
    if n is None:
        raise MalformedError("no 'qubits <n>' line found @ 'line 1'")
    try:
        return Circuit(n, gates)
    except (ValueError, TypeError) as exc:
        exc_arg = exc.args[0] if exc.args else ""
        raise MalformedError(f"circuit validation @ '{header}': {exc_arg}") from exc


def circuit_to_text(circuit: Circuit) -> str:
    """Write ``circuit`` in the text format."""
    return "\n".join([f"{HEADER_WORD} {circuit.n}", *map(str, circuit.gates)]) + "\n"


def load_program(path: Union[str, Path], encoding: str = "utf8") -> VProgram:
    """Parse a program file."""
    with Path(path).open(encoding=encoding) as handle:
        data = yaml.safe_load(handle)
    return parse_program_data(data)


def _source_circuit(data: Any, n: int) -> Circuit:
    if not (isinstance(data, Sequence) and not isinstance(data, str)):
        raise MalformedError(f"'{SOURCE_KEY}' is not a list of gates @ '/{SOURCE_KEY}'")
    gates = []
    for index, entry in enumerate(data):
        where = f"/{SOURCE_KEY}/{index}"
        if not (isinstance(entry, str) and entry.split()):
            raise MalformedError(f"gate entry is not a non-empty string @ '{where}'")
        gates.append(_gate_from_words(entry.split(), where))
    try:
        return Circuit(n, gates)
    except (ValueError, TypeError) as exc:
        exc_arg = exc.args[0] if exc.args else ""
        raise MalformedError(f"circuit validation @ '/{SOURCE_KEY}': {exc_arg}") from exc


def parse_program_data(data: Dict[str, Any]) -> VProgram:
    """Parse a dictionary of a program."""
    if not isinstance(data, Mapping):
        raise MalformedError(f"program is not a mapping: {type(data)}")

    if not set(PROGRAM_KEYS).issuperset(data.keys()):
        unknown_keys = set(data.keys()).difference(PROGRAM_KEYS)
        raise MalformedError(
            f"Unknown keys found: {sorted(unknown_keys)!r}, allowed: {list(PROGRAM_KEYS)!r} @ '/'"
        )
    for key in REQUIRED_KEYS:
        if key not in data:
            raise MalformedError(f"'{key}' key not found @ '/'")

    for key in (SWAP_KEY, HADAMARD_KEY):
        if data[key] is None:
            data = {**data, key: ""}
        elif isinstance(data[key], int):
            raise MalformedError(f"'{key}' must be a quoted bit string @ '/{key}'")

    source = None
    if data.get(SOURCE_KEY) is not None:
        n = data[N_KEY]
        if not isinstance(n, int):
            raise MalformedError(f"'{N_KEY}' is not an integer @ '/{N_KEY}'")
        source = _source_circuit(data[SOURCE_KEY], n)

    keywords = {}
    if data.get(ORDER_KEY) is not None:
        keywords[ORDER_KEY] = data[ORDER_KEY]
    try:
        return VProgram(
            n=data[N_KEY],
            swap_bits=data[SWAP_KEY],
            hadamard_bits=data[HADAMARD_KEY],
            iterations=data[ITERATIONS_KEY],
            source=source,
            **keywords,
        )
    except (ValueError, TypeError) as exc:
        exc_arg = exc.args[0] if exc.args else ""
        raise MalformedError(f"program validation @ '/': {exc_arg}") from exc


def program_to_dict(prog: VProgram, meta: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Create the program dictionary."""
    data: Dict[str, Any] = {
        N_KEY: prog.n,
        ITERATIONS_KEY: prog.iterations,
        SWAP_KEY: prog.swap_bits,
        HADAMARD_KEY: prog.hadamard_bits,
        ORDER_KEY: list(prog.data_order),
    }
    if prog.source is not None:
        data[SOURCE_KEY] = [str(gate) for gate in prog.source.gates]
    if meta:
        data[META_KEY] = dict(meta)
    return data


def dump_program(prog: VProgram, meta: Optional[Dict[str, Any]] = None) -> str:
    return yaml.dump(program_to_dict(prog, meta), sort_keys=False, default_flow_style=False)
