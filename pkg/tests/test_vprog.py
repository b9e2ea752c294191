import pytest

from ringwalk.qcore import Circuit, DomainError, Gate, Statevector, apply_gate
from ringwalk.vprog import (
    Cursor,
    GateBlock,
    VProgram,
    compile_circuit,
    gate_blocks,
    initial_state,
    iterate_v,
    program_length_bound,
    simulate_program,
)


def run_circuit(circuit: Circuit, state: Statevector) -> Statevector:
    for gate in circuit.gates:
        state = apply_gate(state, gate)
    return state


def test_cursor_cycle():
    assert [Cursor.CYCLE.cycled(), Cursor.HOLDCYCLE.cycled(), Cursor.GATE.cycled()] == [
        Cursor.HOLDCYCLE,
        Cursor.GATE,
        Cursor.CYCLE,
    ]
    assert Cursor.EMPTY.cycled() is Cursor.EMPTY
    for cursor in Cursor:
        assert cursor.cycled().uncycled() is cursor


@pytest.mark.parametrize(
    "kwargs,message",
    [
        (dict(n=1, swap_bits="1", hadamard_bits="0", iterations=1), "at least 2"),
        (dict(n=2, swap_bits="01", hadamard_bits="0", iterations=2), "do not match"),
        (dict(n=2, swap_bits="10", hadamard_bits="00", iterations=2), "must be 1"),
        (
            dict(n=3, swap_bits="1", hadamard_bits="0", iterations=1, data_order=(0, 2, 2)),
            "not a permutation",
        ),
    ],
)
def test_vprogram_validation(kwargs, message):
    with pytest.raises(DomainError, match=message):
        VProgram(**kwargs)


def test_appendix_program():
    circuit = Circuit(3, [Gate("CS", (1, 2)), Gate("H", (2,)), Gate("CS", (2, 0))])
    prog = compile_circuit(circuit)
    assert (prog.swap_bits, prog.hadamard_bits) == ("0001", "1000")
    assert prog.data_order == (1, 0, 2)
    assert prog.length == prog.iterations == 4
    assert prog.source == circuit


def test_appendix_registers():
    """Follow the cursor and the slots through the four passes of V."""
    prog = VProgram(3, "0001", "1000", 4, (1, 0, 2))
    state = initial_state(prog, Statevector.from_bits("000"))
    assert state.swap_program == "1000"
    cursors, slots = [], []
    for _ in range(prog.iterations):
        state = iterate_v(state)
        cursors.append(state.cursor)
        slots.append(state.slots)
    assert cursors == [Cursor.GATE, Cursor.CYCLE, Cursor.HOLDCYCLE, Cursor.GATE]
    assert slots == [(0, 1, 2), (1, 2, 0), (2, 1, 0), (1, 2, 0)]
    assert state.swap_program == "1000"


def test_hadamard_merges_into_block():
    circuit = Circuit(2, [Gate("CS", (0, 1)), Gate("H", (0,))])
    assert gate_blocks(circuit) == [GateBlock(1, 0, True)]


def test_standalone_hadamard_expands():
    circuit = Circuit(3, [Gate("H", (1,))])
    assert gate_blocks(circuit) == [GateBlock(2, 1)] * 3 + [GateBlock(2, 1, True)]


def test_empty_circuit(random_state):
    prog = compile_circuit(Circuit(2, []))
    assert prog.iterations == 0
    state = random_state(0, 2)
    assert simulate_program(prog, state).allclose(state)


def test_compile_rejects_one_qubit():
    with pytest.raises(DomainError, match="two wires"):
        compile_circuit(Circuit(1, [Gate("H", (0,))]))


def test_simulate_rejects_wrong_width():
    prog = VProgram(2, "1", "0", 1)
    with pytest.raises(DomainError, match="2 qubits"):
        simulate_program(prog, Statevector.from_bits("000"))


@pytest.mark.parametrize("seed", range(100))
def test_random_circuit_simulation(seed, random_circuit, random_state):
    circuit = random_circuit(seed)
    prog = compile_circuit(circuit)
    assert prog.length <= program_length_bound(circuit)
    state = random_state(seed, circuit.n)
    assert simulate_program(prog, state).allclose(run_circuit(circuit, state))
