import numpy as np
import pytest

from ringwalk.qcore import (
    WALK_LINE,
    CapacityError,
    Circuit,
    DomainError,
    Gate,
    GateKind,
    Statevector,
    apply_gate,
    apply_sigma,
    circuit_unitary,
    is_unitary,
    self_test,
    sigma_matrix,
)


def test_self_test():
    residuals = self_test()
    assert set(residuals) == {kind.value for kind in GateKind}
    assert max(residuals.values()) <= 1e-12


@pytest.mark.parametrize("kind", [GateKind.H, GateKind.CONTROLLED_S, GateKind.X, GateKind.S])
def test_gate_matrices_unitary(kind):
    wires = (0, 1) if kind is GateKind.CONTROLLED_S else (0,)
    assert is_unitary(Gate(kind, wires).matrix)


def test_gate_str():
    assert str(Gate("CS", [1, 2])) == "CS 1 2"
    assert str(Gate(GateKind.H, [0])) == "H 0"


@pytest.mark.parametrize(
    "kind,wires,message",
    [
        ("CS", (1, 1), "not distinct"),
        ("H", (-1,), "non-negative"),
        ("CS", (0,), "expects 2 wire"),
        ("SIGMA", (0,), "at least 2 wires"),
    ],
)
def test_gate_validation(kind, wires, message):
    with pytest.raises(DomainError, match=message):
        Gate(kind, wires)


def test_circuit_counts():
    circuit = Circuit(3, [Gate("CS", (1, 2)), Gate("H", (2,)), Gate("CS", (2, 0))])
    assert (circuit.t, circuit.t_h, circuit.t_cs) == (3, 1, 2)


def test_circuit_rejects_non_basis_gate():
    with pytest.raises(DomainError, match="outside the Kitaev basis"):
        Circuit(2, [Gate("SWAP", (0, 1))])


def test_circuit_rejects_wire_out_of_range():
    with pytest.raises(DomainError, match="out of range"):
        Circuit(2, [Gate("H", (2,))])


def test_apply_gate_hadamard():
    state = apply_gate(Statevector.from_bits("00"), Gate("H", (0,)))
    assert np.allclose(state.amps, [2 ** -0.5, 0, 2 ** -0.5, 0])


def test_apply_gate_controlled_s_phase():
    state = apply_gate(Statevector.from_bits("011"), Gate("CS", (1, 2)))
    assert state.amps[3] == pytest.approx(1j)
    untouched = apply_gate(Statevector.from_bits("010"), Gate("CS", (1, 2)))
    assert untouched.allclose(Statevector.from_bits("010"))


def test_apply_gate_leaves_input():
    state = Statevector.from_bits("10")
    apply_gate(state, Gate("H", (0,)))
    assert state.allclose(Statevector.from_bits("10"))
    with pytest.raises(ValueError):
        state.amps[0] = 0


def test_apply_gate_rejects_walk_line():
    with pytest.raises(DomainError, match="data register"):
        apply_gate(Statevector.basis(0, 4, WALK_LINE), Gate("H", (0,)))


def test_statevector_rejects_nan():
    with pytest.raises(DomainError, match="NaN"):
        Statevector([1, np.nan])


def test_apply_sigma():
    assert apply_sigma("abc") == ("b", "c", "a")
    with pytest.raises(DomainError):
        apply_sigma([1])


def test_sigma_matrix_moves_first_wire_last():
    state = apply_gate(Statevector.from_bits("100"), Gate("SIGMA", (0, 1, 2)))
    assert state.allclose(Statevector.from_bits("001"))
    assert is_unitary(sigma_matrix(4))


def test_circuit_unitary_order():
    circuit = Circuit(2, [Gate("H", (1,)), Gate("CS", (0, 1)), Gate("H", (1,))])
    unitary = circuit_unitary(circuit)
    expected = np.eye(4, dtype=complex)
    for gate in circuit.gates:
        if gate.kind is GateKind.H:
            expected = np.kron(np.eye(2), gate.matrix) @ expected
        else:
            expected = gate.matrix @ expected
    assert np.allclose(unitary, expected)


def test_controlled_s_fourth_power_is_identity():
    circuit = Circuit(2, [Gate("CS", (0, 1))] * 4)
    assert np.allclose(circuit_unitary(circuit), np.eye(4))


def test_circuit_unitary_capacity():
    with pytest.raises(CapacityError):
        circuit_unitary(Circuit(11, []))
