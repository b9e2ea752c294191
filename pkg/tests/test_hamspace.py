import pytest

from ringwalk.hamspace import (
    BasisState,
    build_hinit,
    build_restricted,
    check_effective_equivalence,
    count_ground_configs,
    decode_glyph,
    event_branches,
    glyph_index,
)
from ringwalk.qcore import CapacityError, DomainError
from ringwalk.ring import initial_configuration
from ringwalk.rules import EventKind, GateEvent
from ringwalk.vprog import Cursor, VProgram, compile_circuit

APPENDIX = VProgram(3, "0001", "1000", 4, (1, 0, 2))
SINGLE_CS = VProgram(2, "1", "0", 1)


@pytest.fixture(scope="module")
def appendix_hamiltonian():
    return build_restricted(APPENDIX)


def test_appendix_restricted(appendix_hamiltonian):
    assert appendix_hamiltonian.dim == 48 * 2 ** 3
    assert appendix_hamiltonian.is_hermitian()
    matrix = appendix_hamiltonian.to_scipy()
    assert matrix.shape == (384, 384)


def test_appendix_equivalence(appendix_hamiltonian):
    report = check_effective_equivalence(APPENDIX, hamiltonian=appendix_hamiltonian)
    assert report.tbar == 47
    assert report.data_qubits == 3
    assert report.basis_size == 384
    assert report.max_deviation <= 1e-10


def test_restricted_capacity():
    with pytest.raises(CapacityError, match="exceeds 10 states"):
        build_restricted(APPENDIX, cap=10)


def test_coo_text():
    hamiltonian = build_restricted(SINGLE_CS)
    lines = hamiltonian.to_coo_text().splitlines()
    assert len(lines) == len(hamiltonian.entries)
    row, col, real, imag = lines[0].split()
    assert (int(row), int(col)) == hamiltonian.entries[0][:2]
    assert float(real) == pytest.approx(hamiltonian.entries[0][2].real)
    assert float(imag) == pytest.approx(hamiltonian.entries[0][2].imag)


def test_basis_state_length():
    config = initial_configuration(SINGLE_CS)
    with pytest.raises(DomainError, match="expected 2 data bits"):
        BasisState(config, "011")


def test_event_branches():
    assert event_branches(None, "01") == [("01", 1.0)]
    phase = GateEvent(EventKind.CONTROLLED_S, (0, 1))
    assert event_branches(phase, "11") == [("11", 1j)]
    assert event_branches(phase.inverse(), "11") == [("11", -1j)]
    branches = event_branches(GateEvent(EventKind.H, (1,)), "01")
    assert [bits for bits, _ in branches] == ["00", "01"]
    assert branches[1][1] == pytest.approx(-(2 ** -0.5))


@pytest.mark.parametrize("seed", range(12))
def test_random_circuit_equivalence(seed, random_circuit):
    prog = compile_circuit(random_circuit(seed))
    report = check_effective_equivalence(prog)
    assert report.max_deviation <= 1e-10


def test_glyph_index_round_trip():
    assert [decode_glyph(glyph_index(cursor, bit)) for cursor in Cursor for bit in (0, 1)] == [
        (cursor, bit) for cursor in Cursor for bit in (0, 1)
    ]


def test_hinit_single_cs_exhaustive():
    hinit = build_hinit(SINGLE_CS, "10")
    assert hinit.layout.size == 5
    assert hinit.penalty(hinit.desired) == 0
    exhaustive = count_ground_configs(hinit, method="exhaustive", threads=2)
    transfer = count_ground_configs(hinit, method="transfer-matrix")
    assert exhaustive.count == transfer.count == 1
    assert exhaustive.witness == transfer.witness == hinit.desired
    assert count_ground_configs(hinit).method == "exhaustive"


def test_hinit_appendix_transfer():
    hinit = build_hinit(APPENDIX, "011")
    ground = count_ground_configs(hinit)
    assert ground.method == "transfer-matrix"
    assert ground.count == 1
    assert ground.witness == hinit.desired


def test_hinit_without_anchor():
    hinit = build_hinit(SINGLE_CS, "00").without_anchor()
    assert count_ground_configs(hinit, method="exhaustive").count > 1
    assert count_ground_configs(hinit, method="transfer-matrix").count > 1


def test_hinit_exhaustive_capacity():
    with pytest.raises(CapacityError, match="limited to 8 sites"):
        count_ground_configs(build_hinit(APPENDIX, "000"), method="exhaustive")


@pytest.mark.parametrize("data", ["1", "012", "abc"])
def test_hinit_bad_data(data):
    with pytest.raises(DomainError, match="3-bit string"):
        build_hinit(APPENDIX, data)


def test_unknown_count_method():
    with pytest.raises(DomainError, match="unknown counting method"):
        count_ground_configs(build_hinit(SINGLE_CS, "00"), method="guess")
