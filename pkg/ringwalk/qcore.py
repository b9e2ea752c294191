"""Exact gate and statevector primitives for the data register and the walk line."""
import enum
from functools import lru_cache
from typing import Dict, Iterable, Sequence, Tuple, TypeVar

import attr
from attr.validators import deep_iterable, in_, instance_of
import numpy as np

ATOL = 1e-10
UNITARY_TOL = 1e-12
DENSE_QUBIT_LIMIT = 10

DATA_REGISTER = "data-register"
WALK_LINE = "walk-line"
BASIS_LABELS = (DATA_REGISTER, WALK_LINE)

T = TypeVar("T")


class DomainError(ValueError):
    """Raised when an operation is called outside its domain."""


class CapacityError(RuntimeError):
    """Raised when a dense construction would exceed its size bound."""


class GateKind(str, enum.Enum):
    X = "X"
    H = "H"
    S = "S"
    CONTROLLED_S = "CS"
    SWAP = "SWAP"
    SIGMA_CASCADE = "SIGMA"
    CONTROLLED_H = "CH"


GATE_ARITY: Dict[GateKind, int] = {
    GateKind.X: 1,
    GateKind.H: 1,
    GateKind.S: 1,
    GateKind.CONTROLLED_S: 2,
    GateKind.SWAP: 2,
    GateKind.CONTROLLED_H: 2,
}
KITAEV_BASIS = frozenset({GateKind.H, GateKind.CONTROLLED_S})

X_MATRIX = np.array([[0, 1], [1, 0]], dtype=complex)
H_MATRIX = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S_MATRIX = np.diag([1, 1j])
SWAP_MATRIX = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


def controlled(unitary: np.ndarray) -> np.ndarray:
    """Return the controlled version of ``unitary``, control on the first wire."""
    dim = unitary.shape[0]
    out = np.eye(2 * dim, dtype=complex)
    out[dim:, dim:] = unitary
    return out


def sigma_matrix(wires: int) -> np.ndarray:
    """Permutation matrix of the swap cascade over ``wires`` wires.

    Wire ``w`` receives the state previously held by wire ``w + 1``,
    and the first wire's state moves to the last wire.
    """
    if wires < 2:
        raise DomainError(f"swap cascade needs at least 2 wires, got {wires}")
    dim = 2 ** wires
    out = np.zeros((dim, dim), dtype=complex)
    for index in range(dim):
        bits = format(index, f"0{wires}b")
        out[int(bits[1:] + bits[0], 2), index] = 1
    return out


_FIXED_MATRICES: Dict[GateKind, np.ndarray] = {
    GateKind.X: X_MATRIX,
    GateKind.H: H_MATRIX,
    GateKind.S: S_MATRIX,
    GateKind.CONTROLLED_S: controlled(S_MATRIX),
    GateKind.SWAP: SWAP_MATRIX,
    GateKind.CONTROLLED_H: controlled(H_MATRIX),
}


@attr.s(slots=True, frozen=True)
class Gate:
    """A gate acting on an ordered tuple of qubit wires."""

    kind: GateKind = attr.ib(converter=GateKind)
    wires: Tuple[int, ...] = attr.ib(
        converter=tuple, validator=deep_iterable(instance_of(int), instance_of(tuple))
    )

    @wires.validator
    def _check_wires(self, attribute, value):
        if len(set(value)) != len(value):
            raise DomainError(f"gate wires are not distinct: {value}")
        if any(wire < 0 for wire in value):
            raise DomainError(f"gate wires must be non-negative: {value}")
        arity = GATE_ARITY.get(self.kind)
        if arity is None:
            if len(value) < 2:
                raise DomainError(f"swap cascade needs at least 2 wires, got {len(value)}")
        elif len(value) != arity:
            raise DomainError(
                f"gate {self.kind.value} expects {arity} wire(s), got {len(value)}"
            )

    @property
    def matrix(self) -> np.ndarray:
        if self.kind is GateKind.SIGMA_CASCADE:
            return sigma_matrix(len(self.wires))
        return _FIXED_MATRICES[self.kind]

    def __str__(self) -> str:
        return " ".join([self.kind.value, *(str(wire) for wire in self.wires)])


@attr.s(slots=True, frozen=True)
class Circuit:
    """An ordered list of Kitaev-basis gates on ``n`` qubits."""

    n: int = attr.ib(validator=instance_of(int))
    gates: Tuple[Gate, ...] = attr.ib(
        factory=tuple,
        converter=tuple,
        validator=deep_iterable(instance_of(Gate), instance_of(tuple)),
    )

    @n.validator
    def _check_n(self, attribute, value):
        if value < 1:
            raise DomainError(f"circuit needs at least one qubit, got {value}")

    @gates.validator
    def _check_gates(self, attribute, value):
        for index, gate in enumerate(value):
            if gate.kind not in KITAEV_BASIS:
                raise DomainError(f"gate {index} is outside the Kitaev basis: {gate}")
            if max(gate.wires) >= self.n:
                raise DomainError(f"gate {index} wire out of range for n={self.n}: {gate}")

    @property
    def t_h(self) -> int:
        return sum(1 for gate in self.gates if gate.kind is GateKind.H)

    @property
    def t_cs(self) -> int:
        return sum(1 for gate in self.gates if gate.kind is GateKind.CONTROLLED_S)

    @property
    def t(self) -> int:
        return len(self.gates)


def _as_amplitudes(value) -> np.ndarray:
    amps = np.array(value, dtype=complex)
    amps.setflags(write=False)
    return amps


@attr.s(slots=True, frozen=True, eq=False)
class Statevector:
    """A complex amplitude vector over a labelled basis."""

    amps: np.ndarray = attr.ib(converter=_as_amplitudes)
    basis_label: str = attr.ib(default=DATA_REGISTER, validator=in_(BASIS_LABELS))

    @amps.validator
    def _check_amps(self, attribute, value):
        if value.ndim != 1 or value.size == 0:
            raise DomainError(f"amplitudes must be a non-empty vector, got shape {value.shape}")
        if not np.all(np.isfinite(value)):
            raise DomainError("amplitudes contain NaN or Inf")

    @classmethod
    def basis(cls, index: int, dim: int, basis_label: str = DATA_REGISTER) -> "Statevector":
        amps = np.zeros(dim, dtype=complex)
        amps[index] = 1
        return cls(amps, basis_label)

    @classmethod
    def from_bits(cls, bits: str) -> "Statevector":
        """Computational basis state of the data register, qubit 0 first."""
        return cls.basis(int(bits, 2), 2 ** len(bits))

    @property
    def dim(self) -> int:
        return self.amps.size

    @property
    def num_qubits(self) -> int:
        n = self.dim.bit_length() - 1
        if 2 ** n != self.dim:
            raise DomainError(f"dimension {self.dim} is not a power of two")
        return n

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def allclose(self, other: "Statevector", atol: float = ATOL) -> bool:
        return self.dim == other.dim and bool(np.allclose(self.amps, other.amps, atol=atol))


def apply_operator(
    matrix: np.ndarray, wires: Sequence[int], vectors: np.ndarray, n: int
) -> np.ndarray:
    """Apply ``matrix`` on ``wires`` to vectors of an ``n``-qubit register.

    ``vectors`` has shape ``(2**n, ...)``; trailing axes are carried along.
    Qubit 0 is the most significant bit of the basis index.
    """
    k = len(wires)
    batch = vectors.shape[1:]
    front = list(range(k))
    psi = vectors.reshape((2,) * n + batch)
    psi = np.moveaxis(psi, list(wires), front)
    shape = psi.shape
    psi = (matrix @ psi.reshape(2 ** k, -1)).reshape(shape)
    psi = np.moveaxis(psi, front, list(wires))
    return psi.reshape((2 ** n,) + batch)


def apply_gate(state: Statevector, gate: Gate) -> Statevector:
    """Return ``U_gate |state>``; the input is left untouched."""
    if state.basis_label != DATA_REGISTER:
        raise DomainError(f"gates act on the data register, not '{state.basis_label}'")
    n = state.num_qubits
    if max(gate.wires) >= n:
        raise DomainError(f"gate {gate} out of range for a {n}-qubit register")
    return Statevector(apply_operator(gate.matrix, gate.wires, state.amps, n))


def apply_sigma(contents: Sequence[T]) -> Tuple[T, ...]:
    """Move the first cell's content to the last cell, shifting the others up."""
    if len(contents) < 2:
        raise DomainError(f"swap cascade needs at least 2 cells, got {len(contents)}")
    return tuple(contents[1:]) + (contents[0],)


def circuit_unitary(circuit: Circuit, limit: int = DENSE_QUBIT_LIMIT) -> np.ndarray:
    """Dense unitary of ``circuit``, gates applied in circuit order."""
    if circuit.n > limit:
        raise CapacityError(f"dense unitary limited to {limit} qubits, got {circuit.n}")
    unitary = np.eye(2 ** circuit.n, dtype=complex)
    for gate in circuit.gates:
        unitary = apply_operator(gate.matrix, gate.wires, unitary, circuit.n)
    return unitary


def unitarity_residual(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(matrix.conj().T @ matrix - np.eye(matrix.shape[0]))))


def is_unitary(matrix: np.ndarray, atol: float = ATOL) -> bool:
    return unitarity_residual(matrix) <= atol


def gate_kinds() -> Iterable[GateKind]:
    return iter(GateKind)


@lru_cache(maxsize=None)
def self_test() -> Dict[str, float]:
    """Check every gate matrix is unitary; run once per process.

    :returns: residual ``max|U^dag U - I|`` per gate kind
    :raises RuntimeError: if a residual exceeds ``UNITARY_TOL``
    """
    residuals = {kind.value: unitarity_residual(matrix) for kind, matrix in _FIXED_MATRICES.items()}
    residuals[GateKind.SIGMA_CASCADE.value] = max(
        unitarity_residual(sigma_matrix(m)) for m in range(2, 6)
    )
    bad = {name: value for name, value in residuals.items() if value > UNITARY_TOL}
    if bad:
        raise RuntimeError(f"gate matrices are not unitary: {bad}")
    return residuals
