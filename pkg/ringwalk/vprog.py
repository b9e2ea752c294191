"""The programmable circuit V and the compiler from Kitaev-basis circuits to its programs."""
import enum
import logging
from typing import List, Optional, Sequence, Tuple

import attr
from attr.validators import instance_of, matches_re, optional
import numpy as np

from .qcore import (
    Circuit,
    DomainError,
    Gate,
    GateKind,
    Statevector,
    apply_operator,
    apply_sigma,
)

logger = logging.getLogger(__name__)

BITS_RE = r"^[01]*$"


class Cursor(enum.IntEnum):
    """The two-bit cursor register; the value is its ``00/01/10/11`` encoding."""

    EMPTY = 0
    CYCLE = 1
    HOLDCYCLE = 2
    GATE = 3

    def cycled(self) -> "Cursor":
        """Advance ``CYCLE -> HOLDCYCLE -> GATE -> CYCLE``; ``EMPTY`` is fixed."""
        if self is Cursor.EMPTY:
            return self
        return Cursor(self % 3 + 1)

    def uncycled(self) -> "Cursor":
        if self is Cursor.EMPTY:
            return self
        return Cursor((self + 1) % 3 + 1)


def _to_order(value: Sequence[int]) -> Tuple[int, ...]:
    return tuple(int(item) for item in value)


@attr.s(slots=True, frozen=True)
class VProgram:
    """Initial program registers of V, plus how many times V is applied."""

    n: int = attr.ib(validator=instance_of(int))
    swap_bits: str = attr.ib(validator=[instance_of(str), matches_re(BITS_RE)])
    hadamard_bits: str = attr.ib(validator=[instance_of(str), matches_re(BITS_RE)])
    iterations: int = attr.ib(validator=instance_of(int))
    # circuit qubit initially held by each data slot
    data_order: Tuple[int, ...] = attr.ib(
        default=attr.Factory(lambda self: tuple(range(self.n)), takes_self=True),
        converter=_to_order,
    )
    source: Optional[Circuit] = attr.ib(
        default=None, validator=optional(instance_of(Circuit)), eq=False
    )

    @n.validator
    def _check_n(self, attribute, value):
        if value < 2:
            raise DomainError(f"V needs at least 2 data qubits, got {value}")

    @iterations.validator
    def _check_iterations(self, attribute, value):
        if value < 0:
            raise DomainError(f"iterations must be non-negative, got {value}")
        if not len(self.swap_bits) == len(self.hadamard_bits) == value:
            raise DomainError(
                f"program lengths ({len(self.swap_bits)}, {len(self.hadamard_bits)}) "
                f"do not match iterations {value}"
            )
        if value and self.swap_bits[-1] != "1":
            raise DomainError("the last swap-program bit must be 1")

    @data_order.validator
    def _check_data_order(self, attribute, value):
        if sorted(value) != list(range(self.n)):
            raise DomainError(f"data_order is not a permutation of range({self.n}): {value}")

    @property
    def length(self) -> int:
        """Number of program positions, equal to the number of V iterations."""
        return self.iterations


@attr.s(slots=True, frozen=True, eq=False)
class VState:
    """All registers of V between two iterations.

    ``data`` is stored in slot order; ``slots[s]`` is the circuit qubit in slot ``s``.
    """

    cursor: Cursor = attr.ib(converter=Cursor)
    swap_program: str = attr.ib(validator=[instance_of(str), matches_re(BITS_RE)])
    hadamard_program: str = attr.ib(validator=[instance_of(str), matches_re(BITS_RE)])
    data: Statevector = attr.ib(validator=instance_of(Statevector))
    slots: Tuple[int, ...] = attr.ib(converter=tuple)

    @property
    def n(self) -> int:
        return len(self.slots)


def iterate_v(state: VState) -> VState:
    """Apply one pass of V: phases I to V, in order."""
    n = state.n
    # I
    swap = state.swap_program
    if len(swap) >= 2:
        swap = "".join(apply_sigma(swap))
    # II
    cursor = state.cursor
    if swap and swap[-1] == "0":
        cursor = cursor.cycled()
    # III
    amps = state.data.amps
    slots = state.slots
    if n >= 3:
        sigma = Gate(GateKind.SIGMA_CASCADE, range(n - 1))
        amps = apply_operator(sigma.matrix, sigma.wires, amps, n)
        slots = apply_sigma(slots[: n - 1]) + slots[n - 1 :]
    # IV
    last = (n - 2, n - 1)
    if cursor is Cursor.CYCLE:
        amps = apply_operator(Gate(GateKind.SWAP, last).matrix, last, amps, n)
        slots = slots[: n - 2] + (slots[n - 1], slots[n - 2])
    elif cursor is Cursor.GATE:
        amps = apply_operator(Gate(GateKind.CONTROLLED_S, last).matrix, last, amps, n)
        if state.hadamard_program[:1] == "1":
            amps = apply_operator(Gate(GateKind.H, (n - 1,)).matrix, (n - 1,), amps, n)
    # V
    hadamard = state.hadamard_program
    if len(hadamard) >= 2:
        hadamard = "".join(apply_sigma(hadamard))
    return VState(cursor, swap, hadamard, Statevector(amps), slots)


def initial_state(prog: VProgram, data: Statevector) -> VState:
    """Load ``prog`` and the qubit-ordered ``data`` into the registers of V."""
    if data.num_qubits != prog.n:
        raise DomainError(f"program is for {prog.n} qubits, data has {data.num_qubits}")
    swap = prog.swap_bits[-1:] + prog.swap_bits[:-1]
    tensor = data.amps.reshape((2,) * prog.n)
    amps = np.transpose(tensor, prog.data_order).reshape(-1)
    return VState(Cursor.GATE, swap, prog.hadamard_bits, Statevector(amps), prog.data_order)


def simulate_program(prog: VProgram, data: Statevector) -> Statevector:
    """Run V ``prog.iterations`` times and return the data register in qubit order."""
    state = initial_state(prog, data)
    for _ in range(prog.iterations):
        state = iterate_v(state)
    tensor = state.data.amps.reshape((2,) * prog.n)
    amps = np.transpose(tensor, np.argsort(state.slots)).reshape(-1)
    return Statevector(amps)


def program_length_bound(circuit: Circuit) -> int:
    return 4 * circuit.n * (circuit.t_cs + 2 * circuit.t_h)


@attr.s(slots=True, frozen=True)
class GateBlock:
    """One controlled-S between ``control`` and ``target``, optionally followed by H on target."""

    control: int = attr.ib()
    target: int = attr.ib()
    hadamard: bool = attr.ib(default=False)


def _rotate(items: Sequence[int], count: int) -> List[int]:
    count %= len(items)
    return list(items[count:]) + list(items[:count])


def gate_blocks(circuit: Circuit) -> List[GateBlock]:
    """Group the circuit into controlled-S blocks.

    A Hadamard directly after a controlled-S on one of its qubits rides on that block;
    any other Hadamard on qubit ``k`` becomes three plain blocks and one Hadamard block,
    each between ``k`` and its current lower neighbour.
    """
    n = circuit.n
    blocks: List[GateBlock] = []
    arrangement: Optional[List[int]] = None
    gates = list(circuit.gates)
    index = 0
    while index < len(gates):
        gate = gates[index]
        if gate.kind is GateKind.CONTROLLED_S:
            control, target = gate.wires
            hadamard = False
            following = gates[index + 1] if index + 1 < len(gates) else None
            if (
                following is not None
                and following.kind is GateKind.H
                and following.wires[0] in gate.wires
            ):
                if following.wires[0] == control:
                    control, target = target, control
                hadamard = True
                index += 1
            new = [GateBlock(control, target, hadamard)]
        else:
            (target,) = gate.wires
            if arrangement is None:
                partner = (target + 1) % n
            else:
                partner = arrangement[(arrangement.index(target) + 1) % n]
            new = [GateBlock(partner, target)] * 3 + [GateBlock(partner, target, True)]
        for block in new:
            arrangement = _route(arrangement, block, n)[2]
        blocks.extend(new)
        index += 1
    return blocks


def _first_arrangement(block: GateBlock, n: int) -> List[int]:
    others = sorted(set(range(n)) - {block.control, block.target})
    return [block.control] + others + [block.target]


def _route(
    arrangement: Optional[List[int]], block: GateBlock, n: int
) -> Tuple[int, int, List[int]]:
    """Return ``(a, b, arrangement after the block)``.

    ``a`` full rotations bring the target to the last slot, then ``b + 1`` rotations
    of the first ``n - 1`` slots bring the control to the penultimate slot.
    """
    if arrangement is None:
        start = _first_arrangement(block, n)
        return 0, 0, start[1 : n - 1] + [start[0], start[n - 1]]
    a = (arrangement.index(block.target) + 1) % n or n
    rotated = _rotate(arrangement, a)
    head = rotated[: n - 1]
    b = head.index(block.control) or n - 1
    return a, b, _rotate(head, b + 1) + [rotated[n - 1]]


def compile_circuit(circuit: Circuit) -> VProgram:
    """Compile ``circuit`` into a program of V.

    The first block is a single iteration on a data order chosen so that its
    control and target already sit in the last two slots. Every later block
    reads swap bits ``0 1^(a-1) 0 1^(b-1) 0``: the first ``0`` cycles the cursor
    into whole-register rotation, the second holds the last slot while the
    others rotate, the third fires the gate.

    :raises DomainError: if ``circuit.n < 2``
    """
    if circuit.n < 2:
        raise DomainError(f"controlled-S needs two wires, circuit has {circuit.n}")
    n = circuit.n
    blocks = gate_blocks(circuit)
    if not blocks:
        return VProgram(n, "", "", 0, source=circuit)

    data_order = _first_arrangement(blocks[0], n)
    reads: List[str] = []
    hadamard: List[str] = ["1" if blocks[0].hadamard else "0"]
    arrangement = _route(None, blocks[0], n)[2]
    for block in blocks[1:]:
        a, b, arrangement = _route(arrangement, block, n)
        reads.append("0" + "1" * (a - 1) + "0" + "1" * (b - 1) + "0")
        hadamard.append("0" * (a + b) + ("1" if block.hadamard else "0"))

    swap_bits = "".join(reads) + "1"
    hadamard_bits = "".join(hadamard)
    prog = VProgram(n, swap_bits, hadamard_bits, len(swap_bits), data_order, circuit)
    bound = program_length_bound(circuit)
    assert prog.length <= bound, f"program length {prog.length} exceeds {bound}"
    logger.info(
        "[ringwalk] compiled %d gates into %d blocks, %d iterations (bound %d)",
        circuit.t,
        len(blocks),
        prog.length,
        bound,
    )
    return prog
