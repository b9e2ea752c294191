"""The ring Hamiltonian on its reachable basis, and the penalty Hamiltonian of the start state."""
from collections import deque
from concurrent.futures import ThreadPoolExecutor
import logging
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import attr
from attr.validators import instance_of, matches_re
import numpy as np
from scipy.sparse import csr_matrix

from .manifest import scan_threads
from .qcore import CapacityError, DomainError, Gate, GateKind, apply_operator
from .ring import Cursor, DataLabel, RingConfiguration, RingLayout, initial_configuration
from .rules import (
    EventKind,
    GateEvent,
    RuleTable,
    Trajectory,
    enumerate_trajectory,
    predecessor,
    successor,
)
from .vprog import VProgram

logger = logging.getLogger(__name__)

EQUIV_TOL = 1e-10
DEFAULT_BASIS_CAP = 1 << 20
GLYPH_STATES = 8
EXHAUSTIVE_SITE_LIMIT = 8
SCAN_CHUNK = 1 << 18
INV_SQRT2 = 1 / np.sqrt(2)


class EquivalenceError(AssertionError):
    """Raised when the restricted Hamiltonian differs from the line Hamiltonian."""

    def __init__(self, message: str, pair: Tuple[int, int]):
        super().__init__(message)
        self.pair = pair


@attr.s(slots=True, frozen=True)
class BasisState:
    """A ring configuration with a computational basis string on the data labels.

    ``data_bits[l]`` is the bit carried by label ``l``.
    """

    config: RingConfiguration = attr.ib(validator=instance_of(RingConfiguration))
    data_bits: str = attr.ib(validator=[instance_of(str), matches_re(r"^[01]+$")])

    @data_bits.validator
    def _check_length(self, attribute, value):
        if len(value) != self.config.layout.data_len:
            raise DomainError(
                f"expected {self.config.layout.data_len} data bits, got {len(value)}"
            )


def event_branches(event: Optional[GateEvent], bits: str) -> List[Tuple[str, complex]]:
    """Image of the basis string ``bits`` under the event's gate, as (string, amplitude)."""
    if event is None:
        return [(bits, 1.0)]
    if event.kind is EventKind.CONTROLLED_S:
        left, right = event.labels
        if bits[left] == bits[right] == "1":
            return [(bits, -1j if event.dagger else 1j)]
        return [(bits, 1.0)]
    (label,) = event.labels
    flipped = bits[:label] + ("0" if bits[label] == "1" else "1") + bits[label + 1 :]
    return [(flipped, INV_SQRT2), (bits, -INV_SQRT2 if bits[label] == "1" else INV_SQRT2)]


def _format_float(value: float) -> str:
    text = f"{value:.12g}"
    return "0" if text == "-0" else text


@attr.s(slots=True, frozen=True, eq=False)
class SparseHamiltonian:
    """Entries of a Hamiltonian over an indexed basis, sorted by ``(row, col)``."""

    basis: Tuple[BasisState, ...] = attr.ib(converter=tuple)
    entries: Tuple[Tuple[int, int, complex], ...] = attr.ib(
        converter=lambda value: tuple(sorted(value, key=lambda entry: entry[:2]))
    )

    @property
    def dim(self) -> int:
        return len(self.basis)

    def to_scipy(self) -> csr_matrix:
        rows = [entry[0] for entry in self.entries]
        cols = [entry[1] for entry in self.entries]
        data = [entry[2] for entry in self.entries]
        return csr_matrix((data, (rows, cols)), shape=(self.dim, self.dim), dtype=complex)

    def to_coo_text(self) -> str:
        """One ``row col re im`` line per entry."""
        return "".join(
            f"{row} {col} {_format_float(value.real)} {_format_float(value.imag)}\n"
            for row, col, value in self.entries
        )

    def is_hermitian(self, atol: float = EQUIV_TOL) -> bool:
        lookup = {(row, col): value for row, col, value in self.entries}
        return all(
            abs(lookup.get((col, row), 0) - np.conj(value)) <= atol
            for (row, col), value in lookup.items()
        )


def build_restricted(prog: VProgram, cap: int = DEFAULT_BASIS_CAP) -> SparseHamiltonian:
    """Close the start configurations under forward and backward rules and collect
    the Hamiltonian entries.

    Hopping entries are recorded once per forward edge, with the conjugate on the
    transposed position; each matching start or stop projector adds 1 on the diagonal.

    :raises CapacityError: if the basis grows past ``cap`` states
    """
    start = initial_configuration(prog)
    table = RuleTable.for_layout(start.layout)
    index: Dict[BasisState, int] = {}
    queue: deque = deque()

    def add(state: BasisState) -> int:
        if state not in index:
            if len(index) >= cap:
                raise CapacityError(f"reachable basis exceeds {cap} states")
            index[state] = len(index)
            queue.append(state)
        return index[state]

    for value in range(2 ** prog.n):
        add(BasisState(start, format(value, f"0{prog.n}b")))

    forward: Dict[RingConfiguration, object] = {}
    backward: Dict[RingConfiguration, object] = {}
    entries: Dict[Tuple[int, int], complex] = {}
    while queue:
        state = queue.popleft()
        row = index[state]
        config = state.config
        for _ in table.projector_matches(config):
            entries[(row, row)] = entries.get((row, row), 0) + 1.0
        if config not in forward:
            forward[config] = successor(config)
        step = forward[config]
        if step is not None:
            following, event = step  # type: ignore
            for bits, amp in event_branches(event, state.data_bits):
                col = add(BasisState(following, bits))
                entries[(col, row)] = entries.get((col, row), 0) + amp
                entries[(row, col)] = entries.get((row, col), 0) + np.conj(amp)
        if config not in backward:
            backward[config] = predecessor(config)
        back = backward[config]
        if back is not None:
            previous, inverse = back  # type: ignore
            for bits, _ in event_branches(inverse, state.data_bits):
                add(BasisState(previous, bits))

    basis = sorted(index, key=index.__getitem__)
    logger.info(
        "[ringwalk] reachable basis closed at %d states (%d configurations)",
        len(basis),
        len(forward),
    )
    return SparseHamiltonian(
        basis, [(row, col, complex(value)) for (row, col), value in entries.items()]
    )


def _event_matrix(event: GateEvent) -> np.ndarray:
    if event.kind is EventKind.H:
        return Gate(GateKind.H, event.labels).matrix
    matrix = Gate(GateKind.CONTROLLED_S, event.labels).matrix
    return matrix.conj().T if event.dagger else matrix


@attr.s(slots=True, frozen=True)
class EquivalenceReport:
    tbar: int = attr.ib()
    data_qubits: int = attr.ib()
    basis_size: int = attr.ib()
    max_deviation: float = attr.ib()
    worst_pair: Tuple[int, int] = attr.ib()


def check_effective_equivalence(
    prog: VProgram,
    tol: float = EQUIV_TOL,
    *,
    hamiltonian: Optional[SparseHamiltonian] = None,
    trajectory: Optional[Trajectory] = None,
) -> EquivalenceReport:
    """Compare the restricted Hamiltonian with the line Hamiltonian tensored with identity.

    In the basis ``|psi_t> (x) U_t|x>``, with ``U_t`` the product of the gate events
    up to step ``t``, neighbouring steps must couple through the identity, the first
    and last steps must carry an identity diagonal, and nothing else may appear.

    :raises EquivalenceError: if the largest deviation exceeds ``tol``
    """
    trajectory = trajectory or enumerate_trajectory(prog)
    hamiltonian = hamiltonian or build_restricted(prog)
    n = prog.n
    dim = 2 ** n
    tbar = trajectory.tbar
    position = {config: step for step, config in enumerate(trajectory.steps)}

    blocks: Dict[Tuple[int, int], np.ndarray] = {}
    for row, col, value in hamiltonian.entries:
        row_state, col_state = hamiltonian.basis[row], hamiltonian.basis[col]
        if row_state.config not in position or col_state.config not in position:
            raise EquivalenceError(
                f"basis state off the trajectory at entry ({row}, {col})", (row, col)
            )
        pair = (position[row_state.config], position[col_state.config])
        block = blocks.setdefault(pair, np.zeros((dim, dim), dtype=complex))
        block[int(row_state.data_bits, 2), int(col_state.data_bits, 2)] += value

    identity = np.eye(dim, dtype=complex)
    worst, worst_pair = 0.0, (0, 0)

    def record(pair: Tuple[int, int], deviation: float):
        nonlocal worst, worst_pair
        if deviation > worst:
            worst, worst_pair = deviation, pair

    for pair, block in blocks.items():
        if abs(pair[0] - pair[1]) > 1 or (pair[0] == pair[1] and 0 < pair[0] < tbar):
            record(pair, float(np.max(np.abs(block))))

    previous = identity
    current = identity
    for step in range(tbar + 1):
        if step:
            event = trajectory.events[step]
            previous = current
            if event is not None:
                current = apply_operator(_event_matrix(event), event.labels, current, n)
            for pair, left, right in (
                ((step, step - 1), current, previous),
                ((step - 1, step), previous, current),
            ):
                block = blocks.get(pair, np.zeros((dim, dim)))
                rotated = left.conj().T @ block @ right
                record(pair, float(np.max(np.abs(rotated - identity))))
        if step in (0, tbar):
            block = blocks.get((step, step), np.zeros((dim, dim)))
            rotated = current.conj().T @ block @ current
            record((step, step), float(np.max(np.abs(rotated - identity))))

    report = EquivalenceReport(tbar, n, hamiltonian.dim, worst, worst_pair)
    logger.info(
        "[ringwalk] restricted Hamiltonian deviates by %.3g (worst block %s)", worst, worst_pair
    )
    if worst > tol:
        raise EquivalenceError(
            f"restricted Hamiltonian deviates by {worst:.3g} at steps {worst_pair}", worst_pair
        )
    return report


def glyph_index(cursor: Cursor, bit: int) -> int:
    """Index of an eight-state glyph: the cursor register followed by the bit."""
    return int(cursor) * 2 + int(bit)


def decode_glyph(index: int) -> Tuple[Cursor, int]:
    return Cursor(index // 2), index % 2


@attr.s(slots=True, frozen=True)
class PenaltyTerm:
    """A projector on the sites ``(left, left + 1)`` onto the ``forbidden`` glyph pairs."""

    sites: Tuple[int, int] = attr.ib(converter=tuple)
    forbidden: FrozenSet[Tuple[int, int]] = attr.ib(converter=frozenset)
    anchor: bool = attr.ib(default=False)

    def penalty(self, glyphs: Sequence[int]) -> int:
        return int((glyphs[self.sites[0]], glyphs[self.sites[1]]) in self.forbidden)

    def table(self) -> np.ndarray:
        """Penalty of every glyph pair as an 8x8 0/1 array."""
        out = np.zeros((GLYPH_STATES, GLYPH_STATES), dtype=np.int64)
        for left, right in self.forbidden:
            out[left, right] = 1
        return out


@attr.s(slots=True, frozen=True)
class PenaltyHamiltonian:
    """Diagonal penalty whose zero-energy glyph configuration should be the start state."""

    layout: RingLayout = attr.ib(validator=instance_of(RingLayout))
    desired: Tuple[int, ...] = attr.ib(converter=tuple)
    terms: Tuple[PenaltyTerm, ...] = attr.ib(converter=tuple)

    def penalty(self, glyphs: Sequence[int]) -> int:
        return sum(term.penalty(glyphs) for term in self.terms)

    def without_anchor(self) -> "PenaltyHamiltonian":
        return attr.evolve(self, terms=[term for term in self.terms if not term.anchor])

    def allowed_matrices(self) -> List[np.ndarray]:
        """Per edge ``(L, L + 1)``, the 0/1 matrix of glyph pairs with no penalty."""
        size = self.layout.size
        allowed = [np.ones((GLYPH_STATES, GLYPH_STATES), dtype=object) for _ in range(size)]
        for term in self.terms:
            left, right = term.sites
            if right != (left + 1) % size:
                raise DomainError(f"penalty term on non-adjacent sites {term.sites}")
            allowed[left] = allowed[left] * (1 - term.table()).astype(object)
        return allowed


def configuration_glyphs(config: RingConfiguration, data_bits: str) -> Tuple[int, ...]:
    """Glyph indices of ``config`` with ``data_bits[l]`` on the site of label ``l``."""
    glyphs = []
    for site, bit in enumerate(config.bits):
        if isinstance(bit, DataLabel):
            bit = int(data_bits[bit])
        glyphs.append(glyph_index(config.cursor_at(site), bit))
    return tuple(glyphs)


def build_hinit(prog: VProgram, data_input: str) -> PenaltyHamiltonian:
    """Penalty Hamiltonian pinning the start state with ``data_input`` on the data qubits.

    ``data_input[q]`` is the bit of circuit qubit ``q``. The anchor term penalises every
    pattern on the last two swap sites but the start pattern; each chained term then
    penalises a wrong left glyph next to a correct right glyph, walking from the anchor
    down the swap region and on around through the Hadamard and data regions.

    :raises DomainError: if ``data_input`` is not an ``n``-bit string
    """
    if len(data_input) != prog.n or set(data_input) - {"0", "1"}:
        raise DomainError(f"data input must be a {prog.n}-bit string, got {data_input!r}")
    start = initial_configuration(prog)
    layout = start.layout
    label_bits = "".join(data_input[qubit] for qubit in prog.data_order)
    desired = configuration_glyphs(start, label_bits)

    size, swap_len = layout.size, layout.swap_len
    pairs = [(a, b) for a in range(GLYPH_STATES) for b in range(GLYPH_STATES)]
    anchor = (swap_len - 2, swap_len - 1)
    start_pair = (desired[anchor[0]], desired[anchor[1]])
    terms = [PenaltyTerm(anchor, [pair for pair in pairs if pair != start_pair], True)]
    for left in list(range(swap_len - 3, -1, -1)) + list(range(size - 1, swap_len - 1, -1)):
        right = (left + 1) % size
        wrong = [glyph for glyph in range(GLYPH_STATES) if glyph != desired[left]]
        terms.append(PenaltyTerm((left, right), [(glyph, desired[right]) for glyph in wrong]))
    return PenaltyHamiltonian(layout, desired, terms)


@attr.s(slots=True, frozen=True)
class GroundCount:
    count: int = attr.ib()
    witness: Optional[Tuple[int, ...]] = attr.ib()
    method: str = attr.ib()


def _scan_chunk(
    h: PenaltyHamiltonian, tables: List[Tuple[Tuple[int, int], np.ndarray]], start: int, stop: int
) -> Tuple[int, Optional[int]]:
    size = h.layout.size
    indices = np.arange(start, stop, dtype=np.int64)
    digits = [(indices // GLYPH_STATES ** (size - 1 - site)) % GLYPH_STATES for site in range(size)]
    penalty = np.zeros(indices.size, dtype=np.int64)
    for (left, right), table in tables:
        penalty += table[digits[left], digits[right]]
    zero = np.flatnonzero(penalty == 0)
    return int(zero.size), (int(indices[zero[0]]) if zero.size else None)


def _count_exhaustive(h: PenaltyHamiltonian, threads: int) -> GroundCount:
    size = h.layout.size
    if size > EXHAUSTIVE_SITE_LIMIT:
        raise CapacityError(f"exhaustive scan limited to {EXHAUSTIVE_SITE_LIMIT} sites, got {size}")
    total = GLYPH_STATES ** size
    tables = [(term.sites, term.table()) for term in h.terms]
    starts = list(range(0, total, SCAN_CHUNK))
    logger.info(
        "[ringwalk] scanning %d configurations in %d chunks on %d threads",
        total,
        len(starts),
        threads,
    )
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(
            pool.map(
                lambda start: _scan_chunk(h, tables, start, min(start + SCAN_CHUNK, total)),
                starts,
            )
        )
    count = sum(result[0] for result in results)
    firsts = [result[1] for result in results if result[1] is not None]
    witness = None
    if firsts:
        first = min(firsts)
        witness = tuple(
            (first // GLYPH_STATES ** (size - 1 - site)) % GLYPH_STATES for site in range(size)
        )
    return GroundCount(count, witness, "exhaustive")


def _count_transfer(h: PenaltyHamiltonian) -> GroundCount:
    matrices = h.allowed_matrices()
    size = len(matrices)
    suffix = [np.identity(GLYPH_STATES, dtype=np.int64).astype(object)]
    for matrix in reversed(matrices):
        suffix.insert(0, matrix.dot(suffix[0]))
    count = int(np.trace(suffix[0]))
    if not count:
        return GroundCount(0, None, "transfer-matrix")
    first = next(glyph for glyph in range(GLYPH_STATES) if suffix[0][glyph, glyph] > 0)
    witness = [first]
    for site in range(1, size):
        witness.append(
            next(
                glyph
                for glyph in range(GLYPH_STATES)
                if matrices[site - 1][witness[-1], glyph] > 0 and suffix[site][glyph, first] > 0
            )
        )
    return GroundCount(count, tuple(witness), "transfer-matrix")


def count_ground_configs(
    h: PenaltyHamiltonian, method: str = "auto", threads: Optional[int] = None
) -> GroundCount:
    """Count zero-penalty glyph configurations, with the lexicographically first one.

    :param method: ``exhaustive`` (rings of up to 8 sites), ``transfer-matrix``,
        or ``auto`` to take the exhaustive scan whenever it applies
    """
    if method == "auto":
        method = "exhaustive" if h.layout.size <= EXHAUSTIVE_SITE_LIMIT else "transfer-matrix"
    if method == "exhaustive":
        return _count_exhaustive(h, threads or scan_threads())
    if method == "transfer-matrix":
        return _count_transfer(h)
    raise DomainError(f"unknown counting method: {method!r}")
