"""The ring of eight-state sites: layout, classical configurations and their text form.

A site carries a cursor (``.``, ``c``, ``h``, ``g``) over either a program bit
(``0``/``1``) or a data label (``a``-``z``). The text form writes the cursor line
above the bit line, with ``|`` at the swap/data and data/Hadamard boundaries::

    ....g|...|....
    00011|abc|1000
"""
import enum
import string
from typing import Dict, Optional, Sequence, Tuple

import attr
from attr.validators import instance_of

from .qcore import DomainError
from .vprog import Cursor, VProgram

__all__ = (
    "Cursor",
    "DataLabel",
    "Glyph",
    "GlyphParseError",
    "Region",
    "RingConfiguration",
    "RingLayout",
    "build_layout",
    "initial_configuration",
    "parse",
    "render",
)

BOUNDARY = "|"
CURSOR_CHARS: Dict[Cursor, str] = {
    Cursor.EMPTY: ".",
    Cursor.CYCLE: "c",
    Cursor.HOLDCYCLE: "h",
    Cursor.GATE: "g",
}
CHAR_CURSORS = {char: cursor for cursor, char in CURSOR_CHARS.items()}
LABEL_CHARS = string.ascii_lowercase


class DataLabel(int):
    """The identity of a data qubit riding in a data-region cell."""

    def __repr__(self) -> str:
        return f"DataLabel({int(self)})"


class Region(enum.Enum):
    SWAP = "swap"
    DATA = "data"
    HADAMARD = "hadamard"


class GlyphParseError(ValueError):
    """Raised when a ring text form cannot be read.

    ``position`` is the 1-based ``(line, column)`` of the offending character.
    """

    def __init__(self, message: str, position: Tuple[int, int]):
        super().__init__(f"{message} @ 'line {position[0]}, column {position[1]}'")
        self.position = position


@attr.s(slots=True, frozen=True)
class Glyph:
    cursor: Cursor = attr.ib(converter=Cursor)
    bit: int = attr.ib(validator=instance_of(int))

    @property
    def is_data(self) -> bool:
        return isinstance(self.bit, DataLabel)


def _at_least(minimum: int):
    def _check(instance, attribute, value):
        if value < minimum:
            raise DomainError(f"{attribute.name} must be at least {minimum}, got {value}")

    return _check


@attr.s(slots=True, frozen=True)
class RingLayout:
    """Region sizes around the ring, in the order swap, data, Hadamard."""

    swap_len: int = attr.ib(validator=[instance_of(int), _at_least(2)])
    data_len: int = attr.ib(validator=[instance_of(int), _at_least(2)])
    hadamard_len: int = attr.ib(validator=[instance_of(int), _at_least(1)])

    @property
    def size(self) -> int:
        return self.swap_len + self.data_len + self.hadamard_len

    @property
    def data_start(self) -> int:
        return self.swap_len

    @property
    def hadamard_start(self) -> int:
        return self.swap_len + self.data_len

    def region(self, site: int) -> Region:
        if not 0 <= site < self.size:
            raise DomainError(f"site {site} outside a ring of {self.size}")
        if site < self.data_start:
            return Region.SWAP
        if site < self.hadamard_start:
            return Region.DATA
        return Region.HADAMARD


def _check_bits(instance: "RingConfiguration", attribute, value: Tuple[int, ...]):
    layout = instance.layout
    if len(value) != layout.size:
        raise DomainError(f"expected {layout.size} bits, got {len(value)}")
    data = value[layout.data_start : layout.hadamard_start]
    program = value[: layout.data_start] + value[layout.hadamard_start :]
    if not all(isinstance(label, DataLabel) for label in data):
        raise DomainError("data sites must carry data labels")
    if sorted(data) != list(range(layout.data_len)):
        raise DomainError(f"data labels are not a permutation of range({layout.data_len})")
    if set(map(type, program)) - {int} or set(program) - {0, 1}:
        raise DomainError("program sites must carry plain 0/1 bits")


@attr.s(slots=True, frozen=True)
class RingConfiguration:
    """A classical ring configuration with its single active cursor."""

    layout: RingLayout = attr.ib(validator=instance_of(RingLayout))
    position: int = attr.ib(validator=instance_of(int))
    cursor: Cursor = attr.ib(converter=Cursor)
    bits: Tuple[int, ...] = attr.ib(converter=tuple, validator=_check_bits)

    @position.validator
    def _check_position(self, attribute, value):
        if not 0 <= value < self.layout.size:
            raise DomainError(f"cursor position {value} outside a ring of {self.layout.size}")

    @cursor.validator
    def _check_cursor(self, attribute, value):
        if value is Cursor.EMPTY:
            raise DomainError("the active site cannot hold an empty cursor")

    @property
    def active(self) -> int:
        return self.position

    def cursor_at(self, site: int) -> Cursor:
        return self.cursor if site == self.position else Cursor.EMPTY

    def glyph(self, site: int) -> Glyph:
        return Glyph(self.cursor_at(site), self.bits[site])

    @property
    def glyphs(self) -> Tuple[Glyph, ...]:
        return tuple(self.glyph(site) for site in range(self.layout.size))

    @property
    def data_labels(self) -> Tuple[DataLabel, ...]:
        """Labels in data-site order."""
        return self.bits[self.layout.data_start : self.layout.hadamard_start]  # type: ignore

    @property
    def data_perm(self) -> Tuple[int, ...]:
        """The data site holding each label."""
        start = self.layout.data_start
        sites = [0] * self.layout.data_len
        for offset, label in enumerate(self.data_labels):
            sites[label] = start + offset
        return tuple(sites)

    @property
    def swap_bits(self) -> str:
        return "".join(map(str, self.bits[: self.layout.data_start]))

    @property
    def hadamard_bits(self) -> str:
        return "".join(map(str, self.bits[self.layout.hadamard_start :]))

    def moved(self, position: int, cursor: Cursor, swap: Optional[int] = None):
        """Return the configuration with the cursor moved, optionally swapping the bits
        at ``swap`` and ``swap + 1``."""
        bits = self.bits
        if swap is not None:
            other = (swap + 1) % self.layout.size
            listed = list(bits)
            listed[swap], listed[other] = listed[other], listed[swap]
            bits = tuple(listed)
        return RingConfiguration(self.layout, position, cursor, bits)


def build_layout(prog: VProgram) -> RingLayout:
    """Ring layout for ``prog``: the swap region holds one more site than the program."""
    if prog.n < 2:
        raise DomainError(f"ring needs at least 2 data sites, got {prog.n}")
    if prog.length == 0:
        raise DomainError("an empty program has no Hadamard region to place on the ring")
    return RingLayout(len(prog.swap_bits) + 1, prog.n, len(prog.hadamard_bits))


def initial_configuration(
    prog: VProgram, labels: Optional[Sequence[int]] = None
) -> RingConfiguration:
    """The start state: ``g`` over the last swap site, program bits with a trailing 1."""
    layout = build_layout(prog)
    if labels is None:
        labels = range(prog.n)
    bits = (
        [int(bit) for bit in prog.swap_bits]
        + [1]
        + [DataLabel(label) for label in labels]
        + [int(bit) for bit in prog.hadamard_bits]
    )
    return RingConfiguration(layout, layout.data_start - 1, Cursor.GATE, bits)


def render(config: RingConfiguration) -> str:
    """Two-line text form of ``config``."""
    layout = config.layout
    if layout.data_len > len(LABEL_CHARS):
        raise DomainError(f"cannot render more than {len(LABEL_CHARS)} data labels")
    cursors, bits = [], []
    for site in range(layout.size):
        if site in (layout.data_start, layout.hadamard_start):
            cursors.append(BOUNDARY)
            bits.append(BOUNDARY)
        cursors.append(CURSOR_CHARS[config.cursor_at(site)])
        bit = config.bits[site]
        bits.append(LABEL_CHARS[bit] if isinstance(bit, DataLabel) else str(bit))
    return "".join(cursors) + "\n" + "".join(bits)


def parse(text: str) -> RingConfiguration:
    """Read the two-line text form back into a configuration.

    :raises GlyphParseError: on an unknown character, boundaries that differ
        between the lines, anything but one active cursor, or bad data labels
    """
    lines = text[:-1].split("\n") if text.endswith("\n") else text.split("\n")
    if len(lines) != 2:
        raise GlyphParseError(f"expected 2 lines, got {len(lines)}", (len(lines), 1))
    cursor_line, bit_line = lines
    bars = [col for col, char in enumerate(cursor_line) if char == BOUNDARY]
    bit_bars = [col for col, char in enumerate(bit_line) if char == BOUNDARY]
    if len(cursor_line) != len(bit_line) or bars != bit_bars:
        mismatch = next(
            (
                col
                for col in range(max(len(cursor_line), len(bit_line)))
                if (col in bars) != (col in bit_bars)
            ),
            min(len(cursor_line), len(bit_line)),
        )
        raise GlyphParseError("boundaries do not line up", (2, mismatch + 1))
    if len(bars) != 2:
        raise GlyphParseError(f"expected 2 boundaries, got {len(bars)}", (1, 1))

    columns = [col for col in range(len(cursor_line)) if col not in bars]
    swap_len = bars[0]
    data_len = bars[1] - bars[0] - 1
    hadamard_len = len(cursor_line) - bars[1] - 1
    try:
        layout = RingLayout(swap_len, data_len, hadamard_len)
    except DomainError as exc:
        raise GlyphParseError(f"bad region sizes: {exc}", (1, 1)) from exc

    active = []
    bits = []
    for site, col in enumerate(columns):
        char = cursor_line[col]
        if char not in CHAR_CURSORS:
            raise GlyphParseError(f"unknown cursor character {char!r}", (1, col + 1))
        if CHAR_CURSORS[char] is not Cursor.EMPTY:
            active.append((site, col, CHAR_CURSORS[char]))
        char = bit_line[col]
        if layout.region(site) is Region.DATA:
            if char not in LABEL_CHARS:
                raise GlyphParseError(f"expected a data label, got {char!r}", (2, col + 1))
            bits.append(DataLabel(LABEL_CHARS.index(char)))
        elif char in "01":
            bits.append(int(char))
        else:
            raise GlyphParseError(f"expected a program bit, got {char!r}", (2, col + 1))
    if len(active) != 1:
        col = active[1][1] if len(active) > 1 else 0
        raise GlyphParseError(f"expected 1 active cursor, got {len(active)}", (1, col + 1))

    site, _, cursor = active[0]
    try:
        return RingConfiguration(layout, site, cursor, bits)
    except DomainError as exc:
        raise GlyphParseError(str(exc), (2, bars[0] + 2)) from exc
