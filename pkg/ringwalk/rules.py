"""Transition rules of the ring and the forward trajectory they generate."""
import enum
from functools import lru_cache
import logging
from typing import List, Optional, Sequence, Tuple

import attr
from attr.validators import deep_iterable, in_, instance_of, optional
import numpy as np

from .qcore import Circuit, Gate, GateKind, circuit_unitary
from .ring import (
    LABEL_CHARS,
    Cursor,
    RingConfiguration,
    RingLayout,
    initial_configuration,
    render,
)
from .vprog import VProgram

logger = logging.getLogger(__name__)

DEFAULT_STEP_CAP = 10 ** 6
MOVING = (Cursor.CYCLE, Cursor.HOLDCYCLE, Cursor.GATE)


class IntegrityError(RuntimeError):
    """Raised when the rule table does not give a unique, reversible step."""


class RunawayError(RuntimeError):
    """Raised when a trajectory exceeds its step cap."""


class RuleKind(enum.Enum):
    GENERAL_SWAP = "general-swap"
    START = "start"
    STOP = "stop"
    SECOND_STOP = "second-stop"
    SWAP_REGION_TAIL = "swap-region-tail"
    SWAP_DATA_CYCLE = "swap-data-cycle"
    SWAP_DATA_PASS = "swap-data-pass"
    DATA_TAIL = "data-tail"
    DATA_HADAMARD_BOUNDARY = "data-hadamard-boundary"
    HADAMARD_SWAP_BOUNDARY = "hadamard-swap-boundary"


PROJECTOR_KINDS = frozenset({RuleKind.START, RuleKind.STOP, RuleKind.SECOND_STOP})
STOP_KINDS = frozenset({RuleKind.STOP, RuleKind.SECOND_STOP})


class EventKind(enum.Enum):
    CONTROLLED_S = "CS"
    H = "H"


@attr.s(slots=True, frozen=True)
class GateEvent:
    """A gate applied to the data labels by one step of the ring."""

    kind: EventKind = attr.ib(validator=instance_of(EventKind))
    labels: Tuple[int, ...] = attr.ib(converter=tuple)
    dagger: bool = attr.ib(default=False, validator=instance_of(bool))

    def inverse(self) -> "GateEvent":
        if self.kind is EventKind.H:
            return self
        return GateEvent(self.kind, self.labels, not self.dagger)

    def tag(self) -> str:
        name = self.kind.value + ("dg" if self.dagger else "")
        return " ".join([name, *(LABEL_CHARS[label] for label in self.labels)])


@attr.s(slots=True, frozen=True)
class SitePattern:
    """A cursor on one site, with a required bit or ``None`` for any."""

    cursor: Cursor = attr.ib(converter=Cursor)
    bit: Optional[int] = attr.ib(default=None, validator=optional(in_((0, 1))))

    def matches(self, cursor: Cursor, bit: int) -> bool:
        return cursor == self.cursor and (self.bit is None or bit == self.bit)


@attr.s(slots=True, frozen=True)
class TransitionRule:
    """One term acting on sites ``site`` and ``site + 1``.

    Forward terms move the cursor from ``site`` to ``site + 1``; projector terms
    leave the pattern as it is.
    """

    site: int = attr.ib(validator=instance_of(int))
    kind: RuleKind = attr.ib(validator=instance_of(RuleKind))
    before: Tuple[SitePattern, SitePattern] = attr.ib(
        converter=tuple, validator=deep_iterable(instance_of(SitePattern))
    )
    after: Tuple[Cursor, Cursor] = attr.ib(converter=lambda value: tuple(map(Cursor, value)))
    swap_bits: bool = attr.ib(default=False)
    event: Optional[EventKind] = attr.ib(default=None, validator=optional(instance_of(EventKind)))

    @property
    def is_projector(self) -> bool:
        return self.kind in PROJECTOR_KINDS

    def _pair(self, config: RingConfiguration) -> Tuple[int, int]:
        return self.site, (self.site + 1) % config.layout.size

    def matches(self, config: RingConfiguration) -> bool:
        left, right = self._pair(config)
        return self.before[0].matches(
            config.cursor_at(left), config.bits[left]
        ) and self.before[1].matches(config.cursor_at(right), config.bits[right])

    def matches_after(self, config: RingConfiguration) -> bool:
        """Whether ``config`` is what this forward term produces."""
        left, right = self._pair(config)
        if config.position != right or config.cursor != self.after[1]:
            return False
        bit_left, bit_right = config.bits[left], config.bits[right]
        if self.swap_bits:
            bit_left, bit_right = bit_right, bit_left
        pattern_left, pattern_right = self.before
        return (pattern_left.bit is None or bit_left == pattern_left.bit) and (
            pattern_right.bit is None or bit_right == pattern_right.bit
        )

    def _event(self, config: RingConfiguration) -> Optional[GateEvent]:
        left, right = self._pair(config)
        if self.event is EventKind.CONTROLLED_S:
            return GateEvent(self.event, (config.bits[left], config.bits[right]))
        if self.event is EventKind.H:
            return GateEvent(self.event, (config.bits[left],))
        return None

    def apply(self, config: RingConfiguration) -> Tuple[RingConfiguration, Optional[GateEvent]]:
        left, right = self._pair(config)
        moved = config.moved(right, self.after[1], left if self.swap_bits else None)
        return moved, self._event(config)

    def undo(self, config: RingConfiguration) -> Tuple[RingConfiguration, Optional[GateEvent]]:
        left, _ = self._pair(config)
        previous = config.moved(left, self.before[0].cursor, left if self.swap_bits else None)
        event = self._event(previous)
        return previous, None if event is None else event.inverse()


def _forward(site, kind, cursor, after=None, *, left=None, right=None, swap=True, event=None):
    return TransitionRule(
        site,
        kind,
        (SitePattern(cursor, left), SitePattern(Cursor.EMPTY, right)),
        (Cursor.EMPTY, cursor if after is None else after),
        swap,
        event,
    )


def _projector(site, kind, cursors, bits):
    patterns = (SitePattern(cursors[0], bits[0]), SitePattern(cursors[1], bits[1]))
    return TransitionRule(site, kind, patterns, cursors, False)


def _site_rules(layout: RingLayout, site: int) -> List[TransitionRule]:
    swap_tail = layout.data_start - 2
    boundary = layout.data_start - 1
    data_tail = layout.hadamard_start - 2
    data_end = layout.hadamard_start - 1
    if site == layout.size - 1:
        kind = RuleKind.HADAMARD_SWAP_BOUNDARY
        return [_forward(site, kind, cursor, swap=False) for cursor in MOVING]
    if site == boundary:
        cycle = [
            _forward(site, RuleKind.SWAP_DATA_CYCLE, c, c.cycled(), left=0, swap=False)
            for c in MOVING
        ]
        return cycle + [
            _forward(site, RuleKind.SWAP_DATA_PASS, c, left=1, swap=False) for c in MOVING
        ]
    if site == swap_tail:
        kind = RuleKind.SWAP_REGION_TAIL
        return [
            _forward(site, kind, Cursor.CYCLE),
            _forward(site, kind, Cursor.HOLDCYCLE),
            _forward(site, kind, Cursor.GATE, left=0),
            _projector(site, RuleKind.START, (Cursor.EMPTY, Cursor.GATE), (1, 1)),
            _projector(site, RuleKind.STOP, (Cursor.GATE, Cursor.EMPTY), (1, 0)),
            _projector(site, RuleKind.SECOND_STOP, (Cursor.GATE, Cursor.EMPTY), (1, 1)),
        ]
    if site == data_tail:
        kind = RuleKind.DATA_TAIL
        return [
            _forward(site, kind, Cursor.CYCLE),
            _forward(site, kind, Cursor.HOLDCYCLE, swap=False),
            _forward(site, kind, Cursor.GATE, swap=False, event=EventKind.CONTROLLED_S),
        ]
    if site == data_end:
        kind = RuleKind.DATA_HADAMARD_BOUNDARY
        return [
            _forward(site, kind, Cursor.CYCLE, swap=False),
            _forward(site, kind, Cursor.HOLDCYCLE, swap=False),
            _forward(site, kind, Cursor.GATE, right=0, swap=False),
            _forward(site, kind, Cursor.GATE, right=1, swap=False, event=EventKind.H),
        ]
    return [_forward(site, RuleKind.GENERAL_SWAP, cursor) for cursor in MOVING]


@attr.s(slots=True, frozen=True)
class RuleTable:
    """Rules of a layout, indexed by the site they act from."""

    layout: RingLayout = attr.ib()
    by_site: Tuple[Tuple[TransitionRule, ...], ...] = attr.ib()

    @classmethod
    def for_layout(cls, layout: RingLayout) -> "RuleTable":
        return _rule_table(layout)

    @property
    def rules(self) -> List[TransitionRule]:
        return [rule for rules in self.by_site for rule in rules]

    def forward_matches(self, config: RingConfiguration) -> List[TransitionRule]:
        return [
            rule
            for rule in self.by_site[config.position]
            if not rule.is_projector and rule.matches(config)
        ]

    def backward_matches(self, config: RingConfiguration) -> List[TransitionRule]:
        site = (config.position - 1) % self.layout.size
        return [
            rule
            for rule in self.by_site[site]
            if not rule.is_projector and rule.matches_after(config)
        ]

    def projector_matches(self, config: RingConfiguration) -> List[RuleKind]:
        """Projector kinds matching ``config``; only the active site and its left
        neighbour can carry them."""
        size = self.layout.size
        sites = {config.position, (config.position - 1) % size}
        return [
            rule.kind
            for site in sorted(sites)
            for rule in self.by_site[site]
            if rule.is_projector and rule.matches(config)
        ]


@lru_cache(maxsize=64)
def _rule_table(layout: RingLayout) -> RuleTable:
    return RuleTable(layout, tuple(tuple(_site_rules(layout, site)) for site in range(layout.size)))


def rule_set(layout: RingLayout) -> List[TransitionRule]:
    """Every rule of ``layout``, in site order."""
    return RuleTable.for_layout(layout).rules


def successor(
    config: RingConfiguration,
) -> Optional[Tuple[RingConfiguration, Optional[GateEvent]]]:
    """The unique forward step from ``config``, or ``None`` at a stop state.

    :raises IntegrityError: if more than one forward rule matches
    """
    rules = RuleTable.for_layout(config.layout).forward_matches(config)
    if len(rules) > 1:
        raise IntegrityError(
            f"{len(rules)} forward rules match at site {config.position}: "
            f"{[rule.kind.value for rule in rules]}\n{render(config)}"
        )
    if not rules:
        return None
    logger.debug("[ringwalk] %s at site %d", rules[0].kind.value, config.position)
    return rules[0].apply(config)


def predecessor(
    config: RingConfiguration,
) -> Optional[Tuple[RingConfiguration, Optional[GateEvent]]]:
    """The unique backward step from ``config``, with the inverse gate event.

    :raises IntegrityError: if more than one forward rule leads to ``config``
    """
    rules = RuleTable.for_layout(config.layout).backward_matches(config)
    if len(rules) > 1:
        raise IntegrityError(
            f"{len(rules)} backward rules match at site {config.position}: "
            f"{[rule.kind.value for rule in rules]}\n{render(config)}"
        )
    if not rules:
        return None
    return rules[0].undo(config)


@attr.s(slots=True, frozen=True, eq=False)
class Trajectory:
    """The configurations from the start state to the stop state.

    ``events[t]`` is the gate event of the step into ``steps[t]`` (``None`` for ``t = 0``).
    """

    steps: Tuple[RingConfiguration, ...] = attr.ib(converter=tuple)
    events: Tuple[Optional[GateEvent], ...] = attr.ib(converter=tuple)
    data_order: Tuple[int, ...] = attr.ib(converter=tuple)

    @events.validator
    def _check_events(self, attribute, value):
        if len(value) != len(self.steps):
            raise ValueError(f"{len(value)} events for {len(self.steps)} steps")

    @property
    def tbar(self) -> int:
        return len(self.steps) - 1

    @property
    def gate_events(self) -> List[GateEvent]:
        return [event for event in self.events if event is not None]

    def dump(self) -> str:
        """One record per step: the index with the event tag, then the two glyph lines."""
        lines = []
        for index, (config, event) in enumerate(zip(self.steps, self.events)):
            lines.append(str(index) if event is None else f"{index} {event.tag()}")
            lines.append(render(config))
        return "\n".join(lines) + "\n"

    def circuit(self) -> Circuit:
        return events_to_circuit(self.gate_events, len(self.data_order), self.data_order)

    def unitary(self) -> np.ndarray:
        return circuit_unitary(self.circuit())


def _program_weights(config: RingConfiguration) -> Tuple[int, int]:
    layout = config.layout
    return (
        config.bits[: layout.data_start].count(1),
        config.bits[layout.hadamard_start :].count(1),
    )


def enumerate_trajectory(prog: VProgram, cap: int = DEFAULT_STEP_CAP) -> Trajectory:
    """Follow ``successor`` from the start state to the stop state.

    Every step is checked to be reversible and to conserve the program bits.

    :raises RunawayError: if more than ``cap`` steps are taken
    :raises IntegrityError: if a step is not unique or reversible, or the walk
        ends without a stop pattern
    """
    config = initial_configuration(prog)
    table = RuleTable.for_layout(config.layout)
    if RuleKind.START not in table.projector_matches(config):
        raise IntegrityError(f"start state does not match the start pattern\n{render(config)}")
    weights = _program_weights(config)
    steps: List[RingConfiguration] = [config]
    events: List[Optional[GateEvent]] = [None]
    while True:
        step = successor(config)
        if step is None:
            break
        if len(steps) > cap:
            raise RunawayError(f"trajectory exceeded {cap} steps")
        following, event = step
        back = predecessor(following)
        if back is None or back[0] != config:
            raise IntegrityError(f"step {len(steps)} is not reversible\n{render(config)}")
        if _program_weights(following) != weights:
            raise IntegrityError(f"step {len(steps)} changed the program bits")
        steps.append(following)
        events.append(event)
        config = following
    if not STOP_KINDS.intersection(table.projector_matches(config)):
        raise IntegrityError(f"trajectory ended without a stop pattern\n{render(config)}")
    logger.info("[ringwalk] trajectory closed after %d steps", len(steps) - 1)
    return Trajectory(steps, events, prog.data_order)


def events_to_circuit(
    events: Sequence[GateEvent], n: int, data_order: Sequence[int]
) -> Circuit:
    """Translate label events into gates on circuit qubits.

    Label ``l`` is the qubit ``data_order[l]``; an inverse controlled-S is
    written as three controlled-S gates.
    """
    gates = []
    for event in events:
        wires = tuple(data_order[label] for label in event.labels)
        if event.kind is EventKind.H:
            gates.append(Gate(GateKind.H, wires))
        else:
            gates.extend([Gate(GateKind.CONTROLLED_S, wires)] * (3 if event.dagger else 1))
    return Circuit(n, gates)


def apply_events(
    events: Sequence[GateEvent], n: int, data_order: Sequence[int]
) -> np.ndarray:
    """Unitary of the event sequence, in circuit-qubit order."""
    return circuit_unitary(events_to_circuit(events, n, data_order))


def compare_dumps(obtained: str, expected: str) -> Tuple[int, int]:
    """Count matching step records between two trajectory dumps.

    :returns: ``(matched, total)``, ``total`` being the expected record count
    """

    def records(text: str) -> List[Tuple[str, ...]]:
        lines = text.rstrip("\n").split("\n")
        return [tuple(lines[index : index + 3]) for index in range(0, len(lines), 3)]

    got, want = records(obtained), records(expected)
    matched = sum(1 for left, right in zip(got, want) if left == right)
    return matched, len(want)
