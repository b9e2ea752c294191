"""Line Hamiltonians on the trajectory basis: walks, Bessel references and adiabatic runs."""
from concurrent.futures import ThreadPoolExecutor
import enum
import logging
import math
from typing import List, Optional, Sequence, Tuple, Union

import attr
from attr.validators import instance_of, optional
import numpy as np
from scipy.linalg import eigh
from scipy.optimize import minimize_scalar

from .manifest import scan_threads
from .qcore import WALK_LINE, CapacityError, DomainError, Statevector

logger = logging.getLogger(__name__)

DEGENERACY_TOL = 1e-12
MAX_LINE_DIM = 20000
RESOLUTION_LIMIT = 0.1
MIN_PEAK_SAMPLES = 100
MIN_GAP_POINTS = 11
PEAK_XATOL = 1e-6
PEAK_TIE_RTOL = 1e-3
BESSEL_MAX_ARG = 1e4
ADIABATIC_CHUNK = 4096

AMPLITUDE_HEADER = "t,abs_amp,re,im"
GAP_HEADER = "s,gap"


class DegeneracyError(ArithmeticError):
    """Raised when the ground state of an interpolated Hamiltonian is degenerate."""


class ResolutionError(ValueError):
    """Raised when an adiabatic run takes steps too long for the Hamiltonian's norm."""


class Variant(str, enum.Enum):
    START_STOP = "start-stop"
    DUMMY_PADDING = "dummy-padding"
    RUNWAY_LANDING = "runway-landing"
    PERFECT_TRANSFER = "perfect-transfer"


class TransferForm(str, enum.Enum):
    STANDARD = "standard"
    PAPER_LITERAL = "paper-literal"


def format_number(value: float) -> str:
    text = f"{value:.12g}"
    return "0" if text == "-0" else text


def default_pad(tbar: int) -> int:
    """Pad length ``ceil(tbar ** (2/3))``."""
    return math.ceil(tbar ** (2 / 3) - 1e-9)


def _frozen(value) -> np.ndarray:
    array = np.array(value, dtype=float)
    array.setflags(write=False)
    return array


@attr.s(slots=True, frozen=True, eq=False)
class LineHamiltonian:
    """Tridiagonal real symmetric Hamiltonian on the trajectory line.

    ``start_site`` holds the start state and ``stop_site`` the last computation step;
    padded variants add sites around them.
    """

    tbar: int = attr.ib(validator=instance_of(int))
    variant: Variant = attr.ib(converter=Variant)
    matrix: np.ndarray = attr.ib(converter=_frozen)
    pad: int = attr.ib(default=0, validator=instance_of(int))
    form: Optional[TransferForm] = attr.ib(
        default=None, validator=optional(instance_of(TransferForm))
    )
    start_site: int = attr.ib(default=0, validator=instance_of(int))
    stop_site: int = attr.ib(
        default=attr.Factory(lambda self: self.tbar, takes_self=True),
        validator=instance_of(int),
    )

    @matrix.validator
    def _check_matrix(self, attribute, value):
        if value.ndim != 2 or value.shape[0] != value.shape[1]:
            raise DomainError(f"line Hamiltonian must be square, got shape {value.shape}")
        if not np.array_equal(value, value.T):
            raise DomainError("line Hamiltonian must be symmetric")
        if np.any(np.triu(value, 2)):
            raise DomainError("line Hamiltonian must be tridiagonal")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def couplings(self) -> np.ndarray:
        return np.diag(self.matrix, 1)


def _tridiagonal(diagonal: Sequence[float], hops: Sequence[float]) -> np.ndarray:
    return np.diag(np.asarray(diagonal, dtype=float)) + np.diag(hops, 1) + np.diag(hops, -1)


def transfer_couplings(tbar: int, form: TransferForm = TransferForm.STANDARD) -> np.ndarray:
    """Coupling of hop ``t`` (between sites ``t - 1`` and ``t``), for ``t = 1..tbar``."""
    hops = np.arange(1, tbar + 1, dtype=float)
    if form is TransferForm.STANDARD:
        return np.sqrt(hops * (tbar + 1 - hops))
    return np.sqrt(tbar * (tbar - hops))


def build_line(
    tbar: int,
    variant: Union[Variant, str] = Variant.START_STOP,
    pad: Optional[int] = None,
    form: Union[TransferForm, str] = TransferForm.STANDARD,
) -> LineHamiltonian:
    """Build the line Hamiltonian of a ``tbar``-step trajectory.

    :param pad: dummy or landing sites for the padded variants,
        ``ceil(tbar ** (2/3))`` when omitted
    :raises DomainError: if ``tbar < 1`` or ``pad < 0``
    """
    variant, form = Variant(variant), TransferForm(form)
    if tbar < 1:
        raise DomainError(f"a line needs at least one hop, got tbar={tbar}")
    if variant is Variant.START_STOP:
        diagonal = np.zeros(tbar + 1)
        diagonal[[0, -1]] = 1
        return LineHamiltonian(tbar, variant, _tridiagonal(diagonal, np.ones(tbar)))
    if variant is Variant.PERFECT_TRANSFER:
        hops = transfer_couplings(tbar, form)
        dead = np.flatnonzero(hops == 0)
        if dead.size:
            logger.warning(
                "[ringwalk] %s couplings vanish at hop %d; the line is disconnected",
                form.value,
                int(dead[0]) + 1,
            )
        return LineHamiltonian(
            tbar, variant, _tridiagonal(np.zeros(tbar + 1), hops), form=form
        )

    pad = default_pad(tbar) if pad is None else pad
    if pad < 0:
        raise DomainError(f"pad must be non-negative, got {pad}")
    if variant is Variant.DUMMY_PADDING:
        diagonal = np.zeros(tbar + 1 + pad)
        diagonal[0] = 1
        matrix = _tridiagonal(diagonal, np.ones(tbar + pad))
        return LineHamiltonian(tbar, variant, matrix, pad)
    dim = tbar + 1 + 2 * pad
    matrix = _tridiagonal(np.zeros(dim), np.ones(dim - 1))
    return LineHamiltonian(tbar, variant, matrix, pad, start_site=pad, stop_site=pad + tbar)


@attr.s(slots=True, frozen=True, eq=False)
class Spectrum:
    """Eigendecomposition of a real symmetric Hamiltonian."""

    values: np.ndarray = attr.ib()
    vectors: np.ndarray = attr.ib()

    @classmethod
    def of(cls, matrix: np.ndarray) -> "Spectrum":
        if matrix.shape[0] > MAX_LINE_DIM:
            raise CapacityError(
                f"dense propagation limited to dimension {MAX_LINE_DIM}, got {matrix.shape[0]}"
            )
        values, vectors = eigh(matrix)
        return cls(values, vectors)

    def residual(self, matrix: np.ndarray) -> float:
        """Largest ``|Hv - lambda v|`` over all eigenpairs."""
        return float(np.max(np.abs(matrix @ self.vectors - self.vectors * self.values)))

    def evolve(self, amps: np.ndarray, t: float) -> np.ndarray:
        coefficients = self.vectors.T @ amps
        return self.vectors @ (np.exp(-1j * self.values * t) * coefficients)

    def amplitudes(self, start: int, stop: int, times: np.ndarray) -> np.ndarray:
        """``<stop|exp(-iHt)|start>`` for each of ``times``."""
        weights = self.vectors[stop] * self.vectors[start]
        return np.exp(-1j * np.outer(times, self.values)) @ weights


def _matrix_of(h: Union[LineHamiltonian, np.ndarray]) -> np.ndarray:
    return h.matrix if isinstance(h, LineHamiltonian) else np.asarray(h, dtype=float)


def propagate(
    h: Union[LineHamiltonian, np.ndarray], state: Statevector, t: float
) -> Statevector:
    """Return ``exp(-iHt)|state>`` by full symmetric eigendecomposition.

    :raises DomainError: if ``t`` is not finite or the dimensions differ
    :raises CapacityError: above dimension ``MAX_LINE_DIM``
    """
    if not math.isfinite(t):
        raise DomainError(f"time must be finite, got {t}")
    matrix = _matrix_of(h)
    if state.dim != matrix.shape[0]:
        raise DomainError(f"state of dimension {state.dim} on a {matrix.shape[0]}-site line")
    return Statevector(Spectrum.of(matrix).evolve(state.amps, t), WALK_LINE)


def start_state(h: LineHamiltonian) -> Statevector:
    return Statevector.basis(h.start_site, h.dim, WALK_LINE)


@attr.s(slots=True, frozen=True)
class PeakResult:
    t: float = attr.ib()
    amplitude: complex = attr.ib()

    @property
    def magnitude(self) -> float:
        return abs(self.amplitude)


def _scan_defaults(h: LineHamiltonian, t_max: Optional[float], samples: Optional[int]):
    t_max = max(float(h.tbar), math.pi) if t_max is None else float(t_max)
    samples = max(MIN_PEAK_SAMPLES, 20 * h.tbar) if samples is None else samples
    if samples < MIN_PEAK_SAMPLES:
        raise DomainError(f"at least {MIN_PEAK_SAMPLES} samples needed, got {samples}")
    if not (math.isfinite(t_max) and t_max > 0):
        raise DomainError(f"t_max must be positive and finite, got {t_max}")
    return t_max, samples


def amplitude_scan(
    h: LineHamiltonian, t_max: Optional[float] = None, samples: Optional[int] = None
) -> np.ndarray:
    """Rows ``(t, |amp|, re, im)`` of the stop-site amplitude on a uniform grid over
    ``[0, t_max]``."""
    t_max, samples = _scan_defaults(h, t_max, samples)
    times = np.linspace(0.0, t_max, samples)
    amps = Spectrum.of(h.matrix).amplitudes(h.start_site, h.stop_site, times)
    return np.column_stack([times, np.abs(amps), amps.real, amps.imag])


def peak_scan(
    h: LineHamiltonian, t_max: Optional[float] = None, samples: Optional[int] = None
) -> PeakResult:
    """Time and value of the largest stop-site amplitude on ``[0, t_max]``.

    The grid maximum is refined by a bounded scalar search on its neighbouring
    bracket; among near-equal grid peaks the earliest wins.
    """
    t_max, samples = _scan_defaults(h, t_max, samples)
    spectrum = Spectrum.of(h.matrix)
    times = np.linspace(0.0, t_max, samples)
    values = np.abs(spectrum.amplitudes(h.start_site, h.stop_site, times))
    best = float(values.max())
    near = np.flatnonzero(values >= best * (1 - PEAK_TIE_RTOL)) if best > 0 else np.array([0])
    lobes = 1 + int(np.count_nonzero(np.diff(near) > 1))
    if lobes > 1:
        logger.warning(
            "[ringwalk] %d near-equal amplitude peaks; taking the earliest at t=%.6g",
            lobes,
            times[near[0]],
        )
    # climb to the top of the earliest lobe
    index = int(near[0])
    while index + 1 < samples and values[index + 1] > values[index]:
        index += 1
    low = times[max(index - 1, 0)]
    high = times[min(index + 1, samples - 1)]

    def magnitude(t: float) -> float:
        return float(abs(spectrum.amplitudes(h.start_site, h.stop_site, np.array([t]))[0]))

    t_star = float(times[index])
    if best > 0:
        result = minimize_scalar(
            lambda t: -magnitude(t),
            bounds=(low, high),
            method="bounded",
            options={"xatol": PEAK_XATOL},
        )
        if -result.fun > values[index]:
            t_star = float(result.x)
    amplitude = complex(spectrum.amplitudes(h.start_site, h.stop_site, np.array([t_star]))[0])
    return PeakResult(t_star, amplitude)


def arrival_probability(h: LineHamiltonian, state: Statevector, t: float) -> float:
    """Probability of finding the walker on the stop site or past it at time ``t``."""
    evolved = propagate(h, state, t)
    return float(np.sum(np.abs(evolved.amps[h.stop_site :]) ** 2))


def repetitions_for_success(probability: float, confidence: float = 0.99) -> int:
    """Independent runs needed to land on the stop state at least once with ``confidence``."""
    if not 0 < probability <= 1:
        raise DomainError(f"probability must be in (0, 1], got {probability}")
    if not 0 < confidence < 1:
        raise DomainError(f"confidence must be in (0, 1), got {confidence}")
    if probability == 1:
        return 1
    return max(1, math.ceil(math.log1p(-confidence) / math.log1p(-probability)))


def _bessel_series(k: int, x: float) -> float:
    quarter = x * x / 4
    term = math.exp(k * math.log(x / 2) - math.lgamma(k + 1))
    total, m = term, 0
    while abs(term) > 1e-17 * abs(total):
        m += 1
        term *= -quarter / (m * (m + k))
        total += term
    return total


def bessel_j_orders(kmax: int, x: float) -> np.ndarray:
    """``J_0(x) .. J_kmax(x)`` by downward recurrence, normalised by
    ``J_0 + 2 * sum(J_2m) = 1``."""
    if kmax < 0:
        raise DomainError(f"order must be non-negative, got {kmax}")
    if x == 0:
        out = np.zeros(kmax + 1)
        out[0] = 1.0
        return out
    sign = -1.0 if x < 0 else 1.0
    x = abs(x)
    reach = max(kmax, int(x))
    start = reach + int(math.sqrt(40 * reach)) + 20
    start += start % 2
    values = np.zeros(start + 2)
    values[start] = 1e-30
    for order in range(start, 0, -1):
        values[order - 1] = 2 * order / x * values[order] - values[order + 1]
        if abs(values[order - 1]) > 1e250:
            values[order - 1 :] *= 1e-250
    norm = values[0] + 2 * values[2::2].sum()
    out = values[: kmax + 1] / norm
    if sign < 0:
        out[1::2] *= -1
    return out


def bessel_j(k: int, x: float) -> float:
    """Bessel function of the first kind ``J_k(x)`` for integer ``k >= 0``.

    Uses the ascending series while its terms shrink from the first one,
    the normalised downward recurrence otherwise.
    """
    if k < 0:
        raise DomainError(f"order must be non-negative, got {k}")
    if not abs(x) <= BESSEL_MAX_ARG:
        raise DomainError(f"|x| must be at most {BESSEL_MAX_ARG:g}, got {x}")
    if x == 0:
        return 1.0 if k == 0 else 0.0
    if abs(x) <= 2 or x * x / 4 < k + 1:
        value = _bessel_series(k, abs(x))
        return -value if x < 0 and k % 2 else value
    return float(bessel_j_orders(k, x)[k])


def infinite_line_reference(j: int, t: float) -> complex:
    """Amplitude ``(-i)^j J_j(2t)`` at site ``j`` of the unit-hop infinite line,
    started at site 0."""
    m = abs(j)
    return (-1j) ** m * bessel_j(m, 2 * t)


def history_state(tbar: int) -> Statevector:
    """Uniform superposition over the ``tbar + 1`` trajectory states."""
    return Statevector(np.full(tbar + 1, 1 / math.sqrt(tbar + 1)), WALK_LINE)


def hinit_matrix(tbar: int) -> np.ndarray:
    diagonal = np.ones(tbar + 1)
    diagonal[0] = 0
    return np.diag(diagonal)


def hfinal_matrix(tbar: int) -> np.ndarray:
    """Half the path Laplacian: corners 1/2, interior diagonal 1, hops -1/2."""
    diagonal = np.ones(tbar + 1)
    diagonal[[0, -1]] = 0.5
    return _tridiagonal(diagonal, np.full(tbar, -0.5))


@attr.s(slots=True, frozen=True, eq=False)
class AdiabaticFamily:
    """``H(s) = (1 - s) H_init + s H_final`` on the trajectory line."""

    tbar: int = attr.ib(validator=instance_of(int))
    delta: float = attr.ib(default=1.0, converter=float)
    epsilon: float = attr.ib(default=0.1, converter=float)
    h_init: np.ndarray = attr.ib(
        init=False,
        default=attr.Factory(lambda self: _frozen(hinit_matrix(self.tbar)), takes_self=True),
    )
    h_final: np.ndarray = attr.ib(
        init=False,
        default=attr.Factory(lambda self: _frozen(hfinal_matrix(self.tbar)), takes_self=True),
    )

    @tbar.validator
    def _check_tbar(self, attribute, value):
        if value < 1:
            raise DomainError(f"tbar must be at least 1, got {value}")

    def at(self, s: float) -> np.ndarray:
        if not 0 <= s <= 1:
            raise DomainError(f"schedule parameter must be in [0, 1], got {s}")
        return (1 - s) * self.h_init + s * self.h_final

    def norm_difference(self) -> float:
        """Spectral norm of ``H_final - H_init``."""
        values = eigh(self.h_final - self.h_init, eigvals_only=True)
        return float(np.max(np.abs(values)))

    def spectral_range(self) -> Tuple[float, float]:
        """Bounds on the spectrum of every ``H(s)``, from the two endpoints."""
        ends = [eigh(matrix, eigvals_only=True) for matrix in (self.h_init, self.h_final)]
        return float(min(e[0] for e in ends)), float(max(e[-1] for e in ends))


@attr.s(slots=True, frozen=True, eq=False)
class GapReport:
    s_values: np.ndarray = attr.ib()
    gaps: np.ndarray = attr.ib()
    bound: float = attr.ib()

    @property
    def min_gap(self) -> float:
        return float(self.gaps.min())

    @property
    def passed(self) -> bool:
        return self.min_gap >= self.bound

    def to_csv(self) -> str:
        rows = [GAP_HEADER] + [
            f"{format_number(s)},{format_number(gap)}" for s, gap in zip(self.s_values, self.gaps)
        ]
        return "\n".join(rows) + "\n"


def gap_bound(tbar: int) -> float:
    return 1 / (2 * (tbar + 1) ** 2)


def spectral_gap(matrix: np.ndarray) -> float:
    values = eigh(matrix, eigvals_only=True, subset_by_index=[0, 1])
    return float(values[1] - values[0])


def gap_scan(
    fam: AdiabaticFamily, grid_points: int = 101, threads: Optional[int] = None
) -> GapReport:
    """Gap of ``H(s)`` on a uniform grid over ``[0, 1]``.

    :raises DegeneracyError: if any gap falls below ``DEGENERACY_TOL``
    """
    if grid_points < MIN_GAP_POINTS:
        raise DomainError(f"at least {MIN_GAP_POINTS} grid points needed, got {grid_points}")
    s_values = np.linspace(0.0, 1.0, grid_points)
    threads = threads or scan_threads()
    with ThreadPoolExecutor(max_workers=threads) as pool:
        gaps = np.array(list(pool.map(lambda s: spectral_gap(fam.at(s)), s_values)))
    degenerate = np.flatnonzero(gaps < DEGENERACY_TOL)
    if degenerate.size:
        first = degenerate[0]
        raise DegeneracyError(
            f"degenerate ground state at s={s_values[first]:.6g} (gap {gaps[first]:.3g})"
        )
    report = GapReport(s_values, gaps, gap_bound(fam.tbar))
    logger.info(
        "[ringwalk] gap scan over %d points: min %.6g, bound %.6g",
        grid_points,
        report.min_gap,
        report.bound,
    )
    return report


def adiabatic_runtime(fam: AdiabaticFamily, min_gap: float, omega: float = 1.0) -> float:
    """``omega * |H_final - H_init| ** (1 + delta) / (epsilon ** delta * min_gap ** (2 + delta))``.

    :raises DomainError: if ``min_gap``, ``delta`` or ``epsilon`` is not positive
    """
    if fam.delta <= 0 or fam.epsilon <= 0:
        raise DomainError(f"delta and epsilon must be positive, got {fam.delta}, {fam.epsilon}")
    if min_gap <= 0:
        raise DomainError(f"min_gap must be positive, got {min_gap}")
    delta = fam.delta
    return (
        omega
        * fam.norm_difference() ** (1 + delta)
        / (fam.epsilon ** delta * min_gap ** (2 + delta))
    )


@attr.s(slots=True, frozen=True, eq=False)
class AdiabaticResult:
    state: Statevector = attr.ib()
    fidelity: float = attr.ib()
    steps: int = attr.ib()


def required_steps(fam: AdiabaticFamily, total_time: float) -> int:
    """Fewest steps keeping ``step time * |H|`` within ``RESOLUTION_LIMIT``.

    A multiple of the identity only changes the global phase, so ``|H|`` is taken
    about the midpoint of the spectral range.
    """
    low, high = fam.spectral_range()
    return max(1, math.ceil(total_time * (high - low) / 2 / RESOLUTION_LIMIT))


def adiabatic_run(
    fam: AdiabaticFamily, total_time: float, steps: Optional[int] = None
) -> AdiabaticResult:
    """Evolve ``e_0`` under ``H(t / total_time)`` and overlap it with the history state.

    ``H`` is held constant at each step's midpoint and each step is an exact
    exponential.

    :raises ResolutionError: if ``steps`` is below ``required_steps``
    """
    if not (math.isfinite(total_time) and total_time >= 0):
        raise DomainError(f"total_time must be finite and non-negative, got {total_time}")
    history = history_state(fam.tbar)
    state = np.zeros(fam.tbar + 1, dtype=complex)
    state[0] = 1
    if total_time == 0:
        return AdiabaticResult(Statevector(state, WALK_LINE), float(abs(history.amps[0])), 0)

    needed = required_steps(fam, total_time)
    if steps is None:
        steps = needed
    elif steps < needed:
        raise ResolutionError(
            f"{steps} steps are too coarse for total time {total_time:.6g}; need {needed}"
        )
    dt = total_time / steps
    logger.info("[ringwalk] adiabatic run over time %.6g in %d steps", total_time, steps)
    for first in range(0, steps, ADIABATIC_CHUNK):
        s = (np.arange(first, min(first + ADIABATIC_CHUNK, steps)) + 0.5) / steps
        stack = (1 - s)[:, None, None] * fam.h_init + s[:, None, None] * fam.h_final
        values, vectors = np.linalg.eigh(stack)
        phases = np.exp(-1j * values * dt)
        for vector, phase in zip(vectors, phases):
            state = vector @ (phase * (vector.T @ state))
    fidelity = float(abs(np.vdot(history.amps, state)))
    return AdiabaticResult(Statevector(state, WALK_LINE), fidelity, steps)


def rows_to_csv(header: str, rows: Union[np.ndarray, List[Sequence[float]]]) -> str:
    lines = [header] + [",".join(format_number(value) for value in row) for row in rows]
    return "\n".join(lines) + "\n"
