from contextlib import contextmanager
import logging
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional

import click
import yaml

from ringwalk import __version__
from ringwalk.dynamics import (
    AMPLITUDE_HEADER,
    AdiabaticFamily,
    DegeneracyError,
    ResolutionError,
    TransferForm,
    Variant,
    adiabatic_run,
    adiabatic_runtime,
    amplitude_scan,
    arrival_probability,
    build_line,
    gap_scan,
    peak_scan,
    repetitions_for_success,
    rows_to_csv,
    start_state,
)
from ringwalk.hamspace import (
    EquivalenceError,
    build_hinit,
    build_restricted,
    check_effective_equivalence,
    count_ground_configs,
    decode_glyph,
)
from ringwalk.manifest import RunManifest
from ringwalk.parsing import MalformedError, dump_program, load_program, parse_circuit_file
from ringwalk.qcore import CapacityError, DomainError, self_test
from ringwalk.ring import CURSOR_CHARS, GlyphParseError
from ringwalk.rules import IntegrityError, RunawayError, compare_dumps, enumerate_trajectory
from ringwalk.vprog import compile_circuit

DATA_DIR = Path(__file__).parent / "data"
APPENDIX_CIRCUIT = DATA_DIR / "appendix_circuit.txt"
APPENDIX_TRACE = DATA_DIR / "appendix_trace.txt"
LOG_LEVELS = (logging.WARNING, logging.INFO, logging.DEBUG)


class InputError(click.ClickException):
    """A malformed input or an out-of-range parameter."""

    exit_code = 2


class VerificationFailed(click.ClickException):
    """A check the command exists to perform did not pass."""

    exit_code = 1


@contextmanager
def _input_errors() -> Iterator[None]:
    try:
        yield
    except (MalformedError, GlyphParseError, DomainError, CapacityError, OSError) as exc:
        raise InputError(str(exc)) from exc


def _write_or_echo(content: str, output: Optional[str]) -> List[str]:
    if not output:
        click.echo(content, nl=False)
        return []
    path = Path(output)
    path.parent.mkdir(exist_ok=True, parents=True)
    path.write_text(content, encoding="utf8")
    click.secho(f"Written to: {path}", fg="green", err=True)
    return [str(path)]


def _record(
    command: str, inputs: List[str], parameters: Dict[str, Any], outputs: List[str]
) -> None:
    manifest_path = (click.get_current_context().obj or {}).get("manifest")
    if manifest_path:
        RunManifest(command, inputs, parameters, outputs).write(manifest_path)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(version=__version__)
@click.option("-v", "--verbose", count=True, help="Log progress (use twice for debug output).")
@click.option(
    "--manifest",
    default=None,
    type=click.Path(exists=False, file_okay=True, dir_okay=False),
    help="Write a run manifest to this path.",
)
@click.pass_context
def main(ctx, verbose, manifest):
    """Command-line for the ringwalk ring Hamiltonian simulator."""
    logging.basicConfig(
        level=LOG_LEVELS[min(verbose, len(LOG_LEVELS) - 1)],
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        self_test()
    except RuntimeError as exc:
        raise VerificationFailed(f"numerical self-test failed: {exc}") from exc
    ctx.obj = {"manifest": manifest}


@main.command("compile")
@click.argument("circuit_file", type=click.Path(exists=True, file_okay=True, dir_okay=False))
@click.option(
    "-o",
    "--output",
    type=click.Path(allow_dash=True, exists=False, file_okay=True, dir_okay=False),
    help="Write the program to a file path.",
)
def compile_cmd(circuit_file, output):
    """Compile a Kitaev-basis circuit into a ring program."""
    with _input_errors():
        circuit = parse_circuit_file(circuit_file)
        prog = compile_circuit(circuit)
    outputs = _write_or_echo(dump_program(prog), output)
    _record("compile", [circuit_file], {}, outputs)


@main.command("trace")
@click.argument("program_file", type=click.Path(exists=True, file_okay=True, dir_okay=False))
@click.option(
    "-o",
    "--output",
    type=click.Path(allow_dash=True, exists=False, file_okay=True, dir_okay=False),
    help="Write the trajectory dump to a file path.",
)
def trace_cmd(program_file, output):
    """Enumerate the trajectory of a ring program."""
    with _input_errors():
        prog = load_program(program_file)
    try:
        trajectory = enumerate_trajectory(prog)
    except (IntegrityError, RunawayError) as exc:
        raise VerificationFailed(str(exc)) from exc
    outputs = _write_or_echo(trajectory.dump(), output)
    _record("trace", [program_file], {}, outputs)


@main.command("walk")
@click.argument(
    "program_file",
    required=False,
    type=click.Path(exists=True, file_okay=True, dir_okay=False),
)
@click.option("--tbar", type=int, help="Trajectory length, instead of a program.")
@click.option(
    "--variant",
    type=click.Choice([variant.value for variant in Variant]),
    default=Variant.START_STOP.value,
    show_default=True,
    help="Line Hamiltonian variant.",
)
@click.option("--pad", type=int, default=None, help="Padding sites [default: ceil(tbar^(2/3))].")
@click.option(
    "--form",
    type=click.Choice([form.value for form in TransferForm]),
    default=TransferForm.STANDARD.value,
    show_default=True,
    help="Coupling form of the perfect-transfer variant.",
)
@click.option("--tmax", type=float, default=None, help="End of the time window.")
@click.option("--samples", type=int, default=None, help="Grid points in the time window.")
@click.option(
    "-o",
    "--output",
    type=click.Path(allow_dash=True, exists=False, file_okay=True, dir_okay=False),
    help="Write the amplitude CSV to a file path.",
)
def walk_cmd(program_file, tbar, variant, pad, form, tmax, samples, output):
    """Scan the stop-site amplitude of a continuous-time walk."""
    if (program_file is None) == (tbar is None):
        raise InputError("give exactly one of PROGRAM_FILE and --tbar")
    inputs = []
    with _input_errors():
        if program_file is not None:
            try:
                tbar = enumerate_trajectory(load_program(program_file)).tbar
            except (IntegrityError, RunawayError) as exc:
                raise VerificationFailed(str(exc)) from exc
            inputs.append(program_file)
        line = build_line(tbar, variant, pad=pad, form=form)
        rows = amplitude_scan(line, tmax, samples)
        peak = peak_scan(line, tmax, samples)
    outputs = _write_or_echo(rows_to_csv(AMPLITUDE_HEADER, rows), output)

    probability = peak.magnitude ** 2
    click.echo(f"tbar: {tbar}", err=True)
    click.echo(f"peak: |amp| = {peak.magnitude:.6f} at t = {peak.t:.6f}", err=True)
    click.echo(f"deficit: 1 - |amp|^2 = {1 - probability:.3e}", err=True)
    if line.variant is Variant.START_STOP and probability > 0:
        repetitions = repetitions_for_success(min(probability, 1.0))
        click.echo(f"repetitions for 99% success: {repetitions}", err=True)
    elif line.variant is not Variant.PERFECT_TRANSFER:
        arrived = arrival_probability(line, start_state(line), peak.t)
        click.echo(f"arrival probability at peak: {arrived:.6f}", err=True)
    _record(
        "walk",
        inputs,
        {
            "tbar": tbar,
            "variant": line.variant.value,
            "pad": line.pad,
            "form": form,
            "tmax": tmax,
            "samples": samples,
        },
        outputs,
    )


@main.command("adiabatic")
@click.option("--tbar", type=int, required=True, help="Trajectory length.")
@click.option("--delta", type=float, default=1.0, show_default=True, help="Runtime exponent.")
@click.option("--eps", type=float, default=0.1, show_default=True, help="Target error.")
@click.option("--grid", type=int, default=101, show_default=True, help="Gap grid points.")
@click.option("--omega", type=float, default=1.0, show_default=True, help="Runtime constant.")
@click.option("--steps", type=int, default=None, help="Steps of the adiabatic run.")
@click.option("--run/--no-run", default=False, help="Evolve for the computed runtime.")
@click.option(
    "-o",
    "--output",
    type=click.Path(allow_dash=True, exists=False, file_okay=True, dir_okay=False),
    help="Write the gap CSV to a file path.",
)
@click.option(
    "--summary",
    type=click.Path(exists=False, file_okay=True, dir_okay=False),
    help="Write a YAML summary to a file path.",
)
def adiabatic_cmd(tbar, delta, eps, grid, omega, steps, run, output, summary):
    """Scan the gap of the adiabatic interpolation and bound its runtime."""
    with _input_errors():
        family = AdiabaticFamily(tbar, delta, eps)
        try:
            report = gap_scan(family, grid)
        except DegeneracyError as exc:
            raise VerificationFailed(str(exc)) from exc
        runtime = adiabatic_runtime(family, report.min_gap, omega)
    outputs = _write_or_echo(report.to_csv(), output)

    data: Dict[str, Any] = {
        "tbar": tbar,
        "min_gap": report.min_gap,
        "gap_bound": report.bound,
        "passed": report.passed,
        "runtime": runtime,
    }
    if run:
        try:
            result = adiabatic_run(family, runtime, steps)
        except ResolutionError as exc:
            raise InputError(str(exc)) from exc
        data.update(fidelity=result.fidelity, steps=result.steps)
    for key, value in data.items():
        text = f"{value:.6g}" if isinstance(value, float) else value
        click.echo(f"{key}: {text}", err=True)
    if summary:
        Path(summary).write_text(
            yaml.dump(data, sort_keys=False, default_flow_style=False), encoding="utf8"
        )
        outputs.append(summary)
    _record(
        "adiabatic",
        [],
        {"tbar": tbar, "delta": delta, "eps": eps, "grid": grid, "omega": omega, "run": run},
        outputs,
    )
    if not report.passed:
        raise VerificationFailed(
            f"minimum gap {report.min_gap:.6g} is below the bound {report.bound:.6g}"
        )


@main.command("verify-appendix")
def verify_appendix():
    """Check the packaged three-qubit example against its golden trajectory."""
    circuit = parse_circuit_file(APPENDIX_CIRCUIT)
    trajectory = enumerate_trajectory(compile_circuit(circuit))
    matched, total = compare_dumps(trajectory.dump(), APPENDIX_TRACE.read_text(encoding="utf8"))
    click.echo(f"{matched}/{total} steps match")
    for step, event in enumerate(trajectory.events):
        if event is not None:
            click.echo(f"step {step}: {event.tag()}")
    _record("verify-appendix", [str(APPENDIX_CIRCUIT)], {}, [])
    if matched != total or trajectory.tbar + 1 != total:
        raise VerificationFailed("trajectory differs from the golden dump")


@main.command("equiv")
@click.argument("program_file", type=click.Path(exists=True, file_okay=True, dir_okay=False))
@click.option(
    "--coo",
    type=click.Path(exists=False, file_okay=True, dir_okay=False),
    help="Write the restricted Hamiltonian as 'row col re im' lines.",
)
def equiv_cmd(program_file, coo):
    """Check the restricted ring Hamiltonian against the line Hamiltonian."""
    with _input_errors():
        prog = load_program(program_file)
        hamiltonian = build_restricted(prog)
    outputs = []
    if coo:
        Path(coo).write_text(hamiltonian.to_coo_text(), encoding="utf8")
        outputs.append(coo)
    try:
        report = check_effective_equivalence(prog, hamiltonian=hamiltonian)
    except (EquivalenceError, IntegrityError) as exc:
        raise VerificationFailed(str(exc)) from exc
    click.echo(f"basis states: {report.basis_size}")
    click.echo(f"steps: {report.tbar + 1}")
    click.echo(f"max deviation: {report.max_deviation:.3e}")
    _record("equiv", [program_file], {}, outputs)


def _glyph_text(glyphs) -> str:
    chars = []
    for glyph in glyphs:
        cursor, bit = decode_glyph(glyph)
        chars.append(CURSOR_CHARS[cursor] + str(bit))
    return " ".join(chars)


@main.command("hinit")
@click.argument("program_file", type=click.Path(exists=True, file_okay=True, dir_okay=False))
@click.option("--data", default=None, help="Data input bits [default: all zero].")
@click.option("--scan", is_flag=True, help="Count the zero-penalty configurations.")
@click.option(
    "--method",
    type=click.Choice(["auto", "exhaustive", "transfer-matrix"]),
    default="auto",
    show_default=True,
    help="Counting method.",
)
@click.option("--no-anchor", is_flag=True, help="Drop the anchoring term.")
def hinit_cmd(program_file, data, scan, method, no_anchor):
    """Build the initialisation penalty and optionally count its kernel."""
    with _input_errors():
        prog = load_program(program_file)
        data = "0" * prog.n if data is None else data
        penalty = build_hinit(prog, data)
        if no_anchor:
            penalty = penalty.without_anchor()
        click.echo(f"terms: {len(penalty.terms)}")
        click.echo(f"start glyphs: {_glyph_text(penalty.desired)}")
        count = count_ground_configs(penalty, method) if scan else None
    if count is not None:
        click.echo(f"zero-penalty configurations: {count.count} ({count.method})")
        if count.witness is not None:
            click.echo(f"first: {_glyph_text(count.witness)}")
    _record(
        "hinit",
        [program_file],
        {"data": data, "scan": scan, "method": method, "anchor": not no_anchor},
        [],
    )
    if count is not None and not no_anchor and count.count != 1:
        raise VerificationFailed(f"expected 1 zero-penalty configuration, found {count.count}")
