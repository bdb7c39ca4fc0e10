import json
import logging
import os
import sys
from contextlib import contextmanager
from enum import Enum
from pathlib import Path
from time import strftime
from typing import Iterator, List, Optional, Tuple

import click
import typer

from . import __version__
from .channel import Channel, InputDistribution, to_bits, to_posterior_form
from .channel_file import ChannelFile, channel_document, report_document, write_channel, write_report
from .errors import BoundViolationError, DomainError, InvalidChannelError, ResourceGuardError
from .experiment_configuration import ExperimentConfig
from .experiments import CheckStatus, run_sweep, verify_channel, write_sweep
from .generator import GeneratorSpec, parse_generator_spec
from .merge import greedy_merge
from .oracles import brute_force_optimal, dp_optimal_binary

app = typer.Typer(context_settings={"help_option_names": ["-h", "--help"]})

logger = logging.getLogger(__name__)


def show_version(value: bool):
    if value:
        print(f"channel-degrading v{__version__}")
        raise typer.Exit()


_LOGGING_FORMAT = (
    "%(asctime)s [%(threadName)-{thread_name_len}.{thread_name_len}s] %(levelname)-8s| "
    "%(name)s %(module)s.%(funcName)s (%(lineno)s): %(message)s"
)


def set_logging_level(log_level: str):
    logging_level = log_level.upper()
    try:
        import coloredlogs

        coloredlogs.install(
            fmt=_LOGGING_FORMAT.format(thread_name_len=12), datefmt="%Y-%m-%d %H:%M:%S,%f", level=logging_level
        )
    except ModuleNotFoundError:
        print("Cannot find coloredlogs! Please install coloredlogs, if you'd like to have nicer logging output:")
        print("`pip install coloredlogs`")

        logging.basicConfig(format=_LOGGING_FORMAT.format(thread_name_len=12), level=logging_level)
    return log_level


def make_log_file_handler(log_file_dir: Path, log_level: str) -> logging.FileHandler:
    os.makedirs(log_file_dir, exist_ok=True)
    file_name = log_file_dir.joinpath(f"channel_degrading-{log_level.lower()}-{strftime('%Y-%m-%d_%H-%M-%S')}.log")
    log_file_handler = logging.FileHandler(file_name)
    log_file_handler.setFormatter(logging.Formatter(_LOGGING_FORMAT.format(thread_name_len=60)))
    return log_file_handler


@contextmanager
def exit_codes() -> Iterator[None]:
    """
    Maps the package's errors to exit codes: 1 bound violation, 2 input error or unwritable output, 3 resource guard
    """
    try:
        yield
    except ResourceGuardError as err:
        typer.echo(f"Error: {err}", err=True)
        raise typer.Exit(3)
    except BoundViolationError as err:
        typer.echo(f"FAIL: {err}", err=True)
        raise typer.Exit(1)
    except (InvalidChannelError, DomainError) as err:
        typer.echo(f"Error: {err}", err=True)
        raise typer.Exit(2)
    except OSError as err:
        typer.echo(f"Error: cannot write output: {err}", err=True)
        raise typer.Exit(2)


def _load(channel_file: Optional[Path], random: Optional[str]) -> Tuple[Channel, InputDistribution]:
    if (channel_file is None) == (random is None):
        raise typer.BadParameter("Give either a CHANNEL_FILE or a generator spec via --random")
    if random is not None:
        return parse_generator_spec(random).generate()
    parsed = ChannelFile(channel_file)
    logger.info(f"Read channel file {parsed}")
    return parsed.channel, parsed.input_dist


def _echo_document(document: dict) -> None:
    typer.echo(json.dumps(document, indent=4, allow_nan=False))


def _channel_file_argument():
    return typer.Argument(
        None,
        exists=True,
        file_okay=True,
        dir_okay=False,
        readable=True,
        resolve_path=True,
        metavar="CHANNEL_FILE",
        help="Path to a channel JSON file with the fields 'input_dist' and 'channel'",
    )


def _random_option():
    return typer.Option(
        None,
        "--random",
        "-r",
        metavar="SPEC",
        help="Use a seeded random channel instead of a file, e.g. 'X=3,Y=256,seed=42' (optionally ',trial=k')",
    )


@app.callback()
def main(
    version: Optional[bool] = typer.Option(
        None,
        "--version",
        "-v",
        callback=show_version,
        is_eager=True,
        help="Show the application's version number and exit",
    ),
    log_level: str = typer.Option(
        ExperimentConfig.DEFAULT_LOG_LEVEL,
        "--log-level",
        "-l",
        callback=set_logging_level,
        metavar="LEVEL",
        help="Set the logging level of the application",
        case_sensitive=False,
        formats=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
    ),
    log_file_dir: Optional[Path] = typer.Option(
        None,
        metavar="DIR",
        help="The directory to write log files to (if not given log messages will only be printed to standard error)",
        exists=False,
        file_okay=False,
        dir_okay=True,
        writable=True,
        resolve_path=True,
    ),
):
    """
    Degrade discrete memoryless channels with greedy-merge and check the bounds on the resulting loss
    """
    if log_file_dir is not None:
        log_file_handler = make_log_file_handler(log_file_dir, log_level)
        logging.getLogger().addHandler(log_file_handler)
        logging.info(f"Writing log to file {log_file_handler.baseFilename!r}")
    logging.debug(f"Starting log for {sys.executable} with args {sys.argv}")


@app.command()
def degrade(
    channel_file: Optional[Path] = _channel_file_argument(),
    random: Optional[str] = _random_option(),
    num_letters: int = typer.Option(..., "--num-letters", "-L", metavar="L", help="The target output alphabet size"),
    output: Optional[Path] = typer.Option(
        None, "--output", "-o", dir_okay=False, help="Write the report to this file instead of standard out"
    ),
    trace: bool = typer.Option(False, "--trace", help="Add the per-step bound to every merge in the report"),
    bits: bool = typer.Option(False, "--bits", help="Also show the total loss in bits"),
):
    """
    Degrades a channel to at most L output letters with greedy-merge and writes the report
    """
    with exit_codes():
        channel, input_dist = _load(channel_file, random)
        report = greedy_merge(to_posterior_form(channel, input_dist), num_letters)
        bounds = report.step_bounds() if trace else None
        if output is None:
            _echo_document(report_document(report, channel, input_dist, bounds))
        else:
            write_report(output, report, channel, input_dist, bounds)
        summary = f"Total loss: {report.total_delta:.12e} nats"
        if bits:
            summary += f" ({to_bits(report.total_delta):.12e} bits)"
        typer.echo(summary, err=True)


@app.command()
def verify(
    channel_file: Optional[Path] = _channel_file_argument(),
    random: Optional[str] = _random_option(),
    num_letters: List[int] = typer.Option(
        [],
        "--num-letters",
        "-L",
        metavar="L",
        help="Target sizes for the cumulative checks (default: 2|X|, 4|X|, 8|X|)",
    ),
    trials: int = typer.Option(
        1, "--trials", "-n", min=1, help="Check this many trials of the --random spec (trial 0, 1, ...)"
    ),
    mu_scale: float = typer.Option(1.0, "--mu-scale", hidden=True, help="Scale the bound constants (self-test only)"),
):
    """
    Checks the per-step and cumulative greedy-merge bounds and prints PASS, FAIL or SKIP per check
    """
    with exit_codes():
        if random is None and trials > 1:
            raise typer.BadParameter("--trials repeats a --random spec and needs --random", param_hint="--trials")
        specs: List[Optional[GeneratorSpec]] = [None]
        if random is not None:
            spec = parse_generator_spec(random)
            specs = [spec.with_trial(trial) for trial in range(trials)] if trials > 1 else [spec]
        failed = False
        for spec in specs:
            if spec is None:
                channel, input_dist = _load(channel_file, None)
            else:
                if channel_file is not None:
                    raise typer.BadParameter("Give either a CHANNEL_FILE or a generator spec via --random")
                channel, input_dist = spec.generate()
                typer.echo(f"# {spec}")
            for result in verify_channel(channel, input_dist, num_letters or None, mu_scale):
                typer.echo(str(result))
                failed |= result.status is CheckStatus.FAIL
        if failed:
            raise typer.Exit(1)


@app.command()
def sweep(
    ctx: typer.Context,
    config_file: Optional[Path] = typer.Argument(
        None,
        exists=True,
        file_okay=True,
        dir_okay=False,
        readable=True,
        resolve_path=True,
        metavar="CONFIG_FILE",
        help="Path to an experiment JSON file (optional, every value can be given as option)",
    ),
    num_inputs: Optional[int] = typer.Option(None, "--num-inputs", "-X", help="The input alphabet size"),
    num_outputs: Optional[int] = typer.Option(None, "--num-outputs", "-Y", help="The output alphabet size"),
    num_letters: List[int] = typer.Option([], "--num-letters", "-L", metavar="L", help="Target sizes (repeatable)"),
    trials: Optional[int] = typer.Option(None, "--trials", "-n", help="The number of random channels"),
    seed: Optional[int] = typer.Option(None, "--seed", "-s", help="The root seed"),
    output: Optional[Path] = typer.Option(None, "--output", "-o", dir_okay=False, help="The CSV file to write"),
    workers: Optional[int] = typer.Option(None, "--workers", "-w", help="The number of worker processes"),
):
    """
    Runs greedy-merge on seeded random channels for several L and writes the losses and bounds as CSV
    """
    with exit_codes():
        config = ExperimentConfig(file_path=config_file)
        # overwrite parsed values from the config file with values from CLI options
        config.num_inputs = num_inputs
        config.num_outputs = num_outputs
        config.L_values = num_letters
        config.num_trials = trials
        config.seed = seed
        config.output_path = output
        config.workers = workers

        # set logging level from the config file if not given via CLI option
        root = ctx.find_root()
        if (
            root.get_parameter_source("log_level") == click.core.ParameterSource.DEFAULT
            and root.params.get("log_level") != config.log_level
        ):
            logging.info(f"Setting log level {config.log_level!r} from '{config_file}'")
            set_logging_level(config.log_level)

        table = run_sweep(config)
        write_sweep(config.output_path, table)
        typer.echo(f"Wrote {len(table)} rows to {config.output_path}")


class OracleMethod(str, Enum):
    brute = "brute"
    dp = "dp"


@app.command()
def oracle(
    channel_file: Optional[Path] = _channel_file_argument(),
    random: Optional[str] = _random_option(),
    num_letters: int = typer.Option(..., "--num-letters", "-L", metavar="L", help="The target output alphabet size"),
    method: OracleMethod = typer.Option(
        OracleMethod.brute, "--method", "-m", help="Exhaustive search (any |X|) or dynamic programming (|X| = 2)"
    ),
):
    """
    Computes the optimal degrading loss and compares greedy-merge against it
    """
    with exit_codes():
        channel, input_dist = _load(channel_file, random)
        pc = to_posterior_form(channel, input_dist)
        search = brute_force_optimal if method is OracleMethod.brute else dp_optimal_binary
        partition, optimal = search(pc, num_letters)
        greedy = greedy_merge(pc, num_letters).total_delta
        typer.echo(f"optimal loss: {optimal:.12e} nats")
        typer.echo(f"partition: {[list(block) for block in partition.blocks]}")
        typer.echo(f"greedy loss: {greedy:.12e} nats")
        typer.echo(f"gap: {greedy - optimal:.12e} nats")


@app.command()
def gen(
    random: str = typer.Option(
        ..., "--random", "-r", metavar="SPEC", help="The generator spec, e.g. 'X=2,Y=64,seed=1'"
    ),
    output: Optional[Path] = typer.Option(
        None, "--output", "-o", dir_okay=False, help="Write the channel file here instead of standard out"
    ),
):
    """
    Writes a seeded random channel as channel file
    """
    with exit_codes():
        channel, input_dist = parse_generator_spec(random).generate()
        if output is None:
            _echo_document(channel_document(channel, input_dist))
        else:
            write_channel(output, channel, input_dist)


if __name__ == "__main__":
    app()
