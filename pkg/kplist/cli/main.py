"""
Command line front-end: generate or load a graph, run a listing mode and emit a report.

"""

import sys
from typing import Dict

import click
import pandas as pd
from rich.console import Console
from rich.table import Table

from kplist.arguments import RunConfig
from kplist.cli.modes import Mode, execute
from kplist.listing import RunReport, ScheduleError
from kplist.logging import logger, setup_logging
from kplist.sim.accounting import BudgetViolation

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_CONFIG = 2
EXIT_BUDGET = 3


def _common_options(func):
    options = [
        click.option("--p", "p", type=int, default=None, help="Clique size."),
        click.option("--gen", default=None, help="Generator spec, e.g. gnp:80:0.3:17."),
        click.option("--graph", default=None, help="Edge-list file."),
        click.option("--seed", type=int, default=None),
        click.option("--config", "config_file", default=None, help="JSON config file."),
        click.option("--verify", is_flag=True, help="Compare against the oracle."),
        click.option("--emit", default=None, help="Write the JSON report here."),
        click.option("--emit-csv", default=None, help="Write per-phase rounds here."),
        click.option("--forced-depth", type=int, default=None),
        click.option("--delta", type=float, default=None),
        click.option("--log-dir", default=None),
        click.option(
            "--factor",
            "factors",
            multiple=True,
            help="KEY=VAL override of any config field, may be repeated.",
        ),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def parse_factors(factors) -> Dict[str, str]:
    parsed = {}
    for item in factors:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise click.BadParameter(f"expected KEY=VAL, got {item!r}", param_hint="--factor")
        parsed[key.strip()] = value.strip()
    return parsed


def _overrides(factors, **flags):
    overrides = {k: v for k, v in flags.items() if v is not None and v is not False}
    overrides.update(parse_factors(factors))
    return overrides


def phase_table(report: RunReport) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {"phase": phase, "rounds": rounds, "messages": report.messages.get(phase, 0)}
            for phase, rounds in report.rounds.items()
        ],
        columns=["phase", "rounds", "messages"],
    )


def print_summary(report: RunReport, console: Console = None):
    console = console or Console()
    table = Table(title=f"{report.mode}: {report.count} cliques of size {report.p}")
    table.add_column("Phase", justify="left", style="cyan", no_wrap=True)
    table.add_column("Rounds", justify="right", style="magenta")
    table.add_column("Messages", justify="right", style="magenta")
    for _, row in phase_table(report).iterrows():
        table.add_row(row["phase"], str(row["rounds"]), str(row["messages"]))
    table.add_row("total", str(report.total_rounds), str(sum(report.messages.values())))
    console.print(table)
    if report.verified is not None:
        console.print(f"verified: {report.verified}")


def _write_outputs(report: RunReport, config: RunConfig):
    if config.emit:
        with open(config.emit, "w") as fout:
            fout.write(report.to_json(indent=2))
            fout.write("\n")
    if config.emit_csv:
        phase_table(report).to_csv(config.emit_csv, index=False)


def run_cli(factors, **flags) -> int:
    overrides = _overrides(factors, **{k: v for k, v in flags.items() if k != "config_file"})
    try:
        config = RunConfig.from_sources(flags.get("config_file"), overrides)
        setup_logging(config.log_dir, config.log_level)
        logger.info("Fields changed from defaults: %s", sorted(config.updated_kwargs))
        if config.log_dir:
            config.save_config(config.log_dir)
        report = execute(config)
    except ScheduleError as e:
        logger.error("%s", e)
        if isinstance(e.__cause__, BudgetViolation):
            return EXIT_BUDGET
        if isinstance(e.__cause__, ValueError):
            return EXIT_CONFIG
        return EXIT_BUDGET
    except BudgetViolation as e:
        logger.error("%s", e)
        return EXIT_BUDGET
    except (ValueError, KeyError, OSError) as e:
        logger.error("%s", e)
        return EXIT_CONFIG

    _write_outputs(report, config)
    print_summary(report)
    if config.verify and not report.verified:
        return EXIT_MISMATCH
    return EXIT_OK


@click.command()
@click.option("--mode", default=None, help=f"One of {Mode.registered_names()}.")
@_common_options
def main(mode, factors, **flags):
    """List K_p instances with a simulated CONGEST or CONGESTED CLIQUE algorithm."""
    sys.exit(run_cli(factors, mode=mode, **flags))


@click.command()
@_common_options
def cc_list(factors, **flags):
    """Shorthand for `kplist --mode cc`."""
    sys.exit(run_cli(factors, mode="cc", **flags))


if __name__ == "__main__":
    main()
