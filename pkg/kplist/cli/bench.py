"""
Sweep a listing mode over G(n, q) instances and write per-phase round counts.

"""

import sys
from itertools import product
from typing import List

import click
import pandas as pd
from tqdm.auto import tqdm

from kplist.arguments import BenchConfig
from kplist.cli.main import parse_factors
from kplist.cli.modes import Mode
from kplist.graph.generators import GnpConfig, GnpGenerator
from kplist.logging import TableLogger, logger, setup_logging
from kplist.utils import derive_seed

COLUMNS = ["n", "m", "mode", "phase", "rounds", "max_load"]
BENCH_MODES = ("cc", "congest", "congest-k4")


def run_bench(config: BenchConfig, aggregate: bool = True, progress: bool = True) -> pd.DataFrame:
    """One row per (instance, phase); with `aggregate`, medians over the repetitions."""
    if config.mode not in BENCH_MODES:
        raise ValueError(f"Bench mode must be one of {BENCH_MODES}, got {config.mode}.")

    rows = []
    jobs = list(product(config.n_values, range(config.repetitions)))
    for n, rep in tqdm(jobs, desc=f"bench {config.mode}", disable=not progress):
        instance_seed = derive_seed(config.seed, n, rep)
        g = GnpGenerator(GnpConfig(n=n, q=config.density, seed=instance_seed)).generate()
        report = Mode.create(config.mode, config.run_config(instance_seed)).run(g)
        for phase, rounds in report.rounds.items():
            rows.append(
                {
                    "n": n,
                    "m": g.m,
                    "mode": config.mode,
                    "phase": phase,
                    "rounds": rounds,
                    "max_load": report.max_load.get(phase, 0),
                    "repetition": rep,
                }
            )

    df = pd.DataFrame(rows, columns=COLUMNS + ["repetition"])
    if not aggregate:
        return df
    if df.empty:
        return df[COLUMNS]
    summary = (
        df.groupby(["n", "mode", "phase"], sort=False)
        .agg(m=("m", "median"), rounds=("rounds", "median"), max_load=("max_load", "median"))
        .reset_index()
    )
    return summary[COLUMNS]


def _parse_n_values(raw: str) -> List[int]:
    return [int(x) for x in raw.split(",") if x.strip()]


@click.command()
@click.option("--config", "config_file", default=None, help="JSON bench config.")
@click.option("--n-values", default=None, help="Comma-separated node counts.")
@click.option("--density", type=float, default=None)
@click.option("--repetitions", type=int, default=None)
@click.option("--mode", default=None)
@click.option("--p", "p", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--forced-depth", type=int, default=None)
@click.option(
    "--factor",
    "factors",
    multiple=True,
    help="KEY=VAL override of a run config field, may be repeated.",
)
@click.option("--out", default="bench.csv", help="CSV output path.")
@click.option("--log-dir", default=None)
def main(config_file, n_values, out, log_dir, factors, **flags):
    """Rounds by phase over a sweep of random graphs."""
    setup_logging(log_dir)
    overrides = {k: v for k, v in flags.items() if v is not None}
    if n_values is not None:
        overrides["n_values"] = _parse_n_values(n_values)
    if factors:
        overrides["overrides"] = parse_factors(factors)
    try:
        config = BenchConfig.from_sources(config_file, overrides)
        if log_dir:
            config.save_config(log_dir)
        df = run_bench(config)
    except (ValueError, KeyError) as e:
        logger.error("%s", e)
        sys.exit(2)

    df.to_csv(out, index=False)
    table = TableLogger()
    table.from_df(df)
    table.log_final_table(title=f"Median rounds by phase, mode {config.mode}")
    logger.info("Wrote %d rows to %s", len(df), out)


if __name__ == "__main__":
    main()
