import logging
import os
from functools import lru_cache
from typing import Dict, Iterable, Optional, Union

import numpy as np
import pandas as pd
import prettytable

# warning if logger is not initialized
logger = logging.getLogger("kplist")

LOG_FORMAT = "%(asctime)s %(levelname)s --> %(message)s"
DATE_FORMAT = "%m/%d/%Y %H:%M:%S"


@lru_cache
def warn_once(msg: str, **kwargs):
    logger.warning(msg, **kwargs)


def _has_file_handler(path: str) -> bool:
    return any(
        isinstance(handler, logging.FileHandler) and handler.baseFilename == path
        for handler in logger.handlers
    )


def setup_logging(log_dir: Optional[str] = None, level: Union[int, str] = logging.INFO):
    """Console logging for the package, plus `<log_dir>/log.txt` when a directory is given."""
    logging.basicConfig(format=LOG_FORMAT, datefmt=DATE_FORMAT, level=level)
    logger.setLevel(level)
    if not log_dir:
        return

    os.makedirs(log_dir, exist_ok=True)
    log_file_path = os.path.abspath(os.path.join(log_dir, "log.txt"))
    if not _has_file_handler(log_file_path):
        handler = logging.FileHandler(log_file_path)
        handler.setFormatter(logging.Formatter(LOG_FORMAT, DATE_FORMAT))
        logger.addHandler(handler)
        logger.info("New run, log will be at %s", log_file_path)


class TableLogger:
    """Collects per-phase rows and prints them as one table at the end of a run."""

    def __init__(self):
        self.rows = []

    @property
    def df(self) -> pd.DataFrame:
        return pd.DataFrame.from_records(self.rows)

    def from_df(self, df: pd.DataFrame):
        self.rows = df.to_dict("records")

    def log(self, row: Dict):
        self.rows.append(dict(row))

    def log_many(self, rows: Iterable[Dict]):
        for row in rows:
            self.log(row)

    def get_table(self) -> pd.DataFrame:
        return self.df

    def totals(self, key: str):
        """Appends a row with the sum of every numeric column, labelled `total` under `key`."""
        numeric = self.df.select_dtypes(include=[np.number])
        total = {column: numeric[column].sum() for column in numeric.columns}
        total[key] = "total"
        self.rows.append(total)

    def render(self) -> str:
        df = self.df
        table = prettytable.PrettyTable()
        table.field_names = list(df.columns)
        for column in df.columns:
            if pd.api.types.is_numeric_dtype(df[column]):
                table.align[column] = "r"
        for row in df.itertuples(index=False):
            table.add_row(["" if pd.isna(v) else v for v in row])
        return str(table)

    def log_final_table(self, title: str = "Results"):
        if self.rows:
            logger.info("%s:\n%s", title, self.render())
