import logging

import pandas as pd

from kplist.logging import TableLogger, logger, setup_logging, warn_once


def test_table_logger_rows():
    table = TableLogger()
    table.log({"phase": "partition", "rounds": 1})
    table.log({"phase": "listing", "rounds": 4, "messages": 9})
    df = table.get_table()
    assert list(df.columns) == ["phase", "rounds", "messages"]
    assert len(df) == 2
    assert "partition" in table.render()


def test_table_logger_totals():
    table = TableLogger()
    table.from_df(pd.DataFrame({"phase": ["partition", "listing"], "rounds": [1, 4]}))
    table.totals("phase")
    last = table.get_table().iloc[-1]
    assert last["phase"] == "total"
    assert last["rounds"] == 5
    assert "total" in table.render()


def test_warn_once(caplog):
    with caplog.at_level(logging.WARNING, logger="kplist"):
        warn_once("only once, please")
        warn_once("only once, please")
    assert [r.message for r in caplog.records].count("only once, please") == 1


def test_setup_logging_writes_file(tmp_path):
    log_dir = tmp_path / "logs"
    setup_logging(str(log_dir))
    setup_logging(str(log_dir))
    handlers = [
        h
        for h in logger.handlers
        if isinstance(h, logging.FileHandler) and h.baseFilename.startswith(str(log_dir))
    ]
    try:
        assert len(handlers) == 1
        logger.info("hello from the test")
        handlers[0].flush()
        assert "hello from the test" in (log_dir / "log.txt").read_text()
    finally:
        for h in handlers:
            logger.removeHandler(h)
            h.close()


def test_table_logger_many_and_empty(caplog):
    table = TableLogger()
    with caplog.at_level(logging.INFO, logger="kplist"):
        table.log_final_table()
    assert not caplog.records

    table.log_many([{"n": 16, "rounds": 3}, {"n": 32, "rounds": 7}])
    assert table.get_table()["rounds"].tolist() == [3, 7]
    with caplog.at_level(logging.INFO, logger="kplist"):
        table.log_final_table(title="Sweep")
    assert caplog.records[-1].getMessage().startswith("Sweep:")
