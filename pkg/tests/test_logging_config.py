"""
Root logger setup: stderr console, optional JSON records and rotating file.
"""
import json
import logging

import pytest

from app.utils.logging_config import QUIET_LOGGERS, get_logger, setup_logging


@pytest.fixture
def root_logger():
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield root
    for handler in root.handlers:
        if handler not in handlers:
            handler.close()
    root.handlers[:] = handlers
    root.setLevel(level)


def test_records_go_to_stderr_not_stdout(root_logger, capsys):
    setup_logging(log_level="INFO", json_logs=False)
    get_logger("ehsim.test").info("scenario finished")

    captured = capsys.readouterr()
    assert "scenario finished" in captured.err
    assert captured.out == ""


def test_json_records_carry_the_format_fields(root_logger, capsys):
    setup_logging(log_level="INFO", log_format="%(levelname)s %(name)s %(message)s", json_logs=True)
    get_logger("ehsim.test").warning("trace shorter than horizon")

    record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert record["message"] == "trace shorter than horizon"
    assert record["levelname"] == "WARNING"
    assert record["name"] == "ehsim.test"


def test_log_file_is_created_with_its_directory(root_logger, tmp_path):
    log_file = tmp_path / "logs" / "ehsim.log"
    setup_logging(log_level="DEBUG", log_file=str(log_file), json_logs=False)
    get_logger("ehsim.test").debug("cycle planned")

    assert "cycle planned" in log_file.read_text()


def test_debug_level_keeps_third_party_loggers_quiet(root_logger):
    setup_logging(log_level="DEBUG", json_logs=False)
    assert root_logger.level == logging.DEBUG
    for name in QUIET_LOGGERS:
        assert logging.getLogger(name).level == logging.WARNING


def test_get_logger_returns_the_named_logger():
    logger = get_logger("scheduler.cs")
    assert logger is logging.getLogger("scheduler.cs")
    assert logger.name == "scheduler.cs"
