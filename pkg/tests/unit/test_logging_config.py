import logging

from src.core.logging_config import TrialContextFilter, setup_logging
from src.schemas.trial_schemas import TheoremSelector, TrialConfig
from src.services.trial_service import execute_trial


def test_trial_filter_fills_missing_index():
    record = logging.LogRecord("src", logging.INFO, __file__, 1, "msg", None, None)
    assert TrialContextFilter().filter(record)
    assert record.trial == "N/A"
    record.trial = 4
    TrialContextFilter().filter(record)
    assert record.trial == 4


def test_debug_level_reports_each_trial(capsys, reset_structlog):
    setup_logging(log_level="DEBUG")
    cfg = TrialConfig(theorem=TheoremSelector.THM21, n=1, generator_count=4, trials=1)
    execute_trial(cfg, 0)
    captured = capsys.readouterr()
    assert "Trial 0: zero" in captured.err
    assert captured.out == ""


def test_warning_level_is_quiet(capsys, reset_structlog):
    setup_logging(log_level="WARNING")
    cfg = TrialConfig(theorem=TheoremSelector.THM21, n=1, generator_count=4, trials=1)
    execute_trial(cfg, 0)
    assert capsys.readouterr().err == ""
