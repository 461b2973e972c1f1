from config import get_settings


def test_defaults():
    settings = get_settings()
    assert settings.algebra.default_generator_count == 16
    assert settings.harness.default_trials == 25
    assert settings.log_level == "WARNING"


def test_dotenv_file_is_read(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    (tmp_path / ".env").write_text(
        "GRADED_LOG_LEVEL=ERROR\nGRADED_HARNESS_DEFAULT_TRIALS=7\nGRADED_ALGEBRA_DEFAULT_GENERATOR_COUNT=12\n"
    )
    settings = get_settings()
    assert settings.log_level == "ERROR"
    assert settings.harness.default_trials == 7
    assert settings.algebra.default_generator_count == 12


def test_environment_overrides_dotenv(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    (tmp_path / ".env").write_text("GRADED_HARNESS_DEFAULT_SEED=3\n")
    monkeypatch.setenv("GRADED_HARNESS_DEFAULT_SEED", "11")
    assert get_settings().harness.default_seed == 11
