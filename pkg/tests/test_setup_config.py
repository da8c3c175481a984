import logging

import pytest

from helpers.errors import ParameterError
from logging_config import configure_logging, verbosity_level
from setup_config import CONFIG_ENV, DEFAULTS, ConfigManager


def test_memory_config_uses_defaults():
    config = ConfigManager()
    assert not config.persistent
    assert config.get("epsilon") == DEFAULTS["epsilon"]
    config.set("jobs", 3)
    assert config.get("jobs") == 3
    assert config.get_operations() == []
    assert config.clear_operations() == 0


def test_unknown_key_is_rejected():
    with pytest.raises(ParameterError):
        ConfigManager().set("colour", "blue")


def test_sqlite_config_persists(tmp_path):
    path = str(tmp_path / "cfg" / "twins.db")
    ConfigManager(path).set("alpha_tol", 1e-6)
    reopened = ConfigManager(path)
    assert reopened.persistent
    assert reopened.get("alpha_tol") == 1e-6
    assert reopened.all()["epsilon"] == "1/10"


def test_env_variable_selects_the_database(tmp_path, monkeypatch):
    path = str(tmp_path / "env.db")
    monkeypatch.setenv(CONFIG_ENV, path)
    config = ConfigManager()
    assert config.db_path == path
    config.set("epsilon", "1/20")
    assert ConfigManager(path).get("epsilon") == "1/20"


def test_operation_history(tmp_path):
    config = ConfigManager(str(tmp_path / "h.db"))
    config.log_operation("twins", "ok", {"words": 1})
    config.log_operation("exact", "interval", "n=14")
    ops = config.get_operations()
    assert [o["operation_type"] for o in ops] == ["exact", "twins"]
    assert ops[1]["details"] == '{"words": 1}'
    config.delete_operation(ops[0]["id"])
    assert len(config.get_operations()) == 1
    assert config.clear_operations() == 1
    assert config.get_operations() == []


def test_verbosity_level():
    assert verbosity_level(0) == "WARNING"
    assert verbosity_level(0, "ERROR") == "ERROR"
    assert verbosity_level(1) == "INFO"
    assert verbosity_level(3) == "DEBUG"


def test_configure_logging_with_file(tmp_path):
    configure_logging(app_name="unit", level="info", log_dir=str(tmp_path / "logs"))
    logging.getLogger("tests").info("hello")
    for handler in logging.getLogger().handlers:
        handler.flush()
    assert "hello" in (tmp_path / "logs" / "unit.log").read_text(encoding="utf-8")
    configure_logging(level="WARNING")
    assert logging.getLogger().level == logging.WARNING
