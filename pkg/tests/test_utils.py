"""
Unit tests for core utilities: seed resolution, logging setup and
configuration loading.
"""

import logging

import pytest

from src.core.config import DEFAULT_SEED
from src.core.errors import ConfigError
from src.core.utils import archive_old_logs, resolve_seed, setup_logging
from src.models.protocol import ProtocolConfig, WalkConfig, load_config


class TestResolveSeed:
    """Test suite for resolve_seed"""

    def test_flag_wins(self, monkeypatch):
        monkeypatch.setenv("OAMLAB_SEED", "5")
        assert resolve_seed(9) == 9

    def test_environment(self, monkeypatch):
        monkeypatch.setenv("OAMLAB_SEED", " 5 ")
        assert resolve_seed(None) == 5

    def test_default(self, monkeypatch):
        monkeypatch.delenv("OAMLAB_SEED", raising=False)
        assert resolve_seed(None) == DEFAULT_SEED

    def test_bad_environment(self, monkeypatch):
        monkeypatch.setenv("OAMLAB_SEED", "seven")
        with pytest.raises(ConfigError, match="must be an integer"):
            resolve_seed(None)


class TestSetupLogging:
    """Test suite for setup_logging"""

    def test_file_logging(self, tmp_path):
        setup_logging(tmp_path, keep_recent=2)
        assert len(list((tmp_path / "logs").glob("oamlab_*.log"))) == 1
        assert (tmp_path / "logs" / "archive").is_dir()

    def test_archive_old_logs(self, tmp_path):
        """Test only the newest session logs stay in logs/"""
        archive = tmp_path / "archive"
        archive.mkdir()
        for i in range(4):
            (tmp_path / f"oamlab_2024010{i}_000000.log").write_text("x", encoding="utf-8")
        assert archive_old_logs(tmp_path, keep_recent=1) == 3
        assert len(list(archive.glob("*.log"))) == 3
        assert len(list(tmp_path.glob("*.log"))) == 1

    def test_console_only(self, tmp_path):
        setup_logging(tmp_path, to_file=False)
        assert not (tmp_path / "logs").exists()
        assert logging.getLogger().level >= logging.WARNING


class TestLoadConfig:
    """Test suite for load_config"""

    def test_inline_json_with_overrides(self):
        config = load_config(ProtocolConfig, '{"m0": 4, "N": 4}', trials=10, seed=None)
        assert config.m0 == 4
        assert config.window == 4
        assert config.trials == 10
        assert config.seed is None

    def test_file(self, tmp_path):
        path = tmp_path / "walk.json"
        path.write_text('{"steps": 4, "coherent": false}', encoding="utf-8")
        config = load_config(WalkConfig, path)
        assert config.steps == 4
        assert not config.coherent

    def test_errors(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(WalkConfig, tmp_path / "missing.json")
        listing = tmp_path / "list.json"
        listing.write_text("[1, 2]", encoding="utf-8")
        with pytest.raises(ConfigError, match="JSON object"):
            load_config(WalkConfig, listing)
        with pytest.raises(ConfigError, match="invalid WalkConfig"):
            load_config(WalkConfig, steps=-1)
