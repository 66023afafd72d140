"""
Unit tests for TranscriptCollector.

Tests record collection, JSON-lines serialization and loading.
"""

import json
import logging
from pathlib import Path
from tempfile import TemporaryDirectory

import pytest

from src.core.config import TRANSCRIPT_SCHEMA_VERSION
from src.models.protocol import TrialRecord
from src.observability.transcript import TranscriptCollector


def record(trial: int, kept: bool = False) -> TrialRecord:
    return TrialRecord(
        trial=trial,
        alice_basis="L",
        bob_basis="L",
        alice_outcome="L_3",
        bob_outcome="L_4",
        kept=kept,
        alice_symbol=0 if kept else None,
        bob_symbol=1 if kept else None,
    )


class TestTranscriptCollector:
    """Test suite for TranscriptCollector"""

    def test_initialization(self):
        """Test collector starts empty"""
        collector = TranscriptCollector(seed=7)
        assert len(collector) == 0
        assert collector.config == {}

    def test_add_and_extend(self):
        collector = TranscriptCollector()
        collector.add(record(0))
        collector.extend([record(1), record(2, kept=True)])
        assert len(collector) == 3
        assert "kept=1" in repr(collector)

    def test_header(self):
        collector = TranscriptCollector(seed=7, config={"trials": 2})
        collector.extend([record(0), record(1)])
        header = collector.header()
        assert header["schema_version"] == TRANSCRIPT_SCHEMA_VERSION
        assert header["seed"] == 7
        assert header["config"] == {"trials": 2}
        assert header["trials"] == 2

    def test_save_and_read(self):
        """Test records come back in trial order"""
        collector = TranscriptCollector(seed=3)
        collector.extend([record(2, kept=True), record(0), record(1)])
        with TemporaryDirectory() as tmpdir:
            path = collector.save(Path(tmpdir) / "runs" / "run.jsonl")
            lines = path.read_text(encoding="utf-8").splitlines()
            assert len(lines) == 4
            assert json.loads(lines[1])["trial"] == 0

            header, records = TranscriptCollector.read(path)
            assert header["seed"] == 3
            assert [r.trial for r in records] == [0, 1, 2]
            assert records[2] == record(2, kept=True)

    def test_read_missing_file(self):
        with pytest.raises(FileNotFoundError):
            TranscriptCollector.read("/nonexistent/run.jsonl")

    def test_read_empty_file(self):
        with TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "empty.jsonl"
            path.write_text("\n", encoding="utf-8")
            with pytest.raises(ValueError, match="empty"):
                TranscriptCollector.read(path)

    def test_read_invalid_json(self):
        with TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "bad.jsonl"
            path.write_text("{not json\n", encoding="utf-8")
            with pytest.raises(ValueError, match="Invalid JSON"):
                TranscriptCollector.read(path)

    def test_read_without_header(self):
        with TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "headless.jsonl"
            path.write_text(record(0).model_dump_json() + "\n", encoding="utf-8")
            with pytest.raises(ValueError, match="no header"):
                TranscriptCollector.read(path)

    def test_version_mismatch_warns(self, caplog):
        with TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / "old.jsonl"
            path.write_text(json.dumps({"schema_version": "0.0"}) + "\n", encoding="utf-8")
            with caplog.at_level(logging.WARNING):
                header, records = TranscriptCollector.read(path)
            assert records == []
            assert "Schema version mismatch" in caplog.text

    def test_clear(self):
        collector = TranscriptCollector()
        collector.add(record(0))
        collector.clear()
        assert len(collector) == 0
