"""
Transcript collector for protocol runs.

Collects trial records during a run and writes them as JSON lines: one
header object carrying the schema version, seed and configuration, then one
object per trial in trial order.
"""

from datetime import datetime
from pathlib import Path
from typing import Any, Iterable, Optional
import json
import logging

from src.core.config import TRANSCRIPT_SCHEMA_VERSION
from src.models.protocol import TrialRecord

logger = logging.getLogger(__name__)


class TranscriptCollector:
    """
    Collects trial records for one protocol run.

    Usage:
        collector = TranscriptCollector(seed=7, config=config.model_dump(mode="json"))
        collector.extend(result.transcript)
        collector.save("logs/transcripts/run.jsonl")

        header, records = TranscriptCollector.read("logs/transcripts/run.jsonl")
    """

    def __init__(self, seed: Optional[int] = None, config: Optional[dict[str, Any]] = None):
        self.seed = seed
        self.config = config or {}
        self.records: list[TrialRecord] = []

    def add(self, record: TrialRecord) -> None:
        self.records.append(record)

    def extend(self, records: Iterable[TrialRecord]) -> None:
        self.records.extend(records)

    def header(self) -> dict[str, Any]:
        return {
            "schema_version": TRANSCRIPT_SCHEMA_VERSION,
            "timestamp": datetime.now().isoformat(),
            "seed": self.seed,
            "config": self.config,
            "trials": len(self.records),
        }

    def save(self, filepath: Path | str) -> Path:
        """
        Write the header and every record, one JSON object per line.

        Raises:
            OSError: If the file cannot be written
        """
        filepath = Path(filepath)
        filepath.parent.mkdir(parents=True, exist_ok=True)
        try:
            with open(filepath, "w", encoding="utf-8") as f:
                f.write(json.dumps(self.header(), ensure_ascii=False) + "\n")
                for record in sorted(self.records, key=lambda r: r.trial):
                    f.write(record.model_dump_json() + "\n")
            logger.info(f"Saved {len(self)} trial records to {filepath}")
        except OSError as e:
            logger.error(f"Failed to save transcript to {filepath}: {e}")
            raise
        return filepath

    @staticmethod
    def read(filepath: Path | str) -> tuple[dict[str, Any], list[TrialRecord]]:
        """
        Load a transcript written by save().

        Raises:
            FileNotFoundError: If the file doesn't exist
            ValueError: If a line is not valid JSON or the header is missing
        """
        filepath = Path(filepath)
        if not filepath.exists():
            raise FileNotFoundError(f"Transcript not found: {filepath}")

        with open(filepath, "r", encoding="utf-8") as f:
            lines = [line for line in f if line.strip()]
        if not lines:
            raise ValueError(f"Transcript {filepath} is empty")
        try:
            header = json.loads(lines[0])
            records = [TrialRecord.model_validate_json(line) for line in lines[1:]]
        except json.JSONDecodeError as e:
            raise ValueError(f"Invalid JSON in {filepath}: {e}") from e
        if "schema_version" not in header:
            raise ValueError(f"Transcript {filepath} has no header record")

        if header["schema_version"] != TRANSCRIPT_SCHEMA_VERSION:
            logger.warning(
                f"Schema version mismatch: file={header['schema_version']}, "
                f"current={TRANSCRIPT_SCHEMA_VERSION}"
            )
        return header, records

    def clear(self) -> None:
        self.records.clear()

    def __len__(self) -> int:
        return len(self.records)

    def __repr__(self) -> str:
        kept = sum(r.kept for r in self.records)
        return f"TranscriptCollector(trials={len(self.records)}, kept={kept}, seed={self.seed})"
