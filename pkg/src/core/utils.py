"""Utility functions for oamlab."""

from pathlib import Path
from typing import Optional
import logging
import os
from datetime import datetime
import shutil

from src.core.config import (
    DEFAULT_SEED,
    LOG_FILE_PREFIX,
    LOG_LEVEL_ENV_VAR,
    SEED_ENV_VAR,
)
from src.core.errors import ConfigError


def setup_logging(
    project_root: Path,
    keep_recent: int = 10,
    to_file: bool = True,
) -> logging.Logger:
    """
    Route oamlab logging to the console and, optionally, a per-session file.

    Session files live in <project_root>/logs; older ones beyond `keep_recent`
    move to logs/archive. Console-only sessions log warnings and above.

    Args:
        project_root: Directory holding logs/
        keep_recent: Session files left in logs/ after archiving
        to_file: Write a session log file in addition to the console

    Returns:
        Logger for this module
    """
    level_name = os.getenv(LOG_LEVEL_ENV_VAR, "INFO").upper()
    level = getattr(logging, level_name, logging.INFO)

    handlers: list[logging.Handler] = [logging.StreamHandler()]
    session_log: Optional[Path] = None

    if to_file:
        logs_dir = project_root / "logs"
        (logs_dir / "archive").mkdir(parents=True, exist_ok=True)
        archive_old_logs(logs_dir, keep_recent)

        session_log = logs_dir / f"{LOG_FILE_PREFIX}_{datetime.now().strftime('%Y%m%d_%H%M%S')}.log"
        handlers.insert(0, logging.FileHandler(session_log))
    else:
        level = max(level, logging.WARNING)

    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=handlers,
        force=True,
    )

    logger = logging.getLogger(__name__)
    if session_log is not None:
        logger.info(f"Session log: {session_log}")
    return logger


def archive_old_logs(logs_dir: Path, keep_recent: int) -> int:
    """Move all but the newest `keep_recent` session logs into logs/archive; returns how many moved."""
    sessions = sorted(logs_dir.glob(f"{LOG_FILE_PREFIX}_*.log"), key=lambda f: f.stat().st_mtime, reverse=True)
    stale = sessions[keep_recent:]
    for log_file in stale:
        shutil.move(str(log_file), str(logs_dir / "archive" / log_file.name))
    if stale:
        logging.getLogger(__name__).debug(f"Archived {len(stale)} session logs")
    return len(stale)


def resolve_seed(flag_value: Optional[int]) -> int:
    """
    Pick the run seed: command-line flag, then OAMLAB_SEED, then the default.

    Raises:
        ConfigError: If OAMLAB_SEED is set but is not an integer
    """
    if flag_value is not None:
        return int(flag_value)

    env_value = os.getenv(SEED_ENV_VAR)
    if env_value is None or not env_value.strip():
        return DEFAULT_SEED

    try:
        return int(env_value.strip())
    except ValueError as e:
        raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got {env_value!r}") from e
