"""
oamlab command-line entry point.

Run (from project root):
uv run python -m src.main simulate netlists/cd_tree.onl --input S:7
uv run python -m src.main build rsg --cells 3
"""

from typing import Optional, Sequence
import sys

from src.cli.app import main as run_cli


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return its exit code."""
    return run_cli(argv)


if __name__ == "__main__":
    sys.exit(main())
