"""
Command-line front end: simulate, build, qkd and walk.
"""

from src.cli.app import build_parser, main

__all__ = ["build_parser", "main"]
