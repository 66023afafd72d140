"""
Observability for oamlab runs.

Provides the JSON-lines transcript collector for protocol runs.
"""

from .transcript import TranscriptCollector

__all__ = ["TranscriptCollector"]
