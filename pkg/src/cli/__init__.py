"""
Command line front end: spec-file ingestion, commands and reports.
"""

from .commands import COMMANDS, CommandOutcome, parse_h_sequence
from .reports import build_report, error_report
from .spec_file import SpecFileProcessor, SystemSpec

__all__ = [
    "COMMANDS",
    "CommandOutcome",
    "parse_h_sequence",
    "build_report",
    "error_report",
    "SpecFileProcessor",
    "SystemSpec",
]
