"""Shared exception types.

``ConfigError`` marks bad user input (CLI exit code 2); ``NumericalError``
marks a computation that ran but failed its own quality gates (exit code 1).
"""

from __future__ import annotations


class DiscforgeError(Exception):
    """Base class for package errors."""


class ConfigError(DiscforgeError):
    """Invalid configuration, schema violation, or inadmissible input data."""


class NumericalError(DiscforgeError):
    """A numerical procedure failed: no convergence, unresolved truncation,
    singular system, or a mathematical precondition broken at runtime."""
