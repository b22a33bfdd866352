"""Exception hierarchy.

ParseError covers malformed input documents (OBJ, JSON, CSV) and carries an
optional line number. ValidationError covers domain-rule violations on
structurally well-formed data. The CLI maps ValidationError to exit code 1
and I/O or usage problems to exit code 2.
"""

from __future__ import annotations


class EmoteMeshError(Exception):
    """Base class for all library errors."""


class ParseError(EmoteMeshError):
    """Malformed input document."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(EmoteMeshError):
    """Domain invariant violated by otherwise well-formed data."""


class UnknownLabelError(ValidationError):
    """Expression or feature label not resolvable."""
