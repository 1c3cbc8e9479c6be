"""Error type shared across the toolkit.

Every failure carries a stable machine-readable ``code`` (used verbatim in
CLI stderr messages and HTTP error bodies) plus a human-readable message.
"""

from __future__ import annotations


class WazobiaError(Exception):
    """Toolkit error with a stable error code."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"
