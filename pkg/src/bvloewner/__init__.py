"""Traces of Loewner chains driven by functions of bounded variation."""

from __future__ import annotations

__version__ = "0.1.0"
