"""Error types shared across the package.

ValidationError covers malformed inputs (bad config, bad mask values, schema
violations) and maps to CLI exit code 2. Everything else raised as
EarthVLError maps to exit code 3.
"""

from __future__ import annotations


class EarthVLError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(EarthVLError):
    """Input failed validation (schema, value range, missing field)."""


class GeometryError(EarthVLError):
    """A geometric operation received degenerate input."""


class SynthesisError(EarthVLError):
    """A synthetic scene could not be realized (e.g. infeasible packing)."""


class DecodeError(EarthVLError):
    """Answer decoding failed (e.g. fewer counts than placeholders)."""
