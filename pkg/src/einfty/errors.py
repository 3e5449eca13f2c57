"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: validation -> 1, capacity -> 2,
internal inconsistency -> 3.
"""

import os


class EInftyError(Exception):
    """Base class."""


class ValidationError(EInftyError, ValueError):
    """Malformed input: bad tower, bad barcode, arity mismatch, ..."""


class ParseError(ValidationError):
    """Barcode text that does not follow the grammar."""

    def __init__(self, text, pos, msg):
        self.text = text
        self.pos = pos
        super().__init__(f"{msg} at position {pos} in {text!r}")


class CapacityError(EInftyError):
    """A search or a matrix exceeded the configured resource guard."""


class InternalInconsistency(EInftyError):
    """Something that must hold by construction failed (e.g. d^2 != 0)."""


CAPACITY_ENV = "EINFTY_CAPACITY"
DEFAULT_CAPACITY = 2_000_000


def capacity_limit() -> int:
    """Maximum number of search nodes / basis elements before giving up.

    Override with the EINFTY_CAPACITY environment variable.
    """
    raw = os.environ.get(CAPACITY_ENV)
    if raw is None:
        return DEFAULT_CAPACITY
    try:
        value = int(raw)
    except ValueError:
        raise ValidationError(f"{CAPACITY_ENV} must be an integer, got {raw!r}")
    if value <= 0:
        raise ValidationError(f"{CAPACITY_ENV} must be positive")
    return value
