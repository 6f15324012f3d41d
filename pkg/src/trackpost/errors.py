"""Error types shared across the toolkit.

The CLI maps these onto process exit codes: usage problems exit 1,
InputFormatError / DomainError (and OS level file errors) exit 2, and
TrackerDriverError exits 3.
"""


class ToolkitError(Exception):
    """Base class for all trackpost errors."""


class InputFormatError(ToolkitError):
    """A file (bbox sequence, mask, manifest) is missing or malformed."""


class DomainError(ToolkitError, ValueError):
    """An operation was called with values outside its domain."""


class TrackerDriverError(ToolkitError):
    """An external tracker command failed or produced unusable output."""
