"""Shared exception types."""


class CapacityError(Exception):
    """Raised when a request exceeds a configured size or compute budget."""
