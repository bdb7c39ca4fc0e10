from __future__ import annotations

__all__ = [
    "ChannelDegradingError",
    "InvalidChannelError",
    "DomainError",
    "ResourceGuardError",
    "BoundViolationError",
]


class ChannelDegradingError(Exception):
    """
    Base class of all errors raised by channel_degrading
    """


class InvalidChannelError(ChannelDegradingError, ValueError):
    """
    A distribution, channel or channel file is malformed

    The message names the first invalid field.
    """

    def __init__(self, field: str, reason: str) -> None:
        self.field = field
        self.reason = reason
        super().__init__(f"Invalid field {field!r}: {reason}")

    def __reduce__(self):
        # rebuilt from both fields when sent back from a worker process
        return type(self), (self.field, self.reason)


class DomainError(ChannelDegradingError, ValueError):
    """
    An argument lies outside the range on which an operation is defined
    """


class ResourceGuardError(ChannelDegradingError, RuntimeError):
    """
    A request exceeds an explicit size limit (e.g. exhaustive partition search on too many letters)
    """


class BoundViolationError(ChannelDegradingError, RuntimeError):
    """
    A measured loss exceeded a proven upper bound
    """
