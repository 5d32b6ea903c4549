"""Exception hierarchy shared across the package.

Structural problems (ids that do not resolve, ill-typed input) raise
:class:`MalformedModelError` and are distinct from *validation failures*,
which are reported as data by :func:`mstab.model.validate`.
"""


class MstabError(Exception):
    """Base class for all package errors."""


class MalformedModelError(MstabError):
    """Input is not structurally well formed (unresolved ids, bad shapes)."""


class InvalidModelError(MstabError):
    """A valid curve model was required but validation failed."""

    def __init__(self, violations):
        self.violations = list(violations)
        msg = "; ".join(v.message for v in self.violations) or "invalid model"
        super().__init__(msg)


class PreconditionError(MstabError):
    """An operation's documented precondition does not hold."""


class UnbalancedTailError(MstabError):
    """Closed-form discrepancy requested on an unbalanced tail."""


class InternalInvariantError(MstabError):
    """A structural fact the algorithms rely on was contradicted at runtime."""


class BoundExceededError(MstabError):
    """Enumeration was asked to exceed its configured bound."""


class ParseError(MstabError):
    """Input text could not be parsed; carries a location when known."""

    def __init__(self, message, location=None):
        self.location = location
        if location:
            message = f"{message} (at {location})"
        super().__init__(message)
