"""Exception hierarchy shared by all modules.

Two families: `DomainError` for violated preconditions on caller input
(CLI exit code 2), `GuardError` for internal consistency checks that can
only fail on an implementation bug (CLI exit code 3).
"""


class DomainError(ValueError):
    """A precondition on user-supplied input does not hold."""


class GuardError(RuntimeError):
    """An internal invariant failed; indicates a bug, not bad input."""
