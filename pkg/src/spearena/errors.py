"""Shared exception types and their CLI exit codes."""

EXIT_OK = 0
EXIT_REJECTED = 2
EXIT_UNSUPPORTED = 3
EXIT_INPUT = 4
EXIT_RESOURCE = 5


class SpearenaError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class InputError(SpearenaError):
    """Malformed or inconsistent input (schema, dangling refs, bad relations)."""

    exit_code = EXIT_INPUT


class PreconditionError(InputError):
    """An operation was called outside its stated domain."""


class UnsupportedError(SpearenaError):
    """A player-count / preference-kind combination the solver does not cover."""

    exit_code = EXIT_UNSUPPORTED


class ResourceCapError(SpearenaError):
    """A configured size cap (state count, profile space, enumeration bound) was exceeded."""

    exit_code = EXIT_RESOURCE


class InternalSolveError(SpearenaError):
    """A solver produced an object that failed its own verification.

    This is a bug indicator, never an expected outcome on valid inputs.
    """
