"""Exception hierarchy shared by every omq module."""

from __future__ import annotations


class OmqError(Exception):
    """Base class for all errors raised by this package."""


class ModelError(OmqError, ValueError):
    """A value violates a structural invariant (arity, term kinds, safety)."""


class ParseError(OmqError):
    """Base for errors with a source location."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


class ProgramSyntaxError(ParseError):
    """Malformed token or production."""


class ArityError(ParseError):
    """A predicate use conflicts with its declared or inferred arity."""


class SafetyError(ParseError):
    """Answer variable missing from a body, or head variable unbound."""


class ReservedNameError(ParseError):
    """A user constant or predicate strays into a reserved namespace."""


class InactiveTrigger(OmqError):
    """A chase step was requested for a trigger whose body image is absent."""


class PreconditionViolated(OmqError):
    """An operation's stated precondition does not hold (e.g. recursive input)."""


class UnsupportedClass(OmqError):
    """The rule set falls outside the classes this operation can decide."""


class BudgetExhausted(OmqError):
    """Rewriting hit its step budget before reaching a fixpoint.

    Carries the partially computed disjuncts in ``partial``.
    """

    def __init__(self, message: str, partial=()):
        super().__init__(message)
        self.partial = tuple(partial)


class SchemaMismatch(OmqError):
    """Two queries disagree on data schema or answer arity."""


class ZeroAryAtom(OmqError):
    """Components are undefined for sets of atoms containing 0-ary atoms."""


class EmptyBody(OmqError):
    """Components are undefined for the empty-body query."""
