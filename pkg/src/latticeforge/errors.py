"""Exception types shared across the package."""


class LatticeForgeError(Exception):
    """Base class for all package errors."""


class InvalidSpec(LatticeForgeError):
    """A group specification has malformed or inconsistent parameters."""


class ValidationFailed(LatticeForgeError):
    """A Cayley table failed the group axioms."""


class OrderCapExceeded(LatticeForgeError):
    """Construction would produce a group larger than the configured cap."""


class BudgetExceeded(LatticeForgeError):
    """Subgroup enumeration exceeded the configured subgroup budget."""


class PreconditionFailed(LatticeForgeError):
    """A constructive locator was called on a group outside its hypotheses."""


class InternalContradiction(LatticeForgeError):
    """A case that the underlying theory excludes was reached; signals a bug."""


class ClassificationContradiction(LatticeForgeError):
    """A minimal non-cyclic group fit none of the known families; signals a bug."""
