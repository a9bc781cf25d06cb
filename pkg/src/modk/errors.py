"""Exception types shared across the package."""

from __future__ import annotations


class GraphError(ValueError):
    """Malformed graph data or an operation applied to the wrong object."""


class PreconditionError(ValueError):
    """A stated hypothesis of the requested construction does not hold."""


class PinError(PreconditionError):
    """A requested exact out-degree is not a plausible value, or unreachable."""


class ContractViolation(RuntimeError):
    """A step the underlying theory guarantees has failed.

    Under valid preconditions this never fires; when it does, the payload
    is evidence worth keeping (a candidate counterexample or a bug).
    """


class SizeGuardExceeded(RuntimeError):
    """An exhaustive check was asked to run beyond its instance-size guard."""
