"""Exception hierarchy shared by the simulation, recurrence and certificate modules."""

from typing import Dict, Optional


class FrogTreesError(Exception):
    """Base class for every error raised by the toolkit."""


class AddressError(FrogTreesError):
    """A vertex address is not valid for the graph it was used with."""


class NavigationError(FrogTreesError):
    """A parent/child move does not exist at the given vertex."""


class BoundError(FrogTreesError):
    """A depth or size argument is outside the supported range."""


class ContractViolation(FrogTreesError):
    """A caller-supplied function broke its documented contract."""


class DomainError(FrogTreesError):
    """A numeric argument lies outside the domain of the function."""


class InputError(FrogTreesError):
    """Inputs violate a precondition of a check or experiment."""


class NumericError(FrogTreesError):
    """An iterative numerical method failed to converge."""


class UsageError(FrogTreesError):
    """Bad command-line usage; the message names the offending flag."""


class ResourceError(FrogTreesError):
    """A configured resource rail was exceeded.

    ``diagnostics`` holds whatever partial progress was made before the rail
    tripped, so callers can report how far the computation got.
    """

    def __init__(self, message: str, diagnostics: Optional[Dict] = None):
        super().__init__(message)
        self.diagnostics: Dict = dict(diagnostics or {})
