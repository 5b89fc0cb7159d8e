"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: SpecError -> 2, CapacityError -> 3,
NumericalError -> 4.
"""

from __future__ import annotations


class SpecError(ValueError):
    """Invalid user input: bad spec string, malformed file, failed validation.

    ``condition`` optionally names the violated structural condition
    (e.g. "symmetry", "connectivity", "ellipticity") for validators.
    """

    def __init__(self, message: str, condition: str | None = None):
        super().__init__(message)
        self.condition = condition


class CapacityError(RuntimeError):
    """A requested computation exceeds a configured size/budget cap."""


class NumericalError(RuntimeError):
    """An iterative solver failed to reach its tolerance."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual
