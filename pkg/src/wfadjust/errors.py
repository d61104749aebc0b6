"""Exceptions shared across the package.

The CLI maps these onto exit codes: InputDataError -> 2,
NoEvaluablePatientsError -> 3. Everything else is a plain ValueError.
"""


class InputDataError(ValueError):
    """Malformed or inconsistent input data (CSV rows, duplicate ids, ...)."""


class NoEvaluablePatientsError(RuntimeError):
    """A data cut left no patient with at least one observed scan."""
