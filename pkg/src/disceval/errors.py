"""Exception and warning types shared across the toolkit."""


class DiscevalError(Exception):
    """Base class for all toolkit errors."""


class InputError(DiscevalError):
    """Bad input files, formats, or arguments (CLI exit code 2)."""


class ComputationError(DiscevalError):
    """A computation could not produce a defined result (CLI exit code 1)."""


class TreeSyntaxError(InputError):
    """Malformed serialized tree."""


class TreeValidationError(InputError):
    """Structural invariant violated in strict mode."""


class KernelOverflowError(ComputationError):
    """Kernel accumulation left double-precision range."""


class ValidationWarning(UserWarning):
    """Invariant violation tolerated in lenient mode."""


class DataWarning(UserWarning):
    """Recoverable data problem (missing score, degenerate normalization, ...)."""
