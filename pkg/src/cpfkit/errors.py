"""Exception types shared across the package."""


class CpfError(Exception):
    """Base class for all errors raised by cpfkit."""


class DomainError(CpfError, ValueError):
    """A parameter lies outside its mathematical domain (e.g. eta > 1)."""


class InvalidStateError(CpfError, ValueError):
    """A Gaussian state is malformed or unphysical."""


class NumericError(CpfError, ArithmeticError):
    """A numerical computation failed (singular matrix, non-finite result)."""
