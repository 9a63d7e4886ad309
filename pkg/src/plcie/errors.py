"""Exception hierarchy. The CLI maps each family to an exit code."""


class PlcieError(Exception):
    exit_code = 1


class UsageError(PlcieError, ValueError):
    """Caller passed arguments that don't fit together (dimensions, fields, modes)."""

    exit_code = 2


class FormatError(PlcieError, ValueError):
    """Malformed input file, key string or container."""

    exit_code = 3


class CryptoError(PlcieError):
    exit_code = 4


class KeyConstraintError(CryptoError, ValueError):
    pass


class WeakKeyError(CryptoError, ValueError):
    pass


class KeyRejected(CryptoError):
    """Parameter derivation exhausted its retry budget."""


class SingularMatrixError(CryptoError, ArithmeticError):
    pass


class RetryNeeded(CryptoError):
    """An orbit window repeated a value; the seed has to be perturbed."""


class FieldDomainError(PlcieError, ZeroDivisionError):
    """Inverse of zero requested."""

    exit_code = 4


class UndefinedCorrelationError(UsageError):
    pass
