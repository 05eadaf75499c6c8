class QCayleyError(Exception):
    """Base class for every error raised by qcayley."""


class NotHermitian(QCayleyError, ValueError):
    pass


class NotUnitary(QCayleyError, ValueError):
    pass


class NoConvergence(QCayleyError, RuntimeError):
    pass


class EigenvalueNearMinusOne(QCayleyError, ValueError):
    """The inverse Cayley map is singular at eigenvalue -1."""


class NoValidPhase(QCayleyError, RuntimeError):
    pass


class BadShape(QCayleyError, ValueError):
    pass


class ParseError(QCayleyError, ValueError):
    pass


class TooManyQubits(QCayleyError, ValueError):
    pass


class DuplicateNodes(QCayleyError, ValueError):
    pass


class IllConditioned(QCayleyError, ArithmeticError):
    pass


class DomainError(QCayleyError, ValueError):
    pass


class TooLarge(QCayleyError, ValueError):
    """Instance exceeds the exhaustive-search guard of the exact W oracle."""


class NoFeasiblePolynomial(QCayleyError, RuntimeError):
    pass


class TooManyWitnessBits(QCayleyError, ValueError):
    pass


class Ambiguous(QCayleyError, ValueError):
    """No count decodes uniquely from the observed probability."""


class ConfigError(QCayleyError, ValueError):
    pass
