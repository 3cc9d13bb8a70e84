"""Exception hierarchy shared by all modules."""


class EllipticCanonError(Exception):
    """Base class for every error raised by this package."""


class DegenerateLeadingCoefficient(EllipticCanonError):
    pass


class NotElliptic(EllipticCanonError):
    pass


class InvalidParams(EllipticCanonError):
    pass


class SingularTransform(EllipticCanonError):
    pass


class PoleHit(EllipticCanonError):
    pass


class InternalInconsistency(EllipticCanonError):
    """An algebraic invariant that must hold for elliptic input was violated."""


class DegenerateMultiplier(EllipticCanonError):
    pass


class OutOfTheoremRange(EllipticCanonError):
    pass


class SolverDiverged(EllipticCanonError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class MaxIterations(EllipticCanonError):
    def __init__(self, message, iterations=None, grad_norm=None):
        super().__init__(message)
        self.iterations = iterations
        self.grad_norm = grad_norm


class ParseError(EllipticCanonError):
    def __init__(self, message, offset, expected=()):
        self.offset = offset
        self.expected = tuple(sorted(expected))
        exp = ", ".join(self.expected)
        super().__init__(f"{message} at offset {offset}" + (f" (expected one of: {exp})" if exp else ""))
