"""Exception hierarchy.

Mathematical failures (a code that cannot be decoded, an operator that is not
a partial isometry) are distinguished from plain input validation errors so the
command line can map them onto different exit codes.
"""

from __future__ import annotations


class QECError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(QECError, ValueError):
    """Malformed input: shape mismatch, non-square matrix, bad tolerance."""


class MathematicalFailure(QECError):
    """A well-formed input fails a mathematical property."""


class NotDecodable(MathematicalFailure):
    """The Knill-Laflamme residual test failed for some pair of noise operators.

    Attributes
    ----------
    pair : tuple of int
        Indices ``(j, k)`` of the worst-violating pair in the noise basis.
    residual : float
        Frobenius norm of ``P N_j^* N_k P - lambda P`` for that pair.
    """

    def __init__(self, message: str, pair: tuple[int, int] | None = None, residual: float = float("nan")):
        super().__init__(message)
        self.pair = pair
        self.residual = residual


class DegenerateGram(MathematicalFailure):
    """The decoding Gram matrix is not positive definite (negligible noise remains)."""

    def __init__(self, message: str, min_eigenvalue: float = float("nan")):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class EquivalenceFailure(MathematicalFailure):
    def __init__(self, condition: str, residual: float):
        super().__init__(f"condition ({condition}) violated: residual {residual:.3e}")
        self.condition = condition
        self.residual = residual


class CompletenessViolation(MathematicalFailure):
    """Kraus operators do not satisfy sum K^* K = I (or the projection structure)."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


class NotPartialIsometry(MathematicalFailure):
    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


class NotPowerPartialIsometry(NotPartialIsometry):
    """Some power of the operator fails to be a partial isometry, so its wandering
    iterates never vanish and no finite Wold split exists."""


class NotShift(MathematicalFailure):
    pass


class EmptyCode(MathematicalFailure):
    pass


class NotReducing(MathematicalFailure):
    def __init__(self, message: str, block: int, residual: float):
        super().__init__(message)
        self.block = block
        self.residual = residual


class InternalMismatch(MathematicalFailure):
    """Two independent computations of the same object disagree beyond tolerance."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual
