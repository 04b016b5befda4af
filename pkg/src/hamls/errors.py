"""Exception types shared across the package."""


class AmlsError(Exception):
    """Base class for numerical failures raised by this package."""


class QuadratureError(AmlsError):
    """Adaptive quadrature did not reach the requested tolerance."""


class NotSPDError(AmlsError):
    """A matrix required to be symmetric positive definite is not."""


class EigenSolveError(AmlsError):
    """The underlying symmetric eigensolver failed to converge."""


class SingularBlockError(AmlsError):
    """A pivot block is singular; the factorisation broke down."""


class EmptySubspaceError(AmlsError):
    """Column elimination removed every candidate basis vector."""


class StructureMismatchError(AmlsError):
    """Operands do not share a compatible block structure."""


class RecursionLimitError(AmlsError):
    """Defensive cap on the substructuring recursion depth was hit."""
