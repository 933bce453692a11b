"""Exception types shared across the engine."""


class QCoveringError(Exception):
    """Base class for all engine errors."""


class ScalarParseError(QCoveringError):
    pass


class NonInvertible(QCoveringError):
    """Raised when inverting an element with a vanishing pi-component.

    Q(q)^pi has zero divisors (e.g. 1+pi), so invertibility must be
    checked componentwise.
    """


class NegativeWeight(QCoveringError):
    pass


class SameIndex(QCoveringError):
    pass


class DimensionMismatch(QCoveringError):
    """The two pi-specializations disagree on a rank/dimension.

    Signals a datum outside the hypotheses of the theory.
    """


class ConsistencyFailure(QCoveringError):
    """An internal cross-check of the quasi-K-matrix construction failed."""


class TruncationOverflow(QCoveringError):
    """A product left the configured height window."""


class WeightOutOfRange(QCoveringError):
    pass


class NotDominant(QCoveringError):
    pass


class RankUnsupported(QCoveringError):
    pass


class TriangularityFailure(QCoveringError):
    """The bar operator is not unitriangular in the chosen basis order."""


class LatticeNotPreserved(QCoveringError):
    """An operator expected to preserve the integral lattice does not."""


class DepthExceeded(QCoveringError):
    pass


class UnsupportedPresentation(QCoveringError):
    pass
