"""Exception hierarchy."""


class MatSubdiffError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(MatSubdiffError, ValueError):
    pass


class DimensionTooLarge(DimensionMismatch):
    pass


class NonFinite(MatSubdiffError, ValueError):
    pass


class PreconditionViolated(MatSubdiffError, ValueError):
    def __init__(self, failed):
        self.failed = list(failed)
        super().__init__("precondition(s) violated: " + ", ".join(self.failed))


class NotPsd(MatSubdiffError, ValueError):
    """A matrix required to be positive semidefinite is not.

    ``verdict`` holds the :class:`~matsubdiff.symmat.PsdVerdict` with the
    violating unit vector.
    """

    def __init__(self, what, verdict):
        self.verdict = verdict
        super().__init__(
            f"{what} is not positive semidefinite "
            f"(min eigenvalue {verdict.min_eigenvalue:.3g})"
        )


class NegativeScale(MatSubdiffError, ValueError):
    pass


class ZeroDirection(MatSubdiffError, ValueError):
    pass


class NotUnivariate(MatSubdiffError, ValueError):
    pass


class NotDifferentiable(MatSubdiffError, ValueError):
    def __init__(self, coordinate, gap):
        self.coordinate = coordinate
        self.gap = gap
        super().__init__(
            f"one-sided partial derivatives differ along coordinate {coordinate} "
            f"(gap {gap:.3g})"
        )


class NoSmoothSamples(MatSubdiffError, RuntimeError):
    pass


class BudgetZero(MatSubdiffError, ValueError):
    pass


class UnknownExample(MatSubdiffError, LookupError):
    pass


class SpecParseError(MatSubdiffError, ValueError):
    """Malformed function-spec document; ``path`` locates the offending node."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")
