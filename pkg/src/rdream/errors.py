"""Exception and warning types raised across the package."""


class RdreamError(Exception):
    """Base class for all errors raised by rdream."""


class InputError(RdreamError, ValueError):
    """Malformed user input (shapes, missing columns, bad configuration)."""


class NonFinite(InputError):
    def __init__(self, where, index):
        self.where = where
        self.index = index
        super().__init__(f"non-finite value in {where} at {index}")


class TooFewObservations(InputError):
    def __init__(self, n, minimum=3):
        self.n = n
        super().__init__(f"need at least {minimum} observations, got {n}")


class EmptyCovariates(InputError):
    def __init__(self):
        super().__init__("covariate matrix has no columns")


class ShapeMismatch(InputError):
    pass


class DataFileNotFound(InputError):
    def __init__(self, path):
        self.path = str(path)
        super().__init__(f"data file not found: {path}")


class MissingColumn(InputError):
    def __init__(self, name, path=""):
        self.name = name
        super().__init__(f"column {name!r} not found" + (f" in {path}" if path else ""))


class AllRowsDropped(InputError):
    def __init__(self, path, dropped):
        self.path = str(path)
        self.dropped = dropped
        super().__init__(f"all {dropped} rows of {path} have missing or non-numeric cells")


class NumericError(RdreamError, ArithmeticError):
    """A numerical degeneracy that prevents a result from being computed."""


class SingularCovariance(NumericError):
    def __init__(self, eigenvalue, largest):
        self.eigenvalue = eigenvalue
        self.largest = largest
        super().__init__(
            f"sample covariance is singular: eigenvalue {eigenvalue:.3e} "
            f"below floor relative to largest {largest:.3e}"
        )


class RankDeficientDesign(NumericError):
    pass


class GradientUnavailable(NumericError):
    pass


class SingularLocalFit(NumericError):
    def __init__(self, anchor, support):
        self.anchor = anchor
        self.support = support
        super().__init__(
            f"local linear fit at anchor {anchor} has only {support} points "
            "with nonzero weight after bandwidth inflation"
        )


class DegenerateBandwidth(NumericError):
    pass


class DegenerateVariance(NumericError):
    """Every pair of points lies outside the kernel support."""


class EigenFailure(NumericError):
    pass


class NonConvergenceWarning(RuntimeWarning):
    """An iterative fit hit its iteration cap; the last iterate is returned."""
