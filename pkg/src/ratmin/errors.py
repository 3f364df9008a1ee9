"""Exception types shared across the package."""


class RatminError(Exception):
    """Base class for every error raised by this package."""


class ParseError(RatminError):
    """A sample file row could not be parsed into four finite floats."""


class DuplicateNode(RatminError):
    """Two sample nodes compare exactly equal after parsing."""

    def __init__(self, message: str, indices: tuple[int, int] | None = None):
        super().__init__(message)
        self.indices = indices


class UnknownProblem(RatminError):
    """Requested builtin problem name is not registered."""


class BadSize(RatminError):
    """Sample count is invalid for the requested problem or degrees."""


class RankBreakdown(RatminError):
    """Orthogonalization collapsed: the weighted nodes cannot support the
    requested polynomial degree."""


class SupportTooSmall(RatminError):
    """Too few strictly positive weights to determine the coefficient pair."""


class DegenerateDenominator(RatminError):
    """Every candidate denominator vanishes on the weighted nodes, so the
    unit-norm constraint cannot be met."""


class NotDifferentiable(RatminError):
    """Gradient requested where the dual value is not differentiable
    (repeated smallest eigenvalue or boundary weights)."""


class AllResidualsZero(RatminError):
    """Weighted residual sum is zero: the current approximant interpolates
    all positively weighted samples, so the weight update is undefined."""


class ExactFit(RatminError):
    """Maximum residual is exactly zero: the fit is perfect."""


class DegenerateBound(RatminError):
    """The step lower bound is undefined (zero weighted residual mass)."""


class EmptySupport(RatminError):
    """The index set {j : w_j * r_j > 0} is empty."""


class ZeroPolynomial(RatminError):
    """All coefficients fall below the degree-detection tolerance."""


class RankDeficient(RatminError):
    """Matrix rank condition on the actively weighted rows is violated."""


class GridTooLarge(RatminError):
    """Coefficient grid would exceed the search-size guard."""


class StepUnderflow(RatminError):
    """Finite-difference step is too small to be meaningful."""


class SchemaMismatch(RatminError):
    """Run record does not match the expected schema."""
