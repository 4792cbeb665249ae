"""Exception hierarchy and warnings.

Two error families matter to callers (and to the CLI exit codes):
``InputError`` for malformed or out-of-contract inputs, and
``NumericalError`` for solver / convergence / degeneracy failures on
inputs that were individually well-formed.
"""


class FJOpinionsError(Exception):
    """Base class for all package errors."""


class InputError(FJOpinionsError):
    """Malformed input: bad files, bad dimensions, out-of-range parameters."""


class NumericalError(FJOpinionsError):
    """A numerical procedure failed: no convergence, singular system, ..."""


# --- input-side errors -------------------------------------------------

class DimensionMismatch(InputError):
    """Vector or matrix sizes do not agree with the graph."""


class NonSymmetricInput(InputError):
    """A matrix that must be symmetric is not (beyond tolerance)."""


class GraphFormatError(InputError):
    """An edge-list / opinion / embedding file could not be parsed."""


class SharedAlphaRequired(InputError):
    """Operation only defined for a shared susceptibility value."""


class SingularSusceptibility(InputError):
    """Susceptibility entries outside the open interval (0, 1)."""


class TooLarge(InputError):
    """Exhaustive enumeration requested on an instance that is too big."""


class SizeConditionViolated(InputError):
    """Community sizes violate the closed-form certificate's size condition."""


class EmptySample(InputError):
    """A statistical test received no data."""


# --- numerical errors --------------------------------------------------

class NoConvergence(NumericalError):
    """Iteration did not reach the requested tolerance within max_iter."""


class SingularSystem(NumericalError):
    """A linear system that should be positive definite failed to factor."""


class NoNashEquilibrium(NumericalError):
    """The equilibrium system is inconsistent: no solution exists."""


class DegenerateCoefficient(NumericalError):
    """A best-response equation has a (near-)zero leading coefficient."""


class DegenerateBaseline(NumericalError):
    """The truthful-equilibrium cost is ~0; cost ratios are undefined."""


class GradientMismatch(NumericalError):
    """Analytic and finite-difference gradients disagree (internal bug)."""


class RankDeficientActiveSet(NumericalError):
    """Robust-regression active set lost column rank."""


class OracleAssertionFailure(NumericalError):
    """A self-checking oracle found an inconsistency (internal bug)."""


# --- warnings -----------------------------------------------------------

class InsufficientSeparation(UserWarning):
    """Top-k residual gap is ~0: strategic-set membership is ambiguous."""
