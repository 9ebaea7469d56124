"""Exception hierarchy.

All domain errors derive from :class:`BrlabError`.  The CLI maps
``BrlabError`` to exit code 2 (assumption violation) and plain
``ValueError`` (malformed input) to exit code 1.
"""


class BrlabError(Exception):
    """Base class for all domain errors."""


class DegenerateMatrix(BrlabError):
    """A payoff matrix has equal entries within a column (or row of B)."""


class NotZeroSumEquivalent(BrlabError):
    """No linear equivalence to a zero-sum game exists."""


class NoInteriorEquilibrium(BrlabError):
    """The indifference systems have no unique interior solution."""


class OnIndifferencePlane(BrlabError):
    """A point lies within the tie tolerance of an indifference plane."""


class AtEquilibrium(BrlabError):
    """Operation undefined at the equilibrium point."""


class OutsideSimplex(BrlabError):
    """Central projection leaves the strategy simplex before the target level."""


class NoCrossing(BrlabError):
    """No positive crossing time exists; the flow state is invalid."""


class DegenerateCrossing(BrlabError):
    """Two candidate crossings coincide (simultaneous switch)."""


class ConvergedToEquilibrium(BrlabError):
    """A best-response orbit has decayed below the resolvable level."""


class ParallelFlow(BrlabError):
    """The region velocity is parallel to the requested exit plane."""


class IllegalLoop(BrlabError):
    """An itinerary loop uses a transition that is not a diagram arrow."""


class EmptyPiece(BrlabError):
    """A section piece has an empty feasible set."""


class WrongMode(BrlabError):
    """An orbit of the wrong time parametrization was supplied."""


class TheoremViolation(BrlabError):
    """The enumeration does not reproduce the expected class counts."""


class RealizationNotFound(BrlabError):
    """Rejection sampling exhausted its budget without a realization."""
