"""Exception types raised across the package."""


class BubbleforgeError(Exception):
    """Base class for all package-specific errors."""


class NonpositiveValue(BubbleforgeError):
    """A field was evaluated where its value is not strictly positive."""


class KappaTooLarge(BubbleforgeError):
    """The curvature-deviation parameter satisfies kappa^2 >= 1."""


class AtCenter(BubbleforgeError):
    """Evaluation at an inversion center with no continuous extension."""


class Coincident(BubbleforgeError):
    """Kernel evaluated at coincident source and target points."""


class BadRadii(BubbleforgeError):
    """Radii do not satisfy the required ordering."""


class BadConfig(BubbleforgeError):
    """A glue configuration violates its preconditions."""


class OverlapError(BadConfig):
    """Cutoff supports of a disjoint glue intersect."""


class NoSolution(BubbleforgeError):
    """The admissible band for the cut radius is empty."""


class InvalidGeometry(BubbleforgeError):
    """Ball/scale geometry violates the two-bubble hypotheses."""


class ProfileViolated(BubbleforgeError):
    """Sampled field data exceeds its declared singular-profile bounds."""


class OutOfDomain(BubbleforgeError):
    """Evaluation outside a field's declared regular domain or window."""


class FitDiverged(BubbleforgeError):
    """The bubble fit left the admissible scale range."""
