"""Exception types raised across the package."""


class EllipticDomainError(ValueError):
    """Argument outside the domain of an elliptic integral or function."""


class OrderingError(ValueError):
    """Riemann invariants supplied out of order."""


class DegenerateStateError(ValueError):
    """Parameters sit on a singular or degenerate point of a formula."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested accuracy."""


class NonTransmissibleError(ValueError):
    """A soliton cannot be transmitted: its amplitude would be non-positive."""


class InadmissibleBackgroundError(ValueError):
    """The phase factor p(q, u) is undefined on the requested background."""


class GeometryError(ValueError):
    """Scenario geometry does not fit on the computational grid."""


class BlowUpError(RuntimeError):
    """The solver detected unbounded growth of the solution."""


class NoPeakError(RuntimeError):
    """No soliton peak with sufficient prominence in the search window."""


class AmbiguousPeakError(RuntimeError):
    """Two or more comparable peaks compete in the search window."""


class InsufficientTailError(RuntimeError):
    """Too few post-interaction samples to estimate a phase shift."""


class InconsistentPlanError(ValueError):
    """A closed-form trajectory plan does not apply to the requested soliton."""
