"""Exception types raised by the engine.

Everything derives from FinslerKitError so callers can catch engine
failures in one place.  Schema/domain problems map to CLI exit code 2,
residual failures are reported, not raised.
"""


class FinslerKitError(Exception):
    """Base class for all engine errors."""


class DomainError(FinslerKitError):
    """Input left the mathematical domain (sqrt/log of nonpositive value,
    point outside the unit ball, zero fiber vector, ...)."""


class DivisionByZeroValue(DomainError):
    """Jet division where the denominator's value part is below the floor."""


class OrderExceeded(FinslerKitError):
    """A derivative was requested beyond the truncation order of a jet."""


class NotPositiveDefinite(FinslerKitError):
    """A matrix required to be positive definite is not."""


class SingularMetric(FinslerKitError):
    """Fundamental tensor too ill-conditioned to invert reliably."""


class UnsupportedVariance(FinslerKitError):
    """Tensor rank/variance combination outside the supported table."""


class InvalidSpec(FinslerKitError):
    """Constructor parameters violate a documented precondition."""


class RandersConditionViolated(DomainError):
    """||beta||_alpha >= 1 at an evaluation point."""


class UnsupportedCurvature(InvalidSpec):
    """Space-form curvature outside the supported set {0, -1}."""


class IntegrationDidNotConverge(FinslerKitError):
    """Indicatrix volume solve failed to reach tolerance."""


class NotProjective(FinslerKitError):
    """A projective factor was demanded for a field that is not projective."""


class IsotropyUnknown(FinslerKitError):
    """Isotropic S-curvature factor c(x) neither supplied nor detectable."""


class EquivalenceViolation(FinslerKitError):
    """Classification routes that must agree disagreed decisively."""


class RankDeficientSampling(FinslerKitError):
    """Dimension scan nullity kept changing as points were added."""


class SchemaError(FinslerKitError):
    """Job document failed validation against the JobSpec schema."""
