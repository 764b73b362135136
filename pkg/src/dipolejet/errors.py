"""Exception hierarchy."""


class DipoleError(Exception):
    """Base class for all library errors."""


class NoUniqueProjection(DipoleError):
    """Point is too far from the boundary for a unique closest point."""


class OrderUnavailable(DipoleError):
    """Requested derivative order exceeds what the potential provides exactly."""


class Collision(DipoleError):
    """The two vortices came closer than the collision floor."""


class StepFailure(DipoleError):
    """Adaptive step size underflowed."""


class Trapped(DipoleError):
    """The positive vortex did not leave the closed domain before ``s_max``."""


class CompanionHidden(DipoleError):
    """The negative vortex is inside the domain at the exit time."""


class DegenerateVelocity(DipoleError):
    """Requested launch velocity equals the potential drift."""


class NoTransitionFound(DipoleError):
    """Scan arc has no entering/non-entering transition."""


class XiInsideTildeOmega(DipoleError):
    """A launch position of the companion falls inside the enlarged domain."""


class NonpositiveSlope(DipoleError):
    """Estimated exit-time slope at the tangent launch is not positive."""


class IllConditioned(DipoleError):
    """Extrapolation levels disagree beyond tolerance."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class SegmentLeavesValidity(DipoleError):
    """Integration segment leaves the gradient model's validity disk."""


class ConfigError(DipoleError):
    """Invalid experiment configuration."""
