"""Exception types raised by frustum_kit."""


class FrustumError(Exception):
    """Base class for geometric or numerical failures."""


class SingularMatrixError(FrustumError):
    pass


class SingularProjectionError(SingularMatrixError):
    """An assembled projection matrix has no inverse."""


class NotConcurrentError(FrustumError):
    """Side planes do not share a common (possibly infinite) point."""


class SingularSystemError(FrustumError):
    """The side-plane coefficient system has no unique solution."""


class DegenerateFarPointError(FrustumError):
    pass


class NoConvergenceError(FrustumError):
    pass


class DegenerateInitError(FrustumError):
    pass


class DegenerateNormalError(FrustumError):
    pass


class ZeroNormalError(FrustumError):
    pass


class PointAtInfinityError(FrustumError):
    pass


class CameraInPositiveHalfspaceError(FrustumError):
    pass


class DegenerateClipError(FrustumError):
    pass


class DegenerateRectError(FrustumError):
    pass


class ObserverOnPlaneError(FrustumError):
    pass


class SingularDenominatorError(FrustumError):
    """The non-affine mapping hit a zero denominator on one axis."""

    def __init__(self, axis: str, value: float):
        super().__init__(f"denominator for axis {axis!r} vanished ({value:.3g})")
        self.axis = axis
        self.value = value


class FrustumWarning(UserWarning):
    """A construction succeeded but the result failed validation."""
