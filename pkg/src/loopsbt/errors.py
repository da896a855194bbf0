"""Exception types shared across the package."""


class CurveError(ValueError):
    """Curve descriptor rejected (degenerate, self-intersecting, or unresolved)."""


class FrameError(RuntimeError):
    """Orthonormal frame construction failed its closure/accuracy checks."""


class GeometryError(ValueError):
    """Operation requested on an inadmissible slender geometry."""


class ConditioningError(RuntimeError):
    """Linear solve rejected because the condition estimate is untrustworthy.

    Carries the estimate so callers can report it.
    """

    def __init__(self, message, estimate):
        super().__init__(message)
        self.estimate = estimate
