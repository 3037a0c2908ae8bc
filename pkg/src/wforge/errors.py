"""Exception hierarchy shared by all modules."""


class WforgeError(ValueError):
    """Base class for domain errors raised by wforge."""


class NotHermitianError(WforgeError):
    def __init__(self, deviation):
        super().__init__(f"matrix is not Hermitian (max |M - M^dag| = {deviation:.3e})")
        self.deviation = deviation


class NotPSDError(WforgeError):
    pass


class DimensionError(WforgeError):
    pass


class NotWitnessError(WforgeError):
    """Operator fails one of the witness conditions (positivity on products,
    a negative eigenvalue, unit trace)."""


class NotPPTError(WforgeError):
    pass


class NotEdgeError(WforgeError):
    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class ToleranceFailure(WforgeError):
    """An internal consistency check exceeded its tolerance."""
