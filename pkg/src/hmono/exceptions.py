"""Exception hierarchy shared by all hmono modules."""


class HMonoError(Exception):
    """Base class for every error raised by this package."""


class DomainError(HMonoError, ValueError):
    """An argument lies outside the domain of the operation (non-finite, r <= 0, ...)."""


class StructuralHypothesisError(HMonoError):
    """A cost kernel fails homogeneity or ellipticity.

    ``unit_vector`` holds the offending sample point when one is known.
    """

    def __init__(self, message, unit_vector=None):
        super().__init__(message)
        self.unit_vector = unit_vector


class InconsistencyError(HMonoError):
    """Two computations that must agree (or bracket each other) do not."""


class ResolutionError(HMonoError):
    """Too few grid nodes fall inside a ball to resolve the requested quantity."""


class UnsupportedDimensionError(HMonoError, ValueError):
    pass


class InputError(HMonoError, ValueError):
    """Malformed input: mismatched lengths, bad file header, bump leaving the box."""


class ProbeInvalidError(HMonoError):
    """A scaling probe mixed the two branches of the L-infinity estimate."""


class GeneratorRejectedError(HMonoError):
    """A generated map failed its monotonicity verification."""

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


class ControlFailureError(HMonoError):
    """A negative-control map unexpectedly passed the monotonicity check."""

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report
