"""Exception types shared across the toolkit."""


class FormationError(Exception):
    """Base class for every error raised by formation_lab."""


class SingularTransform(FormationError):
    """Transformation is not invertible at the verification tolerance."""


class DegenerateTransform(FormationError):
    """Closed-form inversion hit a vanishing denominator."""


class NonstabilizableMinor(FormationError):
    """A leading principal minor of the inverse transform is (numerically) zero."""


class SearchExhausted(FormationError):
    """No diagonal entry kept the closed-loop spectrum in the required half-plane."""


class SingularBlock(FormationError):
    """The partitioned eigenvalue step requires an invertible leading block."""


class DegenerateCondition(FormationError):
    """The closed-form quadratic stability inequality has a zero denominator."""


class CoincidentAgents(FormationError):
    """Two agents share a position; pairwise distance terms are undefined."""


class SingularBand(FormationError):
    """An inter-agent distance sits on the avoidance radius where the potential blows up."""


class ConfigError(FormationError):
    """A scenario configuration is missing, malformed, or inconsistent."""


class NumericalBlowup(FormationError):
    """Integration produced a state beyond the magnitude guard.

    Carries the failing time, the index of the worst component, and the
    partially filled trajectory log so callers can flush what was computed.
    """

    def __init__(self, message, t=None, component=None, partial_log=None):
        super().__init__(message)
        self.t = t
        self.component = component
        self.partial_log = partial_log
