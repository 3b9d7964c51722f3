"""Exception hierarchy shared by all kerrmod modules."""


class KerrmodError(Exception):
    """Base class for every error raised by kerrmod."""

    kind = "error"

    fields = ()

    def to_record(self):
        rec = {"error": self.kind, "message": str(self)}
        for name in self.fields:
            rec[name] = getattr(self, name)
        return rec


class InvalidParameterError(KerrmodError, ValueError):
    kind = "invalid-parameter"


class TruncationOverflowError(KerrmodError):
    """Probability mass piled up at the top of the truncated Fock basis."""

    kind = "truncation-overflow"
    fields = ("time", "tail_mass", "trajectory")

    def __init__(self, message, time=None, tail_mass=None, trajectory=None):
        super().__init__(message)
        self.time = time
        self.tail_mass = tail_mass
        self.trajectory = trajectory


class StepFailureError(KerrmodError):
    """A stochastic step collapsed the state norm (dt too large)."""

    kind = "step-failure"
    fields = ("time", "trajectory")

    def __init__(self, message, time=None, trajectory=None):
        super().__init__(message)
        self.time = time
        self.trajectory = trajectory


class UndefinedQError(KerrmodError, ValueError):
    kind = "undefined-q"


class StepSizeError(KerrmodError):
    kind = "step-size"


class CorruptedDensityError(KerrmodError, ValueError):
    kind = "corrupted-density"


class NoSuperpositionTimeError(KerrmodError):
    kind = "no-superposition-time"


class StrobeUndefinedError(KerrmodError, ValueError):
    kind = "strobe-undefined"


class ConvergenceError(KerrmodError):
    kind = "convergence"


class StiffnessError(KerrmodError):
    kind = "stiffness"


class ConfigError(KerrmodError, ValueError):
    """Bad run configuration; ``key`` names the offending entry."""

    kind = "config"
    fields = ("key",)

    def __init__(self, message, key=None, kind=None):
        super().__init__(message)
        self.key = key
        if kind is not None:
            self.kind = kind
