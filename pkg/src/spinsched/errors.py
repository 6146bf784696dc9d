"""Exception hierarchy shared across the package."""


class SpinschedError(ValueError):
    """Base class for all errors raised by spinsched."""


class ValidationError(SpinschedError):
    """A spin system, policy or gate description violates its invariants."""


class ScheduleError(SpinschedError):
    """A schedule is malformed or inconsistent with its spin system."""


class PackingError(SpinschedError):
    """No real-time layout satisfies the packing constraints."""


class GenerationError(SpinschedError):
    """A generator scheme cannot produce a valid schedule for its inputs."""


class SimulationError(SpinschedError):
    """A simulation request is out of range or inconsistent."""


class SpectrumError(SpinschedError):
    """Acquisition parameters cannot represent the requested spectrum."""
