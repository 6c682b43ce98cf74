"""Exception types shared across the package.

The CLI maps these onto distinct exit codes: configuration problems,
numerical failures during a run, and I/O errors.
"""


class ConfigError(ValueError):
    """Invalid or inconsistent scenario configuration."""


class NumericsError(RuntimeError):
    """Base class for numerical failures during solving or simulation."""


class NumericalDivergenceError(NumericsError):
    """A state, Riccati sample, or integrator step became non-finite."""


class SingularConfigurationError(NumericsError):
    """Arm configuration too close to a kinematic singularity."""


class UnreachableTargetError(NumericsError):
    """Cartesian target outside the arm workspace."""


class ScheduleRangeError(NumericsError):
    """Schedule evaluated outside its tabulated time range."""


class SingularKKTError(NumericsError):
    """Transcription KKT system is singular (uncontrollable discretization)."""
