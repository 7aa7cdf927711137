"""Exception types raised across the package.

Each class name doubles as the error label printed by the CLI, so keep
them stable.
"""


class UnitaryDiracError(Exception):
    """Base class for domain errors (CLI exit code 1)."""


class SingularRegime(UnitaryDiracError):
    """Conventional Dirac-Coulomb energy has no real value (Z*alpha >= j + 1/2)."""


class InvalidQuantumNumbers(UnitaryDiracError, ValueError):
    pass


class SeriesGuardError(UnitaryDiracError):
    pass


class NoConvergence(UnitaryDiracError):
    pass


class GridTooCoarse(UnitaryDiracError):
    pass


class ForwardDivergence(UnitaryDiracError):
    """Scattering angle below the configured theta_min."""


class KinematicsError(UnitaryDiracError, ValueError):
    pass


class OffShellError(KinematicsError):
    pass


class ZeroDensity(UnitaryDiracError):
    """Gauge functions need psi-bar psi nonzero at every site."""


class GridError(UnitaryDiracError, ValueError):
    pass


class StabilityError(UnitaryDiracError):
    pass


class WeakFieldError(UnitaryDiracError):
    pass


class LorentzError(UnitaryDiracError, ValueError):
    pass


class NormalizationError(UnitaryDiracError, ValueError):
    pass
