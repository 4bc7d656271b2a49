"""Exception and warning types raised across the package."""


class AdhesimError(Exception):
    """Base class for all package errors."""


class NonNormalizable(AdhesimError):
    """Kernel integrates to zero (or a non-finite value) on its support."""


class OutOfDomain(AdhesimError):
    """Spatial point lies outside [0, L]."""


class GridMismatch(AdhesimError):
    """Field length or grid geometry is inconsistent."""


class DegenerateMode(AdhesimError):
    """Mode whose kernel moment vanishes, so no bifurcation value exists."""


class UnsupportedKernel(AdhesimError):
    """Operation not available for this kernel or adhesion function."""


class NonPositiveDensity(AdhesimError):
    """Density must be strictly positive for this operation."""


class NonFiniteState(AdhesimError):
    """Integration produced NaN or infinite values, or lost positivity."""


class StepSizeUnderflow(AdhesimError):
    """Adaptive step size dropped below the representable minimum."""


class NotConverged(AdhesimError):
    """Steady-state search exhausted its time budget."""


class NewtonDiverged(AdhesimError):
    """Damped Newton iteration failed to reduce the residual."""


class SingularJacobian(AdhesimError):
    """Newton Jacobian could not be factorised."""


class ConfigError(AdhesimError):
    """Base class for configuration problems."""


class ParseError(ConfigError):
    def __init__(self, line, message="malformed line"):
        self.line = line
        super().__init__(f"line {line}: {message}")


class UnknownKey(ConfigError):
    def __init__(self, key):
        self.key = key
        super().__init__(f"unknown key {key!r}")


class UnknownValue(ConfigError):
    def __init__(self, key, value, valid):
        self.key = key
        self.value = value
        self.valid = tuple(valid)
        super().__init__(
            f"invalid value {value!r} for {key}; expected one of: {', '.join(self.valid)}"
        )


class RangeError(ConfigError):
    """Numeric configuration value outside its admissible range."""


class KernelBoundaryWarning(UserWarning):
    """Kernel does not vanish at the edge of its support under a bounded sensing mode."""


class AsymptoticRangeWarning(UserWarning):
    """Small-adhesion expansion requested outside its reliable range."""


class UnsupportedAdhesion(AdhesimError):
    """Operation requires a linear adhesion function."""
