"""Exception types shared across the package."""


class PlantedLabError(Exception):
    """Base class for all package-specific errors."""


class InvalidSpec(PlantedLabError, ValueError):
    """Model parameters violate their constraints (probabilities outside [0,1], etc.)."""


class ShapeMismatch(PlantedLabError, ValueError):
    """An array does not have the shape or symmetry an operation requires."""


class InvalidParams(PlantedLabError, ValueError):
    """Split parameters define a negative probability mass."""


class NonBinaryInput(PlantedLabError, ValueError):
    """A 0/1 array was expected but other values were found."""


class DegenerateConditioning(PlantedLabError, ZeroDivisionError):
    """Conditioning event has probability zero (qa = 1 in the Bernoulli split)."""


class EigenFailure(PlantedLabError, RuntimeError):
    """The symmetric eigensolver did not converge."""


class Infeasible(PlantedLabError, RuntimeError):
    """The projection constraints have a certified empty intersection."""


class MaxIterations(PlantedLabError, RuntimeError):
    """Iterative projection exhausted its cycle budget without converging."""


class TooLarge(PlantedLabError, ValueError):
    """An enumeration guard was exceeded."""


class ZeroEstimator(PlantedLabError, ValueError):
    """An estimator returned the zero matrix, so no statistic can be formed."""


class ConfigError(PlantedLabError, ValueError):
    """An experiment config file could not be parsed or validated."""


class UnknownField(ConfigError):
    """A config file contains a field outside the documented schema."""


class OutputUnwritable(PlantedLabError, OSError):
    """A declared output path could not be written."""


#: Errors that the CLI maps to exit code 3 ("numeric guard tripped").
GUARD_ERRORS = (TooLarge, Infeasible, MaxIterations, OverflowError)
