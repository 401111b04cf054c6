"""Exception and warning types shared across the toolkit.

The hierarchy mirrors the three failure classes the CLI distinguishes:
validation problems (bad diagram data, exit code 2), capacity limits
(instance too large for explicit methods, exit code 3), and I/O or
parse failures (exit code 4).
"""


class LimidError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(LimidError):
    """Input violates a structural or numerical contract."""

    exit_code = 2


class CapacityError(LimidError):
    """Instance exceeds a configured enumeration cap."""

    exit_code = 3


class InputError(LimidError):
    """File could not be read or parsed."""

    exit_code = 4


# --- diagram construction ---------------------------------------------------

class DuplicateName(ValidationError):
    pass


class SelfReference(ValidationError):
    pass


class UnknownParent(ValidationError):
    pass


class ValueNodeInInfoSet(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class NotNormalized(ValidationError):
    pass


class NegativeProbability(ValidationError):
    pass


class IncompleteUtilities(ValidationError):
    pass


class CycleDetected(ValidationError):
    pass


class MissingTensor(ValidationError):
    pass


class FrozenDiagramError(ValidationError):
    pass


# --- paths / solvers --------------------------------------------------------

class PathExplosion(CapacityError):
    pass


class StrategySpaceTooLarge(CapacityError):
    pass


# --- formulation / emission -------------------------------------------------

class EmptyPathTable(ValidationError):
    pass


class ModelMismatch(ValidationError):
    pass


class NonPositiveScale(ValidationError):
    pass


class NameCollision(ValidationError):
    pass


class NameTooLong(ValidationError):
    pass


class NotOneHot(ValidationError):
    pass


class UnknownVariable(ValidationError):
    pass


# --- benchmarks ---------------------------------------------------------------

class DegenerateTest(ValidationError):
    pass


class InvalidParams(ValidationError):
    pass


class ParseError(InputError):
    pass


# --- warnings -----------------------------------------------------------------

class RedundantNodeWarning(UserWarning):
    """A chance or decision node has no directed path to any value node."""


class ForbiddenProbabilityWarning(UserWarning):
    """Forbidden patterns removed paths carrying positive probability."""


class FractionalSolutionWarning(UserWarning):
    """A solution file carried decision variables far from 0/1."""
