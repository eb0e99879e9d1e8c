"""Exception hierarchy.

Two families matter for the CLI exit-code contract: configuration problems
(bad library files, bad profile values) exit with 3, model/evaluation
problems exit with 4. Usage errors exit with 2.
"""


class StackcostError(Exception):
    """Base class for every error raised by this package."""


class ModelError(StackcostError):
    """An evaluation failed on valid configuration (exit code 4)."""


class DomainValidationError(ModelError):
    """An operation received parameters outside its mathematical domain."""


class OutOfDomainError(ModelError):
    """A length argument fell outside the distribution domain [1, 2*sqrt(N)]."""


class DegenerateExponentError(DomainValidationError):
    """The Rent exponent sits on a pole of the closed-form normalization."""


class ConsistencyError(ModelError):
    """Internally inconsistent quantities (e.g. more wires routed than exist)."""


class StuckProgressError(ModelError):
    """Metal-layer assignment cannot advance (zero-capacity layer with demand left)."""


class ComparisonError(ModelError):
    """A cost comparison was requested against a zero-total baseline."""


class ConfigError(StackcostError):
    """Configuration / technology-library problem (exit code 3)."""


class LibraryParseError(ConfigError):
    """The library file is not well-formed."""


class LibraryValidationError(ConfigError):
    """A parsed library violates a field constraint (message names the field)."""


class UnknownFieldError(LibraryValidationError):
    """Strict-mode load found a field the schema does not define."""


class InfeasibleTargetsError(StackcostError):
    """Calibration targets cannot be met anywhere inside the search bounds."""


class UsageError(StackcostError):
    """Bad command-line arguments (exit code 2)."""
