"""Exception hierarchy shared by all fraclab modules."""


class FraclabError(Exception):
    """Base class; ``module`` names the subsystem that raised it."""

    module = "fraclab"


class ParameterError(FraclabError, ValueError):
    pass


class ConstructionError(FraclabError, ValueError):
    module = "manifold"


class DomainRangeError(FraclabError, ValueError):
    module = "manifold"


class OperatorError(FraclabError, RuntimeError):
    module = "operator"

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class ResolutionError(FraclabError, ValueError):
    module = "weight"


class ModelMismatchError(FraclabError, ValueError):
    pass


class DivergenceError(FraclabError, ValueError):
    module = "lemmas"


class SupercriticalError(FraclabError, ValueError):
    module = "solver"


class InsufficientSeriesError(FraclabError, ValueError):
    module = "solver"


class PreconditionError(FraclabError, ValueError):
    module = "solver"


class ConfigError(FraclabError, ValueError):
    module = "cli"
