"""Error types raised by the error-disturbance laboratory."""

from typing import Optional


class UnclabError(ValueError):
    """Base class for all validation and numerical errors."""


class DimensionError(UnclabError):
    """Operands have incompatible shapes or dimensions."""


class NormalizationError(UnclabError):
    """A state required to be normalized is not."""


class HermiticityError(UnclabError):
    """An operator required to be Hermitian is not."""


class SpectrumError(UnclabError):
    """An observable does not have the required spectrum."""


class CompletenessError(UnclabError):
    """Measurement operators do not resolve the identity."""


class UnitarityError(UnclabError):
    """An interaction operator is not unitary."""


class ZeroProbabilityError(UnclabError):
    """A post-measurement state was requested for an impossible outcome."""


class NumericalCorruptionError(UnclabError):
    """A quantity that must be nonnegative came out clearly negative."""


class CountTableError(UnclabError):
    """A count table is empty, negative or otherwise unusable."""


class DataCorruptionError(UnclabError):
    """Estimated squares are negative beyond statistical plausibility."""


class MalformedInputError(UnclabError):
    """An input file does not match the expected schema."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
