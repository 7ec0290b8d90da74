"""Exception hierarchy.

Two families matter to callers: ValidationError (bad input, CLI exit code 2)
and NumericalCheckError (an internal cross-check failed, CLI exit code 3).
"""


class QuasipotError(Exception):
    pass


class ValidationError(QuasipotError, ValueError):
    """Malformed input: bad spec, bad flag, bad file."""


class ParseError(ValidationError):
    """Expression text rejected; `offset` is the byte position of the problem."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class FieldEvaluationError(ValidationError):
    """Field produced a non-finite value during quadrature."""


class VelocityVanishes(ValidationError):
    """A PDMP velocity field is zero (or changes sign) somewhere on the grid."""


class TooManyComponents(ValidationError):
    """Brute-force tree enumeration refused (component count above cap)."""


class NumericalCheckError(QuasipotError, RuntimeError):
    pass


class ClassificationAmbiguous(NumericalCheckError):
    """Zero-set components could not be classified into an alternating chain."""


class ChainMismatch(NumericalCheckError):
    """Local maxima extracted during the level sweep disagree with the chain."""


class CaseClassificationFailed(NumericalCheckError):
    """Shortcut value from the case split disagrees with the full minimum."""


class NonPositiveDensity(NumericalCheckError):
    """Normalized density came out non-positive beyond tolerance."""


class ThinningBoundViolated(NumericalCheckError):
    """An evaluated switching rate exceeded the thinning bound."""


class HypothesisFailed(NumericalCheckError):
    """A Hamiltonian failed the convexity or double-zero hypothesis."""
