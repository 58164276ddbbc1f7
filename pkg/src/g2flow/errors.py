"""Exception hierarchy.

The CLI maps these onto its exit codes: parse errors exit with 2, validation
failures with 3 and numeric failures with 4.
"""


class G2FlowError(Exception):
    pass


class DimensionError(G2FlowError, ValueError):
    pass


class ParseError(G2FlowError, ValueError):
    """Syntax error in the structure-equation language."""

    def __init__(self, message, text="", pos=None):
        self.text = text
        self.pos = pos
        if pos is not None:
            message = f"{message} at position {pos}"
            if text:
                message += f"\n  {text}\n  {' ' * pos}^"
        super().__init__(message)


class ValidationError(G2FlowError):
    pass


class JacobiError(ValidationError):
    def __init__(self, message, triple=None, residual=None):
        self.triple = triple
        self.residual = residual
        super().__init__(message)


class StabilityError(ValidationError):
    pass


class CompatibilityError(ValidationError):
    pass


class NormalizationError(ValidationError):
    pass


class PositivityError(ValidationError):
    pass


class TorsionClassError(ValidationError):
    """The structure lies outside the class handled by the torsion extractor."""


class NotClosedError(ValidationError):
    pass


class NotEigenformError(ValidationError):
    pass


class DerivationError(ValidationError):
    pass


class NumericError(G2FlowError):
    pass
