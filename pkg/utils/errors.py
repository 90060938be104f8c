"""
Exception hierarchy shared by the engine, the model parser and the CLI.
"""

from typing import Optional


class BalobsError(Exception):
    """Root of every error the CLI reports as an input/usage failure (exit 1)."""


class StructuralError(BalobsError):
    """Operands do not share a VarTable / algebra, or a form has the wrong shape."""


class BidegreeError(StructuralError):
    """A form is not of the bidegree an operation requires."""


class AlgebraCheckError(BalobsError):
    """A declared algebra is not a valid complex structure (d² ≠ 0 or a (0,2) part)."""


class NonHermitianError(BalobsError):
    """A metric matrix is not conjugate-symmetric."""


class AssignmentError(BalobsError):
    """A numeric assignment is missing a variable or violates the conjugation pairing."""


class NotPositiveDefiniteError(BalobsError):
    """A numeric metric sample is not positive definite."""


class SingularEndomorphismError(BalobsError):
    """I - φ̄φ could not be inverted (the deformation parameter is too large)."""


class UnknownModelError(BalobsError):
    """No registry entry with the requested name."""


class ModelSyntaxError(BalobsError):
    """
    Syntax error in a model file.

    Args:
        message: What went wrong
        line: 1-based line of the offending token
        column: 1-based column of the offending token
        source: Optional file name
    """

    def __init__(self, message: str, line: int = 0, column: int = 0, source: Optional[str] = None):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        super().__init__(self.__str__())

    def __str__(self) -> str:
        where = f"{self.source}:" if self.source else ""
        if not self.line:
            return f"{where} {self.message}" if where else self.message
        return f"{where}{self.line}:{self.column}: {self.message}"


class UndeclaredIdentifierError(ModelSyntaxError):
    """A variable, character, metric or curve name was used before being declared."""
