"""
Exception hierarchy shared by the verifier, the checker and the CLI
"""

from typing import Optional


class VerifierError(Exception):
    """Base class for every error raised by this package"""


# LP core and Simplex engine

class PivotOnZero(VerifierError):
    """Pivot requested on a zero tableau entry"""


class NoRuleApplicable(VerifierError):
    """No Simplex derivation rule applies (engine bug)"""


class IterationLimit(VerifierError):
    """Simplex exceeded its iteration budget"""


class NotContradictory(VerifierError):
    """Contradiction requested for a variable whose bounds are consistent"""


class ExplanationMismatch(VerifierError):
    """A Farkas explanation reconstructs a looser bound than the one stored"""


# Search

class AlreadyFixed(VerifierError):
    """Split requested on a ReLU whose phase is already fixed"""


class DepthLimit(VerifierError):
    """Search went deeper than the number of ReLUs"""


# Proofs

class MalformedProof(VerifierError):
    """Proof file cannot be decoded"""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path


class DimensionMismatch(VerifierError):
    """Farkas vector length differs from the node's equation count"""


class UnknownRule(VerifierError):
    """Lemma names a rule that is not in the ReLU rule table"""


# Frontend

class ShapeMismatch(VerifierError, ValueError):
    """Array shapes of a network, input or property do not agree"""


class ParseError(VerifierError, ValueError):
    """Input file cannot be parsed"""

    def __init__(self, message: str, line: Optional[int] = None,
                 column: Optional[int] = None):
        location = ""
        if line is not None:
            location = f"line {line}, column {column}: "
        super().__init__(f"{location}{message}")
        self.line = line
        self.column = column


class InvariantViolation(VerifierError, ValueError):
    """Parsed object breaks a semantic invariant (e.g. lower > upper)"""
