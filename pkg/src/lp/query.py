"""
Verification query: an LP over named variables plus ReLU pairs
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from src.lp.scalar import ExtendedScalar, NumberField, Scalar
from src.lp.tableau import BoundProfile, Tableau, augment_with_slacks

Equation = Tuple[Dict[int, Scalar], Scalar]


@dataclass
class Query:
    """
    LP instance plus piecewise-linear ReLU constraints

    Equations are sparse maps var -> coefficient with a right-hand side,
    meaning Σ coeff·x = rhs. ``relus`` lists (b, f) pairs with f = ReLU(b).
    """
    names: List[str]
    lower: List[ExtendedScalar]
    upper: List[ExtendedScalar]
    equations: List[Equation] = field(default_factory=list)
    relus: List[Tuple[int, int]] = field(default_factory=list)
    inputs: List[int] = field(default_factory=list)
    outputs: List[int] = field(default_factory=list)

    @property
    def n_vars(self) -> int:
        return len(self.names)

    def index_of(self, name: str) -> int:
        return self.names.index(name)

    def build_lp(self, field: Optional[NumberField] = None) -> Tuple[Tableau, BoundProfile]:
        """
        Initial tableau and bound profile in A·V = 0 form

        Slack variables follow the query variables, one per equation.
        """
        field = field or NumberField()
        bounds = BoundProfile(field)
        for lower, upper in zip(self.lower, self.upper):
            bounds.add_variable(lower, upper)
        tableau = augment_with_slacks(self.equations, bounds)
        return tableau, bounds

    def same_lp(self, other: "Query") -> bool:
        """Structural equality of the LP part (names are not compared)"""
        if (self.n_vars != other.n_vars or self.relus != other.relus
                or len(self.equations) != len(other.equations)):
            return False
        if list(self.lower) != list(other.lower) or list(self.upper) != list(other.upper):
            return False
        for (coeffs, rhs), (other_coeffs, other_rhs) in zip(self.equations, other.equations):
            nonzero = {var: value for var, value in coeffs.items() if value != 0}
            other_nonzero = {var: value for var, value in other_coeffs.items() if value != 0}
            if nonzero != other_nonzero or rhs != other_rhs:
                return False
        return True

    def input_values(self, alpha) -> List[Scalar]:
        return [alpha[var] for var in self.inputs]

