"""
Tableau, bound profile and the primitive operations of the abstract Simplex
calculus.

The tableau is kept in the homogeneous form A·V = 0. Every equation gets a
fresh slack variable fixed to -rhs, so the last m columns of the initial
tableau form the identity and the last m entries of any later row are its
coordinates over the initial rows (coef(e)).
"""

import logging
from enum import Enum
from typing import Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

import numpy as np

from src.errors import PivotOnZero
from src.lp.scalar import INF, NEG_INF, ExtendedScalar, NumberField, Scalar, is_infinite

logger = logging.getLogger(__name__)

Coefficients = Union[Mapping[int, Scalar], Sequence[Scalar]]


class BoundSide(Enum):
    """Which side of a variable's interval a bound sits on"""
    LOWER = "lower"
    UPPER = "upper"

    @property
    def is_upper(self) -> bool:
        return self is BoundSide.UPPER

    def opposite(self) -> "BoundSide":
        return BoundSide.LOWER if self.is_upper else BoundSide.UPPER


def zero_vector(length: int, field: NumberField) -> np.ndarray:
    return np.full(length, field.zero(), dtype=object)


def _items(coeffs: Coefficients) -> Iterable[Tuple[int, Scalar]]:
    if isinstance(coeffs, Mapping):
        return coeffs.items()
    return enumerate(coeffs)


class BoundProfile:
    """
    Ground and dynamic bounds of every variable, with the Farkas vectors
    explaining each dynamic bound

    A zero Farkas vector means the dynamic bound equals the ground bound.
    Every vector has one entry per tableau row.
    """

    def __init__(self, field: Optional[NumberField] = None, n_rows: int = 0):
        self.field = field or NumberField()
        self.n_rows = n_rows
        self.ground_lower: List[ExtendedScalar] = []
        self.ground_upper: List[ExtendedScalar] = []
        self.dyn_lower: List[ExtendedScalar] = []
        self.dyn_upper: List[ExtendedScalar] = []
        self.f_lower: List[np.ndarray] = []
        self.f_upper: List[np.ndarray] = []

    @property
    def n_vars(self) -> int:
        return len(self.ground_lower)

    def add_variable(self, lower: ExtendedScalar = NEG_INF,
                     upper: ExtendedScalar = INF) -> int:
        """Append a variable with the given ground bounds and return its id"""
        lower = self.field.convert(lower)
        upper = self.field.convert(upper)
        self.ground_lower.append(lower)
        self.ground_upper.append(upper)
        self.dyn_lower.append(lower)
        self.dyn_upper.append(upper)
        self.f_lower.append(zero_vector(self.n_rows, self.field))
        self.f_upper.append(zero_vector(self.n_rows, self.field))
        return self.n_vars - 1

    def extend_rows(self, count: int = 1):
        """Zero-extend every Farkas vector for newly appended tableau rows"""
        padding = zero_vector(count, self.field)
        self.f_lower = [np.concatenate([vec, padding]) for vec in self.f_lower]
        self.f_upper = [np.concatenate([vec, padding]) for vec in self.f_upper]
        self.n_rows += count

    def get(self, var: int, side: BoundSide, use_ground: bool = False) -> ExtendedScalar:
        if side.is_upper:
            return self.ground_upper[var] if use_ground else self.dyn_upper[var]
        return self.ground_lower[var] if use_ground else self.dyn_lower[var]

    def lower(self, var: int, use_ground: bool = False) -> ExtendedScalar:
        return self.get(var, BoundSide.LOWER, use_ground)

    def upper(self, var: int, use_ground: bool = False) -> ExtendedScalar:
        return self.get(var, BoundSide.UPPER, use_ground)

    def farkas(self, var: int, side: BoundSide) -> np.ndarray:
        return self.f_upper[var] if side.is_upper else self.f_lower[var]

    def set_dynamic(self, var: int, side: BoundSide, value: ExtendedScalar,
                    explanation: Optional[np.ndarray] = None):
        """Record a dynamic bound and the Farkas vector explaining it"""
        if explanation is None:
            explanation = zero_vector(self.n_rows, self.field)
        if side.is_upper:
            self.dyn_upper[var] = value
            self.f_upper[var] = explanation
        else:
            self.dyn_lower[var] = value
            self.f_lower[var] = explanation

    def tighten_ground(self, var: int, side: BoundSide, value: ExtendedScalar) -> bool:
        """
        Tighten a ground bound; never loosens it

        When the new ground bound is at least as tight as the dynamic one, the
        dynamic bound follows it and its Farkas vector is reset to zero.
        A strictly tighter dynamic bound keeps its explanation.

        Returns:
            True if the ground bound changed
        """
        value = self.field.convert(value)
        old = self.get(var, side, use_ground=True)
        new = min(old, value) if side.is_upper else max(old, value)
        if side.is_upper:
            self.ground_upper[var] = new
            dynamic_looser = self.dyn_upper[var] >= new
        else:
            self.ground_lower[var] = new
            dynamic_looser = self.dyn_lower[var] <= new
        if dynamic_looser:
            self.set_dynamic(var, side, new)
        return new != old

    def is_consistent(self, var: int, use_ground: bool = False) -> bool:
        return self.field.le(self.lower(var, use_ground), self.upper(var, use_ground))

    def copy(self) -> "BoundProfile":
        clone = BoundProfile(self.field, self.n_rows)
        clone.ground_lower = list(self.ground_lower)
        clone.ground_upper = list(self.ground_upper)
        clone.dyn_lower = list(self.dyn_lower)
        clone.dyn_upper = list(self.dyn_upper)
        clone.f_lower = [vec.copy() for vec in self.f_lower]
        clone.f_upper = [vec.copy() for vec in self.f_upper]
        return clone


class Tableau:
    """
    Dense m×n tableau in A·V = 0 form with one basic variable per row

    Row r encodes basic[r] = Σ c_j·x_j over non-basic x_j, where
    c_j = -A[r, j] / A[r, basic[r]]. Rows are not rescaled by pivoting.
    """

    def __init__(self, matrix: np.ndarray, basic: Sequence[int],
                 field: Optional[NumberField] = None):
        self.A = matrix
        self.basic = list(basic)
        self.field = field or NumberField()

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    @property
    def n_vars(self) -> int:
        return self.A.shape[1]

    def copy(self) -> "Tableau":
        return Tableau(self.A.copy(), self.basic, self.field)

    def is_basic(self, var: int) -> bool:
        return var in self.basic

    def row_of(self, var: int) -> int:
        """Row index of a basic variable"""
        return self.basic.index(var)

    def coefficient(self, row: int, var: int) -> Scalar:
        """Coefficient of var in the row's solved form basic = Σ c_j·x_j"""
        entry = self.A[row, var]
        if entry == 0:
            return self.field.zero()
        return -self.field.div(entry, self.A[row, self.basic[row]])

    def coefficient_sign(self, row: int, var: int) -> int:
        """Sign of coefficient(row, var), computed without dividing"""
        return -self.field.sign(self.A[row, var]) * self.field.sign(self.A[row, self.basic[row]])

    def pivot(self, leaving: int, entering: int):
        """
        Swap a basic and a non-basic variable in place

        Args:
            leaving: basic variable x_i
            entering: non-basic variable x_j with A_{i,j} != 0

        Raises:
            PivotOnZero: if the entering variable does not occur in the row
        """
        row = self.row_of(leaving)
        pivot_entry = self.A[row, entering]
        if entering in self.basic or self.field.is_zero(pivot_entry):
            raise PivotOnZero(f"Cannot pivot x{leaving} with x{entering}")

        zero = self.field.zero()
        for other in range(self.n_rows):
            if other == row or self.A[other, entering] == 0:
                continue
            ratio = self.field.div(self.A[other, entering], pivot_entry)
            self.A[other] = self.A[other] - ratio * self.A[row]
            self.A[other, entering] = zero

        self.basic[row] = entering
        logger.debug("pivot: x%d leaves, x%d enters (row %d)", leaving, entering, row)

    def update_assignment(self, alpha: Sequence[Scalar], var: int, delta: Scalar) -> List[Scalar]:
        """
        Shift a non-basic variable by delta and repair every basic variable

        Returns:
            The new assignment; A·alpha' = 0 still holds
        """
        if var in self.basic:
            raise ValueError(f"x{var} is basic; only non-basic variables can be updated")
        updated = list(alpha)
        updated[var] = updated[var] + delta
        for row, basic_var in enumerate(self.basic):
            if self.A[row, var] != 0:
                updated[basic_var] = updated[basic_var] + delta * self.coefficient(row, var)
        return updated

    def slack_sets(self, bounds: BoundProfile, alpha: Sequence[Scalar],
                   var: int) -> Tuple[Set[int], Set[int]]:
        """
        slack+ and slack- of a basic variable, using dynamic bounds

        Returns:
            (non-basic variables that can raise var, those that can lower it)
        """
        field = self.field
        row = self.row_of(var)
        slack_plus, slack_minus = set(), set()
        for j in range(self.n_vars):
            if j in self.basic:
                continue
            sign = self.coefficient_sign(row, j)
            if sign == 0:
                continue
            below_upper = field.lt(alpha[j], bounds.upper(j))
            above_lower = field.gt(alpha[j], bounds.lower(j))
            if (sign > 0 and below_upper) or (sign < 0 and above_lower):
                slack_plus.add(j)
            if (sign < 0 and below_upper) or (sign > 0 and above_lower):
                slack_minus.add(j)
        return slack_plus, slack_minus

    def extract_coef(self, row: int) -> np.ndarray:
        """Last m entries of the row: its coordinates over the initial rows"""
        return self.A[row, self.n_vars - self.n_rows:].copy()

    def residual(self, alpha: Sequence[Scalar]) -> List[Scalar]:
        """A·alpha, one entry per row"""
        values = np.array(list(alpha), dtype=object)
        return [sum(self.A[row] * values) for row in range(self.n_rows)]

    def append_equation(self, coeffs: Coefficients, substitute: bool = True) -> int:
        """
        Append the equation coeffs·x + s = 0 with a fresh slack s

        The slack becomes the basic variable of the new row. With substitute
        set, basic variables are eliminated from the row so the basic form is
        kept. The slack column is appended last, so the identity tail persists.

        Returns:
            The slack variable id
        """
        zero = self.field.zero()
        slack = self.n_vars
        self.A = np.hstack([self.A, np.full((self.n_rows, 1), zero, dtype=object)])
        row = np.full(slack + 1, zero, dtype=object)
        for var, value in _items(coeffs):
            row[var] = row[var] + self.field.convert(value)
        row[slack] = self.field.convert(1)

        if substitute:
            for other, basic_var in enumerate(self.basic):
                if row[basic_var] != 0:
                    ratio = self.field.div(row[basic_var], self.A[other, basic_var])
                    row = row - ratio * self.A[other]
                    row[basic_var] = zero

        self.A = np.vstack([self.A, row.reshape(1, -1)])
        self.basic.append(slack)
        return slack


def augment_with_slacks(equations: Sequence[Tuple[Coefficients, Scalar]],
                        bounds: BoundProfile) -> Tableau:
    """
    Build the initial tableau for equations coeffs·x = rhs

    Each equation receives a fresh slack variable s with l(s) = u(s) = -rhs,
    appended to ``bounds`` after the existing variables. The assignment is
    all zeros and the last m columns form the identity.
    """
    field = bounds.field
    n_vars = bounds.n_vars
    m = len(equations)
    bounds.extend_rows(m)
    matrix = np.full((m, n_vars + m), field.zero(), dtype=object)
    for index, (coeffs, rhs) in enumerate(equations):
        for var, value in _items(coeffs):
            matrix[index, var] = matrix[index, var] + field.convert(value)
        matrix[index, n_vars + index] = field.convert(1)
        fixed = -field.convert(rhs)
        bounds.add_variable(fixed, fixed)
    return Tableau(matrix, [n_vars + index for index in range(m)], field)


def row_extreme(coeffs: Sequence[Scalar], bounds: BoundProfile,
                side: BoundSide = BoundSide.UPPER, use_ground: bool = True) -> ExtendedScalar:
    """
    Largest (or smallest) value of Σ c_j·x_j over the bound box

    Upper: Σ_{c>0} c·u(x) + Σ_{c<0} c·l(x); lower is symmetric. Uses only
    multiplication and addition.
    """
    total = bounds.field.zero()
    for var, coeff in enumerate(coeffs):
        if coeff == 0:
            continue
        use_upper = (coeff > 0) == side.is_upper
        bound = bounds.upper(var, use_ground) if use_upper else bounds.lower(var, use_ground)
        if is_infinite(bound):
            return INF if side.is_upper else NEG_INF
        total = total + coeff * bound
    return total


def combine_rows(vector: Sequence[Scalar], matrix: np.ndarray, field: NumberField) -> np.ndarray:
    """vectorᵀ·matrix, computed without division"""
    result = zero_vector(matrix.shape[1], field)
    for index, weight in enumerate(vector):
        if weight != 0:
            result = result + weight * matrix[index]
    return result


def reconstruct_bound(vector: Sequence[Scalar], var: int, side: BoundSide,
                      matrix: np.ndarray, bounds: BoundProfile) -> ExtendedScalar:
    """
    Bound on var implied by a Farkas vector and the ground bounds

    With r = fᵀ·A₀ the identity x_i = (r_i + 1)·x_i + Σ_{j≠i} r_j·x_j holds on
    every solution, so the bound is row_extreme of r + unit(i) over the
    ground box. A zero vector yields the ground bound itself.
    """
    if len(vector) != matrix.shape[0]:
        raise ValueError(
            f"Farkas vector has {len(vector)} entries, tableau has {matrix.shape[0]} rows")
    row = combine_rows(vector, matrix, bounds.field)
    row[var] = row[var] + 1
    return row_extreme(row, bounds, side, use_ground=True)
