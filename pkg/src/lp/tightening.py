"""
Dynamic bound tightening with Farkas explanations.

Row tightening bounds a variable by interval reasoning over one tableau row
and derives the new Farkas vector from the vectors of the bounds it used.
ReLU tightening applies the rule table of ``src.lp.certificates`` and turns
its conclusions into ground bounds recorded as lemmas.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.errors import ExplanationMismatch
from src.lp.certificates import RELU_RULES, Lemma
from src.lp.scalar import ExtendedScalar, Scalar, is_infinite
from src.lp.tableau import BoundProfile, BoundSide, Tableau, reconstruct_bound, zero_vector

logger = logging.getLogger(__name__)

RULE_ORDER = ("R1", "R2", "R3", "R4", "R5")


@dataclass
class TightenRecord:
    """One dynamic-bound tightening derived from a tableau row"""
    var: int
    side: BoundSide
    new_bound: Scalar
    explanation: np.ndarray
    row: int


def tighten_from_row(tableau: Tableau, bounds: BoundProfile, row: int, target: int,
                     side: BoundSide, force: bool = False,
                     produce_proofs: bool = True) -> Optional[TightenRecord]:
    """
    Tighten one bound of target using a single tableau row

    Solving the row for target gives target = Σ c_j·x_j. The candidate upper
    bound is Σ_{c>0} c·u'(x_j) + Σ_{c<0} c·l'(x_j) (lower is symmetric), and
    its explanation is Σ_{c>0} c·f_u(x_j) + Σ_{c<0} c·f_l(x_j) - coef(e)/a,
    where a is target's entry in the row.

    Args:
        force: record the candidate even when it is not strictly tighter

    Returns:
        The record when the bound was updated, otherwise None (nothing changes)
    """
    field = bounds.field
    entry = tableau.A[row, target]
    if entry == 0:
        raise ValueError(f"x{target} does not occur in row {row}")

    inverse = field.div(field.convert(1), entry)
    candidate = field.zero()
    explanation = zero_vector(bounds.n_rows, field) if produce_proofs else None
    for var in range(tableau.n_vars):
        if var == target or tableau.A[row, var] == 0:
            continue
        coeff = -tableau.A[row, var] * inverse
        var_side = side if coeff > 0 else side.opposite()
        bound = bounds.get(var, var_side)
        if is_infinite(bound):
            return None
        candidate = candidate + coeff * bound
        if produce_proofs:
            explanation = explanation + coeff * bounds.farkas(var, var_side)

    current = bounds.get(target, side)
    if not force and not field.is_tighter(candidate, current, side.is_upper):
        return None

    if produce_proofs:
        explanation = explanation - inverse * tableau.extract_coef(row)
    bounds.set_dynamic(target, side, candidate, explanation)
    logger.debug("row %d: %s bound of x%d -> %s", row, side.value, target, candidate)
    return TightenRecord(target, side, candidate,
                         explanation if produce_proofs else zero_vector(bounds.n_rows, field), row)


def relu_propagate(b: int, f: int, bounds: BoundProfile,
                   produce_proofs: bool = True) -> List[Lemma]:
    """
    Apply the ReLU rules to one (b, f) pair until nothing tightens

    Each strictly tightening conclusion becomes a ground bound with a zero
    Farkas vector and is returned as a lemma carrying a snapshot of the
    antecedent's explanation.
    """
    field = bounds.field
    ends = {"b": b, "f": f}
    lemmas = []
    changed = True
    while changed:
        changed = False
        for rule_id in RULE_ORDER:
            rule = RELU_RULES[rule_id]
            antecedent_var = ends[rule.antecedent[0]]
            antecedent_side = rule.antecedent[1]
            value = bounds.get(antecedent_var, antecedent_side)
            if is_infinite(value) or not rule.premise(field, value):
                continue
            affected_var = ends[rule.affected[0]]
            affected_side = rule.affected[1]
            conclusion = rule.conclusion(field, value)
            if not field.is_tighter(conclusion, bounds.get(affected_var, affected_side),
                                    affected_side.is_upper):
                continue
            explanation = bounds.farkas(antecedent_var, antecedent_side)
            lemma = Lemma(affected_var, affected_side, conclusion, rule_id,
                          antecedent_var, antecedent_side,
                          tuple(explanation) if produce_proofs else ())
            bounds.tighten_ground(affected_var, affected_side, conclusion)
            lemmas.append(lemma)
            changed = True
            logger.debug("lemma %s: %s bound of x%d -> %s", rule_id, affected_side.value,
                         affected_var, conclusion)
    return lemmas


def verify_explanation(bounds: BoundProfile, initial: Tableau, var: int,
                       side: BoundSide) -> ExtendedScalar:
    """
    Re-derive a dynamic bound from its Farkas vector and the ground bounds

    Returns:
        The reconstructed bound, never looser than the stored one

    Raises:
        ExplanationMismatch: if the reconstruction is looser
    """
    rebuilt = reconstruct_bound(bounds.farkas(var, side), var, side, initial.A, bounds)
    stored = bounds.get(var, side)
    looser = bounds.field.gt(rebuilt, stored) if side.is_upper else bounds.field.lt(rebuilt, stored)
    if looser:
        raise ExplanationMismatch(
            f"{side.value} bound of x{var}: stored {stored}, explanation gives {rebuilt}")
    return rebuilt


class BoundTightener:
    """
    Tightening schedule of one search node

    After a pivot the pivoted row is tightened for each of its variables.
    Any bound change on a ReLU end re-runs the ReLU rules for that pair.
    """

    def __init__(self, tableau: Tableau, bounds: BoundProfile,
                 relus: Sequence[Tuple[int, int]] = (), initial: Optional[Tableau] = None,
                 produce_proofs: bool = True, audit: bool = False):
        self.tableau = tableau
        self.bounds = bounds
        self.relus = list(relus)
        self.initial = initial
        self.produce_proofs = produce_proofs
        self.audit = audit and initial is not None and produce_proofs
        self.records: List[TightenRecord] = []
        self.lemmas: List[Lemma] = []
        self._relu_of: Dict[int, Tuple[int, int]] = {}
        for b, f in self.relus:
            self._relu_of[b] = (b, f)
            self._relu_of[f] = (b, f)

    def has_clash(self, var: int) -> bool:
        return self.bounds.field.gt(self.bounds.lower(var), self.bounds.upper(var))

    def record(self, record: TightenRecord):
        self.records.append(record)
        if self.audit:
            verify_explanation(self.bounds, self.initial, record.var, record.side)

    def tighten_row(self, row: int) -> bool:
        """
        Tighten every variable of a row, stopping at the first clash

        Returns:
            True if some variable ended with l' > u'
        """
        variables = [var for var in range(self.tableau.n_vars) if self.tableau.A[row, var] != 0]
        for var in variables:
            for side in (BoundSide.LOWER, BoundSide.UPPER):
                result = tighten_from_row(self.tableau, self.bounds, row, var, side,
                                          produce_proofs=self.produce_proofs)
                if result is None:
                    continue
                self.record(result)
                self.propagate_var(var)
                if self.has_clash(var):
                    return True
        return False

    def propagate_var(self, var: int) -> List[Lemma]:
        pair = self._relu_of.get(var)
        if pair is None:
            return []
        return self._propagate(*pair)

    def propagate(self) -> List[Lemma]:
        """Run the ReLU rules on every watched pair"""
        emitted = []
        for b, f in self.relus:
            emitted.extend(self._propagate(b, f))
        return emitted

    def _propagate(self, b: int, f: int) -> List[Lemma]:
        lemmas = relu_propagate(b, f, self.bounds, self.produce_proofs)
        self.lemmas.extend(lemmas)
        return lemmas
