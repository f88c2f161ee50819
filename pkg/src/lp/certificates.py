"""
Proof objects shared by the verifier and the checker: contradictions,
ReLU lemmas, the ReLU tightening rule table and split semantics
"""

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Tuple, Union

from src.errors import UnknownRule
from src.lp.scalar import NumberField, Scalar
from src.lp.tableau import BoundSide


class Phase(Enum):
    """Phase of a ReLU constraint f = max(b, 0)"""
    UNFIXED = "unfixed"
    ACTIVE = "active"
    INACTIVE = "inactive"


@dataclass(frozen=True)
class VarSymbol:
    """Contradiction by clashing ground bounds l(var) > u(var)"""
    var: int


@dataclass(frozen=True)
class FarkasProof:
    """Contradiction by a row wᵀ·A whose upper bound over the ground box is negative"""
    vector: Tuple[Scalar, ...]


Contradiction = Union[VarSymbol, FarkasProof]


@dataclass(frozen=True)
class BoundUpdate:
    var: int
    side: BoundSide
    value: Scalar


@dataclass(frozen=True)
class Lemma:
    """
    Ground bound derived by a ReLU rule

    The antecedent explanation is a snapshot of the antecedent's Farkas
    vector taken when the lemma was emitted.
    """
    affected_var: int
    side: BoundSide
    value: Scalar
    rule_id: str
    antecedent_var: int
    antecedent_side: BoundSide
    explanation: Tuple[Scalar, ...]


@dataclass(frozen=True)
class ReluRule:
    """
    One ReLU tightening rule: a bound on one end of the ReLU implies a bound
    on the other end

    ``antecedent`` and ``affected`` name the ReLU end ('b' or 'f') and side.
    """
    rule_id: str
    antecedent: Tuple[str, BoundSide]
    affected: Tuple[str, BoundSide]
    premise: Callable[[NumberField, Scalar], bool]
    conclusion: Callable[[NumberField, Scalar], Scalar]
    description: str


def _positive(field: NumberField, value: Scalar) -> bool:
    return field.gt(value, 0)


def _non_positive(field: NumberField, value: Scalar) -> bool:
    return field.le(value, 0)


def _always(field: NumberField, value: Scalar) -> bool:
    return True


def _same(field: NumberField, value: Scalar) -> Scalar:
    return value


def _zero(field: NumberField, value: Scalar) -> Scalar:
    return field.zero()


RELU_RULES: Dict[str, ReluRule] = {
    "R1": ReluRule("R1", ("f", BoundSide.LOWER), ("b", BoundSide.LOWER),
                   _positive, _same, "positive l(f) gives l(b) := l(f)"),
    "R2": ReluRule("R2", ("b", BoundSide.LOWER), ("f", BoundSide.LOWER),
                   _positive, _same, "positive l(b) gives l(f) := l(b)"),
    "R3": ReluRule("R3", ("f", BoundSide.UPPER), ("b", BoundSide.UPPER),
                   _always, _same, "u(f) gives u(b) := u(f)"),
    "R4": ReluRule("R4", ("b", BoundSide.UPPER), ("f", BoundSide.UPPER),
                   _non_positive, _zero, "non-positive u(b) gives u(f) := 0"),
    "R5": ReluRule("R5", ("b", BoundSide.UPPER), ("f", BoundSide.UPPER),
                   _positive, _same, "positive u(b) gives u(f) := u(b)"),
}


def get_rule(rule_id: str) -> ReluRule:
    try:
        return RELU_RULES[rule_id]
    except KeyError:
        raise UnknownRule(f"Unknown ReLU rule: {rule_id}") from None


def sibling_rules(rule: ReluRule) -> List[ReluRule]:
    """Rules sharing the antecedent and the affected bound (e.g. R4 and R5)"""
    return [other for other in RELU_RULES.values()
            if other.antecedent == rule.antecedent and other.affected == rule.affected]


def split_constraints(phase: Phase, b: int, f: int) -> Tuple[List[BoundUpdate], List[Tuple[Dict[int, Scalar], Scalar]]]:
    """
    Ground bounds and equations a split adds

    Active: b >= 0 and the equation f = b (stored as b - f = 0).
    Inactive: b <= 0 and 0 <= f <= 0.
    """
    if phase is Phase.ACTIVE:
        return [BoundUpdate(b, BoundSide.LOWER, 0)], [({b: 1, f: -1}, 0)]
    if phase is Phase.INACTIVE:
        return [BoundUpdate(b, BoundSide.UPPER, 0),
                BoundUpdate(f, BoundSide.LOWER, 0),
                BoundUpdate(f, BoundSide.UPPER, 0)], []
    raise ValueError("Cannot split into the unfixed phase")
