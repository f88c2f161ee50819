"""
Simplex engine driving the derivation rules of the abstract Simplex calculus

Rule priority: Failure2 > Failure1 > Success > Update > Pivot1/Pivot2.
Ties are broken by Bland's rule (lowest variable id first) for both the
leaving and the entering variable.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

from src.errors import IterationLimit, NoRuleApplicable, NotContradictory
from src.lp.certificates import Contradiction, FarkasProof, Lemma, VarSymbol
from src.lp.scalar import Scalar
from src.lp.tableau import BoundProfile, BoundSide, Tableau
from src.lp.tightening import BoundTightener, tighten_from_row

logger = logging.getLogger(__name__)

DEFAULT_MAX_ITERS = 10 ** 6


@dataclass
class SimplexConfig:
    """Configuration <B, A, l, u, alpha> of the calculus"""
    tableau: Tableau
    bounds: BoundProfile
    alpha: List[Scalar]

    def equations_hold(self) -> bool:
        field = self.bounds.field
        return all(field.is_zero(value) for value in self.tableau.residual(self.alpha))

    def within_bounds(self, var: int) -> bool:
        field = self.bounds.field
        return (field.ge(self.alpha[var], self.bounds.lower(var))
                and field.le(self.alpha[var], self.bounds.upper(var)))


@dataclass(frozen=True)
class Sat:
    alpha: Tuple[Scalar, ...]


@dataclass(frozen=True)
class Unsat:
    """UNSAT verdict; the contradiction is None when proofs are switched off"""
    contradiction: Optional[Contradiction]


Verdict = Union[Sat, Unsat]


@dataclass
class StepResult:
    rule: str
    verdict: Optional[Verdict] = None

    @property
    def terminal(self) -> bool:
        return self.verdict is not None


def build_contradiction(var: int, bounds: BoundProfile, strict: bool = True) -> Contradiction:
    """
    Certificate for a variable whose dynamic bounds cross

    Returns:
        FarkasProof(f_upper - f_lower), or VarSymbol(var) when both
        explanations are zero (the ground bounds clash)

    Raises:
        NotContradictory: if l'(var) <= u'(var) and strict is set
    """
    field = bounds.field
    if strict and not field.gt(bounds.lower(var), bounds.upper(var)):
        raise NotContradictory(
            f"x{var} has consistent bounds [{bounds.lower(var)}, {bounds.upper(var)}]")
    vector = bounds.f_upper[var] - bounds.f_lower[var]
    if all(entry == 0 for entry in vector):
        return VarSymbol(var)
    return FarkasProof(tuple(vector))


class SimplexEngine:
    """
    Simplex over one node's LP with bound tightening and Farkas bookkeeping

    Args:
        config: tableau, bounds and assignment; mutated in place
        relus: unfixed (b, f) pairs watched by the ReLU rules
        initial: the node's initial tableau, needed only for audit
        max_iters: derivation budget for solve
        produce_proofs: maintain Farkas vectors and build certificates
        audit: re-derive every tightened bound from its explanation
    """

    def __init__(self, config: SimplexConfig, relus: Sequence[Tuple[int, int]] = (),
                 initial: Optional[Tableau] = None, max_iters: int = DEFAULT_MAX_ITERS,
                 produce_proofs: bool = True, audit: bool = False):
        self.config = config
        self.field = config.bounds.field
        self.max_iters = max_iters
        self.produce_proofs = produce_proofs
        self.tightener = BoundTightener(config.tableau, config.bounds, relus, initial,
                                        produce_proofs, audit)
        self.iterations = 0
        self.pivots = 0
        self._started = False

    @property
    def lemmas(self) -> List[Lemma]:
        return self.tightener.lemmas

    @property
    def tightenings(self) -> int:
        return len(self.tightener.records)

    def _contradiction(self, var: int) -> Optional[Contradiction]:
        if not self.produce_proofs:
            return None
        return build_contradiction(var, self.config.bounds, strict=self.field.exact)

    def _violation(self, var: int) -> int:
        """-1 below the lower bound, 1 above the upper bound, 0 within"""
        alpha, bounds = self.config.alpha, self.config.bounds
        if self.field.lt(alpha[var], bounds.lower(var)):
            return -1
        if self.field.gt(alpha[var], bounds.upper(var)):
            return 1
        return 0

    def step(self) -> StepResult:
        """Apply exactly one derivation rule"""
        cfg = self.config
        tableau, bounds = cfg.tableau, cfg.bounds
        if not self._started:
            self._started = True
            self.tightener.propagate()

        for var in range(tableau.n_vars):
            if self.field.gt(bounds.lower(var), bounds.upper(var)):
                return StepResult("Failure2", Unsat(self._contradiction(var)))

        violated = sorted(var for var in tableau.basic if self._violation(var) != 0)
        candidates = {}
        for var in violated:
            slack_plus, slack_minus = tableau.slack_sets(bounds, cfg.alpha, var)
            below = self._violation(var) < 0
            slack = slack_plus if below else slack_minus
            if not slack:
                return StepResult("Failure1", Unsat(self._fail_on_row(var, below)))
            candidates[var] = (below, slack)

        if all(self._violation(var) == 0 for var in range(tableau.n_vars)):
            return StepResult("Success", Sat(tuple(cfg.alpha)))

        for var in range(tableau.n_vars):
            if var in tableau.basic:
                continue
            direction = self._violation(var)
            if direction == 0:
                continue
            target = bounds.lower(var) if direction < 0 else bounds.upper(var)
            cfg.alpha = tableau.update_assignment(cfg.alpha, var, target - cfg.alpha[var])
            return StepResult("Update")

        if violated:
            leaving = violated[0]
            below, slack = candidates[leaving]
            entering = min(slack)
            row = tableau.row_of(leaving)
            tableau.pivot(leaving, entering)
            self.pivots += 1
            self.tightener.tighten_row(row)
            return StepResult("Pivot1" if below else "Pivot2")

        raise NoRuleApplicable("No Simplex rule applies")

    def _fail_on_row(self, var: int, below: bool) -> Optional[Contradiction]:
        """
        Failure1: the row pins var's opposite bound past the violated one

        The row bound is recorded as a dynamic bound first, so the certificate
        comes from the crossed bounds of var.
        """
        tableau, bounds = self.config.tableau, self.config.bounds
        side = BoundSide.UPPER if below else BoundSide.LOWER
        record = tighten_from_row(tableau, bounds, tableau.row_of(var), var, side,
                                  force=True, produce_proofs=self.produce_proofs)
        self.tightener.record(record)
        logger.debug("Failure1 on x%d: row bound %s", var, record.new_bound)
        return self._contradiction(var)

    def solve(self) -> Verdict:
        """
        Iterate step until SAT or UNSAT

        Raises:
            IterationLimit: after max_iters steps without a verdict
        """
        while self.iterations < self.max_iters:
            self.iterations += 1
            result = self.step()
            if result.terminal:
                logger.debug("simplex: %s after %d steps (%d pivots)", result.rule,
                             self.iterations, self.pivots)
                return result.verdict
        raise IterationLimit(f"No verdict after {self.max_iters} Simplex steps")
