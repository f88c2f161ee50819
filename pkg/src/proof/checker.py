"""
Independent proof checker.

The checker replays a proof tree in exact arithmetic: it rebuilds each
node's equations and ground bounds from the query and the recorded splits,
re-derives every lemma from its explanation, and evaluates every leaf
certificate. Checking multiplies, adds and compares; it never divides.

Only ``src.lp`` and ``src.proof`` are used here, so the checker shares no
search code with the verifier.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

from src.errors import DimensionMismatch, IterationLimit, UnknownRule, VerifierError
from src.lp.certificates import (Contradiction, Lemma, Phase, VarSymbol,
                                 get_rule, sibling_rules, split_constraints)
from src.lp.query import Equation, Query
from src.lp.scalar import DIVISIONS, EXACT, ExtendedScalar, NumberField, format_scalar, is_infinite
from src.lp.simplex import DEFAULT_MAX_ITERS, SimplexConfig, SimplexEngine, Unsat
from src.lp.tableau import BoundProfile, BoundSide, Tableau, combine_rows, reconstruct_bound, row_extreme
from src.proof.proof_format import contradiction_to_dict
from src.proof.tree import ROOT, ProofNode, ProofTree, child_path

logger = logging.getLogger(__name__)

# Leaf statuses
VALID = "valid"
INVALID = "invalid"
RECOVERED = "recovered"
COUNTEREXAMPLE = "counterexample"
DELEGATED = "delegated"
INCONCLUSIVE = "inconclusive"


@dataclass
class CheckResult:
    passed: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.passed


PASS = CheckResult(True)


@dataclass
class CheckState:
    """Equations (initial form, slack identity tail) and ground bounds at one node"""
    tableau: Tableau
    bounds: BoundProfile
    phases: Dict[int, Phase] = field(default_factory=dict)

    @property
    def field(self) -> NumberField:
        return self.bounds.field

    @property
    def n_rows(self) -> int:
        return self.tableau.n_rows

    @property
    def n_vars(self) -> int:
        return self.tableau.n_vars

    def copy(self) -> "CheckState":
        return CheckState(self.tableau.copy(), self.bounds.copy(), dict(self.phases))

    def tighten(self, var: int, side: BoundSide, value: ExtendedScalar):
        self.bounds.tighten_ground(var, side, value)

    def add_equation(self, equation: Equation):
        coeffs, rhs = equation
        self.bounds.extend_rows(1)
        self.tableau.append_equation(coeffs, substitute=False)
        fixed = -self.field.convert(rhs)
        self.bounds.add_variable(fixed, fixed)

    def to_query(self, relus: Sequence[Tuple[int, int]]) -> Query:
        """The node's LP plus the ReLUs still unfixed here, as a standalone query"""
        names = [f"v{var}" for var in range(self.n_vars)]
        equations = []
        for row in range(self.n_rows):
            coeffs = {var: value for var, value in enumerate(self.tableau.A[row]) if value != 0}
            equations.append((coeffs, self.field.zero()))
        unfixed = [pair for index, pair in enumerate(relus) if index not in self.phases]
        return Query(names, list(self.bounds.ground_lower), list(self.bounds.ground_upper),
                     equations, unfixed)


@dataclass(frozen=True)
class FreshProof:
    """Exact re-solve produced a certificate that passes check_leaf"""
    contradiction: Contradiction


@dataclass(frozen=True)
class CounterexampleFound:
    """The leaf is satisfiable: the UNSAT claim is wrong"""
    assignment: Tuple[ExtendedScalar, ...] = ()


@dataclass(frozen=True)
class Delegated:
    """The delegate decided the leaf UNSAT"""
    note: str = ""


@dataclass(frozen=True)
class Inconclusive:
    reason: str


Recovery = Union[FreshProof, CounterexampleFound, Delegated, Inconclusive]

# Decides a leaf query whose LP relaxation is SAT: True for UNSAT, False for
# SAT, None when it cannot tell.
Delegate = Callable[[Query], Optional[bool]]


@dataclass
class CheckReport:
    """Outcome of a check run"""
    failures: List[Tuple[str, str]] = field(default_factory=list)
    leaves: Dict[str, str] = field(default_factory=dict)
    lemma_repairs: List[Dict[str, str]] = field(default_factory=list)
    recovered: Dict[str, str] = field(default_factory=dict)
    fresh_proofs: Dict[str, Contradiction] = field(default_factory=dict)
    counterexamples: Dict[str, List[str]] = field(default_factory=dict)
    divisions: int = 0
    statistics: Dict[str, int] = field(default_factory=dict)

    @property
    def accepted(self) -> bool:
        return not self.failures

    def fail(self, path: str, reason: str):
        logger.warning("reject %s: %s", path, reason)
        self.failures.append((path, reason))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'verdict': 'accept' if self.accepted else 'reject',
            'failures': [{'path': path, 'reason': reason} for path, reason in self.failures],
            'leaves': dict(self.leaves),
            'lemma_repairs': list(self.lemma_repairs),
            'recovered': dict(self.recovered),
            'fresh_proofs': {path: contradiction_to_dict(c) for path, c in self.fresh_proofs.items()},
            'counterexamples': dict(self.counterexamples),
            'divisions': self.divisions,
            'statistics': dict(self.statistics),
        }


def check_leaf(state: CheckState, contradiction: Optional[Contradiction]) -> CheckResult:
    """
    Validate a leaf certificate against the node's equations and ground bounds

    VarSymbol(v) passes iff l(v) > u(v). FarkasProof(w) passes iff the
    upper bound of the row wᵀ·A over the ground box is negative.

    Raises:
        DimensionMismatch: if |w| differs from the node's equation count
    """
    field = state.field
    if contradiction is None:
        return CheckResult(False, "leaf has no contradiction")
    if isinstance(contradiction, VarSymbol):
        var = contradiction.var
        if not 0 <= var < state.n_vars:
            return CheckResult(False, f"variable {var} does not exist")
        lower, upper = state.bounds.lower(var, True), state.bounds.upper(var, True)
        if field.gt(lower, upper):
            return PASS
        return CheckResult(False, f"x{var} has consistent bounds [{format_scalar(lower)}, "
                                  f"{format_scalar(upper)}]")

    vector = [field.convert(v) for v in contradiction.vector]
    if len(vector) != state.n_rows:
        raise DimensionMismatch(
            f"Farkas vector has {len(vector)} entries, node has {state.n_rows} equations")
    row = combine_rows(vector, state.tableau.A, field)
    upper = row_extreme(row, state.bounds, BoundSide.UPPER, use_ground=True)
    if field.lt(upper, 0):
        return PASS
    return CheckResult(False, f"combined row has upper bound {format_scalar(upper)} >= 0")


def _relu_ends(lemma: Lemma, relus: Sequence[Tuple[int, int]]) -> Optional[Tuple[int, int]]:
    rule = get_rule(lemma.rule_id)
    for b, f in relus:
        ends = {"b": b, "f": f}
        if (ends[rule.antecedent[0]] == lemma.antecedent_var
                and rule.antecedent[1] is lemma.antecedent_side
                and ends[rule.affected[0]] == lemma.affected_var
                and rule.affected[1] is lemma.side):
            return b, f
    return None


def _antecedent_bound(state: CheckState, lemma: Lemma) -> Tuple[Optional[ExtendedScalar], str]:
    if len(lemma.explanation) != state.n_rows:
        return None, (f"explanation has {len(lemma.explanation)} entries, "
                      f"node has {state.n_rows} equations")
    vector = [state.field.convert(v) for v in lemma.explanation]
    rebuilt = reconstruct_bound(vector, lemma.antecedent_var, lemma.antecedent_side,
                                state.tableau.A, state.bounds)
    if is_infinite(rebuilt):
        return None, "explanation does not bound the antecedent"
    return rebuilt, ""


def check_lemma(state: CheckState, lemma: Lemma, relus: Sequence[Tuple[int, int]]) -> CheckResult:
    """
    Re-derive a lemma from its antecedent explanation

    The antecedent bound is reconstructed against the node's ground bounds.
    The lemma passes when the rule, or a sibling rule with the same
    antecedent and affected bound, has its premise satisfied by the
    reconstruction and concludes a bound at least as tight as the lemma's.

    Raises:
        UnknownRule: if the rule id is not in the ReLU rule table
    """
    rule = get_rule(lemma.rule_id)
    field = state.field
    for var in (lemma.affected_var, lemma.antecedent_var):
        if not 0 <= var < state.n_vars:
            return CheckResult(False, f"variable {var} does not exist")
    if _relu_ends(lemma, relus) is None:
        return CheckResult(False, f"{lemma.rule_id} does not connect x{lemma.antecedent_var} "
                                  f"and x{lemma.affected_var} through a ReLU of the query")
    rebuilt, reason = _antecedent_bound(state, lemma)
    if rebuilt is None:
        return CheckResult(False, reason)

    value = field.convert(lemma.value)
    for candidate in sibling_rules(rule):
        if not candidate.premise(field, rebuilt):
            continue
        conclusion = candidate.conclusion(field, rebuilt)
        implied = field.le(conclusion, value) if lemma.side.is_upper else field.ge(conclusion, value)
        if implied:
            return PASS
    return CheckResult(False, f"{lemma.rule_id} on reconstructed bound {format_scalar(rebuilt)} "
                              f"does not give {lemma.side.value} bound {format_scalar(value)}")


def repair_lemma(state: CheckState, lemma: Lemma) -> Optional[ExtendedScalar]:
    """Conclusion of the lemma's rule on the exact reconstruction, or None if its premise fails"""
    rebuilt, _ = _antecedent_bound(state, lemma)
    if rebuilt is None:
        return None
    rule = get_rule(lemma.rule_id)
    if not rule.premise(state.field, rebuilt):
        return None
    return rule.conclusion(state.field, rebuilt)


def _relus_satisfied(alpha: Sequence[ExtendedScalar], relus: Sequence[Tuple[int, int]]) -> bool:
    return all(alpha[f] == max(alpha[b], 0) for b, f in relus)


def recover_leaf(state: CheckState, relus: Sequence[Tuple[int, int]],
                 delegate: Optional[Delegate] = None,
                 max_iters: int = DEFAULT_MAX_ITERS) -> Recovery:
    """
    Re-solve a failed leaf's LP with the exact Simplex engine

    Returns:
        FreshProof when the LP is infeasible, CounterexampleFound when its
        solution also satisfies every ReLU, Delegated when the delegate
        confirms UNSAT, otherwise Inconclusive
    """
    field = NumberField(EXACT)
    offset = state.n_vars - state.n_rows
    tableau = Tableau(state.tableau.A.copy(), [offset + row for row in range(state.n_rows)], field)
    bounds = state.bounds.copy()
    config = SimplexConfig(tableau, bounds, [field.zero()] * state.n_vars)
    engine = SimplexEngine(config, max_iters=max_iters)
    try:
        verdict = engine.solve()
    except IterationLimit as exc:
        return Inconclusive(str(exc))

    if isinstance(verdict, Unsat):
        contradiction = verdict.contradiction
        try:
            result = check_leaf(state, contradiction)
        except DimensionMismatch as exc:
            result = CheckResult(False, str(exc))
        if result:
            return FreshProof(contradiction)
        return Inconclusive(f"re-solved certificate fails: {result.reason}")

    if _relus_satisfied(verdict.alpha, relus):
        return CounterexampleFound(tuple(verdict.alpha[:offset]))
    if delegate is None:
        return Inconclusive("LP relaxation is satisfiable; no delegate to decide the ReLUs")
    try:
        decided = delegate(state.to_query(relus))
    except VerifierError as exc:
        return Inconclusive(f"delegate failed: {exc}")
    if decided is True:
        return Delegated("delegate confirmed UNSAT")
    if decided is False:
        return CounterexampleFound()
    return Inconclusive("delegate could not decide")


class ProofChecker:
    """
    Validates proof trees

    Args:
        expected_query: query the proof must be about (defaults to the echo)
        recover: repair failed lemmas and re-solve failed leaves
        delegate: decides leaves whose LP relaxation is satisfiable
        jobs: worker threads for leaf checks
        max_iters: Simplex budget for leaf recovery
    """

    def __init__(self, expected_query: Optional[Query] = None, recover: bool = False,
                 delegate: Optional[Delegate] = None, jobs: int = 1,
                 max_iters: int = DEFAULT_MAX_ITERS):
        self.expected_query = expected_query
        self.recover = recover
        self.delegate = delegate
        self.jobs = max(1, jobs)
        self.max_iters = max_iters
        self.field = NumberField(EXACT)

    def check(self, tree: ProofTree) -> CheckReport:
        report = CheckReport(statistics=tree.statistics())
        before = DIVISIONS.count
        query = tree.query

        if self.expected_query is not None and not query.same_lp(self.expected_query):
            report.fail(ROOT, "proof query does not match the expected query")
            return report
        problem = self._query_problem(query)
        if problem:
            report.fail(ROOT, problem)
            return report

        tableau, bounds = query.build_lp(self.field)
        leaves: List[Tuple[str, ProofNode, CheckState]] = []
        if tree.root.split is not None or tree.root.ground_bound_updates or tree.root.added_equations:
            report.fail(ROOT, "root node must not record a split")
        else:
            self._visit(tree.root, ROOT, CheckState(tableau, bounds), query.relus, report, leaves)

        results = self._check_leaves(leaves)
        report.divisions = DIVISIONS.count - before

        for (path, node, state), result in zip(leaves, results):
            if result:
                report.leaves[path] = VALID
            elif self.recover:
                self._recover(path, state, query.relus, result, report)
            else:
                report.leaves[path] = INVALID
                report.fail(path, result.reason)

        logger.info("check: %s (%d leaves, %d failures)",
                    "accept" if report.accepted else "reject", len(leaves), len(report.failures))
        return report

    def _query_problem(self, query: Query) -> str:
        n = query.n_vars
        for index, (coeffs, _) in enumerate(query.equations):
            if any(not 0 <= var < n for var in coeffs):
                return f"equation {index} refers to an unknown variable"
        for index, (b, f) in enumerate(query.relus):
            if not (0 <= b < n and 0 <= f < n) or b == f:
                return f"ReLU {index} refers to an unknown variable"
        return ""

    def _visit(self, node: ProofNode, path: str, state: CheckState,
               relus: Sequence[Tuple[int, int]], report: CheckReport,
               leaves: List[Tuple[str, ProofNode, CheckState]]):
        for index, lemma in enumerate(node.lemmas):
            self._apply_lemma(path, index, lemma, state, relus, report)

        if node.is_leaf:
            leaves.append((path, node, state))
            return
        if node.contradiction is not None:
            report.fail(path, "internal node carries a contradiction")

        children = node.children
        if len(children) != 2 or any(child.split is None for child in children):
            report.fail(path, "an internal node needs exactly two split children")
            return
        relu = children[0].split.relu
        phases = {child.split.phase for child in children}
        if children[1].split.relu != relu or phases != {Phase.ACTIVE, Phase.INACTIVE}:
            report.fail(path, "children are not the two phases of one ReLU")
            return
        if not 0 <= relu < len(relus):
            report.fail(path, f"ReLU {relu} is not in the query")
            return
        if relu in state.phases:
            report.fail(path, f"ReLU {relu} is already fixed on this path")
            return

        for child in children:
            child_state = state.copy()
            here = child_path(path, child)
            if self._apply_split(child, relus[relu], child_state, here, report):
                self._visit(child, here, child_state, relus, report, leaves)

    def _apply_split(self, child: ProofNode, relu: Tuple[int, int], state: CheckState,
                     path: str, report: CheckReport) -> bool:
        """Replay a split with the updates the phase prescribes; recorded ones must agree"""
        phase = child.split.phase
        updates, equations = split_constraints(phase, *relu)
        recorded = {(u.var, u.side, self.field.convert(u.value)) for u in child.ground_bound_updates}
        expected = {(u.var, u.side, self.field.convert(u.value)) for u in updates}
        if recorded != expected:
            report.fail(path, f"ground bound updates do not match the {phase.value} phase")
            return False
        if [_normalized(e, self.field) for e in child.added_equations] != \
                [_normalized(e, self.field) for e in equations]:
            report.fail(path, f"added equations do not match the {phase.value} phase")
            return False
        for coeffs_rhs in equations:
            state.add_equation(coeffs_rhs)
        for update in updates:
            state.tighten(update.var, update.side, update.value)
        state.phases[child.split.relu] = phase
        return True

    def _apply_lemma(self, path: str, index: int, lemma: Lemma, state: CheckState,
                     relus: Sequence[Tuple[int, int]], report: CheckReport):
        where = f"{path}#lemma{index}"
        try:
            result = check_lemma(state, lemma, relus)
        except UnknownRule as exc:
            report.fail(where, str(exc))
            return
        if result:
            state.tighten(lemma.affected_var, lemma.side, lemma.value)
            return
        if not self.recover:
            report.fail(where, result.reason)
            return

        repaired = None
        if _relu_ends(lemma, relus) is not None:
            repaired = repair_lemma(state, lemma)
        if repaired is None:
            report.lemma_repairs.append({'path': where, 'action': 'dropped', 'reason': result.reason})
            logger.info("%s: dropped lemma (%s)", where, result.reason)
            return
        state.tighten(lemma.affected_var, lemma.side, repaired)
        report.lemma_repairs.append({'path': where, 'action': 'repaired',
                                     'value': format_scalar(repaired)})
        logger.info("%s: repaired lemma to %s", where, format_scalar(repaired))

    def _check_one(self, leaf: Tuple[str, ProofNode, CheckState]) -> CheckResult:
        _, node, state = leaf
        try:
            return check_leaf(state, node.contradiction)
        except DimensionMismatch as exc:
            return CheckResult(False, str(exc))

    def _check_leaves(self, leaves: List[Tuple[str, ProofNode, CheckState]]) -> List[CheckResult]:
        if self.jobs > 1 and len(leaves) > 1:
            with ThreadPoolExecutor(max_workers=self.jobs) as pool:
                return list(pool.map(self._check_one, leaves))
        return [self._check_one(leaf) for leaf in leaves]

    def _recover(self, path: str, state: CheckState,
                 relus: Sequence[Tuple[int, int]], failure: CheckResult, report: CheckReport):
        outcome = recover_leaf(state, relus, self.delegate, self.max_iters)
        if isinstance(outcome, FreshProof):
            report.fresh_proofs[path] = outcome.contradiction
            report.leaves[path] = RECOVERED
            report.recovered[path] = "fresh proof"
        elif isinstance(outcome, Delegated):
            report.leaves[path] = DELEGATED
            report.recovered[path] = outcome.note
        elif isinstance(outcome, CounterexampleFound):
            report.leaves[path] = COUNTEREXAMPLE
            report.counterexamples[path] = [format_scalar(v) for v in outcome.assignment]
            report.fail(path, "leaf is satisfiable")
        else:
            report.leaves[path] = INCONCLUSIVE
            report.fail(path, f"{failure.reason}; recovery inconclusive: {outcome.reason}")
        logger.info("%s: recovery -> %s", path, report.leaves[path])


def _normalized(equation: Equation, field: NumberField):
    coeffs, rhs = equation
    return ({var: field.convert(v) for var, v in coeffs.items() if v != 0}, field.convert(rhs))


def check(tree: ProofTree, expected_query: Optional[Query] = None, recover: bool = False,
          delegate: Optional[Delegate] = None, jobs: int = 1) -> CheckReport:
    """Check a proof tree with a fresh ProofChecker"""
    return ProofChecker(expected_query, recover, delegate, jobs).check(tree)
