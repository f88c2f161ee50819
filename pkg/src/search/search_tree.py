"""
ReLU case-splitting search that builds the proof tree.

Every node runs the Simplex engine with bound tightening. An UNSAT node
becomes a leaf holding its contradiction; a SAT node either satisfies every
ReLU (the query is SAT) or is split on the first violated ReLU.
"""

import dataclasses
import logging
import math
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from src.errors import AlreadyFixed, DepthLimit
from src.lp.certificates import Lemma, Phase, split_constraints
from src.lp.query import Query
from src.lp.scalar import NumberField, Scalar
from src.lp.simplex import DEFAULT_MAX_ITERS, SimplexConfig, SimplexEngine, Unsat, Verdict
from src.lp.tableau import BoundProfile, Tableau
from src.proof.tree import ProofNode, ProofTree, SplitRecord

logger = logging.getLogger(__name__)


@dataclass
class ReluConstraint:
    """f = ReLU(b) with the phase fixed along the current path"""
    b: int
    f: int
    phase: Phase = Phase.UNFIXED


@dataclass
class SplitPlan:
    """
    Split shape to replay

    At a node covered by the plan the search splits on ``relu`` before
    solving; ``children`` gives the plan for each phase (None: search freely).
    """
    relu: int
    children: Dict[Phase, Optional["SplitPlan"]] = field(default_factory=dict)

    def child(self, phase: Phase) -> Optional["SplitPlan"]:
        return self.children.get(phase)

    @classmethod
    def from_node(cls, node: ProofNode) -> Optional["SplitPlan"]:
        if node.is_leaf:
            return None
        plan = cls(node.children[0].split.relu)
        for child in node.children:
            plan.children[child.split.phase] = cls.from_node(child)
        return plan

    @classmethod
    def from_tree(cls, tree: ProofTree) -> Optional["SplitPlan"]:
        """Plan reproducing the split structure of an existing proof tree"""
        return cls.from_node(tree.root)


@dataclass
class SearchState:
    """Everything a node owns; children get deep copies"""
    tableau: Tableau
    initial: Tableau
    bounds: BoundProfile
    alpha: List[Scalar]
    relus: List[ReluConstraint]
    depth: int = 0

    @classmethod
    def from_query(cls, query: Query, field: Optional[NumberField] = None) -> "SearchState":
        field = field or NumberField()
        tableau, bounds = query.build_lp(field)
        alpha = [field.zero()] * tableau.n_vars
        relus = [ReluConstraint(b, f) for b, f in query.relus]
        return cls(tableau, tableau.copy(), bounds, alpha, relus)

    def copy(self) -> "SearchState":
        return SearchState(self.tableau.copy(), self.initial.copy(), self.bounds.copy(),
                           list(self.alpha), [dataclasses.replace(r) for r in self.relus],
                           self.depth)

    def unfixed_pairs(self) -> List[Tuple[int, int]]:
        return [(r.b, r.f) for r in self.relus if r.phase is Phase.UNFIXED]


def apply_split(state: SearchState, relu_index: int, phase: Phase) -> Tuple[SearchState, ProofNode]:
    """
    Child state for one phase of a ReLU, plus its proof-node stub

    Active appends the row f = b with a fresh slack (every Farkas vector is
    zero-extended) and tightens l(b) to 0. Inactive tightens u(b), l(f), u(f)
    to 0. Tightened ground bounds reset their Farkas vectors; everything
    else is inherited.

    Raises:
        AlreadyFixed: if the ReLU's phase is already fixed on this path
    """
    relu = state.relus[relu_index]
    if relu.phase is not Phase.UNFIXED:
        raise AlreadyFixed(f"ReLU {relu_index} is already {relu.phase.value}")

    child = state.copy()
    child.depth += 1
    child.relus[relu_index].phase = phase
    field = child.bounds.field
    updates, equations = split_constraints(phase, relu.b, relu.f)

    for coeffs, rhs in equations:
        child.bounds.extend_rows(1)
        child.tableau.append_equation(coeffs)
        child.initial.append_equation(coeffs, substitute=False)
        fixed = -field.convert(rhs)
        child.bounds.add_variable(fixed, fixed)
        child.alpha.append(-sum((field.convert(c) * child.alpha[var] for var, c in coeffs.items()),
                                field.zero()))

    for update in updates:
        child.bounds.tighten_ground(update.var, update.side, update.value)

    node = ProofNode(split=SplitRecord(relu_index, phase),
                     ground_bound_updates=list(updates),
                     added_equations=list(equations))
    return child, node


def pick_split(state: SearchState, field: Optional[NumberField] = None) -> Optional[int]:
    """
    Index of the lowest unfixed ReLU violated by the assignment

    Returns:
        None when the assignment satisfies every ReLU
    """
    field = field or state.bounds.field
    for index, relu in enumerate(state.relus):
        if relu.phase is not Phase.UNFIXED:
            continue
        b_value = state.alpha[relu.b]
        if not field.eq(state.alpha[relu.f], max(b_value, field.zero())):
            return index
    return None


@dataclass
class VerificationResult:
    """Outcome of verify: a witness for SAT, a proof tree for UNSAT"""
    verdict: str
    witness: Optional[List[Scalar]] = None
    tree: Optional[ProofTree] = None
    statistics: Dict[str, Any] = field(default_factory=dict)

    @property
    def is_sat(self) -> bool:
        return self.verdict == "sat"

    @property
    def is_unsat(self) -> bool:
        return self.verdict == "unsat"


class ReluVerifier:
    """
    Depth-first case-splitting verifier producing proof trees

    Args:
        field: arithmetic mode (exact rationals by default)
        max_iters: Simplex budget per node
        inactive_first: explore the inactive child before the active one
        jobs: >1 solves sibling subtrees in worker threads
        produce_proofs: maintain Farkas vectors and assemble the tree
        audit: re-derive every tightened bound from its explanation
    """

    def __init__(self, field: Optional[NumberField] = None, max_iters: int = DEFAULT_MAX_ITERS,
                 inactive_first: bool = True, jobs: int = 1, produce_proofs: bool = True,
                 audit: bool = False):
        self.field = field or NumberField()
        self.max_iters = max_iters
        self.inactive_first = inactive_first
        self.jobs = max(1, jobs)
        self.produce_proofs = produce_proofs
        self.audit = audit
        self._parallel_depth = math.ceil(math.log2(self.jobs)) if self.jobs > 1 else 0
        self._lock = threading.Lock()
        self._stats: Dict[str, Any] = {}

    def _phases(self) -> Tuple[Phase, Phase]:
        if self.inactive_first:
            return Phase.INACTIVE, Phase.ACTIVE
        return Phase.ACTIVE, Phase.INACTIVE

    def _count(self, key: str, amount: int = 1):
        with self._lock:
            self._stats[key] = self._stats.get(key, 0) + amount

    def verify(self, query: Query, plan: Optional[SplitPlan] = None) -> VerificationResult:
        """
        Decide the query

        Args:
            query: encoded verification query
            plan: optional split shape replayed before free search

        Returns:
            SAT with the input part of a satisfying assignment, or UNSAT
            with the proof tree (None when proofs are switched off)

        Raises:
            IterationLimit: a node exceeded the Simplex budget
            DepthLimit: a path fixed more ReLUs than the query has
        """
        self._stats = {'nodes': 0, 'leaves': 0, 'splits': 0, 'pivots': 0,
                       'tightenings': 0, 'lemmas': 0, 'simplex_iterations': 0}
        started = time.perf_counter()
        state = SearchState.from_query(query, self.field)
        root = ProofNode()
        alpha = self._explore(state, root, plan, len(query.relus))
        self._stats['seconds'] = time.perf_counter() - started

        if alpha is not None:
            logger.info("SAT after %d nodes", self._stats['nodes'])
            return VerificationResult("sat", witness=query.input_values(alpha),
                                      statistics=dict(self._stats))
        tree = ProofTree(query, root) if self.produce_proofs else None
        logger.info("UNSAT: %d nodes, %d leaves", self._stats['nodes'], self._stats['leaves'])
        return VerificationResult("unsat", tree=tree, statistics=dict(self._stats))

    def _solve(self, state: SearchState) -> Tuple[Verdict, List[Lemma]]:
        config = SimplexConfig(state.tableau, state.bounds, state.alpha)
        engine = SimplexEngine(config, state.unfixed_pairs(), state.initial, self.max_iters,
                               self.produce_proofs, self.audit)
        verdict = engine.solve()
        state.alpha = config.alpha
        self._count('pivots', engine.pivots)
        self._count('tightenings', engine.tightenings)
        self._count('lemmas', len(engine.lemmas))
        self._count('simplex_iterations', engine.iterations)
        return verdict, engine.lemmas

    def _explore(self, state: SearchState, node: ProofNode, plan: Optional[SplitPlan],
                 max_depth: int) -> Optional[Sequence[Scalar]]:
        """Solve a node and its subtree; returns a satisfying assignment or None"""
        self._count('nodes')
        if state.depth > max_depth:
            raise DepthLimit(f"Depth {state.depth} exceeds the {max_depth} ReLUs of the query")

        if plan is not None and state.relus[plan.relu].phase is Phase.UNFIXED:
            relu_index = plan.relu
        else:
            plan = None
            verdict, lemmas = self._solve(state)
            node.lemmas.extend(lemmas)
            if isinstance(verdict, Unsat):
                node.contradiction = verdict.contradiction
                self._count('leaves')
                return None
            relu_index = pick_split(state, self.field)
            if relu_index is None:
                return verdict.alpha

        self._count('splits')
        logger.debug("depth %d: split on ReLU %d", state.depth, relu_index)
        branches = []
        for phase in self._phases():
            child_state, child_node = apply_split(state, relu_index, phase)
            node.children.append(child_node)
            child_plan = plan.child(phase) if plan is not None else None
            branches.append((child_state, child_node, child_plan))

        if state.depth < self._parallel_depth:
            with ThreadPoolExecutor(max_workers=2) as pool:
                futures = [pool.submit(self._explore, s, n, p, max_depth) for s, n, p in branches]
                results = [future.result() for future in futures]
            return next((alpha for alpha in results if alpha is not None), None)

        for child_state, child_node, child_plan in branches:
            alpha = self._explore(child_state, child_node, child_plan, max_depth)
            if alpha is not None:
                return alpha
        return None
