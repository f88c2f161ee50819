"""
Unit tests for the proof checker
"""

import unittest
import sys
import os
import copy
from dataclasses import replace
from fractions import Fraction

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.errors import DimensionMismatch, UnknownRule
from src.lp import (BoundSide, BoundUpdate, FarkasProof, Lemma, NumberField, Phase, Query,
                    VarSymbol)
from src.proof import (CheckState, ProofChecker, ProofNode, ProofTree, SplitRecord, check,
                       check_leaf, check_lemma)
from src.proof.checker import COUNTEREXAMPLE, DELEGATED, INCONCLUSIVE, RECOVERED, VALID
from src.search import ReluVerifier, SplitPlan
from tests.oracles import proof_tree_valid, running_query, random_instance, sat_query

X1, X2, B1, F1, B2, F2, Y = range(7)
RELUS = [(B1, F1), (B2, F2)]
QUARTER = Fraction(1, 4)


def root_state():
    tableau, bounds = running_query().build_lp(NumberField())
    return CheckState(tableau, bounds)


def guided_tree(field=None):
    plan = SplitPlan(0, {Phase.ACTIVE: SplitPlan(1)})
    return ReluVerifier(field).verify(running_query(), plan=plan).tree


def solver_delegate(query):
    return ReluVerifier().verify(query).is_unsat


def single_point_mutations(tree):
    """
    Yield (label, tree) pairs that each differ from ``tree`` in one place:
    a certificate entry, a lemma value or explanation entry, or the shape
    of one internal node
    """
    def mutant(index, change):
        clone = copy.deepcopy(tree)
        node = list(clone.nodes())[index][1]
        change(node)
        return clone

    def leaf(contradiction):
        return lambda node: setattr(node, 'contradiction', contradiction)

    def lemma_at(position, lemma):
        return lambda node: node.lemmas.__setitem__(position, lemma)

    for index, (path, node) in enumerate(tree.nodes()):
        contradiction = node.contradiction
        if isinstance(contradiction, FarkasProof):
            for entry in range(len(contradiction.vector)):
                for delta in (1, -1, Fraction(1, 2)):
                    vector = list(contradiction.vector)
                    vector[entry] = vector[entry] + delta
                    yield (f"{path} w[{entry}] += {delta}",
                           mutant(index, leaf(FarkasProof(tuple(vector)))))
        elif isinstance(contradiction, VarSymbol):
            for other in (contradiction.var - 1, contradiction.var + 1):
                yield (f"{path} var {other}",
                       mutant(index, leaf(VarSymbol(other))))

        for position, lemma in enumerate(node.lemmas):
            for delta in (Fraction(1, 7), Fraction(-1, 7), 1, -1):
                changed = replace(lemma, value=lemma.value + delta)
                yield (f"{path}#lemma{position} value += {delta}",
                       mutant(index, lemma_at(position, changed)))
            for entry in range(len(lemma.explanation)):
                explanation = list(lemma.explanation)
                explanation[entry] = explanation[entry] + 1
                changed = replace(lemma, explanation=tuple(explanation))
                yield (f"{path}#lemma{position} explanation[{entry}]+1",
                       mutant(index, lemma_at(position, changed)))

        if node.children:
            for dropped in (0, 1):
                yield f"{path} drop child {dropped}", mutant(index, lambda n, d=dropped: n.children.pop(d))

            def swap_phases(n):
                first, second = n.children
                for attribute in ('split', 'ground_bound_updates', 'added_equations'):
                    left, right = getattr(first, attribute), getattr(second, attribute)
                    setattr(first, attribute, right)
                    setattr(second, attribute, left)
            yield f"{path} swap phases", mutant(index, swap_phases)

            def other_relu(n):
                relu = n.children[0].split.relu
                for child in n.children:
                    child.split = SplitRecord((relu + 1) % len(tree.query.relus), child.split.phase)
            yield f"{path} other relu", mutant(index, other_relu)


class TestCheckLeaf(unittest.TestCase):
    """Test leaf certificates on the running example"""

    def setUp(self):
        self.state = root_state()

    def test_inactive_leaf(self):
        """Test -e1 refutes the v1-inactive node"""
        self.state.tighten(B1, BoundSide.UPPER, 0)
        self.state.tighten(F1, BoundSide.LOWER, 0)
        self.state.tighten(F1, BoundSide.UPPER, 0)
        self.assertTrue(check_leaf(self.state, FarkasProof((-1, 0, 0))))

    def test_wrong_direction(self):
        """Test +e1 leaves a non-negative upper bound"""
        result = check_leaf(self.state, FarkasProof((1, 0, 0)))
        self.assertFalse(result)
        self.assertIn("upper bound 9/2", result.reason)

    def test_var_symbol(self):
        """Test l(f2) = 1/4 > u(f2) = 0 once v2 is inactive"""
        self.state.add_equation(({B1: 1, F1: -1}, 0))
        self.state.tighten(B1, BoundSide.LOWER, 0)
        for var, side in ((B2, BoundSide.UPPER), (F2, BoundSide.LOWER), (F2, BoundSide.UPPER)):
            self.state.tighten(var, side, 0)
        self.assertTrue(check_leaf(self.state, VarSymbol(F2)))
        self.assertFalse(check_leaf(self.state, VarSymbol(X1)))

    def test_lemma_chain(self):
        """Test -2·e1 + e2 refutes the root box once l(b2) = 1/4"""
        self.state.tighten(B2, BoundSide.LOWER, QUARTER)
        self.assertTrue(check_leaf(self.state, FarkasProof((-2, 1, 0))))

    def test_dimension_mismatch(self):
        """Test vector length must equal the equation count"""
        with self.assertRaises(DimensionMismatch):
            check_leaf(self.state, FarkasProof((1, 0)))

    def test_missing_contradiction(self):
        """Test a leaf without a certificate fails"""
        self.assertFalse(check_leaf(self.state, None))


class TestCheckLemma(unittest.TestCase):
    """Test lemma re-derivation"""

    def setUp(self):
        self.state = root_state()

    def test_positive_output_bound(self):
        """Test l(f2) = 1/4 gives l(b2) = 1/4"""
        lemma = Lemma(B2, BoundSide.LOWER, QUARTER, "R1", F2, BoundSide.LOWER, (0, 0, 0))
        self.assertTrue(check_lemma(self.state, lemma, RELUS))

    def test_overstated_value(self):
        """Test l(b2) = 5/4 is not implied"""
        lemma = Lemma(B2, BoundSide.LOWER, Fraction(5, 4), "R1", F2, BoundSide.LOWER, (0, 0, 0))
        self.assertFalse(check_lemma(self.state, lemma, RELUS))

    def test_premise_fails(self):
        """Test u(b1) = 1/2 does not force u(f1) = 0"""
        lemma = Lemma(F1, BoundSide.UPPER, 0, "R4", B1, BoundSide.UPPER, (0, 0, 0))
        self.assertFalse(check_lemma(self.state, lemma, RELUS))

    def test_sibling_rule(self):
        """Test a weaker upper bound is accepted through the sibling rule"""
        lemma = Lemma(F1, BoundSide.UPPER, 1, "R4", B1, BoundSide.UPPER, (0, 0, 0))
        self.assertTrue(check_lemma(self.state, lemma, RELUS))

    def test_explained_antecedent(self):
        """Test [1,0,0] reconstructs l(b1) = 1 and so l(f1) = 1"""
        lemma = Lemma(F1, BoundSide.LOWER, 1, "R2", B1, BoundSide.LOWER, (1, 0, 0))
        self.assertTrue(check_lemma(self.state, lemma, RELUS))

    def test_not_a_relu(self):
        """Test the antecedent and affected variables must share a ReLU"""
        lemma = Lemma(F1, BoundSide.LOWER, QUARTER, "R1", F2, BoundSide.LOWER, (0, 0, 0))
        self.assertFalse(check_lemma(self.state, lemma, RELUS))

    def test_unknown_rule(self):
        """Test rule ids outside the table"""
        lemma = Lemma(B2, BoundSide.LOWER, QUARTER, "R9", F2, BoundSide.LOWER, (0, 0, 0))
        with self.assertRaises(UnknownRule):
            check_lemma(self.state, lemma, RELUS)


class TestProofChecker(unittest.TestCase):
    """Test whole-tree checking and its failure modes"""

    def test_accepts_solver_trees(self):
        """Test trees from the search are accepted without dividing"""
        for tree in (ReluVerifier().verify(running_query()).tree, guided_tree()):
            report = check(tree, running_query())
            self.assertTrue(report.accepted, report.failures)
            self.assertEqual(report.divisions, 0)
            self.assertTrue(all(status == VALID for status in report.leaves.values()))
            self.assertEqual(report.to_dict()['verdict'], 'accept')

    def test_parallel_leaf_checks(self):
        """Test leaf checks in worker threads"""
        self.assertTrue(check(guided_tree(), jobs=3).accepted)

    def test_expected_query_mismatch(self):
        """Test a proof about another query is rejected"""
        report = check(guided_tree(), sat_query())
        self.assertFalse(report.accepted)
        self.assertEqual(report.failures[0][0], "root")

    def test_bad_farkas_leaf(self):
        """Test a wrong certificate is reported at its path"""
        tree = guided_tree()
        tree.root.children[0].contradiction = FarkasProof((1, 0, 0))
        report = check(tree)
        self.assertFalse(report.accepted)
        self.assertEqual([path for path, _ in report.failures], ["root/relu0=inactive"])
        self.assertEqual(report.to_dict()['verdict'], 'reject')

    def test_negated_certificates_rejected(self):
        """Test negating any Farkas leaf of a random proof breaks it"""
        mutated = 0
        queries = [running_query()] + [random_instance(seed)[2] for seed in range(60)]
        for index, query in enumerate(queries):
            result = ReluVerifier().verify(query)
            if not result.is_unsat:
                continue
            for path, leaf in result.tree.leaves():
                if not isinstance(leaf.contradiction, FarkasProof):
                    continue
                original = leaf.contradiction
                leaf.contradiction = FarkasProof(tuple(-v for v in original.vector))
                report = check(result.tree, query)
                self.assertIn(path, [where for where, _ in report.failures], f"query {index}")
                leaf.contradiction = original
                mutated += 1
        self.assertGreater(mutated, 0)

    def test_single_point_mutations(self):
        """Test every accepted mutation is still a valid proof when re-derived independently"""
        trees = [(running_query(), guided_tree()),
                 (running_query(), ReluVerifier().verify(running_query()).tree)]
        for seed in range(80):
            _, _, query = random_instance(seed, layers=2, width=3)
            result = ReluVerifier().verify(query)
            if result.is_unsat:
                trees.append((query, result.tree))

        mutations = rejected = 0
        for query, tree in trees:
            self.assertTrue(proof_tree_valid(tree))
            for label, mutated in single_point_mutations(tree):
                mutations += 1
                if check(mutated, query).accepted:
                    self.assertTrue(proof_tree_valid(mutated), label)
                else:
                    rejected += 1
            if mutations >= 800:
                break
        self.assertGreaterEqual(mutations, 500)
        self.assertGreater(rejected, mutations // 2)

    def test_dropped_child(self):
        """Test an internal node needs both children"""
        tree = guided_tree()
        tree.root.children.pop()
        self.assertFalse(check(tree).accepted)

    def test_unknown_relu(self):
        """Test splits must name a ReLU of the query"""
        tree = guided_tree()
        for child in tree.root.children:
            child.split = SplitRecord(7, child.split.phase)
        report = check(tree)
        self.assertIn("ReLU 7 is not in the query", report.failures[0][1])

    def test_duplicate_phase(self):
        """Test children must cover both phases"""
        tree = guided_tree()
        tree.root.children[1].split = SplitRecord(0, Phase.INACTIVE)
        self.assertFalse(check(tree).accepted)

    def test_resplit_fixed_relu(self):
        """Test a ReLU cannot be split twice on one path"""
        tree = guided_tree()
        for child in tree.root.children[1].children:
            child.split = SplitRecord(0, child.split.phase)
        report = check(tree)
        self.assertIn("already fixed", report.failures[0][1])

    def test_wrong_update_value(self):
        """Test recorded ground updates must match the phase"""
        tree = guided_tree()
        child = tree.root.children[0]
        first = child.ground_bound_updates[0]
        child.ground_bound_updates[0] = BoundUpdate(first.var, first.side, 1)
        report = check(tree)
        self.assertEqual(report.failures[0][0], "root/relu0=inactive")

    def test_root_split_rejected(self):
        """Test the root may not record a split"""
        tree = guided_tree()
        tree.root.split = SplitRecord(0, Phase.ACTIVE)
        self.assertFalse(check(tree).accepted)

    def test_float_trees_with_recovery(self):
        """Test proofs from float search are accepted once recovery may re-solve"""
        report = check(guided_tree(NumberField("float")), running_query(), recover=True)
        self.assertTrue(report.accepted, report.failures)

    def test_random_float_trees_with_recovery(self):
        """Test float-mode proofs of random instances are accepted, repairing leaves as needed"""
        floating = ReluVerifier(NumberField("float"))
        checked = 0
        for seed in range(30):
            _, _, query = random_instance(seed, layers=2, width=3)
            result = floating.verify(query)
            if not result.is_unsat:
                continue
            checked += 1
            report = check(result.tree, query, recover=True, delegate=solver_delegate)
            self.assertTrue(report.accepted, f"seed {seed}: {report.failures}")
            self.assertTrue(set(report.leaves.values()) <= {VALID, RECOVERED, DELEGATED},
                            f"seed {seed}: {report.leaves}")
            self.assertEqual(set(report.fresh_proofs),
                             {path for path, status in report.leaves.items() if status == RECOVERED})
        self.assertGreater(checked, 0)


class TestRecovery(unittest.TestCase):
    """Test lemma repair and leaf re-solving"""

    def setUp(self):
        self.tree = ReluVerifier().verify(running_query()).tree

    def test_overstated_lemma(self):
        """Test l(b2) raised to 5/4 is rejected, or repaired back to 1/4"""
        lemma = self.tree.root.lemmas[0]
        self.tree.root.lemmas[0] = replace(lemma, value=Fraction(5, 4))
        report = check(self.tree)
        self.assertEqual(report.failures[0][0], "root#lemma0")

        report = check(self.tree, recover=True)
        self.assertTrue(report.accepted, report.failures)
        self.assertEqual(report.lemma_repairs[0]['action'], 'repaired')
        self.assertEqual(report.lemma_repairs[0]['value'], "1/4")

    def test_fresh_proof(self):
        """Test a broken leaf gets a new certificate in the report; the input tree is untouched"""
        self.tree.root.contradiction = FarkasProof((1, 0, 0))
        report = check(self.tree, recover=True)
        self.assertTrue(report.accepted, report.failures)
        self.assertEqual(report.leaves["root"], RECOVERED)
        self.assertEqual(self.tree.root.contradiction, FarkasProof((1, 0, 0)))
        self.assertFalse(check(self.tree).accepted)
        self.tree.root.contradiction = report.fresh_proofs["root"]
        self.assertTrue(check(self.tree).accepted)
        self.assertIn(report.to_dict()['fresh_proofs']["root"]['kind'], ("var", "farkas"))

    def test_counterexample(self):
        """Test a bogus UNSAT claim about a satisfiable query"""
        tree = ProofTree(sat_query(), ProofNode(contradiction=VarSymbol(0)))
        report = check(tree, recover=True, delegate=solver_delegate)
        self.assertFalse(report.accepted)
        self.assertEqual(report.leaves["root"], COUNTEREXAMPLE)

    def test_delegated_and_inconclusive(self):
        """Test a leaf that only the ReLU makes infeasible"""
        query = Query(["x", "b", "f"], [Fraction(-1), Fraction(-1), Fraction(1, 2)],
                      [Fraction(1), Fraction(0), Fraction(1)], [({0: 1, 1: -1}, 0)], [(1, 2)])
        tree = ProofTree(query, ProofNode(contradiction=VarSymbol(0)))

        report = ProofChecker(recover=True, delegate=solver_delegate).check(tree)
        self.assertTrue(report.accepted, report.failures)
        self.assertEqual(report.leaves["root"], DELEGATED)

        report = ProofChecker(recover=True).check(tree)
        self.assertFalse(report.accepted)
        self.assertEqual(report.leaves["root"], INCONCLUSIVE)


if __name__ == '__main__':
    unittest.main()
