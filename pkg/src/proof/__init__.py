"""
Proof trees, the certproof file format and the independent checker
"""

from .tree import ROOT, SplitRecord, ProofNode, ProofTree, child_path
from .proof_format import VERSION, serialize, deserialize, write_proof, read_proof
from .checker import (CheckReport, CheckResult, CheckState, ProofChecker, FreshProof,
                      CounterexampleFound, Delegated, Inconclusive, check, check_leaf,
                      check_lemma, recover_leaf)

__all__ = [
    'ROOT',
    'SplitRecord',
    'ProofNode',
    'ProofTree',
    'child_path',
    'VERSION',
    'serialize',
    'deserialize',
    'write_proof',
    'read_proof',
    'CheckReport',
    'CheckResult',
    'CheckState',
    'ProofChecker',
    'FreshProof',
    'CounterexampleFound',
    'Delegated',
    'Inconclusive',
    'check',
    'check_leaf',
    'check_lemma',
    'recover_leaf'
]
