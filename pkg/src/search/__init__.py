"""
Case-splitting search over ReLU phases
"""

from .search_tree import (ReluConstraint, SplitPlan, SearchState, VerificationResult,
                          ReluVerifier, apply_split, pick_split)

__all__ = [
    'ReluConstraint',
    'SplitPlan',
    'SearchState',
    'VerificationResult',
    'ReluVerifier',
    'apply_split',
    'pick_split'
]
