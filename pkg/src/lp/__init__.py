"""
LP core: numeric field, tableau, Simplex engine and bound tightening
"""

from .scalar import NumberField, parse_scalar, format_scalar, INF, NEG_INF, DIVISIONS
from .tableau import BoundSide, BoundProfile, Tableau, augment_with_slacks, row_extreme, reconstruct_bound
from .certificates import Phase, VarSymbol, FarkasProof, BoundUpdate, Lemma, RELU_RULES
from .query import Query
from .tightening import TightenRecord, BoundTightener, tighten_from_row, relu_propagate, verify_explanation
from .simplex import SimplexConfig, SimplexEngine, Sat, Unsat, StepResult, build_contradiction

__all__ = [
    'NumberField',
    'parse_scalar',
    'format_scalar',
    'INF',
    'NEG_INF',
    'DIVISIONS',
    'BoundSide',
    'BoundProfile',
    'Tableau',
    'augment_with_slacks',
    'row_extreme',
    'reconstruct_bound',
    'Phase',
    'VarSymbol',
    'FarkasProof',
    'BoundUpdate',
    'Lemma',
    'RELU_RULES',
    'Query',
    'TightenRecord',
    'BoundTightener',
    'tighten_from_row',
    'relu_propagate',
    'verify_explanation',
    'SimplexConfig',
    'SimplexEngine',
    'Sat',
    'Unsat',
    'StepResult',
    'build_contradiction'
]
