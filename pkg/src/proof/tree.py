"""
Proof tree: internal nodes record ReLU splits, every node may carry lemmas,
leaves carry contradictions
"""

from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Tuple

from src.lp.certificates import BoundUpdate, Contradiction, FarkasProof, Lemma, Phase, VarSymbol
from src.lp.query import Equation, Query

ROOT = "root"


@dataclass(frozen=True)
class SplitRecord:
    relu: int
    phase: Phase


@dataclass
class ProofNode:
    """
    One search node

    ``split`` is the (relu, phase) that produced the node (None at the root).
    Internal nodes have exactly two children, leaves a contradiction.
    """
    split: Optional[SplitRecord] = None
    ground_bound_updates: List[BoundUpdate] = field(default_factory=list)
    added_equations: List[Equation] = field(default_factory=list)
    lemmas: List[Lemma] = field(default_factory=list)
    children: List["ProofNode"] = field(default_factory=list)
    contradiction: Optional[Contradiction] = None

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def walk(self, path: str = ROOT) -> Iterator[Tuple[str, "ProofNode"]]:
        """Pre-order traversal yielding (path, node)"""
        yield path, self
        for child in self.children:
            yield from child.walk(child_path(path, child))


def child_path(path: str, child: ProofNode) -> str:
    if child.split is None:
        return f"{path}/?"
    return f"{path}/relu{child.split.relu}={child.split.phase.value}"


@dataclass
class ProofTree:
    """Query plus the root of its proof; network/prop echo the source documents"""
    query: Query
    root: ProofNode
    network: Optional[Dict[str, Any]] = None
    prop: Optional[Dict[str, Any]] = None

    def nodes(self) -> Iterator[Tuple[str, ProofNode]]:
        return self.root.walk()

    def leaves(self) -> List[Tuple[str, ProofNode]]:
        return [(path, node) for path, node in self.nodes() if node.is_leaf]

    @property
    def node_count(self) -> int:
        return sum(1 for _ in self.nodes())

    @property
    def leaf_count(self) -> int:
        return len(self.leaves())

    @property
    def depth(self) -> int:
        return max(path.count("/") for path, _ in self.nodes())

    @property
    def lemma_count(self) -> int:
        return sum(len(node.lemmas) for _, node in self.nodes())

    def statistics(self) -> Dict[str, int]:
        """Tree size figures reported by the CLI and the benchmark"""
        kinds = Counter()
        for _, node in self.leaves():
            if isinstance(node.contradiction, VarSymbol):
                kinds['var_symbol'] += 1
            elif isinstance(node.contradiction, FarkasProof):
                kinds['farkas'] += 1
            else:
                kinds['missing'] += 1
        return {
            'nodes': self.node_count,
            'leaves': self.leaf_count,
            'depth': self.depth,
            'lemmas': self.lemma_count,
            'var_symbol_leaves': kinds['var_symbol'],
            'farkas_leaves': kinds['farkas'],
        }
