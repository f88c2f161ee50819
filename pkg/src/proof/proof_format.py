"""
Proof file format ("certproof/1").

A proof file is UTF-8 JSON with sorted keys. Every scalar is written as text
("p/q", "p", "+inf", "-inf") so rationals survive bit-exactly. The file
carries the encoded query (and, when known, the network and property
documents it came from), so it can be checked without the verifier.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from src.errors import MalformedProof
from src.lp.certificates import BoundUpdate, Contradiction, FarkasProof, Lemma, Phase, VarSymbol
from src.lp.query import Equation, Query
from src.lp.scalar import ExtendedScalar, format_scalar, parse_scalar
from src.lp.tableau import BoundSide
from src.proof.tree import ProofNode, ProofTree, SplitRecord

VERSION = "certproof/1"


# Encoding

def _equation_to_dict(equation: Equation) -> Dict[str, Any]:
    coeffs, rhs = equation
    return {
        'coefficients': {str(var): format_scalar(value) for var, value in sorted(coeffs.items())},
        'rhs': format_scalar(rhs),
    }


def _query_to_dict(query: Query) -> Dict[str, Any]:
    return {
        'names': list(query.names),
        'lower': [format_scalar(v) for v in query.lower],
        'upper': [format_scalar(v) for v in query.upper],
        'equations': [_equation_to_dict(e) for e in query.equations],
        'relus': [[b, f] for b, f in query.relus],
        'inputs': list(query.inputs),
        'outputs': list(query.outputs),
    }


def contradiction_to_dict(contradiction: Optional[Contradiction]) -> Optional[Dict[str, Any]]:
    if contradiction is None:
        return None
    if isinstance(contradiction, VarSymbol):
        return {'kind': 'var', 'var': contradiction.var}
    return {'kind': 'farkas', 'vector': [format_scalar(v) for v in contradiction.vector]}


def _lemma_to_dict(lemma: Lemma) -> Dict[str, Any]:
    return {
        'affected_var': lemma.affected_var,
        'bound': lemma.side.value,
        'value': format_scalar(lemma.value),
        'rule': lemma.rule_id,
        'antecedent_var': lemma.antecedent_var,
        'antecedent_bound': lemma.antecedent_side.value,
        'explanation': [format_scalar(v) for v in lemma.explanation],
    }


def _node_to_dict(node: ProofNode) -> Dict[str, Any]:
    split = None
    if node.split is not None:
        split = {'relu': node.split.relu, 'phase': node.split.phase.value}
    return {
        'split': split,
        'ground_bound_updates': [
            {'var': u.var, 'bound': u.side.value, 'value': format_scalar(u.value)}
            for u in node.ground_bound_updates
        ],
        'added_equations': [_equation_to_dict(e) for e in node.added_equations],
        'lemmas': [_lemma_to_dict(lemma) for lemma in node.lemmas],
        'contradiction': contradiction_to_dict(node.contradiction),
        'children': [_node_to_dict(child) for child in node.children],
    }


def serialize(tree: ProofTree) -> bytes:
    """Encode a proof tree as canonical certproof JSON"""
    document = {
        'version': VERSION,
        'query': _query_to_dict(tree.query),
        'network': tree.network,
        'property': tree.prop,
        'tree': _node_to_dict(tree.root),
    }
    return (json.dumps(document, sort_keys=True, indent=1) + "\n").encode("utf-8")


# Decoding

class _Reader:
    """Typed accessors that raise MalformedProof naming the offending location"""

    def obj(self, value: Any, path: str) -> Dict[str, Any]:
        if not isinstance(value, dict):
            raise MalformedProof("expected an object", path)
        return value

    def field(self, data: Dict[str, Any], key: str, path: str) -> Any:
        if key not in data:
            raise MalformedProof(f"missing '{key}'", path)
        return data[key]

    def array(self, value: Any, path: str) -> List[Any]:
        if not isinstance(value, list):
            raise MalformedProof("expected an array", path)
        return value

    def integer(self, value: Any, path: str, minimum: int = 0) -> int:
        if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
            raise MalformedProof(f"expected an integer >= {minimum}", path)
        return value

    def scalar(self, value: Any, path: str) -> ExtendedScalar:
        if not isinstance(value, str):
            raise MalformedProof("expected a scalar string", path)
        try:
            return parse_scalar(value)
        except ValueError as exc:
            raise MalformedProof(str(exc), path) from None

    def finite(self, value: Any, path: str) -> ExtendedScalar:
        result = self.scalar(value, path)
        if isinstance(result, float):
            raise MalformedProof("expected a finite scalar", path)
        return result

    def side(self, value: Any, path: str) -> BoundSide:
        try:
            return BoundSide(value)
        except ValueError:
            raise MalformedProof("expected 'lower' or 'upper'", path) from None

    def phase(self, value: Any, path: str) -> Phase:
        if value not in (Phase.ACTIVE.value, Phase.INACTIVE.value):
            raise MalformedProof("expected 'active' or 'inactive'", path)
        return Phase(value)

    def equation(self, value: Any, path: str) -> Equation:
        data = self.obj(value, path)
        raw = self.obj(self.field(data, 'coefficients', path), f"{path}.coefficients")
        coeffs = {}
        for key, coeff in raw.items():
            if not (key.isascii() and key.isdigit()):
                raise MalformedProof("expected a variable index", f"{path}.coefficients.{key}")
            coeffs[int(key)] = self.finite(coeff, f"{path}.coefficients.{key}")
        return coeffs, self.finite(self.field(data, 'rhs', path), f"{path}.rhs")

    def vector(self, value: Any, path: str):
        return tuple(self.finite(v, f"{path}[{i}]") for i, v in enumerate(self.array(value, path)))


def _query_from_dict(reader: _Reader, value: Any, path: str) -> Query:
    data = reader.obj(value, path)
    names = reader.array(reader.field(data, 'names', path), f"{path}.names")
    if not all(isinstance(name, str) for name in names):
        raise MalformedProof("variable names must be strings", f"{path}.names")
    lower = [reader.scalar(v, f"{path}.lower[{i}]")
             for i, v in enumerate(reader.array(reader.field(data, 'lower', path), f"{path}.lower"))]
    upper = [reader.scalar(v, f"{path}.upper[{i}]")
             for i, v in enumerate(reader.array(reader.field(data, 'upper', path), f"{path}.upper"))]
    if len(lower) != len(names) or len(upper) != len(names):
        raise MalformedProof("bound arrays must match the variable names", path)
    equations = [reader.equation(e, f"{path}.equations[{i}]")
                 for i, e in enumerate(reader.array(reader.field(data, 'equations', path),
                                                    f"{path}.equations"))]
    relus = []
    for i, pair in enumerate(reader.array(reader.field(data, 'relus', path), f"{path}.relus")):
        pair = reader.array(pair, f"{path}.relus[{i}]")
        if len(pair) != 2:
            raise MalformedProof("expected [b, f]", f"{path}.relus[{i}]")
        relus.append((reader.integer(pair[0], f"{path}.relus[{i}][0]"),
                      reader.integer(pair[1], f"{path}.relus[{i}][1]")))
    inputs = [reader.integer(v, f"{path}.inputs[{i}]")
              for i, v in enumerate(reader.array(data.get('inputs', []), f"{path}.inputs"))]
    outputs = [reader.integer(v, f"{path}.outputs[{i}]")
               for i, v in enumerate(reader.array(data.get('outputs', []), f"{path}.outputs"))]
    return Query(names, lower, upper, equations, relus, inputs, outputs)


def _lemma_from_dict(reader: _Reader, value: Any, path: str) -> Lemma:
    data = reader.obj(value, path)
    rule = reader.field(data, 'rule', path)
    if not isinstance(rule, str):
        raise MalformedProof("expected a rule name", f"{path}.rule")
    return Lemma(
        affected_var=reader.integer(reader.field(data, 'affected_var', path), f"{path}.affected_var"),
        side=reader.side(reader.field(data, 'bound', path), f"{path}.bound"),
        value=reader.finite(reader.field(data, 'value', path), f"{path}.value"),
        rule_id=rule,
        antecedent_var=reader.integer(reader.field(data, 'antecedent_var', path),
                                      f"{path}.antecedent_var"),
        antecedent_side=reader.side(reader.field(data, 'antecedent_bound', path),
                                    f"{path}.antecedent_bound"),
        explanation=reader.vector(reader.field(data, 'explanation', path), f"{path}.explanation"),
    )


def _contradiction_from_dict(reader: _Reader, value: Any, path: str) -> Optional[Contradiction]:
    if value is None:
        return None
    data = reader.obj(value, path)
    kind = reader.field(data, 'kind', path)
    if kind == 'var':
        return VarSymbol(reader.integer(reader.field(data, 'var', path), f"{path}.var"))
    if kind == 'farkas':
        return FarkasProof(reader.vector(reader.field(data, 'vector', path), f"{path}.vector"))
    raise MalformedProof("kind must be 'var' or 'farkas'", f"{path}.kind")


def _node_from_dict(reader: _Reader, value: Any, path: str) -> ProofNode:
    data = reader.obj(value, path)
    split = None
    raw_split = data.get('split')
    if raw_split is not None:
        raw_split = reader.obj(raw_split, f"{path}.split")
        split = SplitRecord(
            reader.integer(reader.field(raw_split, 'relu', f"{path}.split"), f"{path}.split.relu"),
            reader.phase(reader.field(raw_split, 'phase', f"{path}.split"), f"{path}.split.phase"))

    updates = []
    for i, raw in enumerate(reader.array(data.get('ground_bound_updates', []),
                                         f"{path}.ground_bound_updates")):
        where = f"{path}.ground_bound_updates[{i}]"
        raw = reader.obj(raw, where)
        updates.append(BoundUpdate(
            reader.integer(reader.field(raw, 'var', where), f"{where}.var"),
            reader.side(reader.field(raw, 'bound', where), f"{where}.bound"),
            reader.finite(reader.field(raw, 'value', where), f"{where}.value")))

    equations = [reader.equation(e, f"{path}.added_equations[{i}]")
                 for i, e in enumerate(reader.array(data.get('added_equations', []),
                                                    f"{path}.added_equations"))]
    lemmas = [_lemma_from_dict(reader, raw, f"{path}.lemmas[{i}]")
              for i, raw in enumerate(reader.array(data.get('lemmas', []), f"{path}.lemmas"))]
    contradiction = _contradiction_from_dict(reader, data.get('contradiction'),
                                             f"{path}.contradiction")
    children = [_node_from_dict(reader, raw, f"{path}.children[{i}]")
                for i, raw in enumerate(reader.array(data.get('children', []), f"{path}.children"))]
    if children and contradiction is not None:
        raise MalformedProof("a node has either children or a contradiction", path)
    return ProofNode(split, updates, equations, lemmas, children, contradiction)


def deserialize(data: Union[bytes, str]) -> ProofTree:
    """
    Decode certproof JSON

    Raises:
        MalformedProof: on undecodable, truncated or mistyped input; the
            error's ``path`` points at the offending element
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedProof(f"not UTF-8 text ({exc.reason})") from None
    try:
        document = json.loads(data)
    except json.JSONDecodeError as exc:
        raise MalformedProof(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    except RecursionError:
        raise MalformedProof("proof nesting is too deep") from None

    reader = _Reader()
    document = reader.obj(document, "$")
    version = reader.field(document, 'version', "$")
    if version != VERSION:
        raise MalformedProof(f"unsupported version {version!r}", "$.version")
    query = _query_from_dict(reader, reader.field(document, 'query', "$"), "$.query")
    try:
        root = _node_from_dict(reader, reader.field(document, 'tree', "$"), "$.tree")
    except RecursionError:
        raise MalformedProof("proof nesting is too deep", "$.tree") from None
    network = document.get('network')
    prop = document.get('property')
    if network is not None:
        reader.obj(network, "$.network")
    if prop is not None:
        reader.obj(prop, "$.property")
    return ProofTree(query, root, network, prop)


def write_proof(tree: ProofTree, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_bytes(serialize(tree))
    return path


def read_proof(path: Union[str, Path]) -> ProofTree:
    """Read a .certproof file (OSError propagates for unreadable paths)"""
    return deserialize(Path(path).read_bytes())
