"""
Network and property ingestion, forward evaluation and query encoding.

Variables are laid out as inputs x1..xs, then for every hidden layer the
neuron inputs b_k followed by the neuron outputs f_k (k numbers hidden
neurons across layers), then outputs y1..yt.
"""

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple, Union

from src.errors import InvariantViolation, ParseError, ShapeMismatch
from src.lp.query import Query
from src.lp.scalar import (INF, NEG_INF, ExtendedScalar, Scalar, format_scalar, is_infinite,
                           parse_scalar)

Interval = Tuple[ExtendedScalar, ExtendedScalar]


def _scalar(value: Any, where: str, finite: bool = False) -> ExtendedScalar:
    if isinstance(value, bool):
        raise ParseError(f"{where}: expected a scalar, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        value = repr(value)
    try:
        scalar = parse_scalar(value)
    except ValueError as exc:
        raise ParseError(f"{where}: {exc}") from None
    if finite and is_infinite(scalar):
        raise ParseError(f"{where}: weights and biases must be finite")
    return scalar


def _list(value: Any, where: str) -> list:
    if not isinstance(value, list):
        raise ParseError(f"{where}: expected a list")
    return value


def _interval(value: Any, where: str) -> Interval:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ParseError(f"{where}: expected [lower, upper]")
    return _scalar(value[0], f"{where}[0]"), _scalar(value[1], f"{where}[1]")


def _load_json(source: Union[str, bytes]) -> Any:
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"not UTF-8 text ({exc.reason})") from None
    try:
        return json.loads(source)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    except RecursionError:
        raise ParseError("document nesting is too deep") from None


@dataclass
class Network:
    """
    Feed-forward ReLU network

    weights[i][j][l] connects neuron l of layer i to neuron j of layer i+1;
    biases[i][j] is the bias of neuron j of layer i+1. Hidden layers apply
    ReLU, the output layer is affine.
    """
    layers: List[int]
    weights: List[List[List[Scalar]]]
    biases: List[List[Scalar]]

    def __post_init__(self):
        if len(self.layers) < 2 or any(size <= 0 for size in self.layers):
            raise ShapeMismatch("A network needs an input and an output layer of positive size")
        if len(self.weights) != len(self.layers) - 1 or len(self.biases) != len(self.layers) - 1:
            raise ShapeMismatch("Expected one weight matrix and bias vector per layer transition")
        for i, (matrix, bias) in enumerate(zip(self.weights, self.biases)):
            rows, cols = self.layers[i + 1], self.layers[i]
            if len(matrix) != rows or any(len(row) != cols for row in matrix):
                raise ShapeMismatch(f"weights[{i}] must be {rows}x{cols}")
            if len(bias) != rows:
                raise ShapeMismatch(f"biases[{i}] must have {rows} entries")

    @property
    def n_hidden_layers(self) -> int:
        return len(self.layers) - 2

    @property
    def n_hidden_neurons(self) -> int:
        return sum(self.layers[1:-1])

    def to_dict(self) -> Dict[str, Any]:
        return {
            'layers': list(self.layers),
            'weights': [[[format_scalar(w) for w in row] for row in matrix] for matrix in self.weights],
            'biases': [[format_scalar(p) for p in bias] for bias in self.biases],
        }

    @classmethod
    def from_dict(cls, data: Any) -> "Network":
        if not isinstance(data, dict):
            raise ParseError("network document must be a JSON object")
        for key in ('layers', 'weights', 'biases'):
            if key not in data:
                raise ParseError(f"network document is missing '{key}'")
        layers = data['layers']
        if not isinstance(layers, list) or not all(isinstance(s, int) and not isinstance(s, bool)
                                                   for s in layers):
            raise ParseError("layers: expected a list of integers")
        weights = [[[_scalar(w, f"weights[{i}][{j}][{k}]", finite=True)
                     for k, w in enumerate(_list(row, f"weights[{i}][{j}]"))]
                    for j, row in enumerate(_list(matrix, f"weights[{i}]"))]
                   for i, matrix in enumerate(_list(data['weights'], "weights"))]
        biases = [[_scalar(p, f"biases[{i}][{j}]", finite=True)
                   for j, p in enumerate(_list(bias, f"biases[{i}]"))]
                  for i, bias in enumerate(_list(data['biases'], "biases"))]
        return cls(layers, weights, biases)


@dataclass
class Property:
    """
    Input and output boxes plus optional bounds on named neurons

    ``neuron_bounds`` maps variable names (e.g. 'b1', 'f2') to intervals
    intersected with the defaults.
    """
    input_box: List[Interval]
    output_box: List[Interval]
    neuron_bounds: Dict[str, Interval] = field(default_factory=dict)

    def __post_init__(self):
        boxes = [('input', self.input_box), ('output', self.output_box)]
        for label, box in boxes:
            for index, (lower, upper) in enumerate(box):
                if lower > upper:
                    raise InvariantViolation(f"{label}[{index}]: lower {lower} > upper {upper}")
        for name, (lower, upper) in self.neuron_bounds.items():
            if lower > upper:
                raise InvariantViolation(f"{name}: lower {lower} > upper {upper}")

    def to_dict(self) -> Dict[str, Any]:
        def pair(bounds):
            return [format_scalar(bounds[0]), format_scalar(bounds[1])]
        return {
            'input': [pair(b) for b in self.input_box],
            'output': [pair(b) for b in self.output_box],
            'neurons': {name: pair(b) for name, b in sorted(self.neuron_bounds.items())},
        }

    @classmethod
    def from_dict(cls, data: Any) -> "Property":
        if not isinstance(data, dict):
            raise ParseError("property document must be a JSON object")
        for key in ('input', 'output'):
            if not isinstance(data.get(key), list):
                raise ParseError(f"property document needs a list '{key}'")
        neurons = data.get('neurons', {})
        if not isinstance(neurons, dict):
            raise ParseError("neurons: expected an object of name -> [lower, upper]")
        return cls(
            [_interval(b, f"input[{i}]") for i, b in enumerate(data['input'])],
            [_interval(b, f"output[{i}]") for i, b in enumerate(data['output'])],
            {name: _interval(b, f"neurons.{name}") for name, b in neurons.items()},
        )


def parse_network_text(text: Union[str, bytes]) -> Network:
    return Network.from_dict(_load_json(text))


def parse_property_text(text: Union[str, bytes]) -> Property:
    return Property.from_dict(_load_json(text))


def parse_network(path: Union[str, Path]) -> Network:
    """
    Read a .net file

    Raises:
        ParseError: malformed JSON or scalars (with line/column when known)
        ShapeMismatch: inconsistent layer sizes
    """
    return parse_network_text(Path(path).read_bytes())


def parse_property(path: Union[str, Path]) -> Property:
    """
    Read a .prop file

    Raises:
        ParseError: malformed JSON or scalars
        InvariantViolation: an interval with lower > upper
    """
    return parse_property_text(Path(path).read_bytes())


def _affine(matrix: Sequence[Sequence[Scalar]], bias: Sequence[Scalar],
            values: Sequence[Scalar]) -> List[Scalar]:
    return [sum((w * v for w, v in zip(row, values)), Fraction(0)) + p
            for row, p in zip(matrix, bias)]


def forward_values(net: Network, x: Sequence[Scalar]) -> List[Scalar]:
    """
    Forward pass returning every variable value in encoding order

    Raises:
        ShapeMismatch: if len(x) differs from the input layer size
    """
    if len(x) != net.layers[0]:
        raise ShapeMismatch(f"Expected {net.layers[0]} inputs, got {len(x)}")
    values = [Fraction(v) if not isinstance(v, float) else v for v in x]
    assignment = list(values)
    current = values
    for i in range(net.n_hidden_layers):
        pre = _affine(net.weights[i], net.biases[i], current)
        post = [max(b, 0) for b in pre]
        assignment.extend(pre)
        assignment.extend(post)
        current = post
    assignment.extend(_affine(net.weights[-1], net.biases[-1], current))
    return assignment


def evaluate(net: Network, x: Sequence[Scalar]) -> List[Scalar]:
    """Exact forward pass; returns the output vector"""
    return forward_values(net, x)[-net.layers[-1]:]


def variable_names(net: Network) -> List[str]:
    names = [f"x{i + 1}" for i in range(net.layers[0])]
    neuron = 0
    for size in net.layers[1:-1]:
        ids = range(neuron + 1, neuron + size + 1)
        names.extend(f"b{k}" for k in ids)
        names.extend(f"f{k}" for k in ids)
        neuron += size
    names.extend(f"y{j + 1}" for j in range(net.layers[-1]))
    return names


def encode(net: Network, prop: Property) -> Query:
    """
    Encode a verification query as an LP plus ReLU pairs

    One equation b = Σ w·prev + p per hidden neuron and y = Σ w·prev + p per
    output, stored as Σ w·prev - b = -p. Hidden f variables default to
    [0, +inf), b variables to (-inf, +inf); named neuron bounds intersect them.

    Raises:
        ShapeMismatch: if the property boxes do not match the network
        InvariantViolation: unknown neuron name or an empty interval
    """
    if len(prop.input_box) != net.layers[0] or len(prop.output_box) != net.layers[-1]:
        raise ShapeMismatch("Property boxes do not match the network's input/output sizes")

    names = variable_names(net)
    lower: List[ExtendedScalar] = []
    upper: List[ExtendedScalar] = []
    for low, high in prop.input_box:
        lower.append(low)
        upper.append(high)

    equations = []
    relus = []
    previous = list(range(net.layers[0]))
    for i, size in enumerate(net.layers[1:-1]):
        start = len(lower)
        b_vars = list(range(start, start + size))
        f_vars = list(range(start + size, start + 2 * size))
        lower.extend([NEG_INF] * size + [Fraction(0)] * size)
        upper.extend([INF] * (2 * size))
        for j, b in enumerate(b_vars):
            equations.append(_equation(net.weights[i][j], net.biases[i][j], previous, b))
        relus.extend(zip(b_vars, f_vars))
        previous = f_vars

    outputs = list(range(len(lower), len(lower) + net.layers[-1]))
    for j, (low, high) in enumerate(prop.output_box):
        lower.append(low)
        upper.append(high)
        equations.append(_equation(net.weights[-1][j], net.biases[-1][j], previous, outputs[j]))

    for name, (low, high) in prop.neuron_bounds.items():
        if name not in names:
            raise InvariantViolation(f"Unknown neuron name in property: {name}")
        var = names.index(name)
        lower[var] = max(lower[var], low)
        upper[var] = min(upper[var], high)
        if lower[var] > upper[var]:
            raise InvariantViolation(f"{name}: bounds [{lower[var]}, {upper[var]}] are empty")

    return Query(names=names, lower=lower, upper=upper, equations=equations, relus=relus,
                 inputs=list(range(net.layers[0])), outputs=outputs)


def _equation(row: Sequence[Scalar], bias: Scalar, previous: Sequence[int],
              target: int) -> Tuple[Dict[int, Scalar], Scalar]:
    coeffs = {var: weight for var, weight in zip(previous, row) if weight != 0}
    coeffs[target] = Fraction(-1)
    return coeffs, -bias
