"""
Unit tests for network parsing, evaluation, encoding and instance generation
"""

import unittest
import sys
import os
import random
import tempfile
from fractions import Fraction
from pathlib import Path

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.errors import InvariantViolation, ParseError, ShapeMismatch
from src.lp import INF, NEG_INF
from src.network import (InstanceGenerator, Network, Property, encode, evaluate, forward_values,
                         parse_network, parse_network_text, parse_property, parse_property_text,
                         variable_names)
from tests.oracles import DATA


class TestParsing(unittest.TestCase):
    """Test .net and .prop ingestion"""

    def test_parse_two_neuron(self):
        """Test the shipped toy network"""
        net = parse_network(DATA / "two_neuron.net")
        self.assertEqual(net.layers, [2, 1, 1, 1])
        self.assertEqual(net.weights[1], [[Fraction(-2)]])
        self.assertEqual(net.n_hidden_neurons, 2)

    def test_parse_property(self):
        """Test boxes and named neuron bounds"""
        prop = parse_property(DATA / "unsat.prop")
        self.assertEqual(prop.input_box[0], (2, 3))
        self.assertEqual(prop.output_box[0], (Fraction(1, 4), Fraction(1, 2)))
        self.assertEqual(prop.neuron_bounds['f2'], (Fraction(1, 4), Fraction(1, 2)))

    def test_invalid_json_location(self):
        """Test malformed JSON reports line and column"""
        with self.assertRaises(ParseError) as context:
            parse_network_text('{\n  "layers": [2, 1,\n}')
        self.assertEqual(context.exception.line, 3)

    def test_bad_scalar(self):
        """Test a non-numeric weight is a parse error"""
        text = '{"layers": [1, 1], "weights": [[["x"]]], "biases": [["0"]]}'
        with self.assertRaises(ParseError):
            parse_network_text(text)

    def test_shape_mismatch(self):
        """Test weights must match the layer sizes"""
        text = '{"layers": [2, 1], "weights": [[["1"]]], "biases": [["0"]]}'
        with self.assertRaises(ShapeMismatch):
            parse_network_text(text)

    def test_empty_interval(self):
        """Test lower > upper is rejected"""
        with self.assertRaises(InvariantViolation):
            parse_property_text('{"input": [["1", "0"]], "output": [["0", "1"]]}')

    def test_round_trip_dict(self):
        """Test to_dict/from_dict preserve the network"""
        net = parse_network(DATA / "two_neuron.net")
        self.assertEqual(Network.from_dict(net.to_dict()), net)


class TestEvaluation(unittest.TestCase):
    """Test forward evaluation"""

    def setUp(self):
        self.net = parse_network(DATA / "two_neuron.net")

    def test_evaluate_point(self):
        """Test input (1, 2) evaluates to 0"""
        self.assertEqual(evaluate(self.net, [1, 2]), [0])

    def test_forward_values_order(self):
        """Test values follow the encoding order"""
        values = forward_values(self.net, [3, -1])
        names = variable_names(self.net)
        self.assertEqual(names, ['x1', 'x2', 'b1', 'f1', 'b2', 'f2', 'y1'])
        self.assertEqual(values, [3, -1, 4, 4, -8, 0, 0])

    def test_wrong_input_size(self):
        """Test the input length is checked"""
        with self.assertRaises(ShapeMismatch):
            evaluate(self.net, [1])


class TestEncoding(unittest.TestCase):
    """Test query encoding"""

    def setUp(self):
        self.net = parse_network(DATA / "two_neuron.net")
        self.query = encode(self.net, parse_property(DATA / "unsat.prop"))

    def test_equations(self):
        """Test b1 = x1 - x2, b2 = -2 f1 and y = f2"""
        self.assertEqual(self.query.equations, [
            ({0: 1, 1: -1, 2: -1}, 0),
            ({3: -2, 4: -1}, 0),
            ({5: 1, 6: -1}, 0),
        ])
        self.assertEqual(self.query.relus, [(2, 3), (4, 5)])

    def test_bounds(self):
        """Test the bound vectors of the running example"""
        half, quarter = Fraction(1, 2), Fraction(1, 4)
        self.assertEqual(self.query.lower, [2, -1, -half, 0, -half, quarter, quarter])
        self.assertEqual(self.query.upper, [3, 1, half, half, half, half, half])
        self.assertEqual(self.query.inputs, [0, 1])
        self.assertEqual(self.query.outputs, [6])

    def test_default_bounds(self):
        """Test b is unbounded and f starts at 0 without named bounds"""
        query = encode(self.net, Property([(0, 1), (0, 1)], [(NEG_INF, INF)]))
        self.assertEqual(query.lower[2], NEG_INF)
        self.assertEqual(query.lower[3], 0)
        self.assertEqual(query.upper[3], INF)

    def test_unknown_neuron(self):
        """Test named bounds must refer to a variable"""
        prop = Property([(0, 1), (0, 1)], [(0, 1)], {'b9': (0, 1)})
        with self.assertRaises(InvariantViolation):
            encode(self.net, prop)

    def test_box_size_mismatch(self):
        """Test property boxes must fit the network"""
        with self.assertRaises(ShapeMismatch):
            encode(self.net, Property([(0, 1)], [(0, 1)]))


class TestInstanceGenerator(unittest.TestCase):
    """Test the seeded generator"""

    def test_deterministic_files(self):
        """Test a fixed seed writes byte-identical files"""
        with tempfile.TemporaryDirectory() as tmp:
            first = InstanceGenerator(7, layers=3, width=3).write(Path(tmp) / "a")
            second = InstanceGenerator(7, layers=3, width=3).write(Path(tmp) / "b")
            for left, right in zip(first, second):
                self.assertEqual(left.read_bytes(), right.read_bytes())
            net = parse_network(first[0])
            self.assertEqual(net.layers, [2, 3, 3, 3, 1])
            parse_property(first[1])

    def test_denominators(self):
        """Test generated weights respect the denominator limit"""
        net = InstanceGenerator(3, max_denominator=8).network()
        for matrix in net.weights:
            for row in matrix:
                self.assertTrue(all(w.denominator <= 8 for w in row))


class TestMalformedInput(unittest.TestCase):
    """Test hostile and damaged documents fail with the documented errors"""

    ALPHABET = '[]{}",:-/0123456789 abfinrt'
    EXPECTED = (ParseError, ShapeMismatch, InvariantViolation)

    def test_deep_nesting(self):
        """Test pathological nesting is a parse error"""
        text = "[" * 100000 + "]" * 100000
        with self.assertRaises(ParseError):
            parse_network_text(text)
        with self.assertRaises(ParseError):
            parse_property_text(text)

    def test_infinite_weight(self):
        """Test infinite weights and biases are rejected"""
        for weight in ('inf', '-inf', '+Infinity'):
            text = ('{"layers": [1, 1], "weights": [[["%s"]]], "biases": [["0"]]}' % weight)
            with self.assertRaises(ParseError):
                parse_network_text(text)
        with self.assertRaises(ParseError):
            parse_network_text('{"layers": [1, 1], "weights": [[["1"]]], "biases": [[Infinity]]}')

    def test_infinite_property_bound(self):
        """Test property bounds may still be unbounded"""
        prop = parse_property_text('{"input": [["0", "1"]], "output": [["-inf", "inf"]]}')
        self.assertEqual(prop.output_box[0], (NEG_INF, INF))

    def test_nested_types(self):
        """Test a scalar where a row is expected"""
        with self.assertRaises(ParseError):
            parse_network_text('{"layers": [1, 1], "weights": [["1"]], "biases": [["0"]]}')
        with self.assertRaises(ParseError):
            parse_network_text('{"layers": [1, 1], "weights": {"a": 1}, "biases": [["0"]]}')
        with self.assertRaises(ParseError):
            parse_network_text('{"layers": [1, 1], "weights": [[["1/0"]]], "biases": [["0"]]}')

    def _mutants(self, text, rng, count):
        for _ in range(count):
            choice = rng.randrange(4)
            at = rng.randrange(len(text))
            if choice == 0:
                yield text[:at]
            elif choice == 1:
                yield text[:at] + rng.choice(self.ALPHABET) + text[at + 1:]
            elif choice == 2:
                yield text[:at] + text[at + 1:]
            else:
                yield text[:at] + rng.choice(self.ALPHABET) + text[at:]

    def test_damaged_documents(self):
        """Test truncated and corrupted files raise only documented errors"""
        rng = random.Random(3)
        parsers = [(parse_network_text, (DATA / "two_neuron.net").read_text()),
                   (parse_property_text, (DATA / "unsat.prop").read_text())]
        parsed = 0
        for parser, text in parsers:
            for mutant in self._mutants(text, rng, 1500):
                try:
                    parser(mutant)
                    parser(mutant.encode("utf-8"))
                    parsed += 1
                except self.EXPECTED:
                    pass
        self.assertGreater(parsed, 0)

    def test_invalid_utf8(self):
        """Test undecodable bytes are a parse error"""
        with self.assertRaises(ParseError):
            parse_network_text(b'{"layers": "\xff"}')


class TestEncodingAgreement(unittest.TestCase):
    """Test forward evaluation satisfies the encoded query"""

    def test_forward_values_satisfy_encoding(self):
        """Test every equation and ReLU pair holds at evaluated points"""
        for seed in range(40):
            generator = InstanceGenerator(seed=seed, inputs=2, layers=1 + seed % 3,
                                          width=1 + seed % 4, outputs=1 + seed % 2)
            net, prop = generator.instance()
            wide = Property(prop.input_box, [(NEG_INF, INF)] * net.layers[-1])
            query = encode(net, wide)
            self.assertEqual(query.n_vars, len(variable_names(net)))
            rng = random.Random(seed)
            for _ in range(10):
                point = [lower + (upper - lower) * Fraction(rng.randint(0, 16), 16)
                         for lower, upper in prop.input_box]
                values = forward_values(net, point)
                self.assertEqual(len(values), query.n_vars)
                for coeffs, rhs in query.equations:
                    total = sum((c * values[var] for var, c in coeffs.items()), Fraction(0))
                    self.assertEqual(total, rhs)
                for b, f in query.relus:
                    self.assertEqual(values[f], max(values[b], 0))
                for var, value in enumerate(values):
                    self.assertLessEqual(query.lower[var], value)
                    self.assertLessEqual(value, query.upper[var])
                self.assertEqual(evaluate(net, point), [values[v] for v in query.outputs])


if __name__ == '__main__':
    unittest.main()
