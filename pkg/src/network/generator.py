"""
Seeded generator of small random verification instances
"""

import json
import random
from fractions import Fraction
from pathlib import Path
from typing import Tuple, Union

from src.network.frontend import Network, Property, forward_values


class InstanceGenerator:
    """
    Random networks with small rational weights and random property boxes

    Args:
        seed: all randomness flows from this seed
        inputs: input layer size
        layers: number of hidden layers
        width: neurons per hidden layer
        outputs: output layer size
        max_denominator: largest denominator of generated scalars
    """

    def __init__(self, seed: int = 0, inputs: int = 2, layers: int = 2, width: int = 2,
                 outputs: int = 1, max_denominator: int = 8):
        self.rng = random.Random(seed)
        self.inputs = inputs
        self.layers = layers
        self.width = width
        self.outputs = outputs
        self.max_denominator = max_denominator

    def scalar(self, magnitude: int = 2) -> Fraction:
        """Random p/q with |p/q| <= magnitude and q <= max_denominator"""
        denominator = self.rng.randint(1, self.max_denominator)
        numerator = self.rng.randint(-magnitude * denominator, magnitude * denominator)
        return Fraction(numerator, denominator)

    def network(self) -> Network:
        sizes = [self.inputs] + [self.width] * self.layers + [self.outputs]
        weights = [[[self.scalar() for _ in range(sizes[i])] for _ in range(sizes[i + 1])]
                   for i in range(len(sizes) - 1)]
        biases = [[self.scalar(1) for _ in range(sizes[i + 1])] for i in range(len(sizes) - 1)]
        return Network(sizes, weights, biases)

    def property(self, net: Network) -> Property:
        """
        Random input box and an output box placed near the image of a
        random input, so both SAT and UNSAT instances come up
        """
        input_box = []
        point = []
        for _ in range(net.layers[0]):
            lower = self.scalar(2)
            width = Fraction(self.rng.randint(1, 8), self.rng.randint(1, self.max_denominator))
            input_box.append((lower, lower + width))
            point.append(lower + width * Fraction(self.rng.randint(0, 4), 4))
        image = forward_values(net, point)[-net.layers[-1]:]
        output_box = []
        for value in image:
            centre = value + self.scalar(1)
            radius = Fraction(self.rng.randint(1, 4), self.rng.randint(1, self.max_denominator))
            output_box.append((centre - radius, centre + radius))
        return Property(input_box, output_box)

    def instance(self) -> Tuple[Network, Property]:
        net = self.network()
        return net, self.property(net)

    def write(self, directory: Union[str, Path], prefix: str = "instance") -> Tuple[Path, Path]:
        """Write <prefix>.net and <prefix>.prop; byte-identical for a fixed seed"""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        net, prop = self.instance()
        net_path = directory / f"{prefix}.net"
        prop_path = directory / f"{prefix}.prop"
        net_path.write_text(json.dumps(net.to_dict(), indent=2, sort_keys=True) + "\n")
        prop_path.write_text(json.dumps(prop.to_dict(), indent=2, sort_keys=True) + "\n")
        return net_path, prop_path
