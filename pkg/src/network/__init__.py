"""
Network frontend: parsing, evaluation, encoding and instance generation
"""

from .frontend import (Network, Property, evaluate, encode, forward_values, variable_names,
                       parse_network, parse_property, parse_network_text, parse_property_text)
from .generator import InstanceGenerator

__all__ = [
    'Network',
    'Property',
    'evaluate',
    'encode',
    'forward_values',
    'variable_names',
    'parse_network',
    'parse_property',
    'parse_network_text',
    'parse_property_text',
    'InstanceGenerator'
]
