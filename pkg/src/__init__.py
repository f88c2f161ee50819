"""
ReLU Cert - Proof-Producing ReLU Network Verifier with an Independent Checker
"""

__version__ = "1.0.0"
