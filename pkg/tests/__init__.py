"""
Test suite for the ReLU verifier and proof checker
"""
