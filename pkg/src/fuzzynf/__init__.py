"""Finite models for fuzzy New Foundations.

Parse the two-sorted fuzzy set-theory language, decide stratification, build
finite fuzzy models over the cumulative hierarchy, check the restricted fuzzy
NF axioms in them and extract the crisp quotient model.
"""

__version__ = "0.1.0"
