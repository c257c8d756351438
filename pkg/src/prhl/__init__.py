"""Verifier toolkit for reasoning about nondeterministic while-programs:
bounded triple checking, weakest-precondition calculi, and proof
certificate checking for both tree-shaped and cyclic systems."""

__version__ = "0.1.0"
