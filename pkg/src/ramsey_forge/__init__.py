"""Finite, exhaustively checkable pieces of structural Ramsey theory.

Ordered relational structures, Fraïssé classes, free amalgamation, partition
arrows, generating sequences with their finite approximations, canonical
equivalence relations and Ramsey degrees.
"""

__version__ = "0.1.0"
