"""Octonion residue calculus, Cartan realizations and wrap-algebra central extensions."""
from octowrap.cayley_dickson import CayleyNumber, Direction, make_table, mul

__all__ = ["CayleyNumber", "Direction", "make_table", "mul"]
__version__ = "0.1.0"
