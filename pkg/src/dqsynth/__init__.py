"""Synthesis of bitvector functions through dependency-quantified Boolean formulas."""

__version__ = "0.1.0"
