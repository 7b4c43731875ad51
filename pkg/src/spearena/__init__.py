"""Solver, verifier and brute-force oracle for subgame perfect equilibria on
finite game arenas with occurrence-set outcome rules."""

__version__ = "0.1.0"
