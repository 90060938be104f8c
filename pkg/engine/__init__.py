"""Symbolic engine: exact scalars, invariant forms, calculus, metrics and the obstruction pipeline."""
