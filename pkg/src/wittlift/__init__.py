"""Exact truncated Witt-ring arithmetic, Hensel matrix tools, group cohomology
for finitely presented groups, a deformation-tower engine, and finite-level
density counting."""

__version__ = "0.1.0"
