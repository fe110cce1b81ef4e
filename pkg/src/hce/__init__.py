"""Exact Hochschild, cyclic and periodic cyclic cohomology, crossed-product invariants
and noncommutative three-tori."""

__version__ = "0.1.0"
