"""Truncated Fock-space construction of a free scalar field, Hida calculus on chaos
expansions, Colombeau-style nets and a Wick-ordering oracle."""
from __future__ import annotations

__version__ = "0.1.0"

__all__ = ["__version__"]
