"""Numerical polynomial entropy of homeomorphisms and of their induced maps
on symmetric products F_n(X) and symmetric product suspensions SF_n^m(X)."""

__version__ = "0.1.0"
