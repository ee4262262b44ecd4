"""
sumsolve - exact Subset Sum solvers built on sumset enumeration,
representation-based list filtering and orthogonal-vectors covers
"""

__version__ = "1.0.0"
