"""
Self-adjoint extensions of discrete symplectic systems.
"""

__version__ = "0.1.0"
