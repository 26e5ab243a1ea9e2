"""Cesaro mixing diagnostics, tensor cross norms and E-ergodicity of
finite-dimensional C*-dynamical systems."""

__version__ = "0.1.0"
