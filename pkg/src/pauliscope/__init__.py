"""Numerical laboratory for Pauli spectra of noisy random quantum circuits."""

__version__ = "0.1.0"
