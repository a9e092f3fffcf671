"""homocat: exact-arithmetic verification of categorical diagonalization data."""

__version__ = "0.1.0"
