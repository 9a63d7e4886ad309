"""Self-synchronizing chaotic stream cipher for grayscale images over GF(16)."""

__version__ = "0.1.0"
