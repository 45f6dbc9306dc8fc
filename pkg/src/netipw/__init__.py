"""Design-based estimation of exposure effects in network experiments."""

__version__ = "0.1.0"
