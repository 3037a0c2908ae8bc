"""Construction, optimization and certification of entanglement witnesses."""

__version__ = "0.1.0"
