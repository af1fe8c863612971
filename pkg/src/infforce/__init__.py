"""Robinson infinite forcing over finite extension systems, plus Cohen-real amalgamation."""

__version__ = "0.1.0"
