"""Game-theoretic and quantum-game beam alignment for mmW wearable D2D networks."""

__version__ = "0.1.0"
