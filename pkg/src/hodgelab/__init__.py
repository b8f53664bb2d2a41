"""hodgelab: numerics for surface-group monodromy, harmonic maps, and gauge flows."""

__version__ = "0.1.0"
