"""delta-robin: δ-Robin constants, equilibrium measures and height lower bounds."""

__version__ = "0.1.0"
