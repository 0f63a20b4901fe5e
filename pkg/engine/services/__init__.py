"""Equilibrium computations, height bounds and the discrete oracle."""
