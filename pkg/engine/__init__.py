"""Computation engine for δ-Robin constants and height lower bounds."""
