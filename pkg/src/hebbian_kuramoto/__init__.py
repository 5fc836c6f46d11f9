"""Kuramoto oscillators with inertia and Hebbian coupling.

Two-oscillator reduced system analysis, the rotating-orbit approximation,
Poincare-section region sweeps and N-oscillator ensembles.
"""

__version__ = "0.1.0"
