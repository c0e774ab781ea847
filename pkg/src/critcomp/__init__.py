"""Exact and asymptotic analysis of critical composition schemes.

Subpackages: ``pseries`` (exact power series), ``schemes`` (exact laws of the
component count), ``asymptotics`` (singular data, limit laws, phases),
``distributions`` (limit-law special functions), ``catalog`` (worked examples
with brute-force oracles) and ``harness`` (CLI, sweeps, Monte Carlo).
"""

__version__ = "0.1.0"
