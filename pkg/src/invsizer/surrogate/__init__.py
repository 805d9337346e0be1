"""Analytical stand-in for a circuit simulator.

Formulas and constants are documented in ``surrogate_spec.json`` next to
this file; :func:`surrogate_spec` returns it parsed.
"""
from .circuits import (UNIT_SCALE, monotonicity_contract, simulate, simulate_batch,
                       simulate_composed, surrogate_spec)

__all__ = ["UNIT_SCALE", "monotonicity_contract", "simulate", "simulate_batch",
           "simulate_composed", "surrogate_spec"]
