"""Exceptional-point analysis and simulation of two counter-rotating, thermally coupled rings."""
from .params import PhysicalParams, RingGeometry, ModeSpec, reference_params
from .fields import FieldState, Grid, initial_state

__all__ = ["PhysicalParams", "RingGeometry", "ModeSpec", "reference_params", "FieldState", "Grid", "initial_state"]
__version__ = "0.1.0"
