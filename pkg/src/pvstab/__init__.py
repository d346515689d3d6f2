"""Frequency-domain stability analysis of a planar plasma-vacuum interface.

The vacuum region carries the full Maxwell system with displacement current
(parameter eps). Submodules:

- ``background``: constant state and the stability test
- ``symbols``: frequency points and symbol algebra
- ``maxwell_sym``: secondary symmetrization of the vacuum equations
- ``lopatinski``: Lopatinski determinant, root scans, zero counting
- ``symmetrizer``: degenerate Kreiss symmetrizer certification
- ``bvp``: closed-form half-line boundary value solves
- ``front``: symbol of the interface evolution equation
- ``cli``: command-line driver
"""
from pvstab.background import BackgroundState, StabilityVerdict, stability_margin, quadratic_form_matrix, verdict
from pvstab.kernels import BACKEND
from pvstab.symbols import FrequencyPoint, SymbolValues, eval_symbols, hemisphere_point, principal_sqrt

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BackgroundState",
    "FrequencyPoint",
    "StabilityVerdict",
    "SymbolValues",
    "eval_symbols",
    "hemisphere_point",
    "principal_sqrt",
    "quadratic_form_matrix",
    "stability_margin",
    "verdict",
]
