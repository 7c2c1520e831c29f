"""Numerical toolkit for the static two-particle Bohm-de Broglie EPR model.

Submodules:
    numerics     grids, finite-difference oracles, root bracketing, quadrature
    epr_model    closed-form amplitude, quantum potential and residuals
    geometry     effective metric, singularities, Hawking wormhole
    kinematics   momentum fields, trajectories, phase integrability
    cli          command-line front end (``bohm-epr``)
"""

from .epr_model import ModelParams
from .geometry import WormholeParams

__all__ = ["ModelParams", "WormholeParams"]
__version__ = "0.1.0"
