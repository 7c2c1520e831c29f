"""
Momenta, trajectories and the phase
===================================

The guidance momenta are p1 = G/R^2 and p2 = -p1. Both depend on u only, so
trajectories keep u fixed and drift along straight lines. The mixed
partials of the momentum field do not match, which we measure directly.
"""

import numpy as np

from bohm_epr import kinematics as kin
from bohm_epr.epr_model import ModelParams
from bohm_epr.numerics import Grid1D

params = ModelParams()

s = kin.momentum_fields(0.4, 0.8, params)
print(f"p1 = {s.p1:.12f}  p2 = {s.p2:.12f}  sum = {s.p1 + s.p2}")

g = Grid1D(0.0, 1.6, 101)
res = kin.epr_residual(g, g, params, p2=kin.p2_dual_path)
print("dual-path |p1 + p2| max:", np.max(np.abs(res.values[res.mask])), "over", res.mask.sum(), "points")

states = kin.integrate_trajectory((0.2, 1.0), (0.0, 5.0), 0.01, params)
print("first state:", states[0])
print("last state: ", states[-1])
print("u drift:", max(abs(st.u - states[0].u) for st in states))

mismatch = kin.integrability_diagnostic(Grid1D(0.8, 2.3, 7), params)
print("mixed-partial mismatch 2 q'(u):", mismatch.values.round(6))

# circulation of the momentum around a small square; nonzero means no
# single-valued phase
loop = [(0.4, 0.3), (0.9, 0.3), (0.9, 0.6), (0.4, 0.6), (0.4, 0.3)]
print("circulation:", kin.phase_increment_along_path(loop, params, n_panels=8))
