"""
The closed-form amplitude and its constraint
============================================

The amplitude squared, R^2 = sqrt(A) * sin(m u + C2)^(1/2), lives on strips
of u = x1 + x2 where the sine is positive. From it we build the quantum
potential and the G^2 that closes the amplitude constraint, then check the
closed forms against finite differences.
"""

import numpy as np

from bohm_epr import epr_model as em
from bohm_epr.epr_model import ModelParams
from bohm_epr.numerics import Grid1D

params = ModelParams(m=1.0, C1=2.0, C2=0.0)
strips = em.domain_strips(params, (-1.0, 7.0))
print("positivity strips:", [(round(a, 6), round(b, 6)) for a, b in strips])

# G^2 at the strip centre; R^4 = 1 there for C1 = 2
u = np.pi / 2
print("G^2(pi/2) =", em.solve_G_squared(u, params))
print("constraint residual there:", em.residual_eq11(u, em.solve_G_squared(u, params), params))

# G^2 is negative near the strip edges; those points are unphysical
u = np.linspace(0.05, np.pi - 0.05, 9)
for ui, g2 in zip(u, em.solve_G_squared(u, params)):
    print(f"  u = {ui:6.3f}   G^2 = {g2: .6f}   {'physical' if g2 >= 0 else 'unphysical'}")

# quantum potential from the closed form and from a 5-point stencil
x1, x2 = 0.6, 0.5
print("Q closed form      :", em.quantum_potential(x1, x2, params)[2])
print("Q finite difference:", em.quantum_potential(x1, x2, params, "finite_difference", h=1e-3)[2])

# the same comparison on whole grids, with the fitted convergence order
conv = em.oracle_convergence(params, (0.4, 2.7))
for key, rec in conv.items():
    print(f"  {key:10s} errors {['%.2e' % e for e in rec['max_error']]}  order {rec['order']:.3f}")

# sampled fields over a u-grid
fields = em.quantum_fields(Grid1D(0.3, 2.8, 11), params)
print("Q on the grid:", fields.Q.values.round(6))
print("quantum mass^2:", fields.M2.values.round(6))
