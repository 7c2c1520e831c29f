"""
The one-dimensional wormhole metric
===================================

Omega^2 = 1 + b^2 / (x - x0)^2 doubles at x0 +- b and diverges at x0. The
proper distance to the throat grows like b ln(1/eps), and the quadrature
matches the antiderivative sqrt(s^2 + b^2) - b ln((b + sqrt(s^2 + b^2)) / s).
"""

import numpy as np

from bohm_epr import geometry as geo
from bohm_epr.geometry import WormholeParams

wp = WormholeParams(b=1.0, x0=0.0)
print("Omega^2 at x0 - b, x0 + b:", geo.hawking_conformal_factor(-1.0, wp), geo.hawking_conformal_factor(1.0, wp))

metric = geo.hawking_metric(wp)
exact_end = geo.hawking_distance_antiderivative(1.0, wp.b)
prev = None
for eps in 10.0 ** -np.arange(1, 7):
    d = geo.proper_distance(eps, 1.0, metric, poles=[0.0])
    exact = exact_end - geo.hawking_distance_antiderivative(eps, wp.b)
    step = "" if prev is None else f"  increment {d - prev:.6f}"
    print(f"eps = {eps:.0e}  distance = {d:.12f}  error = {abs(d - exact):.1e}{step}")
    prev = d
print("b ln 10 =", np.log(10.0))
