"""
Two routes to the effective metric
==================================

g11 can be read from the printed closed form or rebuilt from G^2 and R^4.
This script locates the poles and zero crossings of both and runs the
audit that compares them sample by sample.
"""

import numpy as np

from bohm_epr import geometry as geo
from bohm_epr.epr_model import ModelParams

params = ModelParams()

print("printed g11(pi/2)   =", geo.metric_as_printed(np.pi / 2, params))
print("constraint g11(pi/2) =", geo.metric_from_constraint(np.pi / 2, params))

for u in (0.0, 0.2, 1.0, np.arcsin(3**-0.5), 4.0):
    s = geo.sample_metric(u, params)
    print(f"  u = {u:6.4f}  regime = {s.regime.value}")

report = geo.find_singularities(params, (-0.5, 6.8))
print("poles:", [round(r.value, 12) for r in report.poles])
print("printed zero crossings:", [round(r.value, 12) for r in report.zero_crossings_as_printed])
print("G^2 zero crossings:", [round(r.value, 12) for r in report.zero_crossings_from_constraint])

# pole spacing is pi/m for any phase
other = ModelParams(m=2.3, C2=0.7)
poles = [r.value for r in geo.find_singularities(other, (-3, 9)).poles]
print("spacing for m = 2.3:", np.diff(poles).round(12), "pi/m =", np.pi / 2.3)

# audit: agreement, if any, is reported rather than required
audit = geo.audit_metric_consistency(params, np.linspace(-0.5, 3.5, 64))
print(audit.summary())
