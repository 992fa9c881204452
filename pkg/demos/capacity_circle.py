"""Logarithmic capacity of a circle by Fekete configurations.

The n-point diameter of the unit circle has the closed form n**(1/(n-1)),
so the estimator can be checked exactly; dilating the candidate set scales
the estimate linearly.
"""

import numpy as np

from subglue.capacity import equilibrium_weights, fekete_capacity

angles = 2 * np.pi * np.arange(512) / 512
circle = np.stack([np.cos(angles), np.sin(angles)], axis=1)

report = fekete_capacity(circle, n=64)
target = 64.0 ** (1.0 / 63.0)
print(f"capacity estimate {report.capacity:.5f}, n-point diameter {target:.5f}")
print(f"exchange swaps: {report.iterations}, converged: {report.converged}")

scaled = fekete_capacity(2.5 * circle, n=64)
print(f"dilating by 2.5 scales the estimate by {scaled.capacity / report.capacity:.5f}")

eq = equilibrium_weights(circle[::64], d=2)  # 8 roots of unity
print(f"equilibrium weights on 8 roots of unity: {np.round(eq.measure.weights, 6)}")
