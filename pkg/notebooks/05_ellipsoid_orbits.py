# Diameters and triangles in ellipsoids, and what integrability does to the Hessian
import collections

import numpy as np

from cyclic_billiards.billiard_core import ConvexHypersurface, Ellipsoid
from cyclic_billiards.orbit_finder import SearchSettings, find_orbits

# Period two: the principal axes, with Morse indices 0..m
body = Ellipsoid([1.0, 1.1, 1.2, 1.3])
for r in find_orbits(body, 2, SearchSettings(starts=200, rng_seed=1)):
    axis = int(np.argmax(np.abs(r.configuration.points[0])))
    print(f"axis {axis}: L={r.length_value:.12f} index={r.morse_index}")

# Period three on a near-sphere ellipsoid. Ellipsoid billiards are integrable, so
# periodic orbits come in continuous families and every Hessian has a kernel.
near = Ellipsoid([1.0, 1.01, 1.02, 1.03])
recs = find_orbits(near, 3, SearchSettings(starts=400, rng_seed=7))
print(collections.Counter(r.nullity for r in recs), "nullity counts over", len(recs), "orbits")

# A quartic perturbation breaks integrability and the orbits become nondegenerate
a = np.array([1.0, 1.01, 1.02, 1.03])
c = np.array([0.05, 0.03, 0.0, 0.04])


def f(x):
    return np.sum(x * x / a**2, -1) + np.sum(c * x**4, -1) - 1


def grad(x):
    return 2 * x / a**2 + 4 * c * x**3


bumpy = ConvexHypersurface(3, f, grad, scale=float(a.mean()), convex_asserted=True)
recs = find_orbits(bumpy, 3, SearchSettings(starts=3000, rng_seed=7))
print(len(recs), "orbits;", collections.Counter(r.nullity for r in recs), "nullity counts")
print(sorted(collections.Counter(r.morse_index for r in recs).items()))
