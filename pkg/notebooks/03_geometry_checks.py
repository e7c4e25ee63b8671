# The perimeter functional on an ellipsoid: gradients, pairing and the reflection law
import numpy as np

from cyclic_billiards import billiard_core as bc

rng = np.random.default_rng(11)
body = bc.Ellipsoid([1.0, 1.2, 0.9, 1.1])
x = body.project(rng.standard_normal((5, 4)))

print("L =", bc.length(x), " phi =", bc.phi(x), " min edge =", bc.min_edge(x))

# Analytic tangential gradients against central differences in a local chart
g = bc.tangential_gradient(body, x)
fd = bc.chart_finite_difference_gradient(body, x, bc.length)
print("grad L error:", np.abs(g - fd).max())
gl = bc.log_phi_gradient(body, x)
fd = bc.chart_finite_difference_gradient(body, x, lambda p: np.log(bc.phi(p)))
print("grad ln phi error:", np.abs(gl - fd).max())

# The angle-sum expression for the pairing of the two gradients
pair = bc.gradient_pairing(body, x)
print(pair.pairing, np.sum(g * gl))

# Near the singular set the pairing is negative: the gradient of L points away from it
s = bc.sphere(3)
y = s.project(rng.standard_normal((5, 4)))
y[1] = s.project(y[0] + 1e-4 * rng.standard_normal(4))
print("pairing near a collapsed edge:", bc.gradient_pairing(s, y).pairing)

# A diameter along the longest axis satisfies the reflection law exactly
d = np.array([[0, 0, 1.2, 0], [0, 0, -1.2, 0]])
print("residual:", bc.reflection_residual(body, d))
print("Hessian eigenvalues:", np.linalg.eigvalsh(bc.hessian_in_chart(body, d)))

# Reflection is an involution
v = bc.billiard_reflect(body, x[0], -body.normal(x[0]) + 0.3 * rng.standard_normal(4))
print(v, np.linalg.norm(v))
