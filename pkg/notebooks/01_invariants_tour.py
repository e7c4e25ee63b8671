# Betti numbers of cyclic configuration spaces and the orbit bounds they give
import numpy as np

from cyclic_billiards import invariants as inv

# Poincare polynomials for the sphere S^3 and small periods
for n in range(2, 8):
    p = inv.poincare_cyclic_sphere(3, n)
    print(f"n={n}: {p}   (total rank {p.betti_sum()})")

# The quotient by the dihedral group only makes sense here for odd n, m >= 3
print(inv.poincare_quotient(3, 5))

# Lower bounds on periodic orbits: cup-length based and Morse based
print(f"{'m':>3} {'n':>3} {'LS':>4} {'Morse':>6}")
for m in (3, 4, 5):
    for n in (3, 5, 7, 9):
        b = inv.orbit_bounds(m, n)
        print(f"{m:>3} {n:>3} {b.ls_bound:>4} {b.morse_bound:>6}")

# Parity of multinomial coefficients is decided by binary carries
parts = [3, 4, 8]
print(inv.multinomial(parts) % 2, inv.multinomial_is_odd(parts))

# sigma_i factors as a product of sigma_{2^k}, following the binary digits of i
print(inv.sigma_binary_factorization(11))
print(inv.sigma_product(1, 2, 7))

# The Morse count equals a sum over critical families on the round sphere
print(inv.perfect_bott_sum(3, 7) == inv.poincare_cyclic_sphere(3, 7))
print(np.array(inv.poincare_cyclic_sphere(3, 7).coefficients))
