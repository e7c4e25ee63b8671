# Brute-force GF(2) cohomology of the spectral-sequence page, compared with the closed formula
import time

from cyclic_billiards.cohomology import (Gf2Presentation, auxiliary_complex_dims,
                                         build_quotient_basis, cohomology_dims,
                                         differential_matrix, euclidean_ring_dims,
                                         verify_cohomology)
from cyclic_billiards.gf2 import matrix_rank

# A single block: the quotient basis and the differential out of it
pres = Gf2Presentation(n=4, m=3)
basis = build_quotient_basis(pres, (3, 2))
print("basis at (3,2):", [mono.label(4) for mono in basis.representatives])
D = differential_matrix(pres, (3, 2))
print("differential", D.shape, "rank", matrix_rank(D))

# Bigraded dimensions: one class at (0, i(m-1)) and one at (m, i(m-1))
print(cohomology_dims(5, 3).as_triples())

for m in (3, 4):
    for n in range(3, 9):
        t = time.perf_counter()
        chk = verify_cohomology(n, m)
        print(f"m={m} n={n} passed={chk.passed} ({time.perf_counter() - t:.3f}s)")

# Euclidean ring: binomials below the top degree, n-1 at the top
print(euclidean_ring_dims(6))

# The two auxiliary complexes
print(auxiliary_complex_dims(4, 3, "dA"), auxiliary_complex_dims(4, 3, "deltaA"))
