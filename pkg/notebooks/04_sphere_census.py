# Multistart search on the round sphere S^3, compared with the regular-polygon families
import time

from cyclic_billiards.billiard_core import sphere
from cyclic_billiards.orbit_finder import FinderDiagnostics, SearchSettings, find_orbits
from cyclic_billiards.sphere_oracle import family_table

body = sphere(3)
for n in (3, 5, 7):
    diag = FinderDiagnostics()
    t = time.perf_counter()
    recs = find_orbits(body, n, SearchSettings(starts=500, rng_seed=n), diag)
    print(f"n={n}: {len(recs)} families in {time.perf_counter() - t:.1f}s, "
          f"{diag.converged}/{diag.starts} starts converged")
    oracle = {row.r: row for row in family_table(3, n)}
    for r in sorted(recs, key=lambda r: r.length_value):
        row = oracle[r.rotation_number]
        print(f"   r={r.rotation_number} L={r.length_value:.10f} (oracle {row.length:.10f}) "
              f"index {r.morse_index} (oracle {row.index}) nullity {r.nullity}")
