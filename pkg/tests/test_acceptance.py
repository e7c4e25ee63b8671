"""Acceptance criteria, one test (or parametrized group) per criterion.

A line per criterion is printed in the terminal summary by conftest.py.
"""

import math
import os
import time

import numpy as np
import pytest

from cyclic_billiards import billiard_core as bc
from cyclic_billiards import cohomology as co
from cyclic_billiards import invariants as inv
from cyclic_billiards.orbit_finder import (FinderDiagnostics, SearchSettings, canonicalize,
                                           count_distinct_orbits, find_orbits, morse_data)
from cyclic_billiards.sphere_oracle import (SphereOrbitSpec, expected_length, expected_morse_data,
                                           family_table, make_regular_orbit)


def criterion(number, title):
    return pytest.mark.criterion(number, title)


@criterion(1, "closed-formula Betti sums, 3<=m<=6, 3<=n<=12")
def test_c01_closed_formulas():
    t = time.perf_counter()
    for m in range(3, 7):
        for n in range(3, 13):
            assert inv.poincare_cyclic_sphere(m, n)(1) == 2 * (n - 1)
            if n % 2 == 1:
                assert inv.poincare_quotient(m, n)(1) == m * (n - 1)
    assert time.perf_counter() - t < 1.0


@criterion(2, "brute-force GF(2) cohomology equals the closed formula, m in {3,4}, 3<=n<=8")
def test_c02_bruteforce_cohomology():
    t = time.perf_counter()
    for m in (3, 4):
        for n in range(3, 9):
            chk = co.verify_cohomology(n, m)
            assert chk.computed == inv.poincare_cyclic_sphere(m, n), (m, n)
            assert chk.dims.support() == co.expected_support(n, m), (m, n)
            assert all(v == 1 for v in chk.dims.dims.values())
    assert time.perf_counter() - t < 120.0


@criterion(3, "Euclidean ring ranks, 2<=n<=10")
def test_c03_euclidean_ranks():
    t = time.perf_counter()
    for n in range(2, 11):
        want = [math.comb(n, s) for s in range(n - 1)] + [n - 1, 0]
        assert co.euclidean_ring_dims(n) == want
    assert time.perf_counter() - t < 10.0


@criterion(4, "auxiliary complexes: one class in degree m; two in degrees n(m-1), n(m-1)+m")
def test_c04_auxiliary_complexes():
    for m in (3, 4):
        for n in range(2, 7):
            assert co.auxiliary_complex_dims(n, m, "dA") == {m: 1}
            assert co.auxiliary_complex_dims(n, m, "deltaA") == {n * (m - 1): 1, n * (m - 1) + m: 1}


@criterion(5, "perfectness identity for odd 3<=n<=11, 3<=m<=5")
def test_c05_perfectness():
    for m in range(3, 6):
        for n in range(3, 12, 2):
            total = [0] * ((n - 1) * (m - 1) + m)
            for p in range((n - 1) // 2):
                for d in (0, m - 1, m, 2 * m - 1):
                    total[2 * p * (m - 1) + d] += 1
            assert inv.PoincarePolynomial(tuple(total)) == inv.poincare_cyclic_sphere(m, n)


@criterion(6, "sphere census on S^3 with 2000 starts")
@pytest.mark.parametrize("n", [3, 5, 7])
def test_c06_sphere_census(n):
    t = time.perf_counter()
    recs = find_orbits(bc.sphere(3), n, SearchSettings(starts=2000, rng_seed=42))
    elapsed = time.perf_counter() - t
    assert count_distinct_orbits(recs).count == (n - 1) // 2
    for rec in recs:
        assert abs(rec.length_value - expected_length(n, rec.rotation_number)) < 1e-8
        assert rec.residual < 1e-10
    by_p = sorted(recs, key=lambda r: (n - 1 - 2 * r.rotation_number) // 2)
    vals = [r.length_value for r in by_p]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert elapsed < 60.0


@criterion(7, "Morse index 2p(m-1) and nullity 2m-1 at oracle orbits")
def test_c07_morse_indices():
    t = time.perf_counter()
    for m in (3, 4):
        body = bc.sphere(m)
        for n in (3, 5, 7):
            for row in family_table(m, n):
                cfg = make_regular_orbit(SphereOrbitSpec(m, n, row.r))
                assert morse_data(body, cfg) == (2 * row.p * (m - 1), 2 * m - 1), (m, n, row.r)
                assert morse_data(body, cfg) == expected_morse_data(m, n, row.r)
    assert time.perf_counter() - t < 60.0


@criterion(8, "ellipsoid (1,1.01,1.02,1.03), n=3, 2e4 starts: >=6 orbits with nullity 0")
def test_c08_ellipsoid_triangles():
    body = bc.Ellipsoid([1.0, 1.01, 1.02, 1.03])
    diag = FinderDiagnostics()
    t = time.perf_counter()
    recs = find_orbits(body, 3, SearchSettings(starts=20000, rng_seed=7), diag)
    elapsed = time.perf_counter() - t
    good = [r for r in recs if r.residual < 1e-8 and r.nullity == 0]
    nullities = sorted({r.nullity for r in recs})
    print(f"\n{len(recs)} distinct orbits, nullities seen {nullities}, {len(good)} with nullity 0")
    assert elapsed < 600.0
    assert count_distinct_orbits(good).count >= 6


@pytest.mark.skipif(os.environ.get("CB_EXTENDED") != "1", reason="extended check; set CB_EXTENDED=1")
def test_c08_extended_pentagons():
    body = bc.Ellipsoid([1.0, 1.01, 1.02, 1.03])
    recs = find_orbits(body, 5, SearchSettings(starts=20000, rng_seed=7))
    good = [r for r in recs if r.residual < 1e-8 and r.nullity == 0]
    assert count_distinct_orbits(good).count >= 12


@criterion(9, "diameters of (1,1.1,1.2,1.3): exactly 4, along the axes")
def test_c09_diameters():
    axes = np.array([1.0, 1.1, 1.2, 1.3])
    recs = find_orbits(bc.Ellipsoid(axes), 2, SearchSettings(starts=2000, rng_seed=1))
    assert len(recs) == 4
    found = set()
    for rec in recs:
        x = rec.configuration.points
        j = int(np.argmax(np.abs(x[0])))
        found.add(j)
        off = np.delete(x, j, axis=1)
        assert np.abs(off).max() < 1e-10
        chord = np.linalg.norm(x[0] - x[1])
        assert abs(chord - 2 * axes[j]) < 1e-10
        # the closed two-bounce trajectory runs the chord twice
        assert abs(rec.length_value + 2 * (2 * axes[j])) < 1e-10
    assert found == {0, 1, 2, 3}


@criterion(10, "analytic gradients vs central differences at 1000 configurations; pairing formula")
def test_c10_gradients():
    rng = np.random.default_rng(20241014)
    bodies = [bc.sphere(2), bc.sphere(3), bc.Ellipsoid([1.0, 1.3, 0.8]), bc.Ellipsoid([1.0, 1.2, 0.9, 1.1])]
    cases = [(b, n) for b in bodies for n in (3, 5, 7)]
    worst_g = worst_p = 0.0
    for k in range(1000):
        body, n = cases[k % len(cases)]
        axes = getattr(body, "axes")
        x = body.project(rng.standard_normal((n, body.ambient_dim)) * axes)
        g = bc.tangential_gradient(body, x)
        gl = bc.log_phi_gradient(body, x)
        fd_g = bc.chart_finite_difference_gradient(body, x, bc.length)
        fd_l = bc.chart_finite_difference_gradient(body, x, lambda p: np.log(bc.phi(p)))
        worst_g = max(worst_g, np.linalg.norm(g - fd_g) / np.linalg.norm(g),
                      np.linalg.norm(gl - fd_l) / np.linalg.norm(gl))
        direct = float(np.sum(g * gl))
        worst_p = max(worst_p, abs(bc.gradient_pairing(body, x).pairing - direct) / abs(direct))
    assert worst_g <= 1e-6
    assert worst_p <= 1e-8


@criterion(11, "properties: dihedral invariance, determinism, multinomial parity")
def test_c11_properties():
    rng = np.random.default_rng(11)
    body = bc.Ellipsoid([1.0, 1.2, 0.9, 1.1])
    for n in range(2, 10):
        for _ in range(20):
            x = body.project(rng.standard_normal((n, 4)))
            base_len = bc.length(x)
            sig = canonicalize(x)
            sig_round = canonicalize(x, round_body=True)
            for img in bc.dihedral_images(x):
                assert bc.length(img) == base_len
                assert canonicalize(img) == sig
                assert canonicalize(img, round_body=True) == sig_round
    settings = SearchSettings(starts=200, rng_seed=123)
    a = find_orbits(body, 3, settings)
    b = find_orbits(body, 3, settings)
    assert [r.canonical_signature for r in a] == [r.canonical_signature for r in b]
    assert [r.length_value for r in a] == [r.length_value for r in b]

    def compositions(total, parts):
        if parts == 1:
            yield (total,)
            return
        for first in range(total + 1):
            for rest in compositions(total - first, parts - 1):
                yield (first,) + rest

    for total in range(21):
        for k in range(1, 5):
            for parts in compositions(total, k):
                assert inv.multinomial_is_odd(parts) == (inv.multinomial(parts) % 2 == 1)
