"""Closed-form critical data of the perimeter functional on the round sphere.

For odd n the critical points of L on G(S^m, n) are the regular inscribed
n-gons (and star polygons) on great circles. The polygon with rotation number
r has all edges 2 sin(pi r / n), and the family containing it is a copy of the
Stiefel manifold V_{2,m+1} labelled by p = (n - 1 - 2r)/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .billiard_core import CyclicConfiguration
from .invariants import UnsupportedParameters, critical_family_count


def _check_odd(n: int):
    if not isinstance(n, (int, np.integer)) or n < 3 or n % 2 == 0:
        raise UnsupportedParameters(f"sphere families are tabulated for odd n >= 3, got n={n}")


def _standard_frame(m: int) -> tuple[np.ndarray, np.ndarray]:
    e1 = np.zeros(m + 1)
    e2 = np.zeros(m + 1)
    e1[0] = 1.0
    e2[1] = 1.0
    return e1, e2


@dataclass(frozen=True)
class SphereOrbitSpec:
    m: int
    n: int
    r: int
    frame: tuple = field(default=None)

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("sphere dimension must be >= 1")
        _check_odd(self.n)
        if not 1 <= self.r <= (self.n - 1) // 2:
            raise ValueError(f"rotation number must lie in 1..{(self.n - 1) // 2}, got {self.r}")
        if self.frame is None:
            e1, e2 = _standard_frame(self.m)
        else:
            e1, e2 = (np.asarray(v, dtype=float) for v in self.frame)
        if e1.shape != (self.m + 1,) or e2.shape != (self.m + 1,):
            raise ValueError("frame vectors must live in R^{m+1}")
        if (abs(e1 @ e1 - 1) > 1e-14 or abs(e2 @ e2 - 1) > 1e-14 or abs(e1 @ e2) > 1e-14):
            raise ValueError("frame must be orthonormal to 1e-14")
        object.__setattr__(self, "frame", (e1, e2))

    @property
    def p(self) -> int:
        return (self.n - 1 - 2 * self.r) // 2


def make_regular_orbit(orbit: SphereOrbitSpec) -> CyclicConfiguration:
    """Vertices cos(j a) e1 + sin(j a) e2 with a = 2 pi r / n."""
    e1, e2 = orbit.frame
    ang = 2.0 * np.pi * orbit.r * np.arange(orbit.n) / orbit.n
    pts = np.cos(ang)[:, None] * e1 + np.sin(ang)[:, None] * e2
    return CyclicConfiguration(pts)


def chord_length(n: int, r: int) -> float:
    return 2.0 * math.sin(math.pi * r / n)


def expected_length(n: int, r: int) -> float:
    """Critical value -2 n sin(pi r / n) of the rotation-number-r family."""
    if not 1 <= r <= (n - 1) // 2:
        raise ValueError(f"rotation number must lie in 1..{(n - 1) // 2}")
    return -n * chord_length(n, r)


def expected_morse_data(m: int, n: int, r: int) -> tuple[int, int]:
    """(index, nullity) = (2p(m-1), 2m-1) with p = (n - 1 - 2r)/2."""
    _check_odd(n)
    if not 1 <= r <= (n - 1) // 2:
        raise ValueError(f"rotation number must lie in 1..{(n - 1) // 2}")
    p = (n - 1 - 2 * r) // 2
    return 2 * p * (m - 1), 2 * m - 1


@dataclass(frozen=True)
class FamilyRow:
    p: int
    r: int
    length: float
    index: int
    nullity: int


def family_table(m: int, n: int) -> list[FamilyRow]:
    """Critical families ordered by p (equivalently by increasing critical value)."""
    _check_odd(n)
    _, rots = critical_family_count(n)
    rows = []
    for p, r in enumerate(rots):
        idx, nul = expected_morse_data(m, n, r)
        rows.append(FamilyRow(p, r, expected_length(n, r), idx, nul))
    return rows
