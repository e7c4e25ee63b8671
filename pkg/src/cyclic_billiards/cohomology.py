"""Brute-force GF(2) cohomology of the explicit E_m-term for X = S^m.

The algebra is generated by exterior classes s_1..s_n of bidegree (0, m-1)
and u_1..u_n of bidegree (m, 0), modulo

    (a) s_i^2 = 0            (c) u_i^2 = 0
    (b) sigma_{n-1}(s) = 0   (d) (u_i + u_{i+1}) s_i = 0   (indices mod n)

with differential d s_i = u_i + u_{i+1}, d u_i = 0. Relations (a) and (c)
are built in by using square-free monomials, stored as a pair of n-bit
masks. Everything else is linear algebra per bidegree: the ideal is
homogeneous, so its degree-(p, q) part is spanned by w * r for the
relation generators r and monomials w landing in that bidegree.

Internally a block is addressed by (a, b) = (#s factors, #u factors); the
public bidegree is (p, q) = (b*m, a*(m-1)).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

import numpy as np

from . import gf2
from .invariants import PoincarePolynomial, poincare_cyclic_sphere

DEFAULT_CAP = 12
AUXILIARY_CAP = 9


class ResourceLimitError(RuntimeError):
    """Requested size exceeds the configured cap."""


def popcount(x: int) -> int:
    return bin(x).count("1")


@lru_cache(maxsize=None)
def subsets(n: int, k: int) -> tuple[int, ...]:
    """All k-element subsets of {0..n-1} as bitmasks, ascending."""
    if k < 0 or k > n:
        return ()
    return tuple(sorted(sum(1 << i for i in c) for c in combinations(range(n), k)))


@dataclass(frozen=True, order=True)
class Monomial:
    s_set: int
    u_set: int

    def bidegree(self, m: int) -> tuple[int, int]:
        return popcount(self.u_set) * m, popcount(self.s_set) * (m - 1)

    def label(self, n: int) -> str:
        s = "".join(f"s{i + 1}" for i in range(n) if self.s_set >> i & 1)
        u = "".join(f"u{i + 1}" for i in range(n) if self.u_set >> i & 1)
        return (s + u) or "1"


@dataclass(frozen=True)
class Gf2Presentation:
    """The E_m-term presentation for G(S^m, n)."""

    n: int
    m: int
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.m < 2:
            raise ValueError("m must be >= 2")
        if self.n > self.cap:
            raise ResourceLimitError(f"n={self.n} exceeds the cap {self.cap}")

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    def sigma_relation(self) -> list[Monomial]:
        """Terms of sigma_{n-1}(s): products of n-1 cyclically consecutive s_i."""
        return [Monomial(self.full ^ (1 << j), 0) for j in range(self.n)]

    def mixed_relation(self, i: int) -> list[Monomial]:
        """Terms of (u_i + u_{i+1}) s_i, 0-based i."""
        j = (i + 1) % self.n
        return [Monomial(1 << i, 1 << i), Monomial(1 << i, 1 << j)]

    def to_bidegree(self, a: int, b: int) -> tuple[int, int]:
        return b * self.m, a * (self.m - 1)

    def from_bidegree(self, bidegree: tuple[int, int]) -> tuple[int, int]:
        p, q = bidegree
        if p % self.m or q % (self.m - 1):
            raise ValueError(f"bidegree {bidegree} is not on the (m, m-1) lattice")
        return q // (self.m - 1), p // self.m


@dataclass
class QuotientBasis:
    """Coset representatives of the quotient in one bidegree."""

    n: int
    a: int
    b: int
    monomials: list[int]
    reduced: gf2.ReducedBasis
    representatives: list[Monomial] = field(default_factory=list)
    rep_index: dict[int, int] = field(default_factory=dict)
    index: dict[int, int] = field(default_factory=dict)

    @property
    def ambient_dim(self) -> int:
        return len(self.monomials)

    @property
    def relation_rank(self) -> int:
        return self.reduced.rank

    @property
    def dim(self) -> int:
        return len(self.representatives)


def _key(n: int, s: int, u: int) -> int:
    return (s << n) | u


def _relation_vectors(n: int, a: int, b: int, index: dict[int, int]):
    """Generators of the ideal in block (a, b) as bit vectors."""
    full = (1 << n) - 1
    if a >= 1 and b >= 1:
        for i in range(n):
            bi = 1 << i
            bj = 1 << ((i + 1) % n)
            for t in subsets(n, a - 1):
                if t & bi:
                    continue
                s = t | bi
                for w in subsets(n, b - 1):
                    v = 0
                    if not w & bi:
                        v ^= 1 << index[_key(n, s, w | bi)]
                    if not w & bj:
                        v ^= 1 << index[_key(n, s, w | bj)]
                    if v:
                        yield v
    if a == n - 1:
        for u in subsets(n, b):
            v = 0
            for j in range(n):
                v ^= 1 << index[_key(n, full ^ (1 << j), u)]
            yield v
    if a == n:
        # s_j * sigma_{n-1}(s) = s_1 ... s_n
        for u in subsets(n, b):
            yield 1 << index[_key(n, full, u)]


class CohomologyEngine:
    """Caches quotient blocks and differentials for one value of n."""

    def __init__(self, n: int, cap: int = DEFAULT_CAP):
        if n > cap:
            raise ResourceLimitError(f"n={n} exceeds the cap {cap}")
        if n < 2:
            raise ValueError("n must be >= 2")
        self.n = n
        self._blocks: dict[tuple[int, int], QuotientBasis] = {}
        self._images: dict[tuple[int, int], list[int]] = {}

    def block(self, a: int, b: int) -> QuotientBasis:
        key = (a, b)
        if key in self._blocks:
            return self._blocks[key]
        n = self.n
        monos = sorted(_key(n, s, u) for s in subsets(n, a) for u in subsets(n, b))
        index = {k: i for i, k in enumerate(monos)}
        ech = gf2.EchelonBasis()
        ech.extend(_relation_vectors(n, a, b, index))
        red = ech.reduced()
        reps, rep_index = [], {}
        mask = (1 << n) - 1
        for bit, k in enumerate(monos):
            if not red.pivot_mask >> bit & 1:
                rep_index[bit] = len(reps)
                reps.append(Monomial(k >> n, k & mask))
        qb = QuotientBasis(n, a, b, monos, red, reps, rep_index, index)
        self._blocks[key] = qb
        return qb

    def reduce_terms(self, a: int, b: int, keys) -> int:
        """Normal form (bit vector in block (a, b)) of a sum of monomial keys."""
        blk = self.block(a, b)
        index = blk.index
        v = 0
        for k in keys:
            v ^= 1 << index[k]
        return blk.reduced.normal_form(v)

    def differential_keys(self, s: int, u: int) -> set[int]:
        """Leibniz image d(s_S u_U) as a set of ambient monomial keys (GF(2) sum)."""
        n = self.n
        out: set[int] = set()
        for i in gf2.iter_bits(s):
            s2 = s ^ (1 << i)
            for j in (i, (i + 1) % n):
                if u >> j & 1:
                    continue
                k = _key(n, s2, u | (1 << j))
                out ^= {k}
        return out

    def images(self, a: int, b: int) -> list[int]:
        """Reduced images of the representatives of (a, b) in block (a-1, b+1)."""
        key = (a, b)
        if key in self._images:
            return self._images[key]
        src = self.block(a, b)
        if a == 0 or b == self.n:
            imgs = [0] * src.dim
        else:
            imgs = [self.reduce_terms(a - 1, b + 1, self.differential_keys(r.s_set, r.u_set))
                    for r in src.representatives]
        self._images[key] = imgs
        return imgs

    def differential_matrix(self, a: int, b: int) -> np.ndarray:
        """0/1 matrix of d: block (a, b) -> block (a-1, b+1), in representative coordinates."""
        src = self.block(a, b)
        if a == 0 or b == self.n:
            tgt_dim = self.block(a - 1, b + 1).dim if a > 0 and b < self.n else 0
            return np.zeros((tgt_dim, src.dim), dtype=np.uint8)
        tgt = self.block(a - 1, b + 1)
        mat = np.zeros((tgt.dim, src.dim), dtype=np.uint8)
        for col, v in enumerate(self.images(a, b)):
            for bit in gf2.iter_bits(v):
                mat[tgt.rep_index[bit], col] = 1
        return mat

    def differential_rank(self, a: int, b: int) -> int:
        if a <= 0 or b >= self.n or a > self.n or b < 0:
            return 0
        return gf2.rank(self.images(a, b))

    def cohomology_dim(self, a: int, b: int) -> int:
        dim = self.block(a, b).dim
        return dim - self.differential_rank(a, b) - self.differential_rank(a + 1, b - 1)


@lru_cache(maxsize=32)
def _engine(n: int, cap: int) -> CohomologyEngine:
    return CohomologyEngine(n, cap)


def build_quotient_basis(presentation: Gf2Presentation, bidegree: tuple[int, int]) -> QuotientBasis:
    a, b = presentation.from_bidegree(bidegree)
    if not (0 <= a <= presentation.n and 0 <= b <= presentation.n):
        return QuotientBasis(presentation.n, a, b, [], gf2.ReducedBasis({}, 0))
    return _engine(presentation.n, presentation.cap).block(a, b)


def differential_matrix(presentation: Gf2Presentation, bidegree: tuple[int, int]) -> np.ndarray:
    a, b = presentation.from_bidegree(bidegree)
    return _engine(presentation.n, presentation.cap).differential_matrix(a, b)


@dataclass(frozen=True)
class BigradedDims:
    """Nonzero dimensions keyed by bidegree (p, q)."""

    dims: dict[tuple[int, int], int]

    def __getitem__(self, bidegree):
        return self.dims.get(bidegree, 0)

    def support(self) -> set[tuple[int, int]]:
        return {k for k, v in self.dims.items() if v}

    def total_polynomial(self) -> PoincarePolynomial:
        terms: dict[int, int] = {}
        for (p, q), d in self.dims.items():
            terms[p + q] = terms.get(p + q, 0) + d
        return PoincarePolynomial.from_terms(terms)

    def as_triples(self) -> list[tuple[int, int, int]]:
        return [(p, q, d) for (p, q), d in sorted(self.dims.items()) if d]


def cohomology_dims(n: int, m: int, cap: int = DEFAULT_CAP) -> BigradedDims:
    """Bigraded dimensions of H(E_m, d_m), i.e. the E_{m+1}-term."""
    pres = Gf2Presentation(n, m, cap)
    eng = _engine(n, cap)
    dims = {}
    for a in range(n + 1):
        for b in range(n + 1):
            d = eng.cohomology_dim(a, b)
            if d:
                dims[pres.to_bidegree(a, b)] = d
    return BigradedDims(dims)


def expected_support(n: int, m: int) -> set[tuple[int, int]]:
    """Support of the E_{m+1}-term: 1 and u times sigma_i, i = 0..n-2."""
    return {(p, i * (m - 1)) for i in range(n - 1) for p in (0, m)}


@dataclass(frozen=True)
class CohomologyCheck:
    n: int
    m: int
    dims: BigradedDims
    computed: PoincarePolynomial
    expected: PoincarePolynomial
    support_ok: bool

    @property
    def passed(self) -> bool:
        return self.computed == self.expected and self.support_ok


def verify_cohomology(n: int, m: int, cap: int = DEFAULT_CAP) -> CohomologyCheck:
    """Compare the brute-force E_{m+1}-term against the closed formula.

    A mismatch is reported through ``passed``; it is never corrected.
    """
    dims = cohomology_dims(n, m, cap)
    support_ok = (dims.support() == expected_support(n, m)
                  and all(v == 1 for v in dims.dims.values()))
    return CohomologyCheck(n, m, dims, dims.total_polynomial(),
                           poincare_cyclic_sphere(m, n), support_ok)


def euclidean_ring_dims(n: int, cap: int = DEFAULT_CAP) -> list[int]:
    """Dimensions of Λ[s_1..s_n]/(sigma_{n-1}(s)) in s-degrees 0..n.

    This is the u-free row (b = 0) of the E_m presentation, where the mixed
    relations contribute nothing.
    """
    eng = _engine(n, cap)
    return [eng.block(a, 0).dim for a in range(n + 1)]


# -- auxiliary complexes (A, d_A) and (A, delta_A) ---------------------------
#
# A is generated by s_i (degree m-1), v_i and u (degree m) modulo s_i^2,
# v_i^2, u^2 and v_i s_i. Its monomials s_I v_J u^e with I, J disjoint form
# a basis, so no quotient reduction is needed here.

def _aux_monomials(n: int):
    full = (1 << n) - 1
    for i_set in range(1 << n):
        rest = full ^ i_set
        j_set = rest
        while True:
            for e in (0, 1):
                yield i_set, j_set, e
            if j_set == 0:
                break
            j_set = (j_set - 1) & rest


def _aux_degree(n, m, mono):
    i_set, j_set, e = mono
    return popcount(i_set) * (m - 1) + (popcount(j_set) + e) * m


def _aux_d(n, mono):
    i_set, j_set, e = mono
    for i in gf2.iter_bits(i_set):
        yield i_set ^ (1 << i), j_set | (1 << i), e


def _aux_delta(n, mono):
    i_set, j_set, e = mono
    free = ((1 << n) - 1) ^ (i_set | j_set)
    for i in gf2.iter_bits(free):
        yield i_set, j_set | (1 << i), e


def _complex_cohomology(monos, degree, apply, step) -> dict[int, int]:
    by_deg: dict[int, list] = {}
    for mono in monos:
        by_deg.setdefault(degree(mono), []).append(mono)
    index = {deg: {mono: k for k, mono in enumerate(ms)} for deg, ms in by_deg.items()}
    ranks: dict[int, int] = {}
    for deg, ms in by_deg.items():
        tgt = index.get(deg + step)
        if tgt is None:
            ranks[deg] = 0
            continue
        vecs = []
        for mono in ms:
            v = 0
            for img in apply(mono):
                v ^= 1 << tgt[img]
            vecs.append(v)
        ranks[deg] = gf2.rank(vecs)
    out = {}
    for deg, ms in by_deg.items():
        h = len(ms) - ranks[deg] - ranks.get(deg - step, 0)
        if h:
            out[deg] = h
    return dict(sorted(out.items()))


def auxiliary_complex_dims(n: int, m: int, which: str = "dA", reduced: bool = True,
                           cap: int = AUXILIARY_CAP) -> dict[int, int]:
    """Cohomology dimensions by total degree of (A, d_A) or (A, delta_A).

    d_A(s_i) = v_i, d_A(v_i) = d_A(u) = 0 (degree +1), and
    delta_A(x) = (v_1 + ... + v_n) x (degree +m).

    For ``dA`` with ``reduced=True`` the unit class in degree 0 is dropped,
    leaving the class of u. ``reduced`` has no effect on ``deltaA``, whose
    unit is not a cocycle.
    """
    if n > cap:
        raise ResourceLimitError(f"n={n} exceeds the auxiliary cap {cap}")
    monos = list(_aux_monomials(n))
    degree = lambda mono: _aux_degree(n, m, mono)  # noqa: E731
    if which == "dA":
        if reduced:
            monos = [x for x in monos if x != (0, 0, 0)]
        return _complex_cohomology(monos, degree, lambda x: _aux_d(n, x), 1)
    if which == "deltaA":
        return _complex_cohomology(monos, degree, lambda x: _aux_delta(n, x), m)
    raise ValueError(f"unknown complex {which!r}; expected 'dA' or 'deltaA'")


def delta_blocks(n: int, m: int) -> dict[int, dict[int, int]]:
    """Cohomology of (A, delta_A) restricted to each fixed s-multi-index I.

    delta_A never changes I, so the complex splits; each summand is two
    copies of the augmented cochain complex of a simplex on n - |I| vertices.
    """
    out = {}
    for i_set in range(1 << n):
        monos = [x for x in _aux_monomials(n) if x[0] == i_set]
        out[i_set] = _complex_cohomology(
            monos, lambda x: _aux_degree(n, m, x), lambda x: _aux_delta(n, x), m)
    return out
