"""Closed-form GF(2) invariants of cyclic configuration spaces of spheres.

Everything here is exact integer arithmetic. These functions are the
reference values that the brute-force cohomology engine and the numerical
orbit finder are checked against.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, factorial
from typing import Iterable, Sequence


class UnsupportedParameters(ValueError):
    """Raised when (m, n) lies outside the range where a formula is proven."""


@dataclass(frozen=True)
class PoincarePolynomial:
    """Polynomial in ``t`` with nonnegative integer coefficients.

    ``coefficients[d]`` is the coefficient of ``t**d``. Trailing zeros are
    trimmed on construction, so equal polynomials compare equal.
    """

    coefficients: tuple[int, ...]

    def __post_init__(self):
        coeffs = [int(c) for c in self.coefficients]
        if any(c < 0 for c in coeffs):
            raise ValueError(f"negative coefficient in {coeffs}")
        object.__setattr__(self, "coefficients", tuple(_trim(coeffs)))

    @classmethod
    def from_terms(cls, terms: dict[int, int]) -> PoincarePolynomial:
        if not terms:
            return cls(())
        coeffs = [0] * (max(terms) + 1)
        for d, c in terms.items():
            coeffs[d] += c
        return cls(tuple(coeffs))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, t):
        acc = 0
        for c in reversed(self.coefficients):
            acc = acc * t + c
        return acc

    def coefficient(self, d: int) -> int:
        return self.coefficients[d] if 0 <= d < len(self.coefficients) else 0

    def terms(self) -> dict[int, int]:
        return {d: c for d, c in enumerate(self.coefficients) if c}

    def betti_sum(self) -> int:
        return sum(self.coefficients)

    def __add__(self, other: PoincarePolynomial) -> PoincarePolynomial:
        return PoincarePolynomial(tuple(_add(self.coefficients, other.coefficients)))

    def __mul__(self, other: PoincarePolynomial) -> PoincarePolynomial:
        return PoincarePolynomial(tuple(_mul(self.coefficients, other.coefficients)))

    def __str__(self):
        if not self.coefficients:
            return "0"
        parts = []
        for d, c in enumerate(self.coefficients):
            if not c:
                continue
            if d == 0:
                parts.append(str(c))
                continue
            mono = "t" if d == 1 else f"t^{d}"
            parts.append(mono if c == 1 else f"{c}*{mono}")
        return " + ".join(parts)


# -- integer polynomial helpers (coefficient lists, index = degree) ---------

def _trim(p: list[int]) -> list[int]:
    while p and p[-1] == 0:
        p.pop()
    return p


def _add(p: Sequence[int], q: Sequence[int]) -> list[int]:
    out = [0] * max(len(p), len(q))
    for i, c in enumerate(p):
        out[i] += c
    for i, c in enumerate(q):
        out[i] += c
    return _trim(out)


def _sub(p: Sequence[int], q: Sequence[int]) -> list[int]:
    return _add(p, [-c for c in q])


def _mul(p: Sequence[int], q: Sequence[int]) -> list[int]:
    if not p or not q:
        return []
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return _trim(out)


def _monomial(d: int, c: int = 1) -> list[int]:
    return [0] * d + [c]


def _binomial_power(d: int, n: int) -> list[int]:
    """(t**d + 1)**n expanded."""
    out = [0] * (d * n + 1)
    for s in range(n + 1):
        out[d * s] += comb(n, s)
    return out


def exact_divide(p: Sequence[int], q: Sequence[int]) -> list[int]:
    """Synthetic division ``p / q`` that must leave no remainder."""
    p = _trim(list(p))
    q = _trim(list(q))
    if not q:
        raise ZeroDivisionError("division by the zero polynomial")
    lead = q[-1]
    rem = list(p)
    if len(rem) < len(q):
        if rem:
            raise ArithmeticError(f"non-exact division: remainder {rem}")
        return []
    quot = [0] * (len(rem) - len(q) + 1)
    for k in range(len(quot) - 1, -1, -1):
        c, r = divmod(rem[k + len(q) - 1], lead)
        if r:
            raise ArithmeticError("non-integral quotient coefficient")
        quot[k] = c
        if c:
            for j, b in enumerate(q):
                rem[k + j] -= c * b
    if any(rem):
        raise ArithmeticError(f"non-exact division: remainder {_trim(rem)}")
    return _trim(quot)


def _check_int(name: str, value, lowest: int):
    if not isinstance(value, int) or isinstance(value, bool):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    if value < lowest:
        raise UnsupportedParameters(f"{name} must be >= {lowest}, got {value}")


def _check_equivariant(m: int, n: int):
    _check_int("n", n, 3)
    if not isinstance(m, int) or isinstance(m, bool):
        raise TypeError(f"m must be an integer, got {m!r}")
    if m < 3:
        raise UnsupportedParameters(
            f"m={m} is unsupported by the equivariant formula (requires m >= 3)")
    if n % 2 == 0:
        raise UnsupportedParameters(
            f"n={n} is unsupported by the equivariant formula (requires odd n)")


def floor_log2(x: int) -> int:
    if x < 1:
        raise ValueError("floor_log2 needs a positive integer")
    return x.bit_length() - 1


# -- Poincaré polynomials ----------------------------------------------------

def poincare_cyclic_euclidean(m: int, n: int) -> PoincarePolynomial:
    """Poincaré polynomial of G(R^m, n): (t^{m-1}+1)^n - t^{(n-1)(m-1)} - t^{n(m-1)}."""
    _check_int("m", m, 2)
    _check_int("n", n, 2)
    k = m - 1
    p = _binomial_power(k, n)
    p = _sub(p, _monomial((n - 1) * k))
    p = _sub(p, _monomial(n * k))
    return PoincarePolynomial(tuple(p))


def poincare_cyclic_sphere(m: int, n: int) -> PoincarePolynomial:
    """Mod 2 Poincaré polynomial of G(S^m, n).

    (t^m + 1)(t^{(n-1)(m-1)} - 1) / (t^{m-1} - 1), evaluated by exact
    division. Its value at t = 1 is 2(n - 1).
    """
    _check_int("m", m, 2)
    _check_int("n", n, 2)
    num = _mul(_add(_monomial(m), [1]), _sub(_monomial((n - 1) * (m - 1)), [1]))
    den = _sub(_monomial(m - 1), [1])
    return PoincarePolynomial(tuple(exact_divide(num, den)))


def poincare_quotient(m: int, n: int) -> PoincarePolynomial:
    """Mod 2 Poincaré polynomial of the orbit space G(S^m, n)/D_n (m >= 3, n odd)."""
    _check_equivariant(m, n)
    k = m - 1
    a = exact_divide(_sub(_monomial((n - 1) * k), [1]), _sub(_monomial(2 * k), [1]))
    b = exact_divide(_sub(_monomial(m), [1]), [-1, 1])
    c = _add(_monomial(m), [1])
    return PoincarePolynomial(tuple(_mul(_mul(a, b), c)))


def stiefel_poincare(m: int) -> PoincarePolynomial:
    """Mod 2 Poincaré polynomial of V_{2,m+1}: t^{2m-1} + t^m + t^{m-1} + 1."""
    _check_int("m", m, 2)
    return PoincarePolynomial.from_terms({0: 1, m - 1: 1, m: 1, 2 * m - 1: 1})


def perfect_bott_sum(m: int, n: int) -> PoincarePolynomial:
    """Sum over critical families V_p of t^{index} times the Stiefel polynomial.

    For the round sphere this equals :func:`poincare_cyclic_sphere` when the
    length function is perfect.
    """
    _check_int("m", m, 2)
    if n < 3 or n % 2 == 0:
        raise UnsupportedParameters("perfect_bott_sum needs odd n >= 3")
    total = PoincarePolynomial(())
    stiefel = stiefel_poincare(m)
    for p in range((n - 1) // 2):
        total = total + PoincarePolynomial.from_terms({2 * p * (m - 1): 1}) * stiefel
    return total


# -- cup-lengths and bounds ---------------------------------------------------

def cup_length_sphere(m: int, n: int) -> int:
    _check_int("m", m, 2)
    _check_int("n", n, 2)
    return floor_log2(n - 1) + 1


def cup_length_quotient(m: int, n: int) -> int:
    _check_equivariant(m, n)
    return floor_log2(n - 1) + m - 1


@dataclass(frozen=True)
class BoundReport:
    m: int
    n: int
    ls_bound: int
    morse_bound: int
    cup_length_sphere: int
    cup_length_quotient: int | None
    conjectured_ls_bound: int | None = None

    def as_dict(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "ls_bound": self.ls_bound,
            "morse_bound": self.morse_bound,
            "cup_length_sphere": self.cup_length_sphere,
            "cup_length_quotient": self.cup_length_quotient,
            "conjectured_ls_bound": self.conjectured_ls_bound,
        }


def orbit_bounds(m: int, n: int) -> BoundReport:
    """Lower bounds on the number of D_n-orbits of n-periodic trajectories.

    ``ls_bound`` holds for every smooth strictly convex hypersurface and
    ``morse_bound`` for generic ones. ``conjectured_ls_bound`` (n + m - 2) is
    informational only and never asserted.
    """
    _check_equivariant(m, n)
    clq = cup_length_quotient(m, n)
    return BoundReport(
        m=m,
        n=n,
        ls_bound=floor_log2(n - 1) + m,
        morse_bound=(n - 1) * m,
        cup_length_sphere=cup_length_sphere(m, n),
        cup_length_quotient=clq,
        conjectured_ls_bound=n + m - 2,
    )


# -- multiplicative structure -------------------------------------------------

def multinomial_is_odd(parts: Iterable[int]) -> bool:
    """Parity of the multinomial coefficient (sum parts)! / prod(parts!).

    The coefficient is odd exactly when adding the parts in binary produces
    no carries, i.e. when the parts have pairwise disjoint bit patterns.
    """
    parts = list(parts)
    if not parts:
        raise ValueError("parts must be nonempty")
    seen = 0
    for p in parts:
        if p < 0:
            raise ValueError("parts must be nonnegative")
        if seen & p:
            return False
        seen |= p
    return True


def multinomial(parts: Sequence[int]) -> int:
    """Exact multinomial coefficient (big-integer factorial quotient)."""
    total = factorial(sum(parts))
    for p in parts:
        total //= factorial(p)
    return total


@dataclass(frozen=True)
class SigmaProduct:
    """Result of multiplying sigma_i by sigma_j in H*(G(S^m, n); Z_2).

    ``is_zero`` means the target class sigma_{i+j} itself vanishes
    (i + j >= n - 1); otherwise ``coefficient`` is C(i+j, i) mod 2.
    """

    i: int
    j: int
    is_zero: bool
    coefficient: int = 0
    target_index: int | None = None


def sigma_product(i: int, j: int, n: int) -> SigmaProduct:
    if i < 1 or j < 1:
        raise ValueError("sigma indices start at 1")
    if i + j >= n - 1:
        return SigmaProduct(i, j, is_zero=True)
    return SigmaProduct(i, j, is_zero=False,
                        coefficient=int(multinomial_is_odd([i, j])),
                        target_index=i + j)


def sigma_binary_factorization(i: int) -> list[int]:
    """Powers of two whose sigma classes multiply to sigma_i (binary expansion)."""
    if i < 1:
        raise ValueError("i must be >= 1")
    parts = [1 << k for k in range(i.bit_length()) if i >> k & 1]
    assert multinomial_is_odd(parts)
    return parts


# -- round-sphere critical families -----------------------------------------

def critical_family_count(n: int) -> tuple[int, list[int]]:
    """Number of critical manifolds V_p of L on the round sphere, and their
    rotation numbers (n - 1 - 2p)/2 listed by increasing p."""
    _check_int("n", n, 3)
    if n % 2 == 0:
        raise UnsupportedParameters("critical families are tabulated for odd n only")
    rot = [(n - 1 - 2 * p) // 2 for p in range((n - 1) // 2)]
    return len(rot), rot
