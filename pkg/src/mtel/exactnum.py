"""Exact arithmetic kernels: p-adic valuations, residue rings, Teichmuller
lifts, cyclotomic discrete logarithms and continued-fraction paths.

Everything here is immutable and pure, so all functions are safe to call
concurrently.  Rationals are plain ``fractions.Fraction`` values (always
stored reduced with positive denominator, which makes ``ordp`` and equality
cheap).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

INF = math.inf

Rational = Fraction


def primes_up_to(bound: int) -> list[int]:
    """All primes <= bound, by a plain sieve of Eratosthenes."""
    if bound < 2:
        return []
    sieve = bytearray([1]) * (bound + 1)
    sieve[0] = sieve[1] = 0
    for q in range(2, math.isqrt(bound) + 1):
        if sieve[q]:
            sieve[q * q :: q] = bytearray(len(range(q * q, bound + 1, q)))
    return [i for i in range(2, bound + 1) if sieve[i]]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    # deterministic Miller-Rabin for 64-bit-ish inputs; fine at desk scale
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def ordp(x, p: int):
    """p-adic valuation of an integer or rational; ordp(0) = +infinity."""
    if not is_prime(p):
        raise ValueError(f"p = {p} is not prime")
    if x == 0:
        return INF
    x = Fraction(x)
    v = 0
    num = x.numerator
    while num % p == 0:
        num //= p
        v += 1
    den = x.denominator
    while den % p == 0:
        den //= p
        v -= 1
    return v


@dataclass(frozen=True)
class ResidueRing:
    """An element of Z/p^M, kept reduced to [0, p^M)."""

    p: int
    M: int
    value: int

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("precision exponent M must be >= 1")
        object.__setattr__(self, "value", self.value % self.p**self.M)

    @property
    def modulus(self) -> int:
        return self.p**self.M

    def _check(self, other: "ResidueRing"):
        if (self.p, self.M) != (other.p, other.M):
            raise ValueError("mixed residue rings")

    def __add__(self, other):
        if isinstance(other, int):
            return ResidueRing(self.p, self.M, self.value + other)
        self._check(other)
        return ResidueRing(self.p, self.M, self.value + other.value)

    def __sub__(self, other):
        if isinstance(other, int):
            return ResidueRing(self.p, self.M, self.value - other)
        self._check(other)
        return ResidueRing(self.p, self.M, self.value - other.value)

    def __mul__(self, other):
        if isinstance(other, int):
            return ResidueRing(self.p, self.M, self.value * other)
        self._check(other)
        return ResidueRing(self.p, self.M, self.value * other.value)

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self):
        return ResidueRing(self.p, self.M, -self.value)

    def inverse(self) -> "ResidueRing":
        return ResidueRing(self.p, self.M, pow(self.value, -1, self.modulus))

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return ResidueRing(self.p, self.M, pow(self.value, e, self.modulus))

    def lift_centered(self) -> int:
        """Representative in (-p^M/2, p^M/2]."""
        m = self.modulus
        return self.value - m if self.value > m // 2 else self.value


def teichmuller(a: int, p: int, M: int) -> ResidueRing:
    """Teichmuller lift of the unit a to Z/p^M.

    For odd p this is the unique w with w^(p-1) = 1 mod p^M and w = a mod p,
    reached by iterating a -> a^p (at most M steps).  For p = 2 the lift is
    the sign character: +1 when a = 1 mod 4 and -1 when a = 3 mod 4.
    """
    if a % p == 0:
        raise ValueError(f"{a} is not a unit mod {p}")
    if p == 2:
        return ResidueRing(2, M, 1 if a % 4 == 1 else -1)
    mod = p**M
    w = a % mod
    for _ in range(M):
        w_next = pow(w, p, mod)
        if w_next == w:
            break
        w = w_next
    return ResidueRing(p, M, w)


def _dlog_onepluspn(u: int, base: int, p: int, n: int, modulus: int) -> int:
    # discrete log of u in the cyclic p-group generated by base inside
    # (Z/modulus)^*, solved digit by digit mod p, p^2, ...
    exp = 0
    gpow = base % modulus  # base^(p^i) as i advances
    resid = u % modulus
    step = 1  # p^i
    for i in range(n):
        # gpow = 1 + c*p^(i+k0) with c a unit; match digits of resid
        tail = p ** (i + 1) if p != 2 else 2 ** (i + 2)
        gm1 = (gpow - 1) % modulus
        rm1 = (resid - 1) % modulus
        if gm1 == 0:
            if rm1 != 0:
                raise ArithmeticError("dlog digit extraction failed")
            break
        c = (gm1 // tail) % p
        r = (rm1 // tail) % p
        if rm1 % tail != 0:
            raise ArithmeticError("dlog digit extraction failed")
        d = (r * pow(c, -1, p)) % p
        exp += d * step
        resid = (resid * pow(gpow, -d, modulus)) % modulus
        gpow = pow(gpow, p, modulus)
        step *= p
    if resid % modulus != 1:
        raise ArithmeticError("dlog did not terminate at the identity")
    return exp


def cyclotomic_dlog(a: int, p: int, n: int) -> int:
    """Exponent a' in [0, p^n) of a on the principal-unit line.

    Odd p: with gamma = 1+p, returns a' such that gamma^(a') = a/omega(a)
    mod p^(n+1).  p = 2: with gamma = 5, returns a' such that
    5^(a') = a*omega(a) mod 2^(n+2), omega being the sign character mod 4.
    """
    if n < 0:
        raise ValueError("level n must be >= 0")
    if p == 2:
        modulus = 2 ** (n + 2)
        if a % 2 == 0:
            raise ValueError(f"{a} is not a unit mod {modulus}")
        sign = 1 if a % 4 == 1 else -1
        u = (a * sign) % modulus
        if n == 0:
            return 0
        return _dlog_onepluspn(u, 5, 2, n, modulus)
    modulus = p ** (n + 1)
    if a % p == 0:
        raise ValueError(f"{a} is not a unit mod {modulus}")
    if n == 0:
        return 0
    w = teichmuller(a, p, n + 1)
    u = (a * w.inverse().value) % modulus
    return _dlog_onepluspn(u, 1 + p, p, n, modulus)


@dataclass(frozen=True)
class UnimodularPath:
    """An integer matrix (a, b; c, d) with ad - bc = +-1.

    The associated geodesic runs from b/d (the image of 0) to a/c (the image
    of infinity), with 1/0 read as the cusp at infinity.
    """

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.det not in (1, -1):
            raise ValueError("path matrix must have determinant +-1")

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    def start(self):
        """Image of 0, as a Fraction or None for the cusp at infinity."""
        return None if self.d == 0 else Fraction(self.b, self.d)

    def end(self):
        """Image of infinity, as a Fraction or None for infinity."""
        return None if self.c == 0 else Fraction(self.a, self.c)


def cfrac_paths(r) -> list[UnimodularPath]:
    """Unimodular paths telescoping {infinity} -> {r}.

    The divisor identity is {infinity} - {r} = sum of M({0} - {infinity})
    over the returned matrices M; consecutive geodesics share endpoints
    (end of one = start of the next), running from infinity down to r.
    All matrices are normalised to determinant +1.
    """
    r = Fraction(r)
    # continued-fraction convergents p_k/q_k of r, with p_{-1}/q_{-1} = 1/0
    num, den = r.numerator, r.denominator
    quotients = []
    while den != 0:
        q, rem = divmod(num, den)
        quotients.append(q)
        num, den = den, rem
    paths = []
    p_prev, q_prev = 1, 0
    p_cur, q_cur = quotients[0], 1
    paths.append(_normalized_path(p_cur, p_prev, q_cur, q_prev))
    for q in quotients[1:]:
        p_cur, p_prev = q * p_cur + p_prev, p_cur
        q_cur, q_prev = q * q_cur + q_prev, q_cur
        paths.append(_normalized_path(p_cur, p_prev, q_cur, q_prev))
    return paths


def _normalized_path(pk, pk1, qk, qk1) -> UnimodularPath:
    # matrix [pk, pk1; qk, qk1] sends 0 -> p_{k-1}/q_{k-1}, oo -> p_k/q_k;
    # flip the sign of the second column when the determinant is -1
    if pk * qk1 - pk1 * qk == 1:
        return UnimodularPath(pk, pk1, qk, qk1)
    return UnimodularPath(pk, -pk1, qk, -qk1)
