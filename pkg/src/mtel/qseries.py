"""Truncated integer q-expansions built from eta-type Euler products.

The discriminant form's coefficients (the tau function) and the conductor-27
and conductor-32 weight-two forms are all eta products, so everything here
reduces to expanding prod (1 - q^(d*n))^e exactly.  Polynomial products are
computed by Kronecker substitution: coefficients are packed into slots of one
big integer and multiplied with CPython's native bignum multiply, which keeps
the 10^4-term expansions well under the time budget without any numerics
dependency.
"""

from __future__ import annotations

from dataclasses import dataclass

from .exactnum import primes_up_to


@dataclass(frozen=True)
class QSeries:
    """Integer q-expansion sum a_n q^n truncated at n = bound (a_1 first)."""

    bound: int
    coefficients: tuple

    def __post_init__(self):
        if self.bound < 1:
            raise ValueError("bound must be >= 1")
        if len(self.coefficients) != self.bound:
            raise ValueError("coefficient list must have exactly `bound` entries")

    def coefficient(self, n: int) -> int:
        if not 1 <= n <= self.bound:
            raise IndexError(f"coefficient index {n} outside 1..{self.bound}")
        return self.coefficients[n - 1]

    def to_json_dict(self) -> dict:
        return {"bound": self.bound, "coefficients": list(self.coefficients)}


def _pack(coeffs: list, slot_bytes: int) -> int:
    # signed packing: shift every slot by a common offset so the byte image
    # is nonnegative, then subtract offset * (1 + B + B^2 + ...) exactly
    off = max(abs(c) for c in coeffs)
    width = 8 * slot_bytes
    data = b"".join((c + off).to_bytes(slot_bytes, "little") for c in coeffs)
    packed = int.from_bytes(data, "little")
    ones = ((1 << (width * len(coeffs))) - 1) // ((1 << width) - 1)
    return packed - off * ones


def _unpack(value: int, slot_bytes: int, length: int) -> list:
    width = 8 * slot_bytes
    half = 1 << (width - 1)
    ones = ((1 << (width * length)) - 1) // ((1 << width) - 1)
    data = (value + half * ones).to_bytes(slot_bytes * length, "little")
    return [
        int.from_bytes(data[slot_bytes * i : slot_bytes * (i + 1)], "little") - half
        for i in range(length)
    ]


def _mul_trunc(a: list, b: list, bound: int) -> list:
    """Product of integer polynomials (lists indexed by exponent), truncated
    to degree <= bound, via Kronecker substitution."""
    a = a[: bound + 1]
    b = b[: bound + 1]
    max_a = max(abs(c) for c in a)
    max_b = max(abs(c) for c in b)
    if max_a == 0 or max_b == 0:
        return [0]
    coeff_bound = min(len(a), len(b)) * max_a * max_b
    slot_bytes = (coeff_bound.bit_length() + 2 + 7) // 8 + 1
    length = len(a) + len(b) - 1
    prod = _pack(a, slot_bytes) * _pack(b, slot_bytes)
    return _unpack(prod, slot_bytes, length)[: bound + 1]


def _pow_trunc(base: list, exponent: int, bound: int) -> list:
    result = [1]
    acc = base
    e = exponent
    while e:
        if e & 1:
            result = _mul_trunc(result, acc, bound)
        e >>= 1
        if e:
            acc = _mul_trunc(acc, acc, bound)
    return result


def _euler_product(d: int, bound: int) -> list:
    """Expansion of prod_{n>=1} (1 - q^(d n)) through q^bound, by the
    pentagonal-number identity (so only O(sqrt(bound/d)) nonzero terms)."""
    coeffs = [0] * (bound + 1)
    coeffs[0] = 1
    m = 1
    while True:
        e1 = d * m * (3 * m - 1) // 2
        e2 = d * m * (3 * m + 1) // 2
        if e1 > bound and e2 > bound:
            break
        sign = -1 if m % 2 else 1
        if e1 <= bound:
            coeffs[e1] += sign
        if e2 <= bound:
            coeffs[e2] += sign
        m += 1
    return coeffs


def eta_quotient_qexp(spec, bound: int) -> QSeries:
    """q-expansion of prod eta(d z)^e for spec a sequence of (d, e) pairs.

    The leading power sum(d*e)/24 must be a positive integer; the returned
    series carries the coefficients of q^1 .. q^bound.  Negative exponents
    (genuine eta quotients with poles) are not needed for the forms in scope
    and are rejected.
    """
    if bound < 1:
        raise ValueError("bound must be >= 1")
    spec = list(spec)
    if not spec:
        raise ValueError("empty eta product specification")
    total = 0
    for d, e in spec:
        if d < 1:
            raise ValueError(f"eta argument scale {d} must be positive")
        if e < 1:
            raise ValueError("nonpositive eta exponents are not supported")
        total += d * e
    if total % 24 != 0 or total == 0:
        raise ValueError("leading power sum(d*e)/24 is not a positive integer")
    lead = total // 24
    if lead > bound:
        return QSeries(bound, tuple([0] * bound))
    inner_bound = bound - lead
    product = [1]
    for d, e in spec:
        factor = _pow_trunc(_euler_product(d, inner_bound), e, inner_bound)
        product = _mul_trunc(product, factor, inner_bound)
    if len(product) < inner_bound + 1:
        product = product + [0] * (inner_bound + 1 - len(product))
    coeffs = [0] * bound
    for n in range(lead, bound + 1):
        coeffs[n - 1] = product[n - lead]
    return QSeries(bound, tuple(coeffs))


_DELTA_CACHE: dict = {}


def delta_qexp(bound: int) -> QSeries:
    """Coefficients tau(1..bound) of the weight-12 level-1 discriminant form,
    from the 24th power of the Euler product."""
    if bound < 1:
        raise ValueError("bound must be >= 1")
    best = _DELTA_CACHE.get("series")
    if best is None or best.bound < bound:
        best = eta_quotient_qexp([(1, 24)], bound)
        _DELTA_CACHE["series"] = best
    if best.bound == bound:
        return best
    return QSeries(bound, best.coefficients[:bound])


@dataclass(frozen=True)
class CongruenceReport:
    p: int
    bound: int
    passed: bool
    first_failing_index: int | None

    def to_json_dict(self) -> dict:
        return {
            "p": self.p,
            "bound": self.bound,
            "passed": self.passed,
            "first_failing_index": self.first_failing_index,
        }


def check_congruence_qexp(f: QSeries, g: QSeries, p: int) -> CongruenceReport:
    """Coefficientwise congruence f = g mod p; reports the least failing n."""
    if f.bound != g.bound:
        raise ValueError("series have different truncation bounds")
    for n in range(1, f.bound + 1):
        if (f.coefficient(n) - g.coefficient(n)) % p != 0:
            return CongruenceReport(p, f.bound, False, n)
    return CongruenceReport(p, f.bound, True, None)


@dataclass(frozen=True)
class TauLemmaReport:
    p: int
    bound: int
    passed: bool
    failures: tuple

    def to_json_dict(self) -> dict:
        return {
            "p": self.p,
            "bound": self.bound,
            "passed": self.passed,
            "failures": [list(x) for x in self.failures],
        }


def check_tau_lemma(p: int, bound: int) -> TauLemmaReport:
    """Check tau(ell) = 1 + ell mod p at every prime ell <= bound, ell != p.

    Only p = 2 and p = 3 carry this congruence (it degenerates from power
    congruences of tau at those primes), so other p are rejected.
    """
    if p not in (2, 3):
        raise ValueError("the tau congruence check applies to p = 2 and 3 only")
    series = delta_qexp(bound)
    failures = []
    for ell in primes_up_to(bound):
        if ell == p:
            continue
        if (series.coefficient(ell) - (1 + ell)) % p != 0:
            failures.append((ell, series.coefficient(ell) % p, (1 + ell) % p))
    return TauLemmaReport(p, bound, not failures, tuple(failures))
