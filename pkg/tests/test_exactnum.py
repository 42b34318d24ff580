import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from mtel.exactnum import (
    INF,
    ResidueRing,
    cfrac_paths,
    cyclotomic_dlog,
    ordp,
    primes_up_to,
    teichmuller,
)


def test_ordp_examples():
    assert ordp(Fraction(9, 2), 3) == 2
    assert ordp(0, 5) == INF
    assert ordp(-24, 2) == 3


def test_ordp_rejects_composite_p():
    with pytest.raises(ValueError):
        ordp(4, 6)


@given(
    st.fractions(min_value=-(10**6), max_value=10**6, max_denominator=10**6),
    st.fractions(min_value=-(10**6), max_value=10**6, max_denominator=10**6),
    st.sampled_from([2, 3, 5, 7]),
)
def test_ordp_valuation_axioms(x, y, p):
    vx, vy = ordp(x, p), ordp(y, p)
    assert ordp(x * y, p) == vx + vy
    s = ordp(x + y, p)
    assert s >= min(vx, vy)
    if vx != vy:
        assert s == min(vx, vy)


def test_primes_up_to():
    assert primes_up_to(1) == []
    assert primes_up_to(30) == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert len(primes_up_to(10**4)) == 1229


def test_teichmuller_examples():
    assert teichmuller(1, 3, 5).value == 1
    assert teichmuller(2, 3, 2).value == 8
    assert teichmuller(3, 2, 7).lift_centered() == -1
    assert teichmuller(5, 2, 7).value == 1
    with pytest.raises(ValueError):
        teichmuller(6, 3, 4)


@pytest.mark.parametrize("p,M", [(3, 5), (5, 4), (7, 3), (11, 3)])
def test_teichmuller_is_root_of_unity(p, M):
    mod = p**M
    for a in range(1, p):
        w = teichmuller(a, p, M)
        assert pow(w.value, p - 1, mod) == 1
        assert w.value % p == a % p


def test_residue_ring_arithmetic():
    x = ResidueRing(3, 4, 50)
    y = ResidueRing(3, 4, 40)
    assert (x + y).value == 90 % 81
    assert (x * y).value == 2000 % 81
    assert (x - y).value == 10
    assert (x.inverse() * x).value == 1
    assert (y**3).value == pow(40, 3, 81)
    with pytest.raises(ValueError):
        x + ResidueRing(3, 3, 1)


def test_cyclotomic_dlog_examples():
    assert cyclotomic_dlog(1, 3, 2) == 0
    assert cyclotomic_dlog(4, 3, 1) == 1
    assert cyclotomic_dlog(7, 3, 2) == 8
    assert pow(4, 8, 27) == 7  # the value the example pins down


@pytest.mark.parametrize("p,n", [(3, 1), (3, 2), (3, 3), (3, 4), (5, 1), (5, 2), (7, 1)])
def test_cyclotomic_dlog_odd_p_exhaustive(p, n):
    modulus = p ** (n + 1)
    gamma = 1 + p
    seen = {}
    for a in range(1, modulus):
        if a % p == 0:
            continue
        e = cyclotomic_dlog(a, p, n)
        assert 0 <= e < p**n
        w = teichmuller(a, p, n + 1).value
        assert (pow(gamma, e, modulus) * w) % modulus == a % modulus
        seen.setdefault(e, 0)
        seen[e] = seen[e] + 1
    # every exponent class is hit exactly p-1 times
    assert all(count == p - 1 for count in seen.values())


@pytest.mark.parametrize("n", [0, 1, 2, 3, 4])
def test_cyclotomic_dlog_p2_exhaustive(n):
    modulus = 2 ** (n + 2)
    for a in range(1, modulus, 2):
        e = cyclotomic_dlog(a, 2, n)
        assert 0 <= e < 2**n
        assert pow(5, e, modulus) in (a % modulus, (-a) % modulus)


def test_cfrac_paths_examples():
    paths = cfrac_paths(0)
    assert len(paths) == 1
    m = paths[0]
    assert (m.a, m.b, m.c, m.d) == (0, -1, 1, 0)
    for m in cfrac_paths(Fraction(2, 5)):
        assert m.det == 1


def test_cfrac_paths_telescoping_7_27():
    paths = cfrac_paths(Fraction(7, 27))
    assert paths[0].start() is None  # starts at infinity
    assert paths[-1].end() == Fraction(7, 27)
    for left, right in zip(paths, paths[1:]):
        assert left.end() == right.start()


def test_cfrac_paths_random_telescoping():
    rng = random.Random(20260810)
    for _ in range(1000):
        den = rng.randrange(1, 10**6)
        num = rng.randrange(-(10**6), 10**6)
        r = Fraction(num, den)
        paths = cfrac_paths(r)
        assert paths[0].start() is None
        assert paths[-1].end() == r
        for left, right in zip(paths, paths[1:]):
            assert left.end() == right.start()
        assert all(m.det == 1 for m in paths)
