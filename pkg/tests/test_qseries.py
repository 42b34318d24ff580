import math
import random
import time

import pytest

from mtel.qseries import (
    QSeries,
    check_congruence_qexp,
    check_tau_lemma,
    delta_qexp,
    eta_quotient_qexp,
    _mul_trunc,
)


def _mul_brute(a, b, bound):
    out = [0] * (bound + 1)
    for i, ca in enumerate(a):
        if ca == 0 or i > bound:
            continue
        for j, cb in enumerate(b):
            if i + j > bound:
                break
            out[i + j] += ca * cb
    return out


def test_kronecker_multiply_vs_brute_force():
    rng = random.Random(7)
    for _ in range(40):
        la, lb = rng.randrange(1, 30), rng.randrange(1, 30)
        a = [rng.randrange(-500, 500) for _ in range(la)]
        b = [rng.randrange(-500, 500) for _ in range(lb)]
        bound = rng.randrange(1, 40)
        got = _mul_trunc(a, b, bound)
        want = _mul_brute(a, b, bound)
        n = max(len(got), len(want))
        got += [0] * (n - len(got))
        want += [0] * (n - len(want))
        assert got == want


def test_tau_values():
    d = delta_qexp(11)
    assert d.coefficient(1) == 1
    assert d.coefficient(2) == -24
    assert d.coefficient(3) == 252
    assert d.coefficient(11) == 534612


def test_tau_multiplicativity():
    bound = 400
    d = delta_qexp(bound)
    assert d.coefficient(6) == d.coefficient(2) * d.coefficient(3)
    for m in range(2, int(math.isqrt(bound)) + 1):
        for n in range(2, bound // m + 1):
            if math.gcd(m, n) == 1:
                assert d.coefficient(m * n) == d.coefficient(m) * d.coefficient(n)


def test_tau_prime_power_recursion():
    # a_{p^2} = a_p^2 - p^11 for the weight-12 eigenform
    d = delta_qexp(200)
    for p in (2, 3, 5, 7, 11, 13):
        assert d.coefficient(p * p) == d.coefficient(p) ** 2 - p**11


def test_eta_quotient_matches_delta():
    for bound in (1, 2, 10, 60):
        assert eta_quotient_qexp([(1, 24)], bound) == delta_qexp(bound)


def test_eta_quotient_leading_terms():
    f27 = eta_quotient_qexp([(3, 2), (9, 2)], 12)
    assert f27.coefficient(1) == 1
    f32 = eta_quotient_qexp([(4, 2), (8, 2)], 12)
    assert f32.coefficient(1) == 1
    assert (f32.coefficient(3) - delta_qexp(3).coefficient(3)) % 2 == 0


def test_eta_quotient_rejects_bad_specs():
    with pytest.raises(ValueError):
        eta_quotient_qexp([(1, 23)], 5)  # 23/24 not an integer
    with pytest.raises(ValueError):
        eta_quotient_qexp([(1, -24)], 5)
    with pytest.raises(ValueError):
        eta_quotient_qexp([], 5)


def test_congruence_examples():
    bound = 500
    delta = delta_qexp(bound)
    f27 = eta_quotient_qexp([(3, 2), (9, 2)], bound)
    f32 = eta_quotient_qexp([(4, 2), (8, 2)], bound)
    assert check_congruence_qexp(delta, delta, 3).passed
    assert check_congruence_qexp(delta, f27, 3).passed
    assert check_congruence_qexp(delta, f32, 2).passed
    rep = check_congruence_qexp(delta, f27, 5)
    assert not rep.passed and rep.first_failing_index <= 20


def test_congruence_symmetry_and_errors():
    delta = delta_qexp(80)
    f27 = eta_quotient_qexp([(3, 2), (9, 2)], 80)
    a = check_congruence_qexp(delta, f27, 5)
    b = check_congruence_qexp(f27, delta, 5)
    assert (a.passed, a.first_failing_index) == (b.passed, b.first_failing_index)
    with pytest.raises(ValueError):
        check_congruence_qexp(delta, delta_qexp(81), 3)


def test_tau_lemma_small():
    assert (delta_qexp(3).coefficient(2) - 3) % 3 == 0  # tau(2) = 1+2 mod 3
    assert (delta_qexp(3).coefficient(3) - 4) % 2 == 0  # tau(3) = 1+3 mod 2
    for p in (2, 3):
        rep = check_tau_lemma(p, 500)
        assert rep.passed and not rep.failures
    with pytest.raises(ValueError):
        check_tau_lemma(5, 100)


def test_delta_10k_speed():
    t0 = time.perf_counter()
    d = delta_qexp(10**4)
    elapsed = time.perf_counter() - t0
    assert d.coefficient(2) == -24
    assert elapsed < 5.0
