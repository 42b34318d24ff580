import math
import random
from fractions import Fraction

import pytest

from mtel.curves import (
    ADDITIVE,
    GOOD,
    SPLIT,
    WeierstrassCurve,
    count_points,
    ec_add,
    ec_multiply,
    ec_negate,
    has_rational_p_torsion,
    is_additive_at,
    on_curve,
    parse_curves,
    verify_tau_congruence,
)

E27A1 = WeierstrassCurve("27a1", 0, 0, 1, 0, -7, 27)
E32A1 = WeierstrassCurve("32a1", 0, 0, 0, 4, 0, 32)
E36A1 = WeierstrassCurve("36a1", 0, 0, 0, 0, 1, 36)
E11A1 = WeierstrassCurve("11a1", 0, -1, 1, -10, -20, 11)
E27A3 = WeierstrassCurve("27a3", 0, 0, 1, 0, 0, 27)
# y^2 = x^3 - 2: no rational 2-torsion; additive at 2 and 3
CONTROL = WeierstrassCurve("ctrl.x3m2", 0, 0, 0, 0, -2, 1728)


def test_invariants_of_models():
    assert E27A1.discriminant == -(3**9)
    assert E27A1.c4 == 0
    assert E32A1.discriminant == -(2**12)
    assert E11A1.discriminant == -11**5
    assert E11A1.c4 == 496
    # c4^3 - c6^2 = 1728 disc
    for E in (E27A1, E32A1, E36A1, E11A1, CONTROL):
        assert E.c4**3 - E.c6**2 == 1728 * E.discriminant


def test_rejects_singular_model():
    with pytest.raises(ValueError):
        WeierstrassCurve("bad", 0, 0, 0, 0, 0, 1)


def test_parse_curves():
    text = """# a comment
27a1 [0,0,1,0,-7] 27
11a1 [0,-1,1,-10,-20] 11  # trailing comment
"""
    curves = parse_curves(text)
    assert [c.label for c in curves] == ["27a1", "11a1"]
    assert curves[0].a3 == 1 and curves[0].a6 == -7 and curves[0].conductor == 27
    assert parse_curves("") == []
    with pytest.raises(ValueError, match="expected 5 coefficients"):
        parse_curves("27a1 [0,0,1] 27")
    with pytest.raises(ValueError, match="line 2"):
        parse_curves("27a1 [0,0,1,0,-7] 27\nnot-a-curve-line")


def test_count_points_examples():
    E = WeierstrassCurve("x3px", 0, 0, 0, 1, 0, 64)  # y^2 = x^3 + x
    data = count_points(E, 3)
    assert data.reduction_type == GOOD
    assert data.n_points == 4 and data.a_ell == 0

    data = count_points(E27A1, 3)
    assert data.reduction_type == ADDITIVE and data.a_ell == 0

    data = count_points(E36A1, 5)  # y^2 = x^3 + 1 over F_5
    assert data.a_ell == 0 and abs(data.a_ell) <= 2 * math.isqrt(5) + 1


def test_count_points_known_traces_11a1():
    # classical Fourier coefficients of the conductor-11 newform
    expected = {2: -2, 3: -1, 5: 1, 7: -2, 13: 4, 23: -1}
    for ell, a in expected.items():
        assert count_points(E11A1, ell).a_ell == a
    bad = count_points(E11A1, 11)
    assert bad.reduction_type == SPLIT and bad.a_ell == 1


def test_count_points_bound_guard():
    with pytest.raises(ValueError):
        count_points(E11A1, 10**6 + 3)


def test_hasse_bound_sweep():
    for E in (E27A1, E32A1, E11A1, CONTROL):
        for ell in (5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41):
            data = count_points(E, ell)
            if data.reduction_type == GOOD:
                assert data.a_ell**2 <= 4 * ell


def _scaled(E, u):
    return WeierstrassCurve(
        E.label + f".u{u}", u * E.a1, u**2 * E.a2, u**3 * E.a3, u**4 * E.a4, u**6 * E.a6, E.conductor
    )


def _translated(E, r, s, t):
    a1 = E.a1 + 2 * s
    a2 = E.a2 - s * E.a1 + 3 * r - s * s
    a3 = E.a3 + r * E.a1 + 2 * t
    a4 = E.a4 - s * E.a3 + 2 * r * E.a2 - (t + r * s) * E.a1 + 3 * r * r - 2 * s * t
    a6 = E.a6 + r * E.a4 + r * r * E.a2 + r**3 - t * E.a3 - t * t - r * t * E.a1
    return WeierstrassCurve(E.label + ".rst", a1, a2, a3, a4, a6, E.conductor)


def test_count_points_model_invariance():
    rng = random.Random(11)
    for _ in range(25):
        E = rng.choice([E27A1, E11A1, E36A1])
        ell = rng.choice([5, 7, 13, 17, 19, 23])
        r, s, t = (rng.randrange(-5, 6) for _ in range(3))
        u = rng.choice([x for x in range(1, ell) if x % ell != 0])
        base = count_points(E, ell)
        assert count_points(_translated(E, r, s, t), ell).a_ell == base.a_ell
        assert count_points(_scaled(E, u), ell).a_ell == base.a_ell


def test_group_law():
    P = (Fraction(3), Fraction(4))  # 3-torsion point on 27a1
    assert on_curve(E27A1, P)
    assert ec_add(E27A1, P, ec_negate(E27A1, P)) is None
    assert ec_multiply(E27A1, 3, P) is None
    assert ec_multiply(E27A1, 2, P) == ec_negate(E27A1, P)
    # 11a1 has a rational 5-torsion point (5, 5)
    Q = (Fraction(5), Fraction(5))
    assert on_curve(E11A1, Q)
    assert ec_multiply(E11A1, 5, Q) is None
    assert ec_multiply(E11A1, 2, Q) is not None


def test_torsion_examples():
    w = has_rational_p_torsion(E36A1, 2)
    assert w.found and w.point == (Fraction(-1), Fraction(0))
    w = has_rational_p_torsion(E27A3, 3)
    assert w.found and w.point[0] == 0
    assert ec_multiply(E27A3, 3, w.point) is None
    assert not has_rational_p_torsion(CONTROL, 2).found
    w = has_rational_p_torsion(E27A1, 3)
    assert w.found and ec_multiply(E27A1, 3, w.point) is None
    assert has_rational_p_torsion(E32A1, 2).found


def test_is_additive_examples():
    assert is_additive_at(E27A1, 3)
    assert is_additive_at(E32A1, 2)
    assert is_additive_at(E36A1, 2) and is_additive_at(E36A1, 3)
    assert not is_additive_at(WeierstrassCurve("x3px", 0, 0, 0, 1, 0, 64), 5)
    assert not is_additive_at(E11A1, 11)
    assert not is_additive_at(E27A1, 5)  # good prime


def test_verify_tau_congruence():
    rep = verify_tau_congruence(E27A1, 3, 1000)
    assert rep.passed and rep.hypothesis_holds
    rep = verify_tau_congruence(E32A1, 2, 1000)
    assert rep.passed and rep.hypothesis_holds
    rep = verify_tau_congruence(CONTROL, 2, 100)
    assert not rep.hypothesis_holds
    assert not rep.passed and rep.mismatches[0][0] <= 100
