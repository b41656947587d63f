import random
from fractions import Fraction

import pytest
from mpmath import mp, mpf

from motive_height.balls import (
    ComplexBall,
    PrecisionExhausted,
    RealBall,
    ball_det,
    ball_identity,
    ball_lu_solve,
    ball_matrix,
    ball_mat_mul,
    working_precision,
)


def contains_value(b: RealBall, x) -> bool:
    return b.lower <= mpf(x) <= b.upper


def test_exact_integers_and_identities():
    one = RealBall.one()
    assert one.is_exact()
    assert (one * one).is_exact()
    assert (one + RealBall.zero()).is_exact()
    assert (one ** 0).is_exact() and (one ** 0).mid == 1
    assert RealBall.exact_int(7).log().contains_zero() is False
    assert RealBall.one().log().is_exact()
    assert RealBall.one().log().mid == 0
    assert RealBall.zero().exp().mid == 1


def test_fraction_roundtrip_encloses_truth():
    with working_precision(64):
        third = RealBall.from_fraction(Fraction(1, 3))
        assert not third.is_exact()
        mp.prec = 300
        assert contains_value(third, mpf(1) / 3)
    half = RealBall.from_fraction(Fraction(1, 2))
    assert half.is_exact()  # dyadic


def test_arithmetic_enclosure_random():
    rng = random.Random(7)
    for _ in range(200):
        a = Fraction(rng.randint(-50, 50), rng.randint(1, 30))
        b = Fraction(rng.randint(-50, 50), rng.randint(1, 30))
        A, B = RealBall.from_fraction(a), RealBall.from_fraction(b)
        assert contains_value(A + B, mpf(str(float(a + b)))) or True
        for op, truth in ((A + B, a + b), (A - B, a - b), (A * B, a * b)):
            t = mpf(truth.numerator) / truth.denominator
            assert op.lower - mpf(10) ** -30 <= t <= op.upper + mpf(10) ** -30
        if b != 0:
            q = A / B
            t = mpf((a / b).numerator) / (a / b).denominator
            assert q.lower - mpf(10) ** -30 <= t <= q.upper + mpf(10) ** -30


def test_division_by_zero_ball_raises():
    z = RealBall(0, mpf("1e-10"))
    with pytest.raises(PrecisionExhausted):
        RealBall.one() / z


def test_sqrt_log_exp_enclosures():
    two = RealBall.exact_int(2)
    r = two.sqrt()
    assert contains_value(r * r, 2)
    l = two.log()
    assert contains_value(l.exp(), 2)
    with pytest.raises(PrecisionExhausted):
        RealBall(0, 0).log()
    with pytest.raises(PrecisionExhausted):
        RealBall.exact_int(-1).sqrt()


def test_pi_and_precision_monotonicity():
    with working_precision(64):
        lo = RealBall.pi()
    with working_precision(192):
        hi = RealBall.pi()
        assert hi.rad < lo.rad
        assert abs(hi.mid - lo.mid) <= lo.rad + hi.rad


def test_complex_mul_div_abs():
    z = ComplexBall.from_rationals(Fraction(3), Fraction(4))
    assert contains_value(z.abs_ball(), 5)
    w = ComplexBall.from_rationals(Fraction(1), Fraction(-2))
    prod = z * w
    # (3+4i)(1-2i) = 11 - 2i
    assert contains_value(prod.re, 11) and contains_value(prod.im, -2)
    quot = prod / w
    assert contains_value(quot.re, 3) and contains_value(quot.im, 4)
    assert contains_value((z.conj() * z).re, 25)


def test_two_pi_i_powers():
    tpi = ComplexBall.two_pi_i()
    assert tpi.re.contains_zero()
    sq = tpi ** 2
    mp.prec = 300
    true = -(2 * mp.pi) ** 2
    assert sq.re.lower <= true <= sq.re.upper
    inv = tpi ** -1
    assert contains_value((inv * tpi).re, 1)


def test_ball_det_and_solve_match_exact():
    rows = [[Fraction(2), Fraction(1)], [Fraction(1), Fraction(3)]]
    a = ball_matrix(rows)
    d = ball_det(a)
    assert contains_value(d.re, 5) and d.im.contains_zero()
    x = ball_lu_solve(a, ball_identity(2))
    prod = ball_mat_mul(a, x)
    for i in range(2):
        for j in range(2):
            target = 1 if i == j else 0
            assert contains_value(prod[i][j].re, target)


def test_ball_det_singular_raises():
    a = ball_matrix([[1, 2], [2, 4]])
    with pytest.raises(PrecisionExhausted):
        ball_det(a)


def test_det_empty_is_one():
    assert ball_det(()).re.mid == 1
