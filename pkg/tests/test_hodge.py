import random
from fractions import Fraction

import pytest
from mpmath import mp, mpf

from motive_height.balls import (
    ComplexBall,
    RealBall,
    ZeroVector,
    working_precision,
)
from motive_height.hodge import (
    HodgeStructure,
    direct_sum,
    hodge_decompose,
    line_metric,
    purity_check,
)
from conftest import random_pure_hodge


def tpi(k=1, scale=1):
    return ComplexBall.tpi_power(k, Fraction(scale))


def rank1(weight, level, entry) -> HodgeStructure:
    return HodgeStructure(weight, [level], [[entry]])


def approx(ball: RealBall, value, tol="1e-30") -> bool:
    return abs(ball.mid - mpf(value)) <= ball.rad + mpf(tol)


# ---------------------------------------------------------------------------
# purity
# ---------------------------------------------------------------------------

def test_purity_rank1_weight0():
    h = rank1(0, 0, ComplexBall.one())
    rep = purity_check(h)
    assert rep.ok and rep.dims == {0: 1}


def test_purity_rank1_tate_type():
    h = rank1(2, 1, tpi(1))
    rep = purity_check(h)
    assert rep.ok and rep.dims == {1: 1}


def test_purity_rank2_elliptic_shape():
    # F^1 spanned by (1, i), F^0 = C^2, weight 1
    basis = [[ComplexBall.one(), ComplexBall.one()],
             [ComplexBall.zero(), ComplexBall.from_rationals(0, 1)]]
    h = HodgeStructure(1, [0, 1], basis)
    rep = purity_check(h)
    assert rep.ok
    assert rep.dims == {1: 1, 0: 1}


def test_purity_fails_for_asymmetric_type():
    # rank 1, w = 0, single level 1: H^{1,-1} and H^{0,0} overlap
    h = rank1(0, 1, ComplexBall.one())
    rep = purity_check(h)
    assert not rep.ok


def test_purity_fails_conjugate_degenerate():
    # w = 1 with F^1 spanned by a real vector: F^1 = conj(F^0-complement) collapses
    basis = [[ComplexBall.one(), ComplexBall.one()],
             [ComplexBall.zero(), ComplexBall.one()]]
    h = HodgeStructure(1, [0, 1], basis)
    rep = purity_check(h)
    assert not rep.ok


# ---------------------------------------------------------------------------
# decomposition
# ---------------------------------------------------------------------------

def test_decompose_rank1_q1_shape():
    h = rank1(-2, -1, tpi(-1))
    dec = hodge_decompose(h)
    assert dec.dims() == {-1: 1}


def test_decompose_rank2_pieces_match_spans():
    basis = [[ComplexBall.one(), ComplexBall.one()],
             [ComplexBall.zero(), ComplexBall.from_rationals(0, 1)]]
    h = HodgeStructure(1, [0, 1], basis)
    dec = hodge_decompose(h)
    # H^{1,0} = span(1, i): proportional to the F^1 column
    (col_10,) = dec.pieces[1].columns
    ratio = col_10[1] / col_10[0]
    assert abs(ratio.re.mid) < 1e-25 and abs(ratio.im.mid - 1) < 1e-25
    (col_01,) = dec.pieces[0].columns
    ratio = col_01[1] / col_01[0]
    assert abs(ratio.re.mid) < 1e-25 and abs(ratio.im.mid + 1) < 1e-25


def test_decompose_direct_sum_blocks(rng):
    h1, d1 = random_pure_hodge(rng, weight=2)
    h2, d2 = random_pure_hodge(rng, weight=2)
    h = direct_sum(h1, h2)
    rep = purity_check(h)
    assert rep.ok
    for r in set(d1) | set(d2):
        assert rep.dims.get(r, 0) == d1.get(r, 0) + d2.get(r, 0)


# ---------------------------------------------------------------------------
# the metric: hand-computed oracles
# ---------------------------------------------------------------------------

def test_metric_q_minus_1_is_2pi():
    # Q(-1): w = 2, e_dR = 2*pi*i * e_B, single gr^1
    h = rank1(2, 1, tpi(1))
    m = line_metric(h, 1)
    mp.prec = 250
    assert approx(m, 2 * mp.pi)
    assert m.rad < mpf("1e-30")


def test_metric_q_plus_1_is_2pi():
    # Q(1): w = -2, e_dR = (2*pi*i)^{-1} e_B, single gr^{-1}, exponent -1
    h = rank1(-2, -1, tpi(-1))
    m = line_metric(h, 1)
    mp.prec = 250
    assert approx(m, 2 * mp.pi)


def test_metric_weight0_trivial_is_exactly_one():
    h = rank1(0, 0, ComplexBall.one())
    m = line_metric(h, 1)
    assert m.mid == 1 and m.rad == 0


def test_metric_elliptic_lattice_formula():
    # H_1 of C/(Z w1 + Z w2): metric of the adapted reference generator
    # is sqrt(2 |Im(conj(w1) w2)|); here w1 = 1, w2 = i (square lattice).
    w1 = ComplexBall.one()
    w2 = ComplexBall.from_rationals(0, 1)
    # columns: level -1 reference (1/w1, 0); level 0 = (w2, -w1)
    basis = [[ComplexBall.one() / w1, w2],
             [ComplexBall.zero(), -w1]]
    h = HodgeStructure(-1, [-1, 0], basis)
    m = line_metric(h, 1)
    assert approx(m, mp.sqrt(2))


def test_metric_zero_target_raises():
    h = rank1(0, 0, ComplexBall.one())
    with pytest.raises(ZeroVector):
        line_metric(h, 0)


# ---------------------------------------------------------------------------
# metric properties (the acceptance suite reruns these at scale)
# ---------------------------------------------------------------------------

def test_metric_basis_independence(rng):
    for _ in range(12):
        h, _ = random_pure_hodge(rng)
        base = line_metric(h)
        twirl = random.Random(rng.randint(0, 10 ** 9))
        again = line_metric(h, decomposition=hodge_decompose(h, rng=twirl))
        assert base.overlaps(again), (base, again)


def test_metric_homogeneity(rng):
    for _ in range(12):
        h, _ = random_pure_hodge(rng)
        c = Fraction(rng.randint(1, 9), rng.randint(1, 9))
        scaled = line_metric(h, c)
        base = line_metric(h)
        expected = RealBall.from_fraction(c) * base
        assert scaled.overlaps(expected)


def test_metric_direct_sum_multiplicative(rng):
    for _ in range(8):
        w = rng.choice([-2, -1, 0, 1, 2])
        h1, _ = random_pure_hodge(rng, weight=w, max_rank=2)
        h2, _ = random_pure_hodge(rng, weight=w, max_rank=2)
        m1, m2 = line_metric(h1), line_metric(h2)
        msum = line_metric(direct_sum(h1, h2))
        prod = m1 * m2
        assert msum.overlaps(prod), (msum, prod)


def test_metric_positive(rng):
    for _ in range(10):
        h, _ = random_pure_hodge(rng)
        assert line_metric(h).definitely_positive()


def test_conjugation_involution(rng):
    h, _ = random_pure_hodge(rng)
    twice = [[x.conj().conj() for x in row] for row in h.basis]
    for i in range(h.n):
        for j in range(h.n):
            assert twice[i][j].re.mid == h.basis[i][j].re.mid
            assert twice[i][j].im.mid == h.basis[i][j].im.mid


def test_precision_monotone_metric():
    h = rank1(2, 1, None) if False else None
    with working_precision(96):
        lo = line_metric(rank1(2, 1, tpi(1)), 1)
    with working_precision(192):
        hi = line_metric(rank1(2, 1, tpi(1)), 1)
    assert hi.rad < lo.rad
    assert abs(hi.mid - lo.mid) <= lo.rad + hi.rad


def test_intersection_ambiguity_band_raises():
    # two lines at an angle right around 2^(-prec/2) cannot be resolved
    from motive_height.balls import PrecisionExhausted
    from motive_height.hodge import _intersect_subspaces
    eps = RealBall(mpf(2) ** -64, 0)
    u = [(ComplexBall.one(), ComplexBall.zero())]
    w = [(ComplexBall.one(), ComplexBall(eps, RealBall.zero()))]
    with pytest.raises(PrecisionExhausted):
        _intersect_subspaces(u, w, 2, 0)


def test_from_filtration_adapts_spans():
    # give F^1 and F^0 as spans; F^0 needs completion
    i = ComplexBall.from_rationals(0, 1)
    f1 = [[ComplexBall.one()], [i]]
    f0 = [[ComplexBall.one(), ComplexBall.zero()],
          [ComplexBall.zero(), ComplexBall.one()]]
    h = HodgeStructure.from_filtration(1, {1: f1, 0: f0}, n=2)
    assert purity_check(h).ok
    assert h.dims() == {1: 1, 0: 1}


def test_from_filtration_rejects_non_nested():
    i = ComplexBall.from_rationals(0, 1)
    f2 = [[ComplexBall.one(), ComplexBall.zero()],
          [ComplexBall.zero(), ComplexBall.one()]]  # F^2 = C^2
    f1 = [[ComplexBall.one()], [i]]  # smaller than F^2: not nested
    with pytest.raises(ValueError):
        HodgeStructure.from_filtration(0, {2: f2, 1: f1, 0: f1}, n=2)
