from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import param_scalars, small_rationals
from fusionlab.scalars import Z, ParamScalar, zpow
from fusionlab.series import (IllDefinedProduct, RationalFn, SupportCone, check_identity, delta,
                              fs_coeff, fs_mul, fs_residue, kernel, laurent, mk_delta, one_series,
                              zero_series)


def test_delta_coefficients():
    assert fs_coeff(delta("x"), (5,)) == 1
    d = mk_delta("x", "y", ("x", "y"))          # x^-1 delta(y/x)
    assert fs_coeff(d, {"x": -2, "y": 1}) == 1
    assert fs_coeff(d, {"x": 0, "y": 1}) == 0
    assert fs_coeff(zero_series(("t",)), (3,)) == 0


def test_binomial_delta_coefficients():
    d = mk_delta("x0", "x1 - x2", ("x0", "x1", "x2"))
    assert fs_coeff(d, (-2, 0, 1)) == -1
    assert fs_coeff(d, (-1, 0, 0)) == 1


def test_ill_defined_product():
    d = kernel("1", "y", "x", ("x", "y"))
    with pytest.raises(IllDefinedProduct):
        fs_coeff(fs_mul(d, d), (0, 0))


def test_delta_times_polynomial():
    # x^-1 delta(y/x) = sum_n y^n x^{-n-1}; multiplying by y^2 shifts the y exponent
    s = fs_mul(mk_delta("x", "y", ("x", "y")), laurent(("x", "y"), {(0, 2): 1}))
    assert fs_coeff(s, (-3, 4)) == 1
    assert fs_coeff(s, (-1, 2)) == 1
    assert fs_coeff(s, (-3, 2)) == 0


def test_residues():
    r = fs_residue(mk_delta("x", "y", ("x", "y")), "x")
    assert check_identity(r, one_series(("y",)), 6).passed
    poly = laurent(("x", "y"), {(0, 1): 3, (2, -1): 1})
    assert check_identity(fs_residue(poly, "x"), zero_series(("y",)), 6).passed
    k = kernel("x0^-1", "z - x1", "-x0", ("x0", "x1"))
    assert check_identity(fs_residue(k, "x1"), zero_series(("x0",)), 6).passed


def test_two_term_relation():
    vars = ("x0", "x1", "x2")
    lhs = mk_delta("x2", "x1 - x0", vars)
    rhs = mk_delta("x1", "x2 + x0", vars)
    assert check_identity(lhs, rhs, 5).passed


def test_mismatch_reported():
    d = delta("x")
    rep = check_identity(d, d + one_series(("x",)), 3)
    assert not rep.passed
    assert [m[0] for m in rep.mismatches] == [{"x": 0}]


def test_iota_expansions():
    f = RationalFn({0: 1}, [(Z, 1, 1)])          # 1/(z + t)
    assert f.iota_coeff(2, "plus") == zpow(-3)
    assert f.iota_coeff(-3, "minus") == zpow(2)
    assert RationalFn.t_power(5).iota_coeff(5) == 1


def test_translation_and_inversion_examples():
    f = RationalFn({0: 1}, [(Z, 1, 1)])
    assert f.translate(-Z) == RationalFn.t_power(-1)
    assert RationalFn.t_power(1).translate(-Z) == RationalFn({1: 1, 0: -Z})
    g = RationalFn({0: 1}, [(Z, -1, 1)])         # 1/(z - t)
    assert g.invert_t() == RationalFn({1: -Z.inverse()}, [(Z.inverse(), -1, 1)])
    assert RationalFn.t_power(4).invert_t() == RationalFn.t_power(-4)


def test_cone_membership():
    c = SupportCone((0, -1), [(1, 0), (0, -1)])
    assert c.contains((3, -5))
    assert not c.contains((-1, 0))


_shifts = st.sampled_from([Z, -Z, Z.inverse(), ParamScalar(2), 2 * Z])


@st.composite
def rational_fns(draw):
    num = draw(st.dictionaries(st.integers(-3, 3), small_rationals, min_size=1, max_size=3))
    facs = draw(st.lists(st.tuples(_shifts, st.sampled_from([1, -1]), st.integers(1, 2)), max_size=2))
    return RationalFn(num, facs)


nonzero_fns = rational_fns().filter(lambda f: bool(f.num))


@given(rational_fns(), param_scalars(max_terms=1).filter(bool))
def test_translation_round_trip(f, c):
    assert f.translate(c).translate(-c) == f


@given(rational_fns())
def test_invert_t_is_an_involution(f):
    assert f.invert_t().invert_t() == f


@given(nonzero_fns, nonzero_fns, st.sampled_from(["plus", "minus"]))
def test_iota_is_multiplicative(f, g, direction):
    # iota expansions land in a field of one-sided series, so expansion commutes with products
    prod = f * g
    if direction == "plus":
        lo_f, lo_g = f.iota_low(), g.iota_low()
        for n in range(lo_f + lo_g, lo_f + lo_g + 4):
            conv = sum((f.iota_coeff(k, "plus") * g.iota_coeff(n - k, "plus")
                        for k in range(lo_f, n - lo_g + 1)), ParamScalar())
            assert prod.iota_coeff(n, "plus") == conv
    else:
        hi_f, hi_g = f.iota_high(), g.iota_high()
        for n in range(hi_f + hi_g - 3, hi_f + hi_g + 1):
            conv = sum((f.iota_coeff(k, "minus") * g.iota_coeff(n - k, "minus")
                        for k in range(n - hi_g, hi_f + 1)), ParamScalar())
            assert prod.iota_coeff(n, "minus") == conv


@given(st.dictionaries(st.integers(-3, 3), small_rationals, max_size=4))
def test_substitution_principle(poly):
    # x^-1 delta(y/x) f(x) = x^-1 delta(y/x) f(y)
    vars = ("x", "y")
    d = mk_delta("x", "y", vars)
    fx = laurent(vars, {(e, 0): c for e, c in poly.items()})
    fy = laurent(vars, {(0, e): c for e, c in poly.items()})
    assert check_identity(fs_mul(d, fx), fs_mul(d, fy), 5).passed


@given(st.dictionaries(st.tuples(st.integers(-3, 3), st.integers(-3, 3)), small_rationals, max_size=4))
def test_one_is_a_unit(terms):
    s = laurent(("x", "y"), terms)
    assert check_identity(fs_mul(one_series(("x", "y")), s), s, 4).passed
