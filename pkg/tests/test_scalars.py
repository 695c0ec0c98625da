from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import param_scalars, small_rationals
from fusionlab.scalars import (Z, NotInvertible, ParamScalar, ZeroParameter, gen_binom, ps_arith,
                               ps_eval, zpow)


def test_ring_examples():
    assert ps_arith(Z + 1, Z - 1, "mul") == Z ** 2 - 1
    assert ps_arith(zpow(-2), 0, "add") == zpow(-2)
    assert ps_arith(Fraction(3, 2) * Z, Fraction(1, 2) * Z, "sub") == Z


def test_eval_examples():
    assert ps_eval(Z.inverse() + Z, 2) == Fraction(5, 2)
    assert ps_eval(ParamScalar(), 7) == 0
    assert ps_eval(Z ** 3, -1) == -1
    with pytest.raises(ZeroParameter):
        ps_eval(Z, 0)


def test_gen_binom_examples():
    assert gen_binom(-1, 2) == 1
    assert gen_binom(3, 0) == 1
    assert gen_binom(-2, 3) == -4
    assert gen_binom(5, -1) == 0


def test_only_monomials_invert():
    assert zpow(3, 2).inverse() == zpow(-3, Fraction(1, 2))
    with pytest.raises(NotInvertible):
        (Z + 1).inverse()


@given(param_scalars(), param_scalars(), param_scalars())
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a - a == 0


@given(param_scalars(), param_scalars(), small_rationals.filter(bool))
def test_eval_is_a_homomorphism(a, b, z0):
    assert ps_eval(a * b, z0) == ps_eval(a, z0) * ps_eval(b, z0)
    assert ps_eval(a + b, z0) == ps_eval(a, z0) + ps_eval(b, z0)


@given(st.integers(-30, 30), st.integers(1, 12))
def test_pascal_rule(n, k):
    assert gen_binom(n, k) == gen_binom(n - 1, k) + gen_binom(n - 1, k - 1)


@given(st.integers(0, 20))
def test_minus_one_upper(k):
    assert gen_binom(-1, k) == (-1) ** k
