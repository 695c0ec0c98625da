import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from fusionlab.instances import alpha, comm_alg_catalogue, heisenberg
from fusionlab.scalars import Z, gen_binom
from fusionlab.series import RationalFn
from fusionlab.vertex import (ContragredientModule, LoopElement, TruncationOverflow, Vec,
                              WrongLocalization, conjugate_vo, dump_module, load_definition,
                              o_involution, opposite_mode, pairing, tau_W, translate_pm)

V = heisenberg(4)
A2, A2_MODS = comm_alg_catalogue()["A2"]
B = lambda k: Vec.basis(k)


def test_conjugation_examples():
    assert conjugate_vo(V, ()) == {0: B(())}
    assert conjugate_vo(V, (1,)) == {-2: -B((1,))}
    assert conjugate_vo(V, (2,)) == {-4: B((2,)), -3: 2 * B((1,))}


def test_opposite_field_examples():
    W = A2_MODS["regular"]
    # comm-alg: Y^o(v, x)w = vw, only the x^0 term (mode -1)
    assert opposite_mode(W, "s", -1, "1") == B("s")
    assert all(not opposite_mode(W, "s", n, "1") for n in (-3, -2, 0, 1))
    for w in V.basis_upto(3):
        assert opposite_mode(V, (), -1, w) == B(w)


@given(st.integers(-4, 4), st.sampled_from(heisenberg(3).basis_upto(3)))
def test_opposite_of_alpha(n, w):
    # components of Y^o(alpha(-1)1, x) are -alpha(-n)
    assert opposite_mode(V, (1,), n, w) == -alpha(-n, B(w))


def test_double_contragredient_of_regular():
    W = A2_MODS["regular"]
    WW = ContragredientModule(ContragredientModule(W))
    for u in A2.names:
        for w in W.names:
            for n in (-2, -1, 0):
                assert WW.mode(u, n, w) == W.mode(u, n, w)


def test_vacuum_acts_trivially_on_contragredient():
    Wd = ContragredientModule(V)
    for w in V.basis_upto(3):
        assert Wd.mode((), -1, w) == B(w)
        assert not Wd.mode((), 0, w)


@given(st.sampled_from(V.basis_upto(2)), st.sampled_from(V.basis_upto(2)),
       st.sampled_from(V.basis_upto(2)), st.integers(-2, 2), st.integers(-2, 2))
def test_contragredient_commutator_formula(u, v, w, m, n):
    # the contragredient is a module: [u_m, v_n] = sum_j C(m, j) (u_j v)_{m+n-j}
    Wd = ContragredientModule(V)
    lhs = Wd.act(u, m, Wd.act(v, n, w)) - Wd.act(v, n, Wd.act(u, m, w))
    rhs = Vec()
    for j in range(0, V.max_mode(u, v) + 1):
        c = gen_binom(m, j)
        if c:
            rhs = rhs + Wd.act(V.mode(u, j, v), m + n - j, w) * c
    assert lhs == rhs


@given(st.sampled_from(V.basis_upto(3)), st.sampled_from(V.basis_upto(3)))
def test_pairing_adjoint_of_L(a, b):
    # <L'(j) a', b> = <a', L(-j) b>
    Wd = ContragredientModule(V)
    for j in (-1, 0, 1):
        assert pairing(Wd.L(j, a), B(b)) == pairing(B(a), V.L(-j, b))


def test_loop_involution_examples():
    for n in (-3, 0, 2):
        got = o_involution(V, LoopElement.mono((), n))
        assert got.same_as(LoopElement([(B(()), RationalFn.t_power(-n - 2))], "minus"))
        got = o_involution(V, LoopElement.mono((1,), n))
        assert got.same_as(LoopElement([(-B((1,)), RationalFn.t_power(-n))], "minus"))


_vs = st.sampled_from([(), (1,), (2,), (1, 1), (3,), (2, 1)])
_fns = st.sampled_from([RationalFn.t_power(2), RationalFn({-1: 3, 1: 1}),
                        RationalFn({0: 1}, [(Z, 1, 1)]), RationalFn({1: 1}, [(Z.inverse(), -1, 2)])])


@given(st.lists(st.tuples(_vs, _fns, st.integers(-3, 3)), min_size=1, max_size=3))
def test_loop_involution_squares_to_identity(terms):
    xi = LoopElement([(B(v), f * c) for v, f, c in terms])
    assert o_involution(V, o_involution(V, xi)).same_as(xi)


def test_tau_on_modules():
    w = (1, 1)
    assert tau_W(V, LoopElement.mono((2,), 0), w) == V.mode((2,), 0, w)
    W = A2_MODS["regular"]
    f = RationalFn({0: 1}, [(Z, 1, 1)])           # coefficient of t^-1 in iota_+ is 0
    g = RationalFn({-1: 5, 2: 1})
    assert tau_W(W, LoopElement.of("s", g), "1") == 5 * B("s")
    assert not tau_W(W, LoopElement.of("s", f), "1")
    assert tau_W(V, LoopElement.of((), g), w) == 5 * B(w)


def test_translation_examples():
    xi = LoopElement.of((1,), RationalFn({0: 1}, [(Z, 1, 1)]))
    assert translate_pm(V, xi, "plus").same_as(LoopElement.mono((1,), -1))
    with pytest.raises(WrongLocalization):
        translate_pm(V, LoopElement.of((1,), RationalFn({0: 1}, [(Z.inverse(), -1, 1)])), "plus")


def test_definition_file_round_trip(tmp_path):
    spec = dump_module(heisenberg(3), 3, is_algebra=True)
    path = tmp_path / "f0.json"
    path.write_text(json.dumps(spec))
    T = load_definition(str(path))
    for u in T.basis_upto(2):
        for w in T.basis_upto(2):
            for n in range(-2, 3):
                if V.weight(u) + V.weight(w) - n - 1 <= 3:
                    assert T.mode(u, n, w) == V.mode(u, n, w)
    for w in T.basis_upto(3):
        assert T.L(0, w) == V.L(0, w)
    with pytest.raises(TruncationOverflow):
        T.mode((1,), -4, (1,))
