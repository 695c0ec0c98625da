from itertools import product

import pytest
from hypothesis import given, strategies as st

from fusionlab.instances import (CommAlgebra, CommAlgModule, NoUnit, NotAModule, NotAssociative,
                                 NotCommutative, UnsupportedInstance, alpha, comm_alg_catalogue,
                                 heisenberg, load_instance)
from fusionlab.scalars import gen_binom
from fusionlab.vertex import Vec

CAT = comm_alg_catalogue()
V = heisenberg(5)
B = lambda k: Vec.basis(k)


def test_algebra_examples():
    Q, mods = CAT["Q"]
    assert Q.mode("1", -1, "1") == B("1")
    A2, _ = CAT["A2"]
    assert not A2.mode("s", -1, "s")
    G, _ = CAT["QZ2"]
    for a, b in product(G.names, repeat=2):
        for k in G.product(a, b).keys():
            assert G.degree(k) == G.add_degree(G.degree(a), G.degree(b))


def test_module_examples():
    A2, mods = CAT["A2"]
    assert len(mods["regular"].names) == 2
    assert len(mods["quotient"].names) == 1 and not mods["quotient"].act_basis("s", "w")
    P, pm = CAT["QxQ"]
    # e2 = 1 - e1 so e1 annihilates the e2-module
    assert not pm["e2"].act_basis("e1", "w")
    assert pm["e1"].act_basis("e1", "w") == B("w")


def test_axiom_failures():
    with pytest.raises(NoUnit):
        CommAlgebra(["a"], {("a", "a"): {"a": 2}}, "a")
    with pytest.raises(NotCommutative):
        CommAlgebra(["1", "a", "b"], {("1", "1"): {"1": 1}, ("1", "a"): {"a": 1}, ("a", "1"): {"a": 1},
                                      ("1", "b"): {"b": 1}, ("b", "1"): {"b": 1}, ("a", "b"): {"a": 1}},
                    "1")
    with pytest.raises(NotAssociative):
        _bad_assoc()
    A2, _ = CAT["A2"]
    with pytest.raises(NotAModule):
        CommAlgModule(A2, ["w"], {("1", "w"): {"w": 1}, ("s", "w"): {"w": 1}})


def _bad_assoc():
    # (ab)c != a(bc) with a^2 = b, ab = 0
    mult = {("1", x): {x: 1} for x in ("1", "a", "b")}
    mult.update({(x, "1"): {x: 1} for x in ("a", "b")})
    mult[("a", "a")] = {"b": 1}
    mult[("a", "b")] = mult[("b", "a")] = {}
    mult[("b", "b")] = {"b": 1}
    CommAlgebra(["1", "a", "b"], mult, "1")


def test_heisenberg_examples():
    one = B(())
    assert alpha(1, alpha(-1, one)) - alpha(-1, alpha(1, one)) == one
    assert V.L(0, (1,)) == B((1,))
    assert V.L(1, (2,)) == 2 * B((1,))
    assert V.mode((1,), 1, (1,)) == one


def test_instance_names():
    assert load_instance("a2")[0] is CAT["A2"][0]
    assert load_instance("QZ2:shifted")[1].name == "QZ2.shifted"
    with pytest.raises(UnsupportedInstance):
        load_instance("sl2")


_parts = st.sampled_from(V.basis_upto(4))


@given(st.integers(-4, 4), st.integers(-4, 4), _parts)
def test_heisenberg_bracket(m, n, w):
    lhs = alpha(m, alpha(n, B(w))) - alpha(n, alpha(m, B(w)))
    assert lhs == (m * B(w) if m + n == 0 else Vec())


@given(st.sampled_from(V.basis_upto(2)), st.sampled_from(V.basis_upto(2)), _parts,
       st.integers(-3, 2), st.integers(-3, 2))
def test_borcherds_commutator(u, v, w, m, n):
    lhs = V.act(u, m, V.mode(v, n, w)) - V.act(v, n, V.mode(u, m, w))
    rhs = Vec()
    for j in range(0, V.max_mode(u, v) + 1):
        c = gen_binom(m, j)
        if c:
            rhs = rhs + V.act(V.mode(u, j, v), m + n - j, w) * c
    assert lhs == rhs


@given(st.sampled_from(V.basis_upto(3)), _parts, st.integers(-3, 3))
def test_derivative_property(v, w, n):
    # (L(-1)v)_n = -n v_{n-1}
    assert V.act(V.L(-1, v), n, w) == V.mode(v, n - 1, w) * (-n)


@given(_parts, st.sampled_from([(-1, 0), (1, 0), (1, -1)]))
def test_virasoro_sl2(w, jk):
    j, k = jk
    lhs = V.Lvec(j, V.L(k, w)) - V.Lvec(k, V.L(j, w))
    assert lhs == V.L(j + k, w) * (j - k)
