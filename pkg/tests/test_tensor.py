import json

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from fusionlab.instances import UnsupportedInstance, comm_alg_catalogue, heisenberg
from fusionlab.tensor import (NoFactorization, algebra_tensor_oracle, check_isomorphic,
                              compat_subspace, direct_sum, tensor_product, universal_check)
from fusionlab.vertex import Vec, load_definition

CAT = comm_alg_catalogue()

CASES = [
    ("A2", "regular", "regular", 2),
    ("A2", "regular", "quotient", 1),
    ("A2", "quotient", "quotient", 1),
    ("QZ2", "regular", "regular", 2),
    ("QZ2", "regular", "shifted", 2),
    ("QxQ", "e1", "e2", 0),
    ("QxQ", "regular", "e1", 1),
    ("Q", "regular", "regular", 1),
]


@pytest.mark.parametrize("alg,m1,m2,dim", CASES)
@pytest.mark.parametrize("flavor", ["P", "Q"])
def test_dimensions_and_isomorphism(alg, m1, m2, dim, flavor):
    mods = CAT[alg][1]
    sub = compat_subspace(mods[m1], mods[m2], flavor)
    assert len(sub) == dim
    assert sub.flags["agrees_with_balance"]
    res = tensor_product(mods[m1], mods[m2], flavor)
    oracle = algebra_tensor_oracle(mods[m1], mods[m2])
    assert oracle.dimension == dim
    ok, T, why = check_isomorphic(res, oracle)
    assert ok, why


def test_a2_regular_product_is_a2():
    A2, mods = CAT["A2"]
    res = tensor_product(mods["regular"], mods["regular"])
    # s acts nilpotently and nonzero, as on A2 itself
    S = res.matrices["s"]
    assert S != sympy.zeros(2, 2) and S * S == sympy.zeros(2, 2)


def test_group_grading_is_kept():
    G, mods = CAT["QZ2"]
    res = tensor_product(mods["regular"], mods["shifted"])
    degrees = sorted(res.module.degree(b) for b in res.module.names)
    assert degrees == [0, 1]
    for a in mods["regular"].names:
        for b in mods["shifted"].names:
            img = res.box(a, b)
            d = G.add_degree(G.degree(a), mods["shifted"].degree(b))
            assert all(res.module.degree(k) == d for k in img.keys())


def test_universal_property():
    A2, mods = CAT["A2"]
    R = mods["regular"]
    res = tensor_product(R, R)
    own = {(a, b): res.box(a, b) for a in R.names for b in R.names}
    assert universal_check(res, res.module, own).eta == sympy.eye(2)
    # multiplication is an intertwining map into the regular module
    mult = {(a, b): A2.product(a, b) for a in R.names for b in R.names}
    eta = universal_check(res, R, mult).eta
    assert eta.det() != 0
    # an extra summand receives nothing
    S = direct_sum(R, mods["quotient"])
    tagged = {k: Vec({("0", t): c for t, c in v.items()}) for k, v in mult.items()}
    eta2 = universal_check(res, S, tagged).eta
    assert eta2[2, :] == sympy.zeros(1, 2)
    with pytest.raises(NoFactorization):
        universal_check(res, R, {("s", "1"): Vec.basis("1")})


def test_heisenberg_is_refused():
    V = heisenberg(2)
    with pytest.raises(UnsupportedInstance):
        tensor_product(V, V)


def test_export(tmp_path):
    res = tensor_product(CAT["A2"][1]["regular"], CAT["A2"][1]["quotient"])
    doc = res.to_json()
    path = tmp_path / "prod.json"
    path.write_text(json.dumps(doc["module"]))
    M = load_definition(str(path))
    assert len(M.basis_upto(0)) == 1


_mods = st.sampled_from([("A2", "regular"), ("A2", "quotient"), ("QxQ", "regular"), ("QxQ", "e1"),
                         ("QxQ", "e2"), ("QZ2", "regular"), ("QZ2", "shifted")])


@st.composite
def module_pairs(draw):
    alg = draw(st.sampled_from(["A2", "QxQ", "QZ2"]))
    names = list(CAT[alg][1])
    picks = draw(st.lists(st.sampled_from(names), min_size=1, max_size=2))
    other = draw(st.sampled_from(names))
    return alg, picks, other


@settings(max_examples=15)
@given(module_pairs(), st.sampled_from(["P", "Q"]))
def test_tensor_is_additive(data, flavor):
    alg, picks, other = data
    mods = CAT[alg][1]
    M = mods[picks[0]]
    for p in picks[1:]:
        M = direct_sum(M, mods[p])
    N = mods[other]
    dim = tensor_product(M, N, flavor).dimension
    assert dim == algebra_tensor_oracle(M, N).dimension
    assert dim == sum(tensor_product(mods[p], N, flavor).dimension for p in picks)


@given(_mods, st.sampled_from(["P", "Q"]))
def test_unit_module(mod, flavor):
    alg, name = mod
    A, mods = CAT[alg]
    W = mods[name]
    res = tensor_product(mods["regular"], W, flavor)
    assert res.dimension == len(W.names)
