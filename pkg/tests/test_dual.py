from fractions import Fraction

from hypothesis import given, strategies as st

from fusionlab.dual import (CanonicalFunctional, GenericFunctional, PairingFunctional,
                            TableFunctional, ZeroFunctional, canonical_lambda, check_compat,
                            closure_Wlambda, l_prime, probe_pairs, project_beta, random_functional,
                            y_coeff)
from fusionlab.instances import comm_alg_catalogue, heisenberg
from fusionlab.scalars import zpow
from fusionlab.tensor import algebra_tensor_oracle, compat_subspace
from fusionlab.vertex import ContragredientModule, Vec

V = heisenberg(4)
CAT = comm_alg_catalogue()
A2, A2M = CAT["A2"]
REG = A2M["regular"]
G, GM = CAT["QZ2"]
B = lambda k: Vec.basis(k)


def _table(lam, W1, W2):
    return {(a, b): lam(a, b) for a in W1.names for b in W2.names}


@given(st.integers(0, 50))
def test_commalg_actions_collapse(seed):
    lam = random_functional(REG, REG, seed)
    for v in A2.names:
        for p in (-2, -1, 0, 1, 2):
            P = y_coeff("P", B(v), p, lam)
            Q = y_coeff("Q", B(v), p, lam)
            for a in REG.names:
                for b in REG.names:
                    if p:
                        assert P(a, b) == 0 and Q(a, b) == 0
                    else:
                        assert P(a, b) == lam.on(a, REG.act_basis(v, b))
                        assert Q(a, b) == lam.on(REG.act_basis(v, a), b)
    for j in (-1, 0, 1):
        assert not any(_table(l_prime("P", j, lam), REG, REG).values())


def test_vacuum_action_is_identity():
    lam = GenericFunctional(V, V)
    for fl in "PQ":
        g = y_coeff(fl, B(()), 0, lam)
        for a, b in probe_pairs(V, V, 3):
            assert g(a, b) == lam(a, b)


def test_canonical_values():
    lam = canonical_lambda(V, ())
    assert lam((), ()) == 1
    assert lam((1,), (1,)) == zpow(-2)
    # <1', Y(alpha(-2)1, z) alpha(-1)1> is the z-derivative of z^-2
    assert lam((2,), (1,)) == zpow(-3, -2)


def test_canonical_lambda_intertwines():
    # Y'_P(v, x) applied to the canonical functional of w' is the canonical functional of Y'(v, x)w'
    Wd = ContragredientModule(V)
    lam = canonical_lambda(V, (1,))
    for p in range(-3, 3):
        g = y_coeff("P", B((1,)), p, lam)
        wd = Wd.mode((1,), -p - 1, (1,))
        ref = CanonicalFunctional(V, wd) if wd else ZeroFunctional(V, V)
        for a, b in probe_pairs(V, V, 3):
            assert g(a, b) == ref(a, b)


def test_l0_on_alpha():
    # L'_P(0) pulls back to L(0) (x) 1 + 1 (x) L(0) + z L(-1) (x) 1
    lam = GenericFunctional(V, V)
    L0 = l_prime("P", 0, lam)
    assert L0((1,), ()) == lam((1,), ()) + lam((2,), ()) * zpow(1)


def test_beta_projection():
    lam = random_functional(GM["regular"], GM["regular"], 3)
    parts = [project_beta(lam, b) for b in (0, 1)]
    for a in G.names:
        for b in G.names:
            assert parts[0](a, b) + parts[1](a, b) == lam(a, b)
    homo = TableFunctional(GM["regular"], GM["regular"], {("1", "1"): 1})
    assert not any(_table(project_beta(homo, 1), GM["regular"], GM["regular"]).values())


def test_balanced_projections_stay_compatible():
    W = GM["regular"]
    gens = [B(v) for v in G.names]
    for lam in compat_subspace(W, W).functionals:
        for beta in (0, 1):
            assert check_compat("P", project_beta(lam, beta), gens, 2).passed


def test_compat_verdicts_on_a2():
    gens = [B(v) for v in A2.names]
    bad = TableFunctional(REG, REG, {("s", "1"): 1})
    for fl in "PQ":
        rep = check_compat(fl, bad, gens, 2)
        assert not rep.passed
        w = rep.witnesses[0]
        assert (w["v"], w["w1"], w["w2"]) == (repr(B("s")), "'1'", "'1'")
    good = TableFunctional(REG, REG, {("1", "s"): 1, ("s", "1"): 1})
    assert check_compat("P", good, gens, 2).passed and check_compat("Q", good, gens, 2).passed


@given(st.lists(st.integers(-3, 3), min_size=2, max_size=2))
def test_balanced_combinations_are_compatible(coefs):
    funcs = compat_subspace(REG, REG).functionals
    vals = {}
    for c, f in zip(coefs, funcs):
        for k, v in f.values.items():
            vals[k] = vals.get(k, 0) + c * v
    lam = TableFunctional(REG, REG, vals)
    gens = [B(v) for v in A2.names]
    assert check_compat("P", lam, gens, 2).passed
    assert check_compat("Q", lam, gens, 2).passed


def test_canonical_is_compatible():
    gens = [B(v) for v in V.basis_upto(2)]
    rep = check_compat("P", canonical_lambda(V, ()), gens, 3, pairs=probe_pairs(V, V, 2))
    assert rep.passed, rep.witnesses


def test_pairing_is_q_compatible():
    gens = [B(v) for v in V.basis_upto(1)]
    lam = PairingFunctional(V)
    rep = check_compat("Q", lam, gens, 2, pairs=probe_pairs(lam.W1, lam.W2, 2))
    assert rep.passed, rep.witnesses


def test_closure_bounds():
    gens = [B(v) for v in A2.names]
    pairs = probe_pairs(REG, REG, 0)
    dim_oracle = algebra_tensor_oracle(REG, REG).dimension
    for lam in compat_subspace(REG, REG).functionals:
        basis, dims = closure_Wlambda(lam, "P", gens, 0, pairs, complete=True)
        assert 0 < len(basis) <= dim_oracle
    assert closure_Wlambda(ZeroFunctional(REG, REG), "P", gens, 0, pairs) == ([], {})


@given(st.integers(0, 30), st.integers(0, 30), st.integers(-3, 3))
def test_actions_are_linear(s1, s2, small):
    l1 = random_functional(V, V, s1, max_total=2)
    l2 = random_functional(V, V, s2, max_total=2)
    comb = l1 * small + l2
    for fl in "PQ":
        for p in (-2, 0, 1):
            g = y_coeff(fl, B((1,)), p, comb)
            g1, g2 = y_coeff(fl, B((1,)), p, l1), y_coeff(fl, B((1,)), p, l2)
            for a, b in probe_pairs(V, V, 2):
                assert g(a, b) == g1(a, b) * small + g2(a, b)
