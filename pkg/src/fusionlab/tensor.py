"""Tensor products of modules for commutative associative algebras.

The P(z)- or Q(z)-tensor product is the contragredient of the space of
compatible functionals.  For a commutative associative algebra (everything in
weight 0) it must agree with the ordinary tensor product over the algebra, which
``algebra_tensor_oracle`` computes independently as a quotient.
"""
from fractions import Fraction
from itertools import product

import sympy

from .dual import (GenericFunctional, TableFunctional, cpb_sides, nullspace, rank_of,
                   y_coeff)
from .instances import CommAlgebra, CommAlgModule, UnsupportedInstance
from .scalars import ParamScalar, as_rational
from .vertex import Vec


class NoFactorization(ValueError):
    pass


class NonUniqueFactorization(ValueError):
    pass


def _require_comm_alg(W1, W2):
    A = W1.algebra
    if not isinstance(A, CommAlgebra) or W2.algebra is not A:
        raise UnsupportedInstance("tensor products are only computed for modules of one "
                                  "commutative associative algebra")
    for M in (W1, W2):
        if not isinstance(M, CommAlgModule):
            raise UnsupportedInstance(f"{M.name} is not a module of a commutative algebra")
    return A


def _q(c):
    """Exact rational from a rational, int or constant ParamScalar."""
    if isinstance(c, ParamScalar):
        if not c.is_constant():
            raise ValueError(f"unexpected z-dependence {c!r}")
        return as_rational(c.constant())
    return Fraction(c)


def _S(c):
    c = _q(c)
    return sympy.Rational(c.numerator, c.denominator)


def _pair_degree(W1, W2, a, b):
    return W1.add_degree(W1.degree(a), W2.degree(b))


# ---------------------------------------------------------------------------
# the compatible subspace

class SubspaceBasis:
    """Basis of the compatible functionals, homogeneous for the group grading."""

    def __init__(self, functionals, pairs, flavor, flags):
        self.functionals = functionals
        self.pairs = pairs
        self.flavor = flavor
        self.flags = flags

    def __len__(self):
        return len(self.functionals)

    def matrix(self):
        """Rows are functionals, columns are basis pairs."""
        return [[f(a, b) for a, b in self.pairs] for f in self.functionals]


def _cpb_rows(flavor, W1, W2, pairs, window):
    """Linear conditions on lambda from the delta-kernel compatibility identity.

    Evaluated on the symbolic functional, each coefficient is a linear form in
    the unknowns lambda(a (x) b).
    """
    lam = GenericFunctional(W1, W2)
    index = {p: i for i, p in enumerate(pairs)}
    rows = []
    for v in W1.algebra.names:
        vec = Vec.basis(v)
        for a, b in pairs:
            for e0 in range(-window, window + 1):
                for e1 in range(-window, window + 1):
                    lhs, rhs = cpb_sides(flavor, vec, lam, e0, e1, a, b, 0)
                    diff = lhs - rhs if rhs else lhs
                    if not diff:
                        continue
                    row = [0] * len(pairs)
                    for key, c in diff.items():
                        row[index[key]] = c
                    rows.append(row)
    return rows


def _balance_rows(W1, W2, pairs):
    """lambda((v.a) (x) b) - lambda(a (x) (v.b)) for every v, a, b."""
    index = {p: i for i, p in enumerate(pairs)}
    rows = []
    for v, a, b in product(W1.algebra.names, W1.names, W2.names):
        row = [0] * len(pairs)
        for k, c in W1.act_basis(v, a).items():
            row[index[(k, b)]] += c
        for k, c in W2.act_basis(v, b).items():
            row[index[(a, k)]] -= c
        if any(row):
            rows.append(row)
    return rows


def _restrict(rows, cols):
    out = []
    for r in rows:
        sub = [r[i] for i in cols]
        if any(sub):
            out.append(sub)
    return out


def compat_subspace(W1, W2, flavor="P", window=1):
    """The space of P(z)- (or Q(z)-) compatible functionals on W1 (x) W2.

    Part (a) of the condition is automatic in weight 0; part (b) is imposed as
    linear equations obtained from the symbolic functional.  The result is
    cross-checked against the plain balance equations.
    """
    _require_comm_alg(W1, W2)
    pairs = [(a, b) for a in W1.names for b in W2.names]
    rows = _cpb_rows(flavor, W1, W2, pairs, window)
    balance = _balance_rows(W1, W2, pairs)
    r_cpb, r_bal = rank_of(rows), rank_of(balance)
    r_both = rank_of(rows + balance)
    agrees = r_cpb == r_bal == r_both
    functionals = []
    degrees = sorted({_pair_degree(W1, W2, a, b) for a, b in pairs})
    for d in degrees:
        cols = [i for i, (a, b) in enumerate(pairs) if _pair_degree(W1, W2, a, b) == d]
        sub = _restrict(rows, cols)
        for vec in nullspace(sub, len(cols)):
            # the equations have z-monomial coefficients; rescale to a rational vector
            lead = next(c for c in vec if c)
            vec = [c / lead if c else 0 for c in vec]
            values = {pairs[i]: _q(c) for i, c in zip(cols, vec) if c}
            f = TableFunctional(W1, W2, values, label=f"compat{flavor}[{len(functionals)}]")
            f.pair_degree = d
            functionals.append(f)
    flags = {"cpb_rank": r_cpb, "balance_rank": r_bal, "agrees_with_balance": agrees,
             "window": window}
    return SubspaceBasis(functionals, pairs, flavor, flags)


# ---------------------------------------------------------------------------
# the tensor product module

class TensorProductResult:
    """W1 [x] W2 with its canonical map a (x) b -> a [x] b.

    ``box(a, b)`` is the Vec of coordinates lambda_i(a (x) b) in the basis dual
    to the compatible functionals.
    """

    def __init__(self, module, subspace, matrices, flavor):
        self.module = module
        self.subspace = subspace
        self.matrices = matrices
        self.flavor = flavor

    @property
    def dimension(self):
        return len(self.module.names)

    def box(self, a, b):
        return Vec({f"b{i}": f(a, b) for i, f in enumerate(self.subspace.functionals)})

    def to_json(self):
        from .vertex import dump_module
        return {"flavor": self.flavor, "dimension": self.dimension,
                "module": dump_module(self.module, 0),
                "canonical_map": [{"w1": a, "w2": b, "image": self.box(a, b).to_json()}
                                  for a, b in self.subspace.pairs]}


def _solve(A, B):
    """Exact X with A X = B; None if inconsistent, raises if not unique."""
    try:
        X, params = A.gauss_jordan_solve(B)
    except ValueError:
        return None
    if params.shape[0]:
        raise NonUniqueFactorization(f"{params.shape[0]} free parameters")
    return X


def tensor_product(W1, W2, flavor="P", window=1):
    A = _require_comm_alg(W1, W2)
    sub = compat_subspace(W1, W2, flavor, window)
    lams = sub.functionals
    d = len(lams)
    names = [f"b{i}" for i in range(d)]
    pairs = sub.pairs
    Lam = sympy.Matrix([[_S(f(a, b)) for f in lams] for a, b in pairs]) if d else None
    matrices, action = {}, {}
    for v in A.names:
        # Y'(v)_0 lambda_i = sum_j c_ij lambda_j
        C = sympy.zeros(d, d)
        for i, f in enumerate(lams):
            g = y_coeff(flavor, Vec.basis(v), 0, f)
            rhs = sympy.Matrix([_S(g(a, b)) for a, b in pairs])
            x = _solve(Lam, rhs)
            if x is None:
                raise RuntimeError(f"compatible functionals are not stable under {v}")
            for j in range(d):
                C[i, j] = x[j]
        matrices[v] = C
        for k in range(d):
            action[(v, names[k])] = {names[i]: Fraction(int(C[i, k].p), int(C[i, k].q))
                                     for i in range(d) if C[i, k]}
    degrees = {names[i]: f.pair_degree for i, f in enumerate(lams)}
    module = CommAlgModule(A, names, action, degrees=degrees,
                           name=f"{W1.name}[x]{W2.name}")
    return TensorProductResult(module, sub, matrices, flavor)


# ---------------------------------------------------------------------------
# the independent oracle: (W1 (x) W2) / span{(v.a) (x) b - a (x) (v.b)}

class QuotientOracle:
    def __init__(self, W1, W2, pairs, rref, pivots, free):
        self.W1, self.W2 = W1, W2
        self.pairs = pairs
        self._rref = rref
        self._pivots = pivots
        self.free = free       # indices of pairs whose classes form a basis

    @property
    def dimension(self):
        return len(self.free)

    def reduce(self, x):
        """Coordinates of the class of x (a list over pairs) in the free basis."""
        x = list(x)
        for r, p in enumerate(self._pivots):
            c = x[p]
            if c:
                for j in range(len(x)):
                    x[j] -= c * self._rref[r, j]
        return sympy.Matrix([x[j] for j in self.free])

    def cls(self, a, b):
        x = [0] * len(self.pairs)
        x[self.pairs.index((a, b))] = 1
        return self.reduce(x)

    def action(self, v):
        cols = []
        for j in self.free:
            a, b = self.pairs[j]
            x = [0] * len(self.pairs)
            for k, c in self.W1.act_basis(v, a).items():
                x[self.pairs.index((k, b))] += _S(c)
            cols.append(self.reduce(x))
        return sympy.Matrix.hstack(*cols) if cols else sympy.zeros(0, 0)


def algebra_tensor_oracle(W1, W2):
    _require_comm_alg(W1, W2)
    pairs = [(a, b) for a in W1.names for b in W2.names]
    rows = _balance_rows(W1, W2, pairs)
    if rows:
        M = sympy.Matrix([[_S(c) for c in r] for r in rows])
        R, pivots = M.rref()
    else:
        R, pivots = sympy.zeros(0, len(pairs)), ()
    free = [j for j in range(len(pairs)) if j not in pivots]
    return QuotientOracle(W1, W2, pairs, R, list(pivots), free)


def check_isomorphic(result, oracle):
    """Exact intertwiner T from the computed module onto the oracle.

    T is forced by T(a [x] b) = [a (x) b]; returns (ok, T, reason).
    """
    d, e = result.dimension, oracle.dimension
    if d != e:
        return False, None, f"dimensions differ: {d} vs {e}"
    if d == 0:
        return True, sympy.zeros(0, 0), "both zero"
    pairs = oracle.pairs
    B = sympy.Matrix.hstack(*[sympy.Matrix([_S(result.box(a, b).get(f"b{i}")) for i in range(d)])
                              for a, b in pairs])
    O = sympy.Matrix.hstack(*[oracle.cls(a, b) for a, b in pairs])
    # T B = O  <=>  B^T T^T = O^T
    try:
        Tt = _solve(B.T, O.T)
    except NonUniqueFactorization:
        return False, None, "canonical images do not span"
    if Tt is None:
        return False, None, "no linear map sends a [x] b to the class of a (x) b"
    T = Tt.T
    if T.det() == 0:
        return False, T, "intertwiner is singular"
    for v, C in result.matrices.items():
        if T * C != oracle.action(v) * T:
            return False, T, f"T does not intertwine the action of {v}"
    return True, T, "ok"


# ---------------------------------------------------------------------------
# universal property

class Factorization:
    def __init__(self, eta, target):
        self.eta = eta
        self.target = target

    def to_json(self):
        return {"target": self.target.name,
                "eta": [[str(x) for x in self.eta.row(i)] for i in range(self.eta.rows)]}


def universal_check(result, target, intertwining):
    """Factor an intertwining map through the tensor product.

    ``intertwining`` maps basis pairs (a, b) to Vecs in ``target``.  Returns the
    unique module map eta with eta(a [x] b) = I(a (x) b).
    """
    d = result.dimension
    tnames = list(target.names)
    pairs = result.subspace.pairs
    if not tnames:
        return Factorization(sympy.zeros(0, d), target)
    images = sympy.Matrix.hstack(*[sympy.Matrix([_S(intertwining.get((a, b), Vec()).get(t))
                                                 for t in tnames]) for a, b in pairs])
    if d == 0:
        if any(images):
            raise NoFactorization("the tensor product is zero but I is not")
        return Factorization(sympy.zeros(len(tnames), 0), target)
    B = sympy.Matrix.hstack(*[sympy.Matrix([_S(result.box(a, b).get(f"b{i}")) for i in range(d)])
                              for a, b in pairs])
    sol = _solve(B.T, images.T)
    if sol is None:
        raise NoFactorization("I does not factor through the canonical map")
    eta = sol.T
    for v, C in result.matrices.items():
        Tv = sympy.Matrix([[_S(target.act_basis(v, s).get(t)) for s in tnames] for t in tnames])
        if eta * C != Tv * eta:
            raise NoFactorization(f"the induced map does not commute with {v}")
    return Factorization(eta, target)


def direct_sum(M, N, name=None):
    """M (+) N with basis keys tagged by summand."""
    names = [("0", k) for k in M.names] + [("1", k) for k in N.names]
    action = {}
    for v in M.algebra.names:
        for k in M.names:
            action[(v, ("0", k))] = {("0", t): c for t, c in M.act_basis(v, k).items()}
        for k in N.names:
            action[(v, ("1", k))] = {("1", t): c for t, c in N.act_basis(v, k).items()}
    degrees = {("0", k): M.degree(k) for k in M.names}
    degrees.update({("1", k): N.degree(k) for k in N.names})
    return CommAlgModule(M.algebra, names, action, degrees=degrees,
                         name=name or f"{M.name}+{N.name}")
