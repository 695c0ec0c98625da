"""Concrete instances: commutative associative algebras and the rank one Heisenberg algebra."""
from fractions import Fraction
from functools import lru_cache
from itertools import product

from .scalars import gen_binom
from .vertex import GradedModule, Vec, VertexAlgebra


class NotAssociative(ValueError):
    pass


class NotCommutative(ValueError):
    pass


class NoUnit(ValueError):
    pass


class NotAModule(ValueError):
    pass


class UnsupportedInstance(ValueError):
    pass


# ---------------------------------------------------------------------------
# commutative associative algebras as vertex algebras with Y(a, x)b = ab

def _vec_of(d):
    return Vec({k: Fraction(v) if isinstance(v, str) else v for k, v in d.items()})


class CommAlgebra(VertexAlgebra):
    """A finite dimensional commutative associative unital algebra.

    ``mult[(a, b)]`` is a dict basis -> coefficient; missing entries are 0.
    The unit must be a basis element.  Everything sits in weight 0, so
    L(n) = 0 and the only nonzero mode is a_{-1} b = ab.
    """

    def __init__(self, names, mult, unit, degrees=None, group_order=1, name="commalg", check=True):
        self.names = list(names)
        self.mult = {(a, b): _vec_of(v) for (a, b), v in mult.items()}
        self.vacuum = unit
        self.group_order = group_order
        self._degree = dict(degrees or {n: 0 for n in self.names})
        self.name = name
        self.cutoff = 0
        self.min_weight = 0
        self.central_charge = 0
        if check:
            self.check_axioms()

    def product(self, a, b):
        return self.mult.get((a, b), Vec())

    def mul_vec(self, x, y):
        out = Vec()
        for a, ca in x.items():
            for b, cb in y.items():
                out = out + self.product(a, b) * (ca * cb)
        return out

    def check_axioms(self):
        if self.vacuum not in self.names:
            raise NoUnit("the unit must be a basis element")
        for a in self.names:
            e = Vec.basis(a)
            if self.product(self.vacuum, a) != e or self.product(a, self.vacuum) != e:
                raise NoUnit(f"{self.vacuum} is not a unit: fails on {a}")
        for a, b in product(self.names, repeat=2):
            if self.product(a, b) != self.product(b, a):
                raise NotCommutative(f"{a}*{b} != {b}*{a}")
            if self.group_order > 1:
                d = self.add_degree(self._degree[a], self._degree[b])
                for k in self.product(a, b).keys():
                    if self._degree[k] != d:
                        raise NotCommutative(f"product {a}*{b} is not homogeneous for the grading")
        for a, b, c in product(self.names, repeat=3):
            left = self.mul_vec(self.product(a, b), Vec.basis(c))
            right = self.mul_vec(Vec.basis(a), self.product(b, c))
            if left != right:
                raise NotAssociative(f"({a}{b}){c} != {a}({b}{c})")

    def weight(self, key):
        return 0

    def degree(self, key):
        return self._degree[key]

    def basis_of_weight(self, n):
        return list(self.names) if n == 0 else []

    def mode(self, u, n, w):
        return self.product(u, w) if n == -1 else Vec()

    def L(self, j, w):
        return Vec()


class CommAlgModule(GradedModule):
    """A module for a CommAlgebra: ``action[a][w]`` is a dict basis -> coefficient."""

    def __init__(self, algebra, names, action, degrees=None, name="module", check=True):
        self.algebra = algebra
        self.names = list(names)
        self.action = {(a, w): _vec_of(v) for (a, w), v in action.items()}
        self.group_order = algebra.group_order
        self._degree = dict(degrees or {n: 0 for n in self.names})
        self.name = name
        self.cutoff = 0
        self.min_weight = 0
        if check:
            self.check_axioms()

    def act_basis(self, a, w):
        return self.action.get((a, w), Vec())

    def act_vec(self, a, vec):
        out = Vec()
        for w, c in vec.items():
            out = out + self.act_basis(a, w) * c
        return out

    def check_axioms(self):
        A = self.algebra
        for w in self.names:
            if self.act_basis(A.vacuum, w) != Vec.basis(w):
                raise NotAModule(f"the unit does not act as the identity on {w}")
        for a, b, w in product(A.names, A.names, self.names):
            left = Vec()
            for k, c in A.product(a, b).items():
                left = left + self.act_basis(k, w) * c
            right = self.act_vec(a, self.act_basis(b, w))
            if left != right:
                raise NotAModule(f"(ab)w != a(bw) for a={a}, b={b}, w={w}")
        if self.group_order > 1:
            for a, w in product(A.names, self.names):
                d = self.add_degree(A.degree(a), self._degree[w])
                for k in self.act_basis(a, w).keys():
                    if self._degree[k] != d:
                        raise NotAModule(f"{a}.{w} is not homogeneous for the grading")

    def weight(self, key):
        return 0

    def degree(self, key):
        return self._degree[key]

    def basis_of_weight(self, n):
        return list(self.names) if n == 0 else []

    def mode(self, u, n, w):
        return self.act_basis(u, w) if n == -1 else Vec()

    def L(self, j, w):
        return Vec()


def regular_module(A, name=None):
    return CommAlgModule(A, A.names, dict(A.mult), dict(A._degree),
                         name=name or f"{A.name}.regular")


def algebra_field():
    return CommAlgebra(["1"], {("1", "1"): {"1": 1}}, "1", name="Q")


def algebra_dual_numbers():
    """Q[s]/(s^2)."""
    mult = {("1", "1"): {"1": 1}, ("1", "s"): {"s": 1}, ("s", "1"): {"s": 1}}
    return CommAlgebra(["1", "s"], mult, "1", name="A2")


def algebra_group_z2():
    """Q[Z/2] graded by Z/2, g in degree 1."""
    mult = {("1", "1"): {"1": 1}, ("1", "g"): {"g": 1}, ("g", "1"): {"g": 1}, ("g", "g"): {"1": 1}}
    return CommAlgebra(["1", "g"], mult, "1", degrees={"1": 0, "g": 1}, group_order=2, name="QZ2")


def algebra_product():
    """Q x Q with idempotents e1, e2 and unit 1 = e1 + e2; basis {1, e1}."""
    mult = {("1", "1"): {"1": 1}, ("1", "e1"): {"e1": 1}, ("e1", "1"): {"e1": 1},
            ("e1", "e1"): {"e1": 1}}
    return CommAlgebra(["1", "e1"], mult, "1", name="QxQ")


def _one_dim(A, values, name):
    """One dimensional module where basis element a acts by values[a]."""
    return CommAlgModule(A, ["w"], {(a, "w"): {"w": c} for a, c in values.items()}, name=name)


@lru_cache(maxsize=None)
def comm_alg_catalogue():
    """name -> (algebra, {module name: module}); built once so modules share their algebra."""
    Q = algebra_field()
    A2 = algebra_dual_numbers()
    G = algebra_group_z2()
    P = algebra_product()
    shifted = CommAlgModule(G, ["w0", "w1"],
                            {("1", "w0"): {"w0": 1}, ("1", "w1"): {"w1": 1},
                             ("g", "w0"): {"w1": 1}, ("g", "w1"): {"w0": 1}},
                            degrees={"w0": 1, "w1": 0}, name="QZ2.shifted")
    return {
        "Q": (Q, {"regular": regular_module(Q)}),
        "A2": (A2, {"regular": regular_module(A2),
                    "quotient": _one_dim(A2, {"1": 1, "s": 0}, "A2.quotient")}),
        "QZ2": (G, {"regular": regular_module(G), "shifted": shifted}),
        "QxQ": (P, {"regular": regular_module(P),
                    "e1": _one_dim(P, {"1": 1, "e1": 1}, "QxQ.e1"),
                    "e2": _one_dim(P, {"1": 1, "e1": 0}, "QxQ.e2")}),
    }


# ---------------------------------------------------------------------------
# Heisenberg vertex algebra on the Fock space F_0, computed on demand

def _add_part(key, n):
    parts = list(key)
    i = 0
    while i < len(parts) and parts[i] >= n:
        i += 1
    parts.insert(i, n)
    return tuple(parts)


def _remove_part(key, n):
    parts = list(key)
    parts.remove(n)
    return tuple(parts)


def alpha(m, vec):
    """alpha(m) on a Vec over partitions; [alpha(m), alpha(n)] = m delta_{m+n,0}."""
    if m == 0:
        return Vec()
    out = {}
    for key, c in vec.items():
        if m < 0:
            k2 = _add_part(key, -m)
            out[k2] = out.get(k2, 0) + c
        else:
            mult = key.count(m)
            if mult:
                k2 = _remove_part(key, m)
                out[k2] = out.get(k2, 0) + c * m * mult
    return Vec(out)


@lru_cache(maxsize=None)
def partitions(n, maxpart=None):
    if maxpart is None:
        maxpart = n
    if n == 0:
        return ((),)
    out = []
    for first in range(min(n, maxpart), 0, -1):
        for rest in partitions(n - first, first):
            out.append((first,) + rest)
    return tuple(out)


class Heisenberg(VertexAlgebra):
    """Rank one Heisenberg vertex algebra, keys are partitions.

    The key (n1, ..., nk) stands for alpha(-n1)...alpha(-nk) 1.  ``cutoff`` only
    bounds basis enumeration (spanning sets, probe pairs); every component is
    computed exactly.
    """

    def __init__(self, cutoff=6):
        self.vacuum = ()
        self.cutoff = cutoff
        self.min_weight = 0
        self.central_charge = 1
        self.name = "heisenberg"
        self._modes = {}

    def weight(self, key):
        return sum(key)

    def basis_of_weight(self, n):
        if n < 0:
            return []
        return list(partitions(n))

    def mode(self, u, n, w):
        key = (u, n, w)
        hit = self._modes.get(key)
        if hit is None:
            hit = self._mode(u, n, w)
            self._modes[key] = hit
        return hit

    def _mode(self, u, n, w):
        if not u:
            return Vec.basis(w) if n == -1 else Vec()
        S = n + 1 - self.weight(u)
        W = self.weight(w)
        k = len(u)
        out = Vec()
        # choose m_i for each factor: annihilators m >= 1 (total <= W) or
        # creators m <= -n_i; the m_i sum to S
        def rec(i, ms, ann):
            nonlocal out
            if i == k - 1:
                m = S - sum(ms)
                if m == 0 or (m > 0 and ann + m > W) or (m < 0 and m > -u[i]):
                    return
                ms = ms + [m]
                coef = 1
                for mi, ni in zip(ms, u):
                    coef *= gen_binom(-mi - 1, ni - 1)
                if not coef:
                    return
                vec = Vec.basis(w)
                for mi in sorted(ms, reverse=True):
                    vec = alpha(mi, vec)
                    if not vec:
                        return
                out = out + vec * coef
                return
            for m in range(1, W - ann + 1):
                rec(i + 1, ms + [m], ann + m)
            # the other factors sum to at most W, so m >= S - W
            for m in range(-u[i], S - W - 1, -1):
                rec(i + 1, ms + [m], ann)
        rec(0, [], 0)
        return out

    def L(self, j, w):
        if j == 0:
            return Vec.basis(w, self.weight(w))
        W = self.weight(w)
        vec = Vec.basis(w)
        out = Vec()
        bound = W + abs(j) + 1
        for a in range(-bound, bound + 1):
            b = j - a
            hi, lo = max(a, b), min(a, b)
            term = alpha(lo, alpha(hi, vec))
            if term:
                out = out + term
        return out * Fraction(1, 2)


def heisenberg(cutoff=6):
    return Heisenberg(cutoff)


def load_instance(name, cutoff=6):
    """Instance names: 'heisenberg' or '<algebra>' or '<algebra>:<module>' (case-insensitive)."""
    if name.lower() in ("heisenberg", "f0", "fock"):
        V = heisenberg(cutoff)
        return V, V
    cat = comm_alg_catalogue()
    alg, _, mod = name.partition(":")
    alg = {k.lower(): k for k in cat}.get(alg.lower(), alg)
    if alg not in cat:
        raise UnsupportedInstance(f"unknown instance {name!r}")
    A, mods = cat[alg]
    if not mod:
        return A, mods["regular"]
    if mod not in mods:
        raise UnsupportedInstance(f"unknown module {mod!r} for {alg}")
    return A, mods[mod]
