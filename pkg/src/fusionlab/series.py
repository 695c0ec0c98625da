"""Multivariate formal series with polyhedral support certificates.

A series is a coefficient function on integer exponent vectors together with
a finite union of support atoms.  An atom is the set
``{base + G theta : theta >= 0, E theta = f}``; without equality rows it is an
ordinary cone, the rows appear when a variable is fixed by a residue.

Products are computed on boxes: linear programming bounds the factor boxes
that can contribute to a target box, the factors are materialized there and
convolved.  The recession test rejects products whose coefficients would be
infinite sums.
"""
import itertools
import math
import re
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from .scalars import ONE, ZERO, ParamScalar, gen_binom

_EPS = 1e-6


class IllDefinedProduct(ValueError):
    pass


class NonMonomialFactor(ValueError):
    pass


def is_zero(c):
    return not c


# ---------------------------------------------------------------------------
# support atoms

class SupportCone:
    """base + sum theta_i gens_i with theta >= 0 and optional rows E theta = f."""

    __slots__ = ("base", "gens", "eq")

    def __init__(self, base, gens=(), eq=()):
        self.base = tuple(base)
        self.gens = tuple(tuple(g) for g in gens)
        for g in self.gens:
            if len(g) != len(self.base):
                raise ValueError("generator length does not match base")
        self.eq = tuple((tuple(row), rhs) for row, rhs in eq)

    @property
    def dim(self):
        return len(self.base)

    @classmethod
    def point(cls, e):
        return cls(e)

    @classmethod
    def full(cls, n):
        gens = []
        for i in range(n):
            u = [0] * n
            u[i] = 1
            gens.append(tuple(u))
            u = [0] * n
            u[i] = -1
            gens.append(tuple(u))
        return cls((0,) * n, gens)

    def embed(self, positions, n):
        """Coordinates move to ``positions`` in an n-dimensional space."""
        def lift(v):
            out = [0] * n
            for p, x in zip(positions, v):
                out[p] = x
            return tuple(out)
        return SupportCone(lift(self.base), [lift(g) for g in self.gens], self.eq)

    def fix(self, i, val):
        """Slice at coordinate i = val and drop that coordinate."""
        row = tuple(g[i] for g in self.gens)
        drop = lambda v: v[:i] + v[i + 1:]
        return SupportCone(drop(self.base), [drop(g) for g in self.gens],
                           self.eq + ((row, val - self.base[i]),))

    def minkowski(self, other):
        p1, p2 = len(self.gens), len(other.gens)
        base = tuple(a + b for a, b in zip(self.base, other.base))
        eq = [(row + (0,) * p2, r) for row, r in self.eq]
        eq += [((0,) * p1 + row, r) for row, r in other.eq]
        return SupportCone(base, self.gens + other.gens, eq)

    def _matrices(self):
        n, p = self.dim, len(self.gens)
        M = np.array(self.gens, dtype=float).T.reshape(n, p)
        E = np.array([row for row, _ in self.eq], dtype=float).reshape(len(self.eq), p)
        f = np.array([r for _, r in self.eq], dtype=float)
        return np.array(self.base, dtype=float), M, E, f

    def contains(self, e):
        """Rational membership (LP feasibility); used only by tests."""
        c, M, E, f = self._matrices()
        if M.shape[1] == 0:
            return tuple(e) == self.base and not self.eq
        A_eq = np.vstack([M, E]) if len(E) else M
        b_eq = np.concatenate([np.array(e, dtype=float) - c, f])
        res = linprog(np.zeros(M.shape[1]), A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
        return res.status == 0

    def __repr__(self):
        extra = f", eq={self.eq}" if self.eq else ""
        return f"SupportCone({self.base}, {list(self.gens)}{extra})"


def _lp(c, A_ub, b_ub, A_eq, b_eq, nvar):
    if nvar == 0:
        feasible = True
        if A_ub is not None and len(A_ub):
            feasible = bool(np.all(b_ub >= -_EPS))
        if A_eq is not None and len(A_eq):
            feasible = feasible and bool(np.all(np.abs(b_eq) <= _EPS))
        return (0.0 if feasible else None), feasible
    res = linprog(c, A_ub=A_ub if A_ub is not None and len(A_ub) else None,
                  b_ub=b_ub if A_ub is not None and len(A_ub) else None,
                  A_eq=A_eq if A_eq is not None and len(A_eq) else None,
                  b_eq=b_eq if A_eq is not None and len(A_eq) else None,
                  bounds=(0, None), method="highs")
    if res.status == 2:
        return None, False
    if res.status == 3:
        return -math.inf, True
    if res.status != 0:
        raise RuntimeError(f"linear program failed: {res.message}")
    return res.fun, True


class _Joint:
    """Several atoms (each embedded in a common space) summed together."""

    def __init__(self, atoms, n):
        self.atoms = atoms
        self.n = n
        self.p = [len(a.gens) for a in atoms]
        self.nvar = sum(self.p)

    def _blocks(self):
        n, nvar = self.n, self.nvar
        Mfull = np.zeros((n, nvar))
        const = np.zeros(n)
        Eq_rows, Eq_rhs = [], []
        parts = []
        off = 0
        for a, p in zip(self.atoms, self.p):
            c, M, E, f = a._matrices()
            Mfull[:, off:off + p] = M
            const += c
            for row, r in zip(E, f):
                full = np.zeros(nvar)
                full[off:off + p] = row
                Eq_rows.append(full)
                Eq_rhs.append(r)
            Mi = np.zeros((n, nvar))
            Mi[:, off:off + p] = M
            parts.append((c, Mi))
            off += p
        E = np.array(Eq_rows).reshape(len(Eq_rows), nvar)
        return const, Mfull, E, np.array(Eq_rhs), parts

    def part_boxes(self, lo, hi):
        """Per-atom coordinate bounds over points whose sum lies in [lo, hi].

        Returns None when infeasible, raises IllDefinedProduct when unbounded.
        """
        const, M, E, f, parts = self._blocks()
        lo = np.array(lo, dtype=float)
        hi = np.array(hi, dtype=float)
        A_ub = np.vstack([M, -M])
        b_ub = np.concatenate([hi - const, const - lo])
        out = []
        for c, Mi in parts:
            lows, highs = [], []
            for j in range(self.n):
                obj = Mi[j]
                if not obj.any():
                    lows.append(int(c[j]))
                    highs.append(int(c[j]))
                    continue
                vmin, ok = _lp(obj, A_ub, b_ub, E, f, self.nvar)
                if not ok:
                    return None
                vmax, _ = _lp(-obj, A_ub, b_ub, E, f, self.nvar)
                if vmin == -math.inf or vmax == -math.inf:
                    raise IllDefinedProduct("unbounded factor support for a bounded target")
                lows.append(math.floor(c[j] + vmin + _EPS))
                highs.append(math.ceil(c[j] - vmax - _EPS))
            if any(l > h for l, h in zip(lows, highs)):
                return None
            out.append((tuple(lows), tuple(highs)))
        # feasibility check for the degenerate no-objective case
        _, ok = _lp(np.zeros(self.nvar), A_ub, b_ub, E, f, self.nvar)
        if not ok:
            return None
        return out


def recession_admissible(a1, a2):
    """True when rec(a1) and -rec(a2) meet only in 0."""
    joint = _Joint([a1, a2], a1.dim)
    _, M, E, f, parts = joint._blocks()
    nvar = joint.nvar
    if nvar == 0:
        return True
    # empty atoms never obstruct
    for a in (a1, a2):
        if a.eq:
            _, Ma, Ea, fa = a._matrices()
            _, ok = _lp(np.zeros(Ma.shape[1]), None, None, Ea, fa, Ma.shape[1])
            if not ok:
                return True
    E0 = np.vstack([M, E]) if len(E) else M
    b0 = np.zeros(E0.shape[0])
    M1 = parts[0][1]
    for i in range(a1.dim):
        for s in (1, -1):
            A_ub = (-s * M1[i]).reshape(1, nvar)
            _, ok = _lp(np.zeros(nvar), A_ub, np.array([-1.0]), E0, b0, nvar)
            if ok:
                return False
    return True


def cone_box(atom, lo, hi):
    """Bounding box of atom intersected with [lo, hi], or None."""
    res = _Joint([atom], atom.dim).part_boxes(lo, hi)
    return None if res is None else res[0]


def _box_points(lo, hi):
    return itertools.product(*[range(a, b + 1) for a, b in zip(lo, hi)])


def _merge_boxes(boxes):
    boxes = [b for b in boxes if b is not None]
    if not boxes:
        return None
    lo = tuple(min(b[0][i] for b in boxes) for i in range(len(boxes[0][0])))
    hi = tuple(max(b[1][i] for b in boxes) for i in range(len(boxes[0][0])))
    return lo, hi


# ---------------------------------------------------------------------------
# series

class SeriesOracle:
    """Abstract series; subclasses give ``vars``, ``support`` and ``coeff``."""

    vars = ()
    support = ()

    def coeff(self, e):
        raise NotImplementedError

    def _box(self, box):
        """Normalize a window spec to (lo, hi) tuples in variable order."""
        if isinstance(box, dict):
            lo = tuple(box[v][0] for v in self.vars)
            hi = tuple(box[v][1] for v in self.vars)
            return lo, hi
        if isinstance(box, int):
            return (-box,) * len(self.vars), (box,) * len(self.vars)
        return tuple(box[0]), tuple(box[1])

    def terms_in_box(self, lo, hi):
        lo, hi = tuple(lo), tuple(hi)
        cache = self.__dict__.setdefault("_box_cache", {})
        key = (lo, hi)
        if key in cache:
            return cache[key]
        out = self._terms_in_box(lo, hi)
        if len(cache) > 64:
            cache.clear()
        cache[key] = out
        return out

    def _terms_in_box(self, lo, hi):
        box = _merge_boxes([cone_box(a, lo, hi) for a in self.support])
        out = {}
        if box is None:
            return out
        blo = tuple(max(a, b) for a, b in zip(box[0], lo))
        bhi = tuple(min(a, b) for a, b in zip(box[1], hi))
        for e in _box_points(blo, bhi):
            c = self.coeff(e)
            if c:
                out[e] = c
        return out

    def coeff_named(self, **exps):
        return self.coeff(tuple(exps.get(v, 0) for v in self.vars))

    # algebra
    def __mul__(self, other):
        if isinstance(other, SeriesOracle):
            return fs_mul(self, other)
        return ScaledSeries(self, other)

    def __rmul__(self, other):
        return ScaledSeries(self, other)

    def __add__(self, other):
        return SumSeries([self, other])

    def __neg__(self):
        return ScaledSeries(self, -1)

    def __sub__(self, other):
        return SumSeries([self, ScaledSeries(other, -1)])

    def map(self, fn):
        """Apply a linear map to every coefficient (support unchanged)."""
        return MappedSeries(self, fn)

    def reorder(self, vars):
        return ReorderedSeries(self, tuple(vars))


class FnSeries(SeriesOracle):
    def __init__(self, vars, fn, support=None, cache=True):
        self.vars = tuple(vars)
        self._fn = fn
        self.support = list(support) if support is not None else [SupportCone.full(len(self.vars))]
        self._memo = {} if cache else None

    def coeff(self, e):
        e = tuple(e)
        if self._memo is None:
            return self._fn(e)
        hit = self._memo.get(e)
        if hit is None:
            hit = self._fn(e)
            self._memo[e] = hit
        return hit


class PolySeries(SeriesOracle):
    """Finitely supported series."""

    def __init__(self, vars, terms):
        self.vars = tuple(vars)
        self.terms = {tuple(e): c for e, c in terms.items() if c}
        self.support = [SupportCone.point(e) for e in self.terms] or []

    def coeff(self, e):
        return self.terms.get(tuple(e), 0)

    def _terms_in_box(self, lo, hi):
        return {e: c for e, c in self.terms.items()
                if all(a <= x <= b for a, x, b in zip(lo, e, hi))}


def zero_series(vars):
    return PolySeries(vars, {})


def one_series(vars):
    return PolySeries(vars, {(0,) * len(vars): ONE})


class ScaledSeries(SeriesOracle):
    def __init__(self, s, c):
        self.s, self.c = s, c
        self.vars = s.vars
        self.support = s.support

    def coeff(self, e):
        v = self.s.coeff(e)
        return self.c * v if v else 0

    def _terms_in_box(self, lo, hi):
        out = {}
        for e, v in self.s.terms_in_box(lo, hi).items():
            w = self.c * v
            if w:
                out[e] = w
        return out


class SumSeries(SeriesOracle):
    def __init__(self, parts):
        self.parts = []
        vars = parts[0].vars
        for p in parts:
            if set(p.vars) != set(vars):
                raise ValueError("summands must share the variable set")
            self.parts.append(p if p.vars == vars else p.reorder(vars))
        self.vars = vars
        self.support = [a for p in self.parts for a in p.support]

    def coeff(self, e):
        total = 0
        for p in self.parts:
            total = total + p.coeff(e)
        return total

    def _terms_in_box(self, lo, hi):
        out = {}
        for p in self.parts:
            for e, v in p.terms_in_box(lo, hi).items():
                out[e] = out[e] + v if e in out else v
        return {e: v for e, v in out.items() if v}


class MappedSeries(SeriesOracle):
    def __init__(self, s, fn):
        self.s, self.fn = s, fn
        self.vars = s.vars
        self.support = s.support

    def coeff(self, e):
        v = self.s.coeff(e)
        return self.fn(v) if v else 0

    def _terms_in_box(self, lo, hi):
        out = {}
        for e, v in self.s.terms_in_box(lo, hi).items():
            w = self.fn(v)
            if w:
                out[e] = w
        return out


class ReorderedSeries(SeriesOracle):
    def __init__(self, s, vars):
        if set(vars) != set(s.vars):
            raise ValueError("reorder must permute the variables")
        self.s = s
        self.vars = vars
        self._perm = [s.vars.index(v) for v in vars]      # new position -> old index
        self._inv = [vars.index(v) for v in s.vars]       # old position -> new index
        self.support = [a.embed(self._inv, len(vars)) for a in s.support]

    def _to_old(self, e):
        old = [0] * len(e)
        for new_i, old_i in enumerate(self._perm):
            old[old_i] = e[new_i]
        return tuple(old)

    def coeff(self, e):
        return self.s.coeff(self._to_old(e))

    def _terms_in_box(self, lo, hi):
        olo, ohi = self._to_old(lo), self._to_old(hi)
        return {tuple(e[i] for i in self._perm): v
                for e, v in self.s.terms_in_box(olo, ohi).items()}


# ---------------------------------------------------------------------------
# monomials and delta kernels

class Mono:
    """coefficient (unit of Q[z, z^-1]) times a monomial in named variables."""

    __slots__ = ("c", "exps")

    def __init__(self, c=1, exps=None):
        self.c = ParamScalar.lift(c)
        if not self.c.is_monomial():
            raise NonMonomialFactor(f"{c} is not a monomial")
        self.exps = {k: v for k, v in (exps or {}).items() if v}

    def __mul__(self, other):
        exps = dict(self.exps)
        for k, v in other.exps.items():
            exps[k] = exps.get(k, 0) + v
        return Mono(self.c * other.c, exps)

    def __pow__(self, n):
        return Mono(self.c ** n, {k: v * n for k, v in self.exps.items()})

    def __neg__(self):
        return Mono(-self.c, self.exps)

    def vec(self, vars):
        extra = set(self.exps) - set(vars)
        if extra:
            raise ValueError(f"variables {sorted(extra)} not declared")
        return tuple(self.exps.get(v, 0) for v in vars)

    def __repr__(self):
        return f"Mono({self.c}, {self.exps})"


_TOKEN = re.compile(r"\s*([+-]?)\s*([^+\-\s][^+\-]*?(?:\^-?\d+)?(?:\*[^+\-]*?(?:\^-?\d+)?)*)\s*(?=[+-]|$)")


def parse_mono(s):
    """Parse strings like '-z*x0', 'x1^-1', '2*z^-1*y'."""
    s = s.strip()
    sign = 1
    while s.startswith(("-", "+")):
        if s[0] == "-":
            sign = -sign
        s = s[1:].strip()
    c = ParamScalar(sign)
    exps = {}
    for factor in s.split("*"):
        factor = factor.strip()
        if not factor:
            raise ValueError(f"bad monomial {s!r}")
        if "^" in factor:
            name, p = factor.split("^")
            p = int(p)
        else:
            name, p = factor, 1
        name = name.strip()
        if re.fullmatch(r"-?\d+(/\d+)?", name):
            c = c * Fraction(name) ** p
        elif name == "z":
            c = c * ParamScalar({p: 1})
        else:
            exps[name] = exps.get(name, 0) + p
    return Mono(c, exps)


def parse_binomial(s):
    """Split 'a - b' into the written-order monomials (a, -b)."""
    s = s.strip()
    # find the top-level + or - not following '^' or at position 0
    for i in range(1, len(s)):
        if s[i] in "+-" and s[i - 1] != "^" and s[:i].strip():
            left = s[:i]
            right = s[i:]
            return parse_mono(left), parse_mono(right)
    return parse_mono(s), None


class KernelSeries(SeriesOracle):
    """pre * sum_n T^{-n} (u + v)^n, expanded in nonnegative powers of v.

    The exponent of the (n, k) term is pre + n (u - T) + k (v - u).
    """

    def __init__(self, vars, pre, u, v, T):
        self.vars = tuple(vars)
        self.pre, self.u, self.v, self.T = pre, u, v, T
        P = pre.vec(self.vars)
        self._P = P
        d = tuple(a - b for a, b in zip(u.vec(self.vars), T.vec(self.vars)))
        if v is None:
            g = (0,) * len(self.vars)
        else:
            g = tuple(a - b for a, b in zip(v.vec(self.vars), u.vec(self.vars)))
        if not any(d):
            raise ValueError("delta argument has no variable dependence")
        self._d, self._g = d, g
        self._single = v is None
        if not self._single and not any(g):
            raise ValueError("both summands carry the same variables")
        # a pair of independent coordinates for solving e - P = n d + k g
        self._pivot = None
        if not self._single:
            for i, j in itertools.combinations(range(len(self.vars)), 2):
                det = d[i] * g[j] - d[j] * g[i]
                if det:
                    self._pivot = (i, j, det)
                    break
            if self._pivot is None:
                raise ValueError("degenerate kernel: support directions are parallel")
        gens = [d, tuple(-x for x in d)]
        if not self._single:
            gens.append(g)
        self.support = [SupportCone(P, gens)]
        self._Tinv = T.c.inverse()

    def _term(self, n, k):
        if self._single:
            if k:
                return ZERO
            return self.pre.c * self._Tinv ** n * self.u.c ** n
        b = gen_binom(n, k)
        if not b:
            return ZERO
        return (self.pre.c * self._Tinv ** n) * (self.u.c ** (n - k) * self.v.c ** k) * b

    def _solve(self, e):
        r = [a - b for a, b in zip(e, self._P)]
        d, g = self._d, self._g
        if self._single:
            idx = next(i for i, x in enumerate(d) if x)
            if r[idx] % d[idx]:
                return None
            n = r[idx] // d[idx]
            return (n, 0) if all(n * d[i] == r[i] for i in range(len(r))) else None
        i, j, det = self._pivot
        nn = r[i] * g[j] - r[j] * g[i]
        kk = d[i] * r[j] - d[j] * r[i]
        if nn % det or kk % det:
            return None
        n, k = nn // det, kk // det
        if k < 0:
            return None
        if any(n * d[t] + k * g[t] != r[t] for t in range(len(r))):
            return None
        return n, k

    def coeff(self, e):
        sol = self._solve(tuple(e))
        if sol is None:
            return 0
        return self._term(*sol)

    def _terms_in_box(self, lo, hi):
        out = {}
        atom = self.support[0]
        box = cone_box(atom, lo, hi)
        if box is None:
            return out
        # parameter ranges from the coordinate box
        d, g = self._d, self._g
        nb = _param_bounds(atom, lo, hi, 0, 1)
        if self._single:
            kb = (0, 0)
        else:
            kb = _param_bounds(atom, lo, hi, 2, None)
        if nb is None or kb is None:
            return out
        for k in range(max(0, kb[0]), kb[1] + 1):
            for n in range(nb[0], nb[1] + 1):
                e = tuple(p + n * a + k * b for p, a, b in zip(self._P, d, g))
                if all(l <= x <= h for l, x, h in zip(lo, e, hi)):
                    c = self._term(n, k)
                    if c:
                        out[e] = c
        return out


def _param_bounds(atom, lo, hi, i_plus, i_minus):
    """Bounds of theta_i_plus - theta_i_minus over the atom restricted to a box."""
    c, M, E, f = atom._matrices()
    p = M.shape[1]
    A_ub = np.vstack([M, -M])
    b_ub = np.concatenate([np.array(hi, float) - c, c - np.array(lo, float)])
    obj = np.zeros(p)
    obj[i_plus] = 1
    if i_minus is not None:
        obj[i_minus] = -1
    vmin, ok = _lp(obj, A_ub, b_ub, E, f, p)
    if not ok:
        return None
    vmax, _ = _lp(-obj, A_ub, b_ub, E, f, p)
    if vmin == -math.inf or vmax == -math.inf:
        raise IllDefinedProduct("kernel parameters unbounded on a box")
    return math.floor(vmin + _EPS) - 0, math.ceil(-vmax - _EPS)


def kernel(pre, num, den, vars):
    """pre * delta(num / den) with num a written two-term sum.

    ``kernel('x0^-1', 'x1 - x2', 'x0', vars)`` is x0^{-1} delta((x1 - x2)/x0).
    """
    pre = parse_mono(pre) if isinstance(pre, str) else pre
    den = parse_mono(den) if isinstance(den, str) else den
    if isinstance(num, str):
        u, v = parse_binomial(num)
    else:
        u, v = num
    return KernelSeries(vars, pre, u, v, den)


def mk_delta(target, num, vars, expansion="second-nonnegative"):
    """target^{-1} delta(num / target), the standard normalization."""
    if expansion != "second-nonnegative":
        raise ValueError("only the second-term-nonnegative convention is supported")
    T = parse_mono(target) if isinstance(target, str) else target
    return kernel(T ** -1, num, T, vars)


def delta(var, vars=None):
    """delta(var) = sum_n var^n."""
    vars = vars or (var,)
    return kernel(Mono(1), (Mono(1, {var: 1}), None), Mono(1), vars)


def laurent(vars, terms):
    """Finite series from {exponent tuple or dict: coefficient}."""
    out = {}
    for e, c in terms.items():
        if isinstance(e, dict):
            e = tuple(e.get(v, 0) for v in vars)
        elif isinstance(e, int):
            e = (e,)
        out[tuple(e)] = ParamScalar.lift(c) if isinstance(c, (int, Fraction)) else c
    return PolySeries(vars, out)


# ---------------------------------------------------------------------------
# products and residues

class ProductSeries(SeriesOracle):
    def __init__(self, s1, s2):
        self.s1, self.s2 = s1, s2
        vars = list(s1.vars)
        for v in s2.vars:
            if v not in vars:
                vars.append(v)
        self.vars = tuple(vars)
        n = len(vars)
        self._pos1 = [self.vars.index(v) for v in s1.vars]
        self._pos2 = [self.vars.index(v) for v in s2.vars]
        self._atoms1 = [a.embed(self._pos1, n) for a in s1.support]
        self._atoms2 = [a.embed(self._pos2, n) for a in s2.support]
        for a1 in self._atoms1:
            for a2 in self._atoms2:
                if not recession_admissible(a1, a2):
                    raise IllDefinedProduct(
                        f"product over {self.vars} has infinite coefficient sums")
        self.support = [a1.minkowski(a2) for a1 in self._atoms1 for a2 in self._atoms2]

    def coeff(self, e):
        e = tuple(e)
        return self.terms_in_box(e, e).get(e, 0)

    def _factor_boxes(self, lo, hi):
        b1, b2 = [], []
        n = len(self.vars)
        for a1 in self._atoms1:
            for a2 in self._atoms2:
                res = _Joint([a1, a2], n).part_boxes(lo, hi)
                if res is None:
                    continue
                (l1, h1), (l2, h2) = res
                b1.append((tuple(l1[p] for p in self._pos1), tuple(h1[p] for p in self._pos1)))
                b2.append((tuple(l2[p] for p in self._pos2), tuple(h2[p] for p in self._pos2)))
        return _merge_boxes(b1), _merge_boxes(b2)

    def _terms_in_box(self, lo, hi):
        B1, B2 = self._factor_boxes(lo, hi)
        if B1 is None or B2 is None:
            return {}
        d1 = self.s1.terms_in_box(*B1)
        d2 = self.s2.terms_in_box(*B2)
        if not d1 or not d2:
            return {}
        n = len(self.vars)
        pos1, pos2 = self._pos1, self._pos2
        shared = [v for v in self.s1.vars if v in self.s2.vars]
        sh1 = [self.s1.vars.index(v) for v in shared]
        sh2 = [self.s2.vars.index(v) for v in shared]
        shU = [self.vars.index(v) for v in shared]
        only1 = [(i, p) for i, p in enumerate(pos1) if self.s1.vars[i] not in shared]
        only2 = [(i, p) for i, p in enumerate(pos2) if self.s2.vars[i] not in shared]

        def inside(e, idx):
            return all(lo[p] <= e[i] <= hi[p] for i, p in idx)

        d1 = {e: c for e, c in d1.items() if inside(e, only1)}
        groups = {}
        for e, c in d2.items():
            if inside(e, only2):
                groups.setdefault(tuple(e[i] for i in sh2), []).append((e, c))
        out = {}
        for e1, c1 in d1.items():
            base = [0] * n
            for i, p in enumerate(pos1):
                base[p] = e1[i]
            key1 = [e1[i] for i in sh1]
            for key2, items in groups.items():
                ok = True
                for a, b, p in zip(key1, key2, shU):
                    s = a + b
                    if s < lo[p] or s > hi[p]:
                        ok = False
                        break
                if not ok:
                    continue
                for e2, c2 in items:
                    e = list(base)
                    for i, p in enumerate(pos2):
                        e[p] += e2[i]
                    e = tuple(e)
                    prod = c1 * c2
                    if e in out:
                        out[e] = out[e] + prod
                    else:
                        out[e] = prod
        return {e: c for e, c in out.items() if c}


def fs_mul(s1, s2):
    return ProductSeries(s1, s2)


def fs_coeff(s, e):
    if isinstance(e, dict):
        e = tuple(e.get(v, 0) for v in s.vars)
    return s.coeff(tuple(e))


class ResidueSeries(SeriesOracle):
    def __init__(self, s, var):
        if var not in s.vars:
            raise ValueError(f"{var} is not a variable of the series")
        self.s = s
        self.i = s.vars.index(var)
        self.vars = s.vars[:self.i] + s.vars[self.i + 1:]
        self.support = [a.fix(self.i, -1) for a in s.support]

    def _lift(self, e):
        return e[:self.i] + (-1,) + e[self.i:]

    def coeff(self, e):
        return self.s.coeff(self._lift(tuple(e)))

    def _terms_in_box(self, lo, hi):
        d = self.s.terms_in_box(self._lift(tuple(lo)), self._lift(tuple(hi)))
        return {e[:self.i] + e[self.i + 1:]: c for e, c in d.items()}


def fs_residue(s, var):
    return ResidueSeries(s, var)


# ---------------------------------------------------------------------------
# identity checks

class Report:
    def __init__(self, name, window, mismatches, checked, nonzero, vars):
        self.name = name
        self.window = window
        self.mismatches = mismatches
        self.checked = checked
        self.nonzero = nonzero
        self.vars = vars

    @property
    def passed(self):
        return not self.mismatches

    def __bool__(self):
        return self.passed

    def __repr__(self):
        state = "pass" if self.passed else f"{len(self.mismatches)} mismatches"
        return f"Report({self.name!r}, {state}, checked={self.checked}, nonzero={self.nonzero})"


def window_box(vars, window):
    if isinstance(window, int):
        return {v: (-window, window) for v in vars}
    if isinstance(window, dict):
        return {v: tuple(window[v]) for v in vars}
    raise TypeError("window must be a radius or a per-variable dict")


def check_identity(lhs, rhs, window, name="identity", max_witnesses=10):
    if set(lhs.vars) != set(rhs.vars):
        raise ValueError("identity sides must share variables")
    if rhs.vars != lhs.vars:
        rhs = rhs.reorder(lhs.vars)
    box = window_box(lhs.vars, window)
    lo = tuple(box[v][0] for v in lhs.vars)
    hi = tuple(box[v][1] for v in lhs.vars)
    a = lhs.terms_in_box(lo, hi)
    b = rhs.terms_in_box(lo, hi)
    mism = []
    for e in sorted(set(a) | set(b)):
        x, y = a.get(e, 0), b.get(e, 0)
        if x - y:
            mism.append((dict(zip(lhs.vars, e)), x, y))
            if len(mism) >= max_witnesses:
                break
    checked = 1
    for l, h in zip(lo, hi):
        checked *= h - l + 1
    nonzero = len(set(a) | set(b))
    return Report(name, box, mism, checked, nonzero, lhs.vars)


# ---------------------------------------------------------------------------
# rational functions of t

def _poly_mul(p, q):
    out = {}
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            e = e1 + e2
            out[e] = out.get(e, 0) + c1 * c2
    return {e: ParamScalar.lift(c) for e, c in out.items() if c}


def _poly_pow_linear(a, m):
    """(a + t)^m for m >= 0 as {exp: coeff}."""
    return {k: ParamScalar.lift(a) ** (m - k) * gen_binom(m, k) for k in range(m + 1)}


class RationalFn:
    """numerator(t) * prod (a + t)^{-m}; numerator is a Laurent polynomial."""

    __slots__ = ("num", "den", "_plus", "_minus")

    def __init__(self, num=None, factors=()):
        num = {int(e): ParamScalar.lift(c) for e, c in (num or {}).items()}
        den = {}
        for a, b, m in factors:
            a, b = ParamScalar.lift(a), ParamScalar.lift(b)
            if not a and not b:
                raise ZeroDivisionError("factor (0 + 0 t)")
            if m == 0:
                continue
            if not b:
                num = {e: c * a ** (-m) for e, c in num.items()}
                continue
            if not b.is_monomial():
                raise NonMonomialFactor(f"leading coefficient {b} is not a unit")
            num = {e: c * b ** (-m) for e, c in num.items()}
            a = a * b.inverse()
            if not a:
                num = {e - m: c for e, c in num.items()}
                continue
            if m < 0:
                num = _poly_mul(num, _poly_pow_linear(a, -m))
                continue
            den[a] = den.get(a, 0) + m
        self.num = {e: c for e, c in num.items() if c}
        self.den = den
        self._plus = None
        self._minus = None

    @classmethod
    def laurent(cls, terms):
        return cls(terms)

    @classmethod
    def t_power(cls, n, c=1):
        return cls({n: c})

    @classmethod
    def const(cls, c):
        return cls({0: c})

    def factors(self):
        return [(a, ONE, m) for a, m in sorted(self.den.items(), key=lambda x: repr(x[0]))]

    def is_laurent(self):
        return not self.den

    def _with_den(self, num, den):
        out = RationalFn(num)
        out.den = {a: m for a, m in den.items() if m}
        return out

    def __mul__(self, other):
        if not isinstance(other, RationalFn):
            c = ParamScalar.lift(other)
            return self._with_den({e: v * c for e, v in self.num.items()}, self.den)
        den = dict(self.den)
        for a, m in other.den.items():
            den[a] = den.get(a, 0) + m
        return self._with_den(_poly_mul(self.num, other.num), den)

    __rmul__ = __mul__

    def _lift_to(self, den):
        num = self.num
        for a, m in den.items():
            extra = m - self.den.get(a, 0)
            if extra:
                num = _poly_mul(num, _poly_pow_linear(a, extra))
        return num

    def __add__(self, other):
        if not isinstance(other, RationalFn):
            other = RationalFn.const(other)
        den = dict(self.den)
        for a, m in other.den.items():
            den[a] = max(den.get(a, 0), m)
        n1, n2 = self._lift_to(den), other._lift_to(den)
        num = dict(n1)
        for e, c in n2.items():
            num[e] = num.get(e, ZERO) + c
        return self._with_den(num, den)

    __radd__ = __add__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other if isinstance(other, RationalFn) else -ParamScalar.lift(other))

    def __eq__(self, other):
        if not isinstance(other, RationalFn):
            other = RationalFn.const(other)
        diff = self - other
        return not any(diff.num.values())

    def __hash__(self):
        raise TypeError("RationalFn is not hashable")

    def __pow__(self, n):
        if n < 0:
            if self.den or len(self.num) != 1:
                raise NotImplementedError("only monomials can be inverted")
            (e, c), = self.num.items()
            return RationalFn({-e * -n: c.inverse() ** (-n)})
        out = RationalFn.const(1)
        for _ in range(n):
            out = out * self
        return out

    def translate(self, c):
        """t -> t + c."""
        c = ParamScalar.lift(c)
        out = RationalFn.const(0)
        pieces = []
        for e, coef in self.num.items():
            if e >= 0:
                pieces.append(RationalFn(_poly_pow_linear(c, e)) * coef)
            elif c:
                pieces.append(RationalFn({0: coef}, [(c, 1, -e)]))
            else:
                pieces.append(RationalFn({e: coef}))
        for p in pieces:
            out = out + p
        facs = [(a + c, 1, m) for a, m in self.den.items()]
        return out * RationalFn({0: 1}, facs)

    def invert_t(self):
        """t -> t^{-1}, renormalized."""
        num = {-e: c for e, c in self.num.items()}
        facs = []
        shift = 0
        for a, m in self.den.items():
            if not a.is_monomial():
                raise NonMonomialFactor(f"cannot invert around the non-unit {a}")
            # (a + 1/t)^{-m} = t^m a^{-m} (a^{-1} + t)^{-m}
            shift += m
            num = {e: c * a ** (-m) for e, c in num.items()}
            facs.append((a.inverse(), 1, m))
        num = {e + shift: c for e, c in num.items()}
        return RationalFn(num, facs)

    # expansions
    def _factor_series(self, direction, upto):
        """Coefficients of prod (a+t)^{-m}: plus -> powers t^k, minus -> t^{-M-k}."""
        cache = self._plus if direction == "plus" else self._minus
        if cache is not None and len(cache) > upto:
            return cache
        series = [ONE] + [ZERO] * upto
        for a, m in self.den.items():
            if not a.is_monomial():
                raise NonMonomialFactor(f"cannot expand around the non-unit {a}")
            if direction == "plus":
                fac = [a ** (-m - k) * gen_binom(-m, k) for k in range(upto + 1)]
            else:
                fac = [a ** k * gen_binom(-m, k) for k in range(upto + 1)]
            new = [ZERO] * (upto + 1)
            for i, x in enumerate(series):
                if not x:
                    continue
                for j in range(upto + 1 - i):
                    if fac[j]:
                        new[i + j] = new[i + j] + x * fac[j]
            series = new
        if direction == "plus":
            self._plus = series
        else:
            self._minus = series
        return series

    def total_den(self):
        return sum(self.den.values())

    def iota_low(self):
        """Lowest power of t in the plus-expansion (None for 0)."""
        return min(self.num) if self.num else None

    def iota_high(self):
        """Highest power of t in the minus-expansion (None for 0)."""
        return max(self.num) - self.total_den() if self.num else None

    def iota_coeff(self, n, direction="plus"):
        if not self.num:
            return ZERO
        if not self.den:
            return self.num.get(n, ZERO)
        total = ZERO
        if direction == "plus":
            need = n - min(self.num)
            if need < 0:
                return ZERO
            s = self._factor_series("plus", need)
            for e, c in self.num.items():
                k = n - e
                if 0 <= k < len(s) and s[k]:
                    total = total + c * s[k]
            return total
        M = self.total_den()
        need = max(self.num) - M - n
        if need < 0:
            return ZERO
        s = self._factor_series("minus", need)
        for e, c in self.num.items():
            k = e - M - n
            if 0 <= k < len(s) and s[k]:
                total = total + c * s[k]
        return total

    def __repr__(self):
        num = " + ".join(f"({c})t^{e}" for e, c in sorted(self.num.items())) or "0"
        den = "".join(f"(({a}) + t)^-{m}" for a, m in self.den.items())
        return f"RationalFn[{num}{' * ' + den if den else ''}]"


def iota_expand(f, direction="plus", var="t"):
    if direction not in ("plus", "minus"):
        raise ValueError("direction is 'plus' or 'minus'")
    if not f.num:
        return zero_series((var,))
    if f.is_laurent():
        return PolySeries((var,), {(e,): c for e, c in f.num.items()})
    if direction == "plus":
        support = [SupportCone((f.iota_low(),), [(1,)])]
    else:
        support = [SupportCone((f.iota_high(),), [(-1,)])]
    return FnSeries((var,), lambda e: f.iota_coeff(e[0], direction), support)


def rf_translate(f, a):
    return f.translate(a)


def rf_invert_t(f):
    return f.invert_t()
