"""Graded modules for Mobius vertex algebras, opposite operators, loop elements."""
import json
from fractions import Fraction
from math import factorial

from .scalars import Z, ParamScalar, as_rational
from .series import FnSeries, RationalFn, SupportCone


class TruncationOverflow(RuntimeError):
    pass


class WrongLocalization(ValueError):
    pass


class Vec:
    """Sparse vector: basis key -> scalar (rational or ParamScalar)."""

    __slots__ = ("d",)

    def __init__(self, d=None):
        self.d = {k: v for k, v in (d or {}).items() if v}

    @classmethod
    def basis(cls, key, c=1):
        return cls({key: c})

    @classmethod
    def _raw(cls, d):
        obj = cls.__new__(cls)
        obj.d = d
        return obj

    def __add__(self, other):
        if not isinstance(other, Vec):
            # scalar zeros mix freely with vectors; anything else is an error
            if not other:
                return self
            if not self.d:
                return other
            return NotImplemented
        if not other.d:
            return self
        if not self.d:
            return other
        out = dict(self.d)
        for k, v in other.d.items():
            s = out[k] + v if k in out else v
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return Vec._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return Vec._raw({k: -v for k, v in self.d.items()})

    def __sub__(self, other):
        if not isinstance(other, Vec) and not other:
            return self
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, c):
        if isinstance(c, Vec):
            return NotImplemented
        if not c:
            return Vec._raw({})
        out = {}
        for k, v in self.d.items():
            w = v * c
            if w:
                out[k] = w
        return Vec._raw(out)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (Fraction(1) / c)

    def __bool__(self):
        return bool(self.d)

    def __eq__(self, other):
        if not isinstance(other, Vec) and not other:
            return not self.d
        if not isinstance(other, Vec):
            return NotImplemented
        return not (self - other).d

    def __hash__(self):
        return hash(frozenset(self.d.items()))

    def get(self, k):
        return self.d.get(k, 0)

    def items(self):
        return self.d.items()

    def keys(self):
        return self.d.keys()

    def __len__(self):
        return len(self.d)

    def __repr__(self):
        if not self.d:
            return "0"
        return " + ".join(f"({v})[{k}]" for k, v in sorted(self.d.items(), key=lambda kv: repr(kv[0])))

    def to_json(self):
        return [[_key_json(k), _scalar_json(v)] for k, v in sorted(self.d.items(), key=lambda kv: repr(kv[0]))]


def _key_json(k):
    return list(k) if isinstance(k, tuple) else k


def _scalar_json(v):
    if isinstance(v, ParamScalar):
        return v.to_json()
    return str(v)


def lin(fn, vec):
    """Extend a function on basis keys linearly over a Vec."""
    out = Vec()
    for k, c in vec.items():
        out = out + fn(k) * c
    return out


# ---------------------------------------------------------------------------
# modules

class GradedModule:
    """Interface: a generalized module for a Mobius vertex algebra.

    Subclasses provide ``weight``, ``degree``, ``basis_of_weight``, ``mode`` and
    ``L``.  Keys of the algebra are passed as ``u`` in ``mode(u, n, w)``.
    """

    algebra = None
    min_weight = 0
    group_order = 1
    cutoff = None
    name = "module"

    def weight(self, key):
        raise NotImplementedError

    def degree(self, key):
        return 0

    def basis_of_weight(self, n):
        raise NotImplementedError

    def basis_upto(self, n):
        out = []
        for k in range(self.min_weight, n + 1):
            out.extend(self.basis_of_weight(k))
        return out

    def mode(self, u, n, w):
        raise NotImplementedError

    def L(self, j, w):
        raise NotImplementedError

    def max_mode(self, u, w):
        """Largest n with u_n w possibly nonzero."""
        return self.algebra.weight(u) + self.weight(w) - 1 - self.min_weight

    # linear helpers
    def act(self, u, n, w):
        """u, w may be keys or Vecs."""
        if isinstance(u, Vec):
            return lin(lambda k: self.act(k, n, w), u)
        if isinstance(w, Vec):
            return lin(lambda k: self.mode(u, n, k), w)
        return self.mode(u, n, w)

    def Lvec(self, j, w):
        if isinstance(w, Vec):
            return lin(lambda k: self.L(j, k), w)
        return self.L(j, w)

    def homogeneous_parts(self, vec):
        parts = {}
        for k, c in vec.items():
            parts.setdefault(self.weight(k), {})[k] = c
        return {h: Vec(d) for h, d in parts.items()}

    def add_degree(self, a, b):
        return (a + b) % self.group_order if self.group_order > 1 else 0

    def neg_degree(self, a):
        return (-a) % self.group_order if self.group_order > 1 else 0


class VertexAlgebra(GradedModule):
    vacuum = None
    central_charge = None

    @property
    def algebra(self):
        return self


def L1_powers(V, v):
    """[v, L(1)v, L(1)^2 v, ...] until zero (L(1) is nilpotent on V)."""
    out = []
    cur = v if isinstance(v, Vec) else Vec.basis(v)
    while cur:
        out.append(cur)
        cur = V.Lvec(1, cur)
        if len(out) > 64:
            raise RuntimeError("L(1) does not act nilpotently")
    return out


def conjugate_terms(V, v):
    """e^{xL(1)}(-x^{-2})^{L(0)} v as a list of (x-exponent, Vec)."""
    if isinstance(v, Vec):
        parts = V.homogeneous_parts(v)
        if len(parts) != 1:
            out = {}
            for part in parts.values():
                for e, vec in conjugate_terms(V, part):
                    out[e] = out.get(e, Vec()) + vec
            return sorted((e, vec) for e, vec in out.items() if vec)
        (h, vec), = parts.items()
        return _conjugate_homogeneous(V, vec, h)
    cache = V.__dict__.setdefault("_conj_cache", {})
    hit = cache.get(v)
    if hit is None:
        hit = _conjugate_homogeneous(V, Vec.basis(v), V.weight(v))
        cache[v] = hit
    return hit


def _conjugate_homogeneous(V, vec, h):
    sign = -1 if h % 2 else 1
    return [(m - 2 * h, um * Fraction(sign, factorial(m)))
            for m, um in enumerate(L1_powers(V, vec))]


def conjugate_vo(V, v, xvar="x"):
    """Returns {exponent of x: Vec}."""
    return {e: vec for e, vec in conjugate_terms(V, v)}


def opposite_mode(W, v, n, w):
    """v^o_n w where Y^o(v, x) = sum_n v^o_n x^{-n-1}."""
    V = W.algebra
    out = Vec()
    for e, um in conjugate_terms(V, v):
        # x^e Y(um, x^{-1}) = sum_k um_k x^{e + k + 1}; x^{-n-1} -> k = -n - 2 - e
        out = out + W.act(um, -n - 2 - e, w)
    return out


def y_series(W, v, w, var="x"):
    """Y_W(v, x) w as a series in one variable with Vec coefficients."""
    V = W.algebra
    top = max(W.max_mode(k, w) for k in (v.keys() if isinstance(v, Vec) else [v]))
    return FnSeries((var,), lambda e: W.act(v, -e[0] - 1, w),
                    [SupportCone((-top - 1,), [(1,)])])


def y_opposite(W, v, w, var="x"):
    """Y^o_W(v, x) w; bounded above in x, with infinitely many negative powers
    unless the module is finite dimensional."""
    V = W.algebra
    keys = v.keys() if isinstance(v, Vec) else [v]
    top = max(W.weight(w) - V.weight(k) - W.min_weight for k in keys)
    return FnSeries((var,), lambda e: opposite_mode(W, v, -e[0] - 1, w),
                    [SupportCone((top,), [(-1,)])])


def y_opposite_poly(W, v, w, max_weight):
    """Terms of Y^o(v, x)w whose vectors have weight <= max_weight."""
    V = W.algebra
    h = V.weight(v)
    out = {}
    lo_w = W.min_weight
    top = W.weight(w) - h - lo_w
    # output weight of the x^e term is wt(w) - h - e
    for e in range(top, W.weight(w) - h - max_weight - 1, -1):
        vec = opposite_mode(W, v, -e - 1, w)
        if vec:
            out[e] = vec
    return out


class ContragredientModule(GradedModule):
    """W' on the graded dual basis; keys are the keys of W (dual vectors)."""

    def __init__(self, W):
        self.W = W
        self.algebra = W.algebra
        self.min_weight = W.min_weight
        self.group_order = W.group_order
        self.cutoff = W.cutoff
        self.name = f"({W.name})'"
        self._memo = {}

    def weight(self, key):
        return self.W.weight(key)

    def degree(self, key):
        return self.W.neg_degree(self.W.degree(key))

    def basis_of_weight(self, n):
        return self.W.basis_of_weight(n)

    def mode(self, u, n, w):
        key = (u, n, w)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        target = self.weight(w) + self.algebra.weight(u) - n - 1
        out = {}
        if target >= self.min_weight:
            for b in self.W.basis_of_weight(target):
                c = opposite_mode(self.W, u, n, b).get(w)
                if c:
                    out[b] = c
        res = Vec(out)
        self._memo[key] = res
        return res

    def L(self, j, w):
        target = self.weight(w) - j
        out = {}
        if target >= self.min_weight:
            for b in self.W.basis_of_weight(target):
                c = self.W.L(-j, b).get(w)
                if c:
                    out[b] = c
        return Vec(out)


def contragredient(W):
    return ContragredientModule(W)


def pairing(wdual, w):
    """<w', w> for Vecs over the same basis keys."""
    total = 0
    for k, c in wdual.items():
        d = w.get(k)
        if d:
            total = total + c * d
    return total


# ---------------------------------------------------------------------------
# loop elements: finite sums of v (x) f(t)

class LoopElement:
    """Sum of (Vec over V) (x) (RationalFn in t), tagged with an expansion
    direction ('plus' or 'minus') for the t-series it stands for."""

    def __init__(self, terms=(), direction="plus"):
        self.terms = [(v, f) for v, f in terms if v and f.num]
        self.direction = direction

    @classmethod
    def mono(cls, v, n, c=1):
        v = v if isinstance(v, Vec) else Vec.basis(v)
        return cls([(v, RationalFn({n: c}))])

    @classmethod
    def of(cls, v, f, direction="plus"):
        v = v if isinstance(v, Vec) else Vec.basis(v)
        return cls([(v, f)], direction)

    def __add__(self, other):
        if self.direction != other.direction:
            raise ValueError("cannot add loop elements of different expansion type")
        return LoopElement(self.terms + other.terms, self.direction)

    def scale(self, c):
        return LoopElement([(v, f * c) for v, f in self.terms], self.direction)

    def map_fn(self, fn, direction=None):
        return LoopElement([(v, fn(f)) for v, f in self.terms],
                           direction or self.direction)

    def t_coeff(self, n):
        """Coefficient of t^n (a Vec over V) of the tagged expansion."""
        out = Vec()
        for v, f in self.terms:
            c = f.iota_coeff(n, self.direction)
            if c:
                out = out + v * c
        return out

    def collected(self):
        """basis key of V -> RationalFn, summing all terms."""
        out = {}
        for v, f in self.terms:
            for k, c in v.items():
                g = f * c
                out[k] = out[k] + g if k in out else g
        return {k: f for k, f in out.items() if f.num and not f == 0}

    def same_as(self, other):
        if self.direction != other.direction:
            return False
        a, b = self.collected(), other.collected()
        for k in set(a) | set(b):
            fa = a.get(k, RationalFn())
            fb = b.get(k, RationalFn())
            if not fa == fb:
                return False
        return True

    def denominators(self):
        return {a for _, f in self.terms for a in f.den}

    def __repr__(self):
        return f"LoopElement({self.terms}, {self.direction})"


def o_involution(V, xi):
    """(v (x) f(t))^o = v^o f(t^{-1}); the expansion type flips."""
    out = []
    for v, f in xi.terms:
        g = f.invert_t()
        for e, um in conjugate_terms(V, v):
            # v^o = sum_m c_m u_m t^{-m-2+2h} = sum over conjugate exponents e: t^{e-2}... see below
            out.append((um, g * RationalFn({-e - 2: 1})))
    flip = "minus" if xi.direction == "plus" else "plus"
    return LoopElement(out, flip)


def tau_W(W, xi, w, direction=None):
    """tau_W(xi) w = sum_n a_n v_n w for the expansion sum_n a_n t^n of xi."""
    direction = direction or xi.direction
    out = Vec()
    for v, f in xi.terms:
        if not f.num:
            continue
        keys = list(v.keys())
        if direction == "plus":
            lo = f.iota_low()
            hi = max(W.max_mode(k, w) for k in keys)
        else:
            if not f.is_laurent():
                raise TruncationOverflow("minus-expansion gives an infinite sum of modes")
            lo, hi = min(f.num), max(f.num)
        for n in range(lo, hi + 1):
            c = f.iota_coeff(n, direction)
            if c:
                out = out + W.act(v, n, w) * c
    return out


def translate_pm(V, xi, sign):
    """T^+_{-z}, T^-_{-z} or T^o_{-z} on V (x) iota_+ C[t, t^-1, (z+t)^-1]."""
    for a in xi.denominators():
        if a != Z:
            raise WrongLocalization(f"denominator ({a} + t) is not of type (z + t)")
    moved = LoopElement([(v, f.translate(-Z)) for v, f in xi.terms], "plus")
    if sign == "plus":
        return moved
    moved.direction = "minus"
    if sign == "minus":
        return moved
    if sign == "o":
        return o_involution(V, moved)
    raise ValueError(f"unknown sign {sign!r}")


# ---------------------------------------------------------------------------
# definition files

class TableModule(GradedModule):
    """Module given by explicit tables; components past the cutoff raise."""

    def __init__(self, spec, algebra=None):
        self.name = spec.get("name", "table")
        self.cutoff = spec.get("cutoff")
        self.group_order = int(spec.get("group_order", 1))
        self._basis = []
        self._weight = {}
        self._degree = {}
        for b in spec["basis"]:
            k = _key_from_json(b["name"])
            self._basis.append(k)
            self._weight[k] = int(b.get("weight", 0))
            self._degree[k] = int(b.get("degree", 0))
        self.min_weight = min(self._weight.values()) if self._weight else 0
        self._modes = {}
        for m in spec.get("modes", []):
            key = (_key_from_json(m["u"]), int(m["n"]), _key_from_json(m["w"]))
            self._modes[key] = _vec_from_json(m["out"])
        self._L = {}
        for j, table in spec.get("L", {}).items():
            for w, out in table.items():
                self._L[(int(j), _key_from_json(json.loads(w) if w.startswith("[") else w))] = _vec_from_json(out)
        self._algebra = algebra

    @property
    def algebra(self):
        return self._algebra if self._algebra is not None else self

    def weight(self, key):
        return self._weight[key]

    def degree(self, key):
        return self._degree[key]

    def basis_of_weight(self, n):
        if self.cutoff is not None and n > self.cutoff:
            raise TruncationOverflow(f"weight {n} exceeds the tabulated cutoff {self.cutoff}")
        return [k for k in self._basis if self._weight[k] == n]

    def _guard(self, weight):
        if self.cutoff is not None and weight > self.cutoff:
            raise TruncationOverflow(f"weight {weight} exceeds the tabulated cutoff {self.cutoff}")

    def mode(self, u, n, w):
        out_w = self.algebra.weight(u) + self.weight(w) - n - 1
        if out_w < self.min_weight:
            return Vec()
        self._guard(out_w)
        return self._modes.get((u, n, w), Vec())

    def L(self, j, w):
        out_w = self.weight(w) - j
        if out_w < self.min_weight:
            return Vec()
        self._guard(out_w)
        return self._L.get((j, w), Vec())


class TableAlgebra(TableModule, VertexAlgebra):
    def __init__(self, spec):
        TableModule.__init__(self, spec)
        self.vacuum = _key_from_json(spec["vacuum"])

    @property
    def algebra(self):
        return self


def _key_from_json(k):
    return tuple(k) if isinstance(k, list) else k


def _vec_from_json(out):
    if isinstance(out, dict):
        items = out.items()
    else:
        items = out
    d = {}
    for k, v in items:
        k = _key_from_json(json.loads(k) if isinstance(k, str) and k.startswith("[") else k)
        d[k] = ParamScalar.from_json(v).constant() if isinstance(v, dict) else as_rational(v)
    return Vec(d)


def dump_module(W, cutoff, name=None, is_algebra=False):
    """Tabulate a module up to a weight cutoff in the definition-file format."""
    V = W.algebra
    basis = W.basis_upto(cutoff)
    vbasis = V.basis_upto(cutoff)
    spec = {
        "kind": "algebra" if is_algebra else "module",
        "name": name or W.name,
        "cutoff": cutoff,
        "group_order": W.group_order,
        "basis": [{"name": _key_json(k), "weight": W.weight(k), "degree": W.degree(k)} for k in basis],
        "modes": [],
        "L": {},
    }
    if is_algebra:
        spec["vacuum"] = _key_json(V.vacuum)
    for u in vbasis:
        for w in basis:
            top = W.max_mode(u, w)
            low = V.weight(u) + W.weight(w) - 1 - cutoff
            for n in range(low, top + 1):
                vec = W.mode(u, n, w)
                if vec:
                    spec["modes"].append({"u": _key_json(u), "n": n, "w": _key_json(w),
                                          "out": vec.to_json()})
    for j in (-1, 0, 1):
        table = {}
        for w in basis:
            if W.weight(w) - j > cutoff:
                continue
            vec = W.L(j, w)
            if vec:
                table[json.dumps(_key_json(w)) if isinstance(w, tuple) else w] = vec.to_json()
        spec["L"][str(j)] = table
    return spec


def load_definition(path_or_spec):
    if isinstance(path_or_spec, dict):
        spec = path_or_spec
    else:
        with open(path_or_spec) as fh:
            spec = json.load(fh)
    if spec.get("kind") == "algebra":
        return TableAlgebra(spec)
    algebra = spec.get("algebra")
    if isinstance(algebra, dict):
        algebra = TableAlgebra(algebra)
    return TableModule(spec, algebra)
