"""Actions on the full dual (W1 (x) W2)*: tau, Y', L', sigma and the compatibility checks.

A functional is evaluated pointwise on basis pairs.  Values are exact scalars,
or linear forms (a Vec keyed by basis pairs) for the symbolic functional whose
value at (a, b) is the coordinate lambda(a (x) b) itself; checking an identity
on the symbolic functional checks it for every functional at once.
"""
import random
from fractions import Fraction
from math import factorial

from .scalars import Z, ParamScalar, gen_binom, zpow
from .series import RationalFn
from .vertex import (LoopElement, Vec, WrongLocalization, conjugate_terms,
                     o_involution, pairing, tau_W, translate_pm)


class CutoffExceeded(RuntimeError):
    pass


class UnsupportedSpectrum(ValueError):
    pass


class PreconditionUnmet(ValueError):
    pass


Z_INV = Z.inverse()


def _sgn(k):
    return -1 if k % 2 else 1


def _axpy(acc, val, coef=1):
    """acc + val * coef, tolerant of zeros of any type."""
    if not val or not coef:
        return acc
    term = val * coef if coef != 1 else val
    if not acc:
        return term
    return acc + term


# ---------------------------------------------------------------------------
# functionals

class Functional:
    """Linear functional on W1 (x) W2, evaluated on basis pairs."""

    label = "lambda"
    degree = None      # A~-degree beta if known to be homogeneous

    def __init__(self, W1, W2):
        self.W1, self.W2 = W1, W2
        self._memo = {}

    def value(self, a, b):
        raise NotImplementedError

    def __call__(self, a, b):
        key = (a, b)
        memo = self._memo
        if key in memo:
            return memo[key]
        val = self.value(a, b)
        memo[key] = val
        return val

    def on(self, x1, x2):
        """Bilinear extension: x1, x2 are basis keys or Vecs."""
        if not isinstance(x1, Vec):
            if not isinstance(x2, Vec):
                return self(x1, x2)
            acc = 0
            for b, c in x2.items():
                acc = _axpy(acc, self(x1, b), c)
            return acc
        acc = 0
        for a, c in x1.items():
            acc = _axpy(acc, self.on(a, x2), c)
        return acc

    def on_tensor(self, t):
        """Evaluate on an element of W1 (x) W2 given as a Vec over pairs."""
        acc = 0
        for (a, b), c in t.items():
            acc = _axpy(acc, self(a, b), c)
        return acc

    # linear structure
    def __add__(self, other):
        return LinComb([(1, self), (1, other)])

    def __sub__(self, other):
        return LinComb([(1, self), (-1, other)])

    def __neg__(self):
        return LinComb([(-1, self)])

    def __mul__(self, c):
        return LinComb([(c, self)])

    __rmul__ = __mul__

    def lower_bound(self, flavor, v):
        """Certified exponent below which Y'(v, x) lambda vanishes, if known."""
        return None

    def __repr__(self):
        return f"<{self.label}>"


class TableFunctional(Functional):
    """Finitely supported functional given by its values on basis pairs."""

    def __init__(self, W1, W2, values, label="table", degree=None):
        super().__init__(W1, W2)
        self.values = {k: v for k, v in values.items() if v}
        self.label = label
        self.degree = degree
        self.support_bound = max((W1.weight(a) + W2.weight(b) for a, b in self.values), default=None)

    def value(self, a, b):
        return self.values.get((a, b), 0)

    def lower_bound(self, flavor, v):
        if _weight_zero(self.W1, self.W2):
            return 0
        return None


class ZeroFunctional(TableFunctional):
    def __init__(self, W1, W2):
        super().__init__(W1, W2, {}, label="0")


class GenericFunctional(Functional):
    """The symbolic functional: lambda(a (x) b) is the coordinate (a, b)."""

    label = "generic"

    def value(self, a, b):
        return Vec._raw({(a, b): 1})

    def lower_bound(self, flavor, v):
        if _weight_zero(self.W1, self.W2):
            return 0
        return None


class CanonicalFunctional(Functional):
    """lambda(v (x) w) = <w', Y_W(v, z) w> on V (x) W."""

    def __init__(self, W, wdual, label=None):
        super().__init__(W.algebra, W)
        self.W = W
        self.wdual = wdual if isinstance(wdual, Vec) else Vec.basis(wdual)
        self.label = label or f"canonical[{self.wdual}]"
        self._weights = sorted({W.weight(k) for k in self.wdual.keys()})

    def value(self, v, w):
        V, W = self.W.algebra, self.W
        acc = 0
        for target in self._weights:
            n = V.weight(v) + W.weight(w) - target - 1
            c = pairing(self.wdual, W.mode(v, n, w))
            if c:
                acc = _axpy(acc, zpow(-n - 1, c))
        return acc

    def lower_bound(self, flavor, v):
        if flavor != "P":
            return None
        # Y'(v)_p lambda_{w'} = lambda_{Y'(v)_{-p-1} w'} vanishes below the minimal weight
        V = self.W.algebra
        return min(self.W.min_weight - V.weight(k) - max(self._weights) for k in _keys(v))


class PairingFunctional(Functional):
    """lambda(w' (x) w) = <w', w> on W' (x) W; it satisfies the Q(z)-compatibility condition."""

    def __init__(self, W, label=None):
        from .vertex import ContragredientModule
        super().__init__(ContragredientModule(W), W)
        self.W = W
        self.label = label or "pairing"
        self.degree = 0

    def value(self, a, b):
        return 1 if a == b else 0

    def lower_bound(self, flavor, v):
        if _weight_zero(self.W1, self.W2):
            return 0
        return None


class LinComb(Functional):
    def __init__(self, terms):
        flat = []
        for c, f in terms:
            if isinstance(f, LinComb):
                flat.extend((c * c2, f2) for c2, f2 in f.terms)
            else:
                flat.append((c, f))
        self.terms = [(c, f) for c, f in flat if c]
        W1 = terms[0][1].W1
        W2 = terms[0][1].W2
        super().__init__(W1, W2)
        self.label = " + ".join(f"({c}){f.label}" for c, f in self.terms) or "0"
        degs = {f.degree for _, f in self.terms}
        self.degree = degs.pop() if len(degs) == 1 else None

    def value(self, a, b):
        acc = 0
        for c, f in self.terms:
            acc = _axpy(acc, f(a, b), c)
        return acc

    def lower_bound(self, flavor, v):
        bounds = [f.lower_bound(flavor, v) for _, f in self.terms]
        if not bounds or any(b is None for b in bounds):
            return None
        return min(bounds)


class Derived(Functional):
    """Functional computed from another by a pointwise rule."""

    def __init__(self, base, fn, label, degree=None):
        super().__init__(base.W1, base.W2)
        self.base = base
        self._fn = fn
        self.label = label
        self.degree = degree

    def value(self, a, b):
        return self._fn(a, b)

    def lower_bound(self, flavor, v):
        if _weight_zero(self.W1, self.W2):
            return 0
        return None


def _weight_zero(W1, W2):
    """Everything in weight 0: every Y'(v, x) lambda is constant in x."""
    V = W1.algebra
    return all(not M.basis_of_weight(1) and M.min_weight == 0 for M in (V, W1, W2))


def random_functional(W1, W2, seed, max_total=None, label=None, rng=None):
    """Small random rationals on all basis pairs with total weight <= max_total."""
    rng = rng or random.Random(seed)
    if max_total is None:
        max_total = W1.min_weight + W2.min_weight
    values = {}
    for a, b in probe_pairs(W1, W2, max_total):
        num = rng.randint(-3, 3)
        den = rng.randint(1, 3)
        if num:
            values[(a, b)] = Fraction(num, den) if den != 1 else num
    return TableFunctional(W1, W2, values, label=label or f"random[{seed}]")


def probe_pairs(W1, W2, max_total):
    """Basis pairs (a, b) with wt a + wt b <= max_total."""
    out = []
    for wa in range(W1.min_weight, max_total - W2.min_weight + 1):
        for a in W1.basis_of_weight(wa):
            for wb in range(W2.min_weight, max_total - wa + 1):
                for b in W2.basis_of_weight(wb):
                    out.append((a, b))
    return out


# ---------------------------------------------------------------------------
# Y'_P and Y'_Q, closed forms

def _keys(v):
    return list(v.keys()) if isinstance(v, Vec) else [v]


def _conj(W, v):
    return conjugate_terms(W.algebra, v)


def _max_mode(W, v, w):
    return max(W.max_mode(k, w) for k in _keys(v))


def yP_value(v, p, lam, a, b):
    """Coefficient of x^p in (Y'_P(v, x) lambda)(a (x) b)."""
    W1, W2 = lam.W1, lam.W2
    acc = 0
    for e, um in _conj(W1, v):
        # lambda(a (x) Y_2^o(v, x) b): x^p collects (u_m)_{p-1-e}
        acc = _axpy(acc, lam.on(a, W2.act(um, p - 1 - e, b)))
        # residue term: sum_k (-1)^k C(n, k) z^{-n-1} lambda((u_m)_k a (x) b), n = e + k - p
        for k in range(0, _max_mode(W1, um, a) + 1):
            n = e + k - p
            c = gen_binom(n, k)
            if not c:
                continue
            val = lam.on(W1.act(um, k, a), b)
            if val:
                acc = _axpy(acc, val, zpow(-n - 1, c if k % 2 == 0 else -c))
    return acc


def opposite_coeff(W, v, k, w):
    """Coefficient of y^k in Y^o_W(v, y) w."""
    out = Vec()
    for e, um in _conj(W, v):
        out = out + W.act(um, k - 1 - e, w)
    return out


def yQ_value(v, p, lam, a, b):
    """Coefficient of x^p in (Y'_Q(v, x) lambda)(a (x) b)."""
    W1, W2 = lam.W1, lam.W2
    V = W1.algebra
    acc = 0
    top = max(W1.weight(a) - V.weight(k) - W1.min_weight for k in _keys(v))
    # lambda(Y_1^o(v, x + z) a (x) b), expanded in nonnegative powers of z
    for k in range(p, top + 1):
        vec = opposite_coeff(W1, v, k, a)
        if vec:
            acc = _axpy(acc, lam.on(vec, b), zpow(k - p, gen_binom(k, k - p)))
    # minus the residue term with x^{-1} delta((z - x_1)/(-x))
    n = -p - 1
    for l in range(0, _max_mode(W2, v, b) + 1):
        c = gen_binom(n, l)
        if not c:
            continue
        val = lam.on(a, W2.act(v, l, b))
        if val:
            sign = -1 if (n + l) % 2 == 0 else 1
            acc = _axpy(acc, val, zpow(n - l, sign * c))
    return acc


_ycache = {}


def y_coeff(flavor, v, p, lam):
    """The functional x^p-coefficient of Y'(v, x) lambda (cached per lambda)."""
    key = (flavor, _vkey(v), p)
    cache = lam.__dict__.setdefault("_ycoeffs", {})
    hit = cache.get(key)
    if hit is not None:
        return hit
    rule = yP_value if flavor == "P" else yQ_value
    deg = _shift_degree(lam, v)
    out = Derived(lam, lambda a, b: rule(v, p, lam, a, b),
                  f"Y'_{flavor}({_vlabel(v)})_{p}{lam.label}", degree=deg)
    cache[key] = out
    return out


def _vkey(v):
    if isinstance(v, Vec):
        return tuple(sorted(v.items(), key=repr))
    return v


def _vlabel(v):
    return repr(v)


def _shift_degree(lam, v):
    if lam.degree is None:
        return None
    V = lam.W1.algebra
    degs = {V.degree(k) for k in _keys(v)}
    if len(degs) != 1:
        return None
    return lam.W1.add_degree(lam.degree, degs.pop())


def yP_prime(v, lam, a, b, window):
    """{p: coefficient} of (Y'_P(v, x) lambda)(a (x) b) for p in window (lo, hi)."""
    return {p: c for p in range(window[0], window[1] + 1) if (c := yP_value(v, p, lam, a, b))}


def yQ_prime(v, lam, a, b, window):
    return {p: c for p in range(window[0], window[1] + 1) if (c := yQ_value(v, p, lam, a, b))}


# ---------------------------------------------------------------------------
# L'_P(j), L'_Q(j)

def _Lsum(W, terms, w):
    """sum of c * L(j) w over (c, j)."""
    out = Vec()
    for c, j in terms:
        if c:
            out = out + W.L(j, w) * c
    return out


def lP_value(j, lam, a, b):
    W1, W2 = lam.W1, lam.W2
    acc = lam.on(a, W2.L(-j, b))
    terms = [(zpow(i, gen_binom(1 - j, i)), -j - i) for i in range(0, 2 - j)]
    return _axpy(acc, lam.on(_Lsum(W1, terms, a), b))


def lQ_value(j, lam, a, b):
    W1, W2 = lam.W1, lam.W2
    acc = 0
    for i in range(0, j + 2):
        c = zpow(i, gen_binom(j + 1, i) * _sgn(i))
        acc = _axpy(acc, lam.on(W1.L(i - j, a), b), c)
        acc = _axpy(acc, lam.on(a, W2.L(j - i, b)), -c)
    return acc


def l_prime(flavor, j, lam):
    if j not in (-1, 0, 1):
        raise ValueError("only L'(-1), L'(0), L'(1) are defined")
    key = ("L", flavor, j)
    cache = lam.__dict__.setdefault("_ycoeffs", {})
    hit = cache.get(key)
    if hit is not None:
        return hit
    rule = lP_value if flavor == "P" else lQ_value
    out = Derived(lam, lambda a, b: rule(j, lam, a, b), f"L'_{flavor}({j}){lam.label}",
                  degree=lam.degree)
    cache[key] = out
    return out


def lP_prime(j, lam):
    return l_prime("P", j, lam)


def lQ_prime(j, lam):
    return l_prime("Q", j, lam)


# ---------------------------------------------------------------------------
# tau_P, tau_Q on loop elements (the definitions, not the closed forms)

P_POLE = -Z_INV     # the factor (z^{-1} - t) normalizes to (-z^{-1} + t)


def _p_parts(V, xi):
    for a in xi.denominators():
        if a != P_POLE:
            raise WrongLocalization(f"denominator ({a} + t) is not of type (z^-1 - t)")
    oxi = o_involution(V, xi)
    first = LoopElement([(u, g.translate(Z)) for u, g in oxi.terms], "plus")
    second = LoopElement(oxi.terms, "plus")
    return first, second


def tauP_apply(xi, lam):
    V = lam.W1.algebra
    first, second = _p_parts(V, xi)
    W1, W2 = lam.W1, lam.W2

    def val(a, b):
        acc = lam.on(tau_W(W1, first, a), b)
        return _axpy(acc, lam.on(a, tau_W(W2, second, b)))
    return Derived(lam, val, f"tau_P{xi.terms}{lam.label}", degree=_loop_degree(lam, xi))


def tauQ_apply(xi, lam):
    V = lam.W1.algebra
    left = translate_pm(V, xi, "o")
    right = translate_pm(V, xi, "plus")
    W1, W2 = lam.W1, lam.W2

    def val(a, b):
        acc = lam.on(tau_W(W1, left, a), b)
        return _axpy(acc, lam.on(a, tau_W(W2, right, b)), -1)
    return Derived(lam, val, f"tau_Q{xi.terms}{lam.label}", degree=_loop_degree(lam, xi))


def tau_apply(flavor, xi, lam):
    return tauP_apply(xi, lam) if flavor == "P" else tauQ_apply(xi, lam)


def _loop_degree(lam, xi):
    if lam.degree is None:
        return None
    V = lam.W1.algebra
    degs = {V.degree(k) for v, _ in xi.terms for k in v.keys()}
    if len(degs) != 1:
        return None if degs else lam.degree
    return lam.W1.add_degree(lam.degree, degs.pop())


def y_mode_loop(v, p):
    """v (x) t^{-p-1}: the loop element whose tau-image is the x^p coefficient of Y'(v, x)."""
    return LoopElement.mono(v, -p - 1)


# ---------------------------------------------------------------------------
# sigma_P and the coproduct Delta_P

def deltaP_coproduct(V, xi):
    """Delta_P(v (x) f(t)) as a list of (left, right) loop-element pairs:
    (v (x) f(z + t)) (x) (1 (x) t^{-1}) + (1 (x) t^{-1}) (x) (v (x) f(t)),
    every factor expanded in nonnegative powers of t."""
    unit = LoopElement.mono(V.vacuum, -1)
    shifted = LoopElement([(u, g.translate(Z)) for u, g in xi.terms], "plus")
    plain = LoopElement(xi.terms, "plus")
    return [(shifted, unit), (unit, plain)]


def sigmaP_apply(xi, W1, W2, a, b):
    """sigma_P(xi)(a (x) b) = (tau_W1 (x) tau_W2)(Delta_P(xi^o)) (a (x) b), a Vec over pairs."""
    V = W1.algebra
    for d in xi.denominators():
        if d != P_POLE:
            raise WrongLocalization(f"denominator ({d} + t) is not of type (z^-1 - t)")
    out = Vec()
    for left, right in deltaP_coproduct(V, o_involution(V, xi)):
        out = out + _tensor(tau_W(W1, left, a), tau_W(W2, right, b))
    return out


def _tensor(x, y):
    d = {}
    for a, c in x.items():
        for b, e in y.items():
            d[(a, b)] = c * e
    return Vec(d)


# ---------------------------------------------------------------------------
# projections and canonical functionals

def project_beta(lam, beta):
    """Restriction of lambda to the pairs of degree -beta (zero elsewhere)."""
    W1, W2 = lam.W1, lam.W2
    target = W1.neg_degree(beta)

    def val(a, b):
        if W1.add_degree(W1.degree(a), W2.degree(b)) != target:
            return 0
        return lam(a, b)
    return Derived(lam, val, f"proj[{beta}]{lam.label}", degree=beta)


def canonical_lambda(W, wdual):
    return CanonicalFunctional(W, wdual)


# ---------------------------------------------------------------------------
# lower truncation

def scan_lower(flavor, v, lam, pairs, depth, top):
    """Lowest exponent in [-depth, top] with a nonzero coefficient on the pairs."""
    rule = yP_value if flavor == "P" else yQ_value
    for p in range(-depth, top + 1):
        for a, b in pairs:
            if rule(v, p, lam, a, b):
                return p
    return None


def lower_truncation(flavor, v, lam, pairs, depth, top, slack=2):
    """(bound, certified, witness).

    A certified bound comes from the functional itself; otherwise the scan
    checks the bottom ``slack`` exponents of [-depth, top] vanish.
    """
    bound = lam.lower_bound(flavor, v)
    if bound is not None:
        return bound, True, None
    low = scan_lower(flavor, v, lam, pairs, depth, top)
    if low is None:
        return top + 1, False, None
    if low < -depth + slack:
        return low, False, {"v": repr(v), "exponent": low}
    return low, False, None


# ---------------------------------------------------------------------------
# compatibility

class PropertyReport:
    def __init__(self, pid, context, window, witnesses=(), anchor="", checked=0, notes=None,
                 status=None):
        self.id = pid
        self.context = context
        self.window = window
        self.witnesses = list(witnesses)
        self.anchor = anchor
        self.checked = checked
        self.notes = notes or {}
        self.status = status

    @property
    def passed(self):
        return self.status is None and not self.witnesses

    def __bool__(self):
        return self.passed

    def to_json(self):
        return {
            "id": self.id,
            "anchor": self.anchor,
            "context": self.context,
            "window": self.window,
            "pass": self.passed,
            "status": self.status or ("pass" if self.passed else "fail"),
            "checked": self.checked,
            "notes": self.notes,
            "witnesses": [_jsonable(w) for w in self.witnesses],
        }

    def __repr__(self):
        state = self.status or ("pass" if self.passed else f"fail ({len(self.witnesses)} witnesses)")
        return f"PropertyReport({self.id}, {state}, checked={self.checked})"


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (int, str, bool)) or x is None:
        return x
    return repr(x)


def _cpbP_lhs(v, n, M, lam):
    """x0^{-n-1} x1^{-M-1} coefficient of tau_P(x0^{-1} delta((x1^{-1} - z)/x0) Y_t(v, x1)) lambda.

    That coefficient of the kernel times Y_t(v, x1) is v (x) (-z)^n t^{M-n} (-z^{-1} + t)^n.
    """
    f = RationalFn({M - n: zpow(n, _sgn(n % 2))}, [(P_POLE, 1, -n)])
    return tauP_apply(LoopElement.of(v, f), lam)


def _cpbQ_lhs(v, c, d, lam):
    """x0^c x1^d coefficient of tau_Q(z^{-1} delta((x1 - x0)/z) Y_t(v, x0)) lambda:
    the kernel coefficient is v (x) t^{-c-1} (z + t)^{-d-1}."""
    f = RationalFn({-c - 1: 1}, [(Z, 1, d + 1)])
    return tauQ_apply(LoopElement.of(v, f), lam)


def cpb_sides(flavor, v, lam, e0, e1, a, b, bound):
    """Both sides of the delta-kernel half of the compatibility condition at
    x0^e0 x1^e1, evaluated on a (x) b; ``bound`` is a lower truncation for Y'(v, x)."""
    rule = yP_value if flavor == "P" else yQ_value
    rhs = 0
    if flavor == "P":
        n, M = -e0 - 1, -e1 - 1
        lhs = _cpbP_lhs(v, n, M, lam)(a, b)
        # q = n - k - M - 1 >= bound
        for k in range(0, n - M - 1 - bound + 1):
            c = gen_binom(n, k)
            if c:
                rhs = _axpy(rhs, rule(v, n - k - M - 1, lam, a, b), zpow(k, c * _sgn(k)))
    else:
        c0, d = e0, e1
        lhs = _cpbQ_lhs(v, c0, d, lam)(a, b)
        for k in range(0, c0 - bound + 1):
            cc = gen_binom(d + k, k)
            if cc:
                rhs = _axpy(rhs, rule(v, c0 - k, lam, a, b), zpow(-d - k - 1, cc * _sgn(k)))
    return lhs, rhs


def check_compat(flavor, lam, gens, window, pairs=None, probe_weight=None, depth=None, slack=2,
                 max_witnesses=8):
    """Parts (a) and (b) of the compatibility condition, windowed.

    ``window`` is the radius R: exponents of x0 and x1 range over [-R, R].
    """
    W1, W2 = lam.W1, lam.W2
    if pairs is None:
        if probe_weight is None:
            probe_weight = W1.min_weight + W2.min_weight + max(W1.cutoff or 0, W2.cutoff or 0)
        pairs = probe_pairs(W1, W2, probe_weight)
    R = window
    if depth is None:
        depth = 3 * R + 2 * probe_weight_of(pairs, W1, W2) + 6
    witnesses = []
    checked = 0
    bounds = {}
    rule = yP_value if flavor == "P" else yQ_value
    for v in gens:
        bound, certified, wit = lower_truncation(flavor, v, lam, pairs, depth, depth, slack)
        bounds[repr(v)] = {"bound": bound, "certified": certified}
        if wit:
            witnesses.append({"part": "a", **wit})
            continue
        for a, b in pairs:
            for e0 in range(-R, R + 1):
                for e1 in range(-R, R + 1):
                    checked += 1
                    lhs, rhs = cpb_sides(flavor, v, lam, e0, e1, a, b, bound)
                    diff = lhs - rhs if rhs else lhs
                    if diff:
                        witnesses.append({"part": "b", "v": repr(v), "w1": repr(a), "w2": repr(b),
                                          "exponents": {"x0": e0, "x1": e1},
                                          "lhs": str(lhs), "rhs": str(rhs)})
                        if len(witnesses) >= max_witnesses:
                            break
                if len(witnesses) >= max_witnesses:
                    break
            if len(witnesses) >= max_witnesses:
                break
    return PropertyReport(f"COMPAT-{flavor}", {"lambda": lam.label, "generators": [repr(g) for g in gens],
                                               "pairs": len(pairs)},
                          {"x0": [-R, R], "x1": [-R, R]}, witnesses,
                          anchor=f"{flavor}(z)-compatibility condition", checked=checked,
                          notes={"lower_bounds": bounds, "scan_depth": depth})


def probe_weight_of(pairs, W1, W2):
    return max((W1.weight(a) + W2.weight(b) for a, b in pairs), default=0)


def check_compat_P(lam, gens, window, **kw):
    return check_compat("P", lam, gens, window, **kw)


def check_compat_Q(lam, gens, window, **kw):
    return check_compat("Q", lam, gens, window, **kw)


# ---------------------------------------------------------------------------
# Jacobi identity on a functional

def jacobi_sides(flavor, u, v, lam, c, a, b, bound_u, bound_v):
    """Both sides of the Jacobi identity for Y' at x0^c x1^a x2^b, as functionals."""
    V = lam.W1.algebra
    n = -c - 1
    lhs_terms = []
    # x0^{-1} delta((x1 - x2)/x0) Y'(u, x1) Y'(v, x2)
    for k in range(0, b - bound_v + 1):
        coef = gen_binom(n, k) * _sgn(k)
        if coef:
            inner = y_coeff(flavor, v, b - k, lam)
            lhs_terms.append((coef, y_coeff(flavor, u, a - n + k, inner)))
    # - x0^{-1} delta((x2 - x1)/(-x0)) Y'(v, x2) Y'(u, x1)
    for k in range(0, a - bound_u + 1):
        coef = gen_binom(n, k) * _sgn(n + k)
        if coef:
            inner = y_coeff(flavor, u, a - k, lam)
            lhs_terms.append((-coef, y_coeff(flavor, v, b - n + k, inner)))
    rhs_terms = []
    top = max(V.max_mode(ku, kv) for ku in _keys(u) for kv in _keys(v))
    for i in range(0, top + c + 2):
        j = i - c - 1
        coef = gen_binom(a + i, i) * _sgn(i)
        if not coef:
            continue
        uv = V.act(u, j, v)
        if uv:
            rhs_terms.append((coef, y_coeff(flavor, uv, b + a + i + 1, lam)))
    return lhs_terms, rhs_terms


def _eval_terms(terms, a, b):
    acc = 0
    for c, f in terms:
        acc = _axpy(acc, f(a, b), c)
    return acc


def check_jacobi(flavor, lam, gens, window, pairs, depth=None, max_witnesses=8):
    W1, W2 = lam.W1, lam.W2
    R = window
    if depth is None:
        depth = 3 * R + 2 * probe_weight_of(pairs, W1, W2) + 6
    witnesses, checked = [], 0
    bounds = {}
    for g in gens:
        bd = lam.lower_bound(flavor, g)
        if bd is None:
            low = scan_lower(flavor, g, lam, pairs, depth, depth)
            bd = low if low is not None else depth
        bounds[_vkey(g)] = bd
    for u in gens:
        for v in gens:
            for c in range(-R, R + 1):
                for x1 in range(-R, R + 1):
                    for x2 in range(-R, R + 1):
                        lt, rt = jacobi_sides(flavor, u, v, lam, c, x1, x2,
                                              bounds[_vkey(u)], bounds[_vkey(v)])
                        for a, b in pairs:
                            checked += 1
                            lhs = _eval_terms(lt, a, b)
                            rhs = _eval_terms(rt, a, b)
                            if lhs - rhs if rhs else lhs:
                                witnesses.append({"u": repr(u), "v": repr(v), "w1": repr(a), "w2": repr(b),
                                                  "exponents": {"x0": c, "x1": x1, "x2": x2},
                                                  "lhs": str(lhs), "rhs": str(rhs)})
                                if len(witnesses) >= max_witnesses:
                                    return witnesses, checked
    return witnesses, checked


# ---------------------------------------------------------------------------
# exact linear algebra over Q(z) on evaluation vectors

def _sympy_value(c):
    import sympy
    zs = sympy.Symbol("z")
    if isinstance(c, ParamScalar):
        return sum((sympy.Rational(q.numerator, q.denominator) if isinstance(q, Fraction) else sympy.Integer(q))
                   * zs ** e for e, q in c.terms.items())
    if isinstance(c, Fraction):
        return sympy.Rational(c.numerator, c.denominator)
    return sympy.Integer(c)


def eval_vector(lam, pairs):
    return [lam(a, b) for a, b in pairs]


def _domain_matrix(rows):
    import sympy
    from sympy.polys.matrices import DomainMatrix
    zs = sympy.Symbol("z")
    K = sympy.QQ.frac_field(zs)
    data = [[K.from_sympy(_sympy_value(c)) for c in row] for row in rows]
    ncols = len(rows[0]) if rows else 0
    return DomainMatrix(data, (len(rows), ncols), K), K


def rank_of(rows):
    if not rows or not rows[0]:
        return 0
    M, _ = _domain_matrix(rows)
    return M.rank()


def _from_domain(K, x):
    """Element of Q(z) back to a rational or ParamScalar (Laurent polynomials only)."""
    import sympy
    zs = sympy.Symbol("z")
    expr = sympy.together(K.to_sympy(x))
    num, den = sympy.fraction(expr)
    pn = sympy.Poly(num, zs)
    pd = sympy.Poly(den, zs)
    if len(pd.terms()) != 1:
        raise UnsupportedSpectrum(f"value {expr} is not a Laurent polynomial in z")
    (dexp,), dcoef = pd.terms()[0]
    terms = {}
    for (e,), c in pn.terms():
        q = Fraction(int(sympy.numer(c / dcoef)), int(sympy.denom(c / dcoef)))
        terms[e - dexp] = q
    ps = ParamScalar(terms)
    return ps.constant() if ps.is_constant() else ps


def nullspace(rows, ncols):
    """Basis of {x : rows . x = 0} with entries rational or in Q[z, z^-1]."""
    if not rows:
        return [[1 if i == j else 0 for i in range(ncols)] for j in range(ncols)]
    M, K = _domain_matrix(rows)
    N = M.nullspace()
    out = []
    rws = N.to_Matrix().tolist() if hasattr(N, "to_Matrix") else N.to_sympy().tolist()
    for r in rws:
        out.append([_from_domain(K, K.from_sympy(x)) for x in r])
    return out


# ---------------------------------------------------------------------------
# the closure W_lambda

def l0_eigen_decomposition(flavor, lam, pairs, max_degree=8):
    """Split lambda into generalized L'(0)-eigencomponents.

    Returns [(eigenvalue, component functional)].  The minimal polynomial of
    L'(0) on the Krylov span of lambda is computed exactly and factored.
    """
    import sympy
    krylov = [lam]
    vecs = [eval_vector(lam, pairs)]
    if not any(vecs[0]):
        return []
    while True:
        nxt = l_prime(flavor, 0, krylov[-1])
        vec = eval_vector(nxt, pairs)
        if rank_of(vecs + [vec]) == len(vecs):
            break
        krylov.append(nxt)
        vecs.append(vec)
        if len(krylov) > max_degree:
            raise CutoffExceeded("L'(0) Krylov space exceeds the probe capacity")
    # solve vec = sum c_i vecs[i]
    cols = list(map(list, zip(*vecs)))
    rows = [row + [v] for row, v in zip(cols, vec)]
    ns = nullspace(rows, len(vecs) + 1)
    sol = ns[0]
    last = sol[-1]
    coeffs = [_div(-s, last) for s in sol[:-1]]
    # minimal polynomial t^d - sum coeffs[i] t^i
    t = sympy.Symbol("t")
    d = len(vecs)
    poly = t ** d - sum(_sympy_value(c) * t ** i for i, c in enumerate(coeffs))
    if poly.free_symbols - {t}:
        raise UnsupportedSpectrum(f"L'(0) minimal polynomial {poly} depends on z")
    roots = sympy.roots(sympy.Poly(poly, t))
    if sum(roots.values()) != d or any(not r.is_integer for r in roots):
        raise UnsupportedSpectrum(f"L'(0) minimal polynomial {sympy.factor(poly)} has non-integer roots")
    if len(roots) == 1:
        return [(int(next(iter(roots))), lam)]
    # idempotents e_r(t) = 1 mod (t-r)^m_r, 0 mod the other factors
    out = []
    for r, m in roots.items():
        rest = sympy.Integer(1)
        for s2, m2 in roots.items():
            if s2 != r:
                rest *= (t - s2) ** m2
        inv = sympy.invert(rest, (t - r) ** m, t)
        e = sympy.Poly(sympy.rem(sympy.expand(rest * inv), poly, t), t)
        out.append((int(r), _poly_in_l0(flavor, e, lam)))
    return out


def _poly_in_l0(flavor, poly, lam):
    """poly(L'(0)) lambda, by Horner's rule."""
    coeffs = poly.all_coeffs()
    acc = None
    for c in coeffs:
        q = Fraction(int(c.p), int(c.q))
        q = q.numerator if q.denominator == 1 else q
        if acc is None:
            acc = lam * q
        else:
            acc = l_prime(flavor, 0, acc) + lam * q
    return acc


def _div(a, b):
    if isinstance(b, ParamScalar):
        if b.is_constant():
            b = b.constant()
        else:
            return a * b.inverse()
    if isinstance(a, ParamScalar):
        return a * Fraction(1, 1) / b
    return Fraction(a) / b if not isinstance(a, Fraction) else a / b


def closure_Wlambda(lam, flavor, gens, cutoff, pairs, complete=False, max_dim=200):
    """Basis of the doubly graded subspace generated by lambda, up to L'(0)-weight cutoff.

    Returns (basis, dims) where basis is a list of (weight, degree, functional)
    and dims maps (weight, degree) to the dimension found.  Independence is
    decided on the probe pairs; unless they exhaust W1 (x) W2 (``complete``),
    a weight space that fills all probe coordinates raises CutoffExceeded.
    """
    W1, W2 = lam.W1, lam.W2
    V = W1.algebra
    if not any(eval_vector(lam, pairs)):
        return [], {}
    lam = LinComb([(1, lam)])
    seeds = []
    degrees = list(range(W1.group_order)) if W1.group_order > 1 else [0]
    for beta in degrees:
        part = project_beta(lam, beta) if W1.group_order > 1 else lam
        if W1.group_order == 1:
            part.degree = 0 if lam.degree is None else lam.degree
        if not any(eval_vector(part, pairs)):
            continue
        for wt, comp in l0_eigen_decomposition(flavor, part, pairs):
            seeds.append((wt, beta, comp))
    basis = []
    spaces = {}
    queue = list(seeds)

    def add(wt, deg, f):
        vec = eval_vector(f, pairs)
        if not any(vec):
            return False
        rows = spaces.setdefault((wt, deg), [])
        if rank_of(rows + [vec]) == len(rows):
            return False
        if not complete and len(rows) + 1 >= len(pairs):
            raise CutoffExceeded(f"closure at weight {wt} saturates the {len(pairs)} probe pairs")
        rows.append(vec)
        basis.append((wt, deg, f))
        if len(basis) > max_dim:
            raise CutoffExceeded("closure exceeds the dimension bound")
        return True

    for wt, deg, f in seeds:
        add(wt, deg, f)
    queue = list(basis)
    while queue:
        wt, deg, f = queue.pop(0)
        images = []
        for j in (-1, 0, 1):
            images.append((wt - j, deg, l_prime(flavor, j, f)))
        for v in gens:
            h = V.weight(_keys(v)[0])
            dv = V.degree(_keys(v)[0])
            for p in range(-wt - h - cutoff - 2, cutoff - wt - h + 1):
                nw = wt + h + p
                if nw > cutoff:
                    continue
                images.append((nw, W1.add_degree(deg, dv), y_coeff(flavor, v, p, f)))
        for nw, nd, g in images:
            if nw > cutoff:
                continue
            if add(nw, nd, g):
                queue.append(basis[-1])
    dims = {}
    for wt, deg, _ in basis:
        dims[(wt, deg)] = dims.get((wt, deg), 0) + 1
    return basis, dims
