"""Table of verifiable properties: delta-function identities, action laws,
compatibility consequences and degree bookkeeping, each checked on a window."""
import os
from fractions import Fraction

from .dual import (GenericFunctional, PairingFunctional, PropertyReport, _axpy, _keys, _sgn, _vkey,
                   canonical_lambda, check_compat, check_jacobi, l_prime, probe_pairs,
                   random_functional, sigmaP_apply, tau_apply, y_coeff, P_POLE, TableFunctional)
from .instances import CommAlgebra, UnsupportedInstance, load_instance
from .scalars import Z, gen_binom, zpow
from .series import (FnSeries, SupportCone, check_identity, kernel, laurent, mk_delta)
from .vertex import (LoopElement, Vec, conjugate_terms, load_definition, o_involution,
                     translate_pm)
from .series import RationalFn


class UnknownProperty(KeyError):
    pass


# ---------------------------------------------------------------------------
# context

class Context:
    """Instance data shared by the checks.

    ``universal`` functionals are used for identities that hold on the whole
    dual; ``compatible`` maps a flavor to functionals known to satisfy the
    compatibility condition.
    """

    def __init__(self, name, V, W, gens, probe_weight, universal, compatible, extra=None,
                 cutoff=None, seed=0, vectors=None, compat_gens=None, compat_weight=None):
        self.name = name
        self.V, self.W = V, W
        self.gens = gens
        self.probe_weight = probe_weight
        self.universal = universal
        self.compatible = compatible
        self.extra = extra or []
        self.cutoff = cutoff
        self.seed = seed
        self.vectors = vectors if vectors is not None else gens
        # compatibility checks are costlier; they use a smaller spanning set
        self.compat_gens = compat_gens if compat_gens is not None else gens
        self.compat_weight = probe_weight if compat_weight is None else compat_weight

    @property
    def is_comm_alg(self):
        return isinstance(self.V, CommAlgebra)

    def pairs(self, lam, weight=None):
        w = self.probe_weight if weight is None else weight
        return probe_pairs(lam.W1, lam.W2, lam.W1.min_weight + lam.W2.min_weight + w)

    def describe(self, lam=None):
        out = {"instance": self.name, "cutoff": self.cutoff,
               "generators": [repr(g) for g in self.gens]}
        if lam is not None:
            out["lambda"] = lam.label
        return out


def balanced_functionals(W1, W2):
    from .tensor import compat_subspace
    return list(compat_subspace(W1, W2, "P").functionals)


def build_context(instance="heisenberg", cutoff=4, seed=0, gen_weight=3, probe_weight=3,
                  compat_weight=2, lam=None):
    """Default context for an instance name (see ``load_instance``)."""
    if isinstance(instance, tuple):
        V, W = instance
        instance = W.name
    elif os.path.exists(instance):
        W = load_definition(instance)
        V = W.algebra
    else:
        V, W = load_instance(instance, cutoff)
    if not isinstance(V, CommAlgebra):
        gens = V.basis_upto(min(gen_weight, cutoff))
        universal = [GenericFunctional(V, W)]
        low = W.basis_of_weight(W.min_weight) + W.basis_of_weight(W.min_weight + 1)
        compatible = {"P": [canonical_lambda(W, w) for w in low[:2]],
                      "Q": [PairingFunctional(W)]}
        vectors = V.basis_upto(cutoff)
        compat_gens = V.basis_upto(min(compat_weight, cutoff))
        pw = probe_weight
    else:
        gens = list(V.names)
        universal = [GenericFunctional(W, W)]
        bal = balanced_functionals(W, W)
        compatible = {"P": bal, "Q": bal}
        vectors = gens
        compat_gens = gens
        pw = compat_weight = 0
    ctx = Context(instance, V, W, gens, pw, universal, compatible, cutoff=cutoff, seed=seed,
                  vectors=vectors, compat_gens=compat_gens, compat_weight=compat_weight)
    if lam is not None:
        ctx.extra = [lam]
    return ctx


def _universal(ctx):
    return ctx.universal + [f for f in ctx.extra]


def _report(pid, ctx, window, witnesses, checked, lam=None, **notes):
    return PropertyReport(pid, ctx.describe(lam), window, witnesses, anchor=ANCHORS.get(pid, ""),
                          checked=checked, notes=notes)


def _diff(x, y):
    if not y:
        return x
    if not x:
        return -y
    return x - y


def _wit(**kw):
    # basis keys keep their repr, scalars and vectors print in their usual form
    return {k: (v if isinstance(v, (int, str, dict)) else repr(v) if isinstance(v, tuple) else str(v))
            for k, v in kw.items()}


# ---------------------------------------------------------------------------
# delta-function identities

def _pure(pid, lhs, rhs, window):
    rep = check_identity(lhs, rhs, window, name=pid)
    wits = [{"exponents": e, "lhs": str(a), "rhs": str(b)} for e, a, b in rep.mismatches]
    return wits, rep.checked


def delta_two_term(window):
    vs = ("x0", "x1", "x2")
    return _pure("two-term", mk_delta("x2", "x1 - x0", vs), mk_delta("x1", "x2 + x0", vs), window)


def delta_three_term(window):
    vs = ("x0", "x1", "x2")
    lhs = mk_delta("x0", "x1 - x2", vs) - kernel("x0^-1", "x2 - x1", "-x0", vs)
    return _pure("three-term", lhs, mk_delta("x2", "x1 - x0", vs), window)


_SUBST_POLY = {-3: Fraction(2, 3), -1: -1, 0: 5, 2: Fraction(-1, 2), 4: 1}


def delta_substitution(window):
    vs = ("x", "y")
    d = mk_delta("x", "y", vs)
    px = laurent(vs, {(e, 0): c for e, c in _SUBST_POLY.items()})
    py = laurent(vs, {(0, e): c for e, c in _SUBST_POLY.items()})
    return _pure("substitution", d * px, d * py, window)


def delta_iota_difference(window):
    f = RationalFn({0: 1}, [(Z, 1, 1)])
    lhs = FnSeries(("t",), lambda e: f.iota_coeff(e[0], "plus") - f.iota_coeff(e[0], "minus"))
    rhs = kernel("z^-1", "-t", "z", ("t",))
    return _pure("iota-difference", lhs, rhs, window)


def delta_inverse_three_term(window):
    vs = ("x0", "x1")
    lhs = mk_delta("x0", "x1^-1 - z", vs) - kernel("x0^-1", "z - x1^-1", "-x0", vs)
    return _pure("inverse-three-term", lhs, kernel("z^-1", "x1^-1 - x0", "z", vs), window)


def delta_product_identity(window):
    vs = ("x0", "x1", "x2", "y1", "y2")
    lhs = (kernel("z^-1", "x1^-1 - y1", "z", vs) * kernel("z^-1", "x2^-1 - y2", "z", vs)) \
        * mk_delta("y2", "y1 - x0", vs)
    rhs = (kernel("x2", "x1^-1 - x0", "x2^-1", vs) * kernel("z^-1", "x2^-1 - y2", "z", vs)) \
        * mk_delta("y1", "y2 + x0", vs)
    return _pure("product-identity", lhs, rhs, window)


# generating series with vector coefficients

def _yt(v, var):
    """Y_t(v, x) = sum_n v (x) t^n x^{-n-1} over (x, t)."""
    vec = v if isinstance(v, Vec) else Vec.basis(v)
    return FnSeries((var, "t"), lambda e: vec if e[0] == -e[1] - 1 else Vec(),
                    [SupportCone((-1, 0), [(1, -1), (-1, 1)])])


def _yt_opposite(V, v, var):
    """Y^o_t(v, x) = sum_n (v (x) t^n)^o x^{-n-1}; the x^q t^j coefficient collects
    the conjugate terms with j = q - e - 1."""
    terms = conjugate_terms(V, v)
    by_shift = {}
    for e, um in terms:
        by_shift[e] = by_shift.get(e, Vec()) + um
    support = [SupportCone((0, -e - 1), [(1, 1), (-1, -1)]) for e in by_shift]
    return FnSeries((var, "t"), lambda q: by_shift.get(q[0] - q[1] - 1, Vec()), support)


def _yt_conjugate(V, v, xvar, yvar):
    """Y_t(e^{x L(1)} (-x^{-2})^{L(0)} v, y) over (x, y, t)."""
    terms = dict(conjugate_terms(V, v))
    support = [SupportCone((e, -1, 0), [(0, 1, -1), (0, -1, 1)]) for e in terms]
    return FnSeries((xvar, yvar, "t"),
                    lambda q: terms.get(q[0], Vec()) if q[1] == -q[2] - 1 else Vec(), support)


def _p_kernel_coeff(v, a, b):
    """x0^a x1^b coefficient of x0^{-1} delta((x1^{-1} - z)/x0) Y_t(v, x1)."""
    n, M = -a - 1, -b - 1
    return LoopElement.of(v, RationalFn({M - n: zpow(n, _sgn(n))}, [(P_POLE, 1, -n)]))


def _q_kernel_coeff(v, a, b):
    """x0^a x1^b coefficient of z^{-1} delta((x1 - x0)/z) Y_t(v, x0)."""
    return LoopElement.of(v, RationalFn({-a - 1: 1}, [(Z, 1, b + 1)]))


def _loop_series(coeff, transform):
    memo = {}

    def fn(e):
        key = e[:2]
        le = memo.get(key)
        if le is None:
            le = transform(coeff(*key))
            memo[key] = le
        return le.t_coeff(e[2])
    return FnSeries(("x0", "x1", "t"), fn)


def _retag(le, direction):
    return LoopElement(le.terms, direction)


def _o_translate(V, le):
    o = o_involution(V, le)
    return LoopElement([(u, f.translate(Z)) for u, f in o.terms], "plus")


LOOP_IDENTITIES = {
    # o applied to the P-kernel times Y_t gives the same kernel times Y^o_t
    "opposite-kernel": (
        _p_kernel_coeff, lambda V, le: o_involution(V, le),
        lambda V, v: mk_delta("x0", "x1^-1 - z", ("x0", "x1")) * _yt_opposite(V, v, "x1")),
    "opposite-kernel-reexpanded": (
        _p_kernel_coeff, lambda V, le: _retag(o_involution(V, le), "plus"),
        lambda V, v: kernel("x0^-1", "z - x1^-1", "-x0", ("x0", "x1")) * _yt_opposite(V, v, "x1")),
    "opposite-kernel-translated": (
        _p_kernel_coeff, _o_translate,
        lambda V, v: kernel("z^-1", "x1^-1 - x0", "z", ("x0", "x1")) * _yt_conjugate(V, v, "x1", "x0")),
    "translation-plus": (
        _q_kernel_coeff, lambda V, le: translate_pm(V, le, "plus"),
        lambda V, v: kernel("x0^-1", "z - x1", "-x0", ("x0", "x1")) * _yt(v, "x1")),
    "translation-minus": (
        _q_kernel_coeff, lambda V, le: translate_pm(V, le, "minus"),
        lambda V, v: mk_delta("x0", "x1 - z", ("x0", "x1")) * _yt(v, "x1")),
    "translation-opposite": (
        _q_kernel_coeff, lambda V, le: translate_pm(V, le, "o"),
        lambda V, v: mk_delta("x0", "x1 - z", ("x0", "x1")) * _yt_opposite(V, v, "x1")),
}


def loop_identity(name, V, vectors, window):
    coeff, transform, rhs = LOOP_IDENTITIES[name]
    wits, checked = [], 0
    for v in vectors:
        lhs = _loop_series(lambda a, b: coeff(v, a, b), lambda le: transform(V, le))
        rep = check_identity(lhs, rhs(V, v), window, name=name)
        checked += rep.checked
        for e, a, b in rep.mismatches:
            wits.append({"v": repr(v), "exponents": e, "lhs": str(a), "rhs": str(b)})
    return wits, checked


PURE_DELTA = {
    "two-term": delta_two_term,
    "three-term": delta_three_term,
    "substitution": delta_substitution,
    "iota-difference": delta_iota_difference,
    "inverse-three-term": delta_inverse_three_term,
    "product-identity": delta_product_identity,
}

DELTA_IDS = sorted(["DELTA-" + k.upper() for k in PURE_DELTA] +
                   ["DELTA-" + k.upper() for k in LOOP_IDENTITIES])


def _delta_check(pid, ctx, window):
    key = pid[len("DELTA-"):].lower()
    if key in PURE_DELTA:
        wits, checked = PURE_DELTA[key](window)
        desc = {"instance": None}
    else:
        wits, checked = loop_identity(key, ctx.V, ctx.vectors, window)
        desc = {"instance": ctx.name, "vectors": [repr(v) for v in ctx.vectors]}
    rep = PropertyReport(pid, desc, window, wits, anchor=ANCHORS[pid], checked=checked)
    return rep


# ---------------------------------------------------------------------------
# action laws

def _flavor(pid):
    return pid[0]


def _evaluate(terms, a, b):
    acc = 0
    for c, f in terms:
        acc = _axpy(acc, f(a, b), c)
    return acc


def check_ident(ctx, flavor, R):
    V = ctx.V
    wits, checked = [], 0
    for lam in _universal(ctx):
        pairs = ctx.pairs(lam)
        for p in range(-R, R + 1):
            f = y_coeff(flavor, V.vacuum, p, lam)
            for a, b in pairs:
                checked += 1
                lhs = f(a, b)
                rhs = lam(a, b) if p == 0 else 0
                if _diff(lhs, rhs):
                    wits.append(_wit(p=p, w1=a, w2=b, lhs=lhs, rhs=rhs))
    return wits, checked


def check_deriv(ctx, flavor, R):
    V = ctx.V
    wits, checked = [], 0
    for lam in _universal(ctx):
        pairs = ctx.pairs(lam)
        for v in ctx.gens:
            dv = V.Lvec(-1, Vec.basis(v))
            for p in range(-R, R + 1):
                left = y_coeff(flavor, dv, p, lam) if dv else None
                right = y_coeff(flavor, v, p + 1, lam)
                for a, b in pairs:
                    checked += 1
                    lhs = left(a, b) if left is not None else 0
                    rhs = _axpy(0, right(a, b), p + 1)
                    if _diff(lhs, rhs):
                        wits.append(_wit(v=v, p=p, w1=a, w2=b, lhs=lhs, rhs=rhs))
    return wits, checked


def commutator_terms(flavor, u, v, lam, a, b):
    """[Y'(u)_a, Y'(v)_b] lambda and the commutator-formula side, as term lists.
    Subscripts are x-exponents."""
    V = lam.W1.algebra
    lhs = [(1, y_coeff(flavor, u, a, y_coeff(flavor, v, b, lam))),
           (-1, y_coeff(flavor, v, b, y_coeff(flavor, u, a, lam)))]
    rhs = []
    top = max(V.max_mode(ku, kv) for ku in _keys(u) for kv in _keys(v))
    for j in range(0, top + 1):
        c = gen_binom(a + j, j) * _sgn(j)
        uv = V.act(u, j, v)
        if c and uv:
            rhs.append((c, y_coeff(flavor, uv, b + a + j + 1, lam)))
    return lhs, rhs


def check_comm(ctx, flavor, R, gens=None):
    wits, checked = [], 0
    gens = gens or ctx.gens
    for lam in _universal(ctx):
        pairs = ctx.pairs(lam)
        for u in gens:
            for v in gens:
                for a in range(-R, R + 1):
                    for b in range(-R, R + 1):
                        lt, rt = commutator_terms(flavor, u, v, lam, a, b)
                        for w1, w2 in pairs:
                            checked += 1
                            lhs, rhs = _evaluate(lt, w1, w2), _evaluate(rt, w1, w2)
                            if _diff(lhs, rhs):
                                wits.append(_wit(u=u, v=v, exponents={"x1": a, "x2": b},
                                                 w1=w1, w2=w2, lhs=lhs, rhs=rhs))
                                if len(wits) >= 8:
                                    return wits, checked
    return wits, checked


def check_sl2(ctx, flavor, R):
    wits, checked = [], 0
    for lam in _universal(ctx):
        pairs = ctx.pairs(lam)
        for j, k in ((1, -1), (1, 0), (0, -1)):
            lt = [(1, l_prime(flavor, j, l_prime(flavor, k, lam))),
                  (-1, l_prime(flavor, k, l_prime(flavor, j, lam)))]
            rt = [(j - k, l_prime(flavor, j + k, lam))]
            for a, b in pairs:
                checked += 1
                lhs, rhs = _evaluate(lt, a, b), _evaluate(rt, a, b)
                if _diff(lhs, rhs):
                    wits.append(_wit(bracket=f"[L'({j}), L'({k})]", w1=a, w2=b, lhs=lhs, rhs=rhs))
    return wits, checked


def check_lycomm(ctx, flavor, R):
    V = ctx.V
    wits, checked = [], 0
    for lam in _universal(ctx):
        pairs = ctx.pairs(lam)
        for v in ctx.gens:
            Lv = {k: V.Lvec(k - 1, Vec.basis(v)) for k in range(0, 3)}
            for j in (-1, 0, 1):
                for p in range(-R, R + 1):
                    lt = [(1, l_prime(flavor, j, y_coeff(flavor, v, p, lam))),
                          (-1, y_coeff(flavor, v, p, l_prime(flavor, j, lam)))]
                    rt = []
                    for k in range(0, j + 2):
                        if Lv[k]:
                            rt.append((gen_binom(j + 1, k), y_coeff(flavor, Lv[k], p - j - 1 + k, lam)))
                    for a, b in pairs:
                        checked += 1
                        lhs, rhs = _evaluate(lt, a, b), _evaluate(rt, a, b)
                        if _diff(lhs, rhs):
                            wits.append(_wit(v=v, j=j, p=p, w1=a, w2=b, lhs=lhs, rhs=rhs))
    return wits, checked


# ---------------------------------------------------------------------------
# compatibility consequences

def _compat_gens(ctx, lam):
    return ctx.compat_gens


def _compat_pairs(ctx, lam):
    return ctx.pairs(lam, ctx.compat_weight)


def check_jacobi_on_compat(ctx, flavor, R, lams=None):
    """Returns (witnesses, checked, unmet) where unmet lists refused functionals."""
    wits, checked, unmet = [], 0, []
    lams = lams if lams is not None else (ctx.extra or ctx.compatible.get(flavor, []))
    for lam in lams:
        pairs = _compat_pairs(ctx, lam)
        gens = _compat_gens(ctx, lam)
        rep = check_compat(flavor, lam, gens, min(R, 2), pairs=pairs)
        if not rep.passed:
            unmet.append({"lambda": lam.label, "compat_witness": rep.witnesses[0]})
            continue
        w, c = check_jacobi(flavor, lam, gens, R, pairs)
        wits.extend(dict(lam=lam.label, **x) for x in w)
        checked += c
    return wits, checked, unmet


def stable_images(ctx, flavor, lam, cutoff):
    """tau(v (x) t^m) lambda for the generators and the m keeping the weight within
    cutoff, and L'(j) lambda."""
    V = lam.W1.algebra
    out = [(f"L'({j})", l_prime(flavor, j, lam)) for j in (-1, 0, 1)]
    base = getattr(lam, "_weights", [0])
    wt = max(base) if base else 0
    for v in ctx.compat_gens:
        h = V.weight(v)
        for p in range(-h - wt, cutoff - h - wt + 1):
            xi = LoopElement.mono(v, -p - 1)
            out.append((f"tau({v!r} t^{-p - 1})", tau_apply(flavor, xi, lam)))
    return out


def check_stable(ctx, flavor, R, cutoff=None, lams=None):
    """Returns (witnesses, checked, images, unmet); unmet lists refused functionals."""
    wits, checked, unmet = [], 0, []
    cutoff = ctx.cutoff if cutoff is None else cutoff
    lams = lams if lams is not None else (ctx.extra or ctx.compatible.get(flavor, [])[:1])
    images = 0
    for lam in lams:
        pairs = _compat_pairs(ctx, lam)
        gens = _compat_gens(ctx, lam)
        base = check_compat(flavor, lam, gens, R, pairs=pairs)
        if not base.passed:
            unmet.append({"lambda": lam.label, "compat_witness": base.witnesses[0]})
            continue
        for name, img in stable_images(ctx, flavor, lam, cutoff):
            images += 1
            rep = check_compat(flavor, img, gens, R, pairs=pairs)
            checked += rep.checked
            for w in rep.witnesses[:2]:
                wits.append({"lambda": lam.label, "operator": name, **w})
    return wits, checked, images, unmet


# ---------------------------------------------------------------------------
# auxiliary lemmas

def _binom_op(op, k, start, combine):
    """[C(A, 0) s, ..., C(A, k) s] with C(A, i) = A(A-1)...(A-i+1)/i!."""
    out = [start]
    cur = start
    for i in range(k):
        cur = combine(op(cur), cur, i)
        out.append(cur)
    return out


def _vec_step(A):
    def combine(Ax, x, i):
        return (Ax - x * i) * Fraction(1, i + 1)
    return lambda s, k: _binom_op(A, k, s, combine)


def _fun_step(A):
    def combine(Ax, x, i):
        return (Ax - x * i) * Fraction(1, i + 1) if i else Ax
    return lambda s, k: _binom_op(A, k, s, combine)


def check_lemma_92(ctx, R):
    """((1 - y/z)^{L'(0)} lambda)(a (x) b) = lambda((1 - y/z)^{L(0) - z L(1)} a (x)
    (1 - y/z)^{-(L(0) - z L(-1))} b), coefficients of y^k for k <= R."""
    wits, checked = [], 0
    for lam in _universal(ctx):
        W1, W2 = lam.W1, lam.W2
        A1 = lambda x: W1.Lvec(0, x) - W1.Lvec(1, x) * Z
        A2n = lambda x: -(W2.Lvec(0, x) - W2.Lvec(-1, x) * Z)
        lam_series = _fun_step(lambda f: l_prime("Q", 0, f))(lam, R)
        for a, b in ctx.pairs(lam):
            left = _vec_step(A1)(Vec.basis(a), R)
            right = _vec_step(A2n)(Vec.basis(b), R)
            for k in range(R + 1):
                checked += 1
                scale = zpow(-k, _sgn(k))
                lhs = _axpy(0, lam_series[k](a, b), scale)
                rhs = 0
                for i in range(k + 1):
                    rhs = _axpy(rhs, lam.on(left[i], right[k - i]), scale)
                if _diff(lhs, rhs):
                    wits.append(_wit(k=k, w1=a, w2=b, lhs=lhs, rhs=rhs))
    return wits, checked


def check_lemma_94(ctx, R):
    """Y'_Q(v, x) = B Y'_Q(B^{-1} v, x/(1 - y/z)) B^{-1} with B = (1 - y/z)^{L'(0)}, on the
    coefficients x^p y^k, v homogeneous."""
    V = ctx.V
    wits, checked = [], 0
    for lam in _universal(ctx):
        pairs = ctx.pairs(lam)
        K = min(R, 3)
        up = _fun_step(lambda f: l_prime("Q", 0, f))
        down = _fun_step(lambda f: -l_prime("Q", 0, f))
        inner = down(lam, K)
        for v in ctx.gens:
            h = V.weight(v)
            for p in range(-R, R + 1):
                for k in range(K + 1):
                    terms = []
                    for l in range(k + 1):
                        cl = gen_binom(-h - p, l)
                        if not cl:
                            continue
                        for i in range(k - l + 1):
                            j = k - l - i
                            f = y_coeff("Q", v, p, inner[j])
                            terms.append((zpow(-k, cl * _sgn(k)), up(f, i)[i]))
                    lhs_f = y_coeff("Q", v, p, lam) if k == 0 else None
                    for a, b in pairs:
                        checked += 1
                        lhs = lhs_f(a, b) if lhs_f is not None else 0
                        rhs = _evaluate(terms, a, b)
                        if _diff(lhs, rhs):
                            wits.append(_wit(v=v, p=p, k=k, w1=a, w2=b, lhs=lhs, rhs=rhs))
    return wits, checked


def _lemma_98_sides(L0, Lm1, w, k, add, scale, zero, c_l0):
    """Coefficient of y^k on both sides of (1 - y/x)^{L(0) - x L(-1)} = e^{y L(-1)} (1 - y/x)^{L(0)},
    as {x-exponent: state}."""
    def A(state):
        out = {}
        for e, s in state.items():
            out[e] = add(out.get(e, zero), L0(s))
            out[e + 1] = add(out.get(e + 1, zero), scale(Lm1(s), -1))
        return out

    def combine(As, s, i):
        out = {}
        for e in set(As) | set(s):
            out[e] = scale(add(As.get(e, zero), scale(s.get(e, zero), -i)), Fraction(1, i + 1))
        return out
    seq = _binom_op(A, k, {0: w}, combine)
    lhs = {e - k: scale(s, _sgn(k)) for e, s in seq[k].items()}
    rhs = {}
    for j in range(k + 1):
        l = k - j
        s = c_l0(w, l)
        for _ in range(j):
            s = Lm1(s)
        s = scale(s, Fraction(_sgn(l), _fact(j)))
        rhs[-l] = add(rhs.get(-l, zero), s)
    return lhs, rhs


def _fact(n):
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


def check_lemma_98(ctx, R):
    wits, checked = [], 0
    # on the module V itself
    V = ctx.V
    for w in ctx.vectors:
        m = V.weight(w)
        for k in range(R + 1):
            lhs, rhs = _lemma_98_sides(
                lambda s: V.Lvec(0, s), lambda s: V.Lvec(-1, s), Vec.basis(w), k,
                lambda x, y: x + y, lambda x, c: x * c, Vec(),
                lambda s, l: s * gen_binom(m, l))
            for e in sorted(set(lhs) | set(rhs)):
                checked += 1
                if _diff(lhs.get(e, Vec()), rhs.get(e, Vec())):
                    wits.append(_wit(space="module", w=w, k=k, x=e, lhs=lhs.get(e), rhs=rhs.get(e)))
    # on the dual with L'_Q(0), L'_Q(-1)
    for lam in _universal(ctx):
        pairs = ctx.pairs(lam)
        L0 = lambda f: l_prime("Q", 0, f) if f is not None else None
        Lm1 = lambda f: l_prime("Q", -1, f) if f is not None else None
        add = lambda x, y: x if y is None else (y if x is None else x + y)
        scale = lambda x, c: None if x is None else x * c

        def c_l0(f, l):
            return _fun_step(L0)(f, l)[l]
        for k in range(min(R, 3) + 1):
            lhs, rhs = _lemma_98_sides(L0, Lm1, lam, k, add, scale, None, c_l0)
            for e in sorted(set(lhs) | set(rhs)):
                for a, b in pairs:
                    checked += 1
                    x = lhs[e](a, b) if lhs.get(e) is not None else 0
                    y = rhs[e](a, b) if rhs.get(e) is not None else 0
                    if _diff(x, y):
                        wits.append(_wit(space="dual", k=k, x=e, w1=a, w2=b, lhs=x, rhs=y))
    return wits, checked


def _cj9_sides(V, u, v):
    """Both sides of the conjugation lemma over (x0, x1, x2) with Vec coefficients."""
    vs = ("x0", "x1", "x2")
    cu, cv = conjugate_terms(V, u), conjugate_terms(V, v)
    hu, hv = V.weight(u), V.weight(v)
    lhs_terms, support = {}, []
    for e1, U in cu:
        for e2, Vf in cv:
            top = max((V.max_mode(k1, k2) for k1 in U.keys() for k2 in Vf.keys()), default=-1)
            k0 = -top - 1
            lhs_terms.setdefault((e1, e2), []).append((U, Vf))
            support.append(SupportCone((k0, e1 - k0, e2 - k0), [(1, -1, -1)]))

    def lhs_fn(e):
        a, b, c = e
        out = Vec()
        for U, Vf in lhs_terms.get((b + a, c + a), []):
            out = out + V.act(U, -a - 1, Vf) * _sgn(a)
        return out
    inner_l = FnSeries(vs, lhs_fn, support)
    top = V.max_mode(u, v)
    a0 = -top - 1
    K = hu + hv + a0

    def rhs_fn(e):
        a, c = e
        w = V.act(u, -a - 1, Vec.basis(v))
        if not w:
            return Vec()
        for f, W in conjugate_terms(V, w):
            if f == c:
                return W
        return Vec()
    inner_r = FnSeries(("x0", "x2"), rhs_fn, [SupportCone((a0, -2 * K), [(1, -1), (1, -2), (0, 1)])])
    ker = mk_delta("x2", "x1 - x0", vs)
    return ker * inner_l, ker * inner_r


def check_lemma_cj9(ctx, R):
    wits, checked = [], 0
    V = ctx.V
    for u in ctx.gens:
        for v in ctx.gens:
            lhs, rhs = _cj9_sides(V, u, v)
            rep = check_identity(lhs, rhs, R, name="conjugation")
            checked += rep.checked
            for e, a, b in rep.mismatches:
                wits.append({"u": repr(u), "v": repr(v), "exponents": e, "lhs": str(a), "rhs": str(b)})
    return wits, checked


def check_commalg_jacobi(ctx, R, lams=None):
    if not ctx.is_comm_alg:
        raise UnsupportedInstance("this property concerns commutative associative algebras")
    wits, checked = [], 0
    lams = lams if lams is not None else (ctx.extra or [random_functional(ctx.W, ctx.W, ctx.seed,
                                                                          label=f"random[{ctx.seed}]")])
    for lam in lams:
        for flavor in ("P", "Q"):
            w, c = check_jacobi(flavor, lam, ctx.compat_gens, min(R, 2), _compat_pairs(ctx, lam))
            wits.extend(dict(flavor=flavor, lam=lam.label, **x) for x in w)
            checked += c
    return wits, checked


# ---------------------------------------------------------------------------
# degree bookkeeping and adjointness

def _loop_spanning(V, flavor, gens, R):
    pole = P_POLE if flavor == "P" else Z
    out = []
    for v in gens:
        for m in range(-R, R + 1):
            for k in range(0, 3):
                out.append(LoopElement.of(v, RationalFn({m: 1}, [(pole, 1, k)] if k else [])))
    return out


def check_tau_degree(ctx, flavor, R):
    """tau(xi) maps functionals of degree beta to degree alpha + beta for xi of degree alpha."""
    W = ctx.W
    V = ctx.V
    if ctx.is_comm_alg:
        W1, W2 = W, W
    else:
        W1, W2 = W, W
    pw = W1.min_weight + W2.min_weight + ctx.probe_weight
    pairs = probe_pairs(W1, W2, pw)
    wits, checked = [], 0
    for a0, b0 in pairs:
        beta = W1.neg_degree(W1.add_degree(W1.degree(a0), W2.degree(b0)))
        lam = TableFunctional(W1, W2, {(a0, b0): 1}, label=f"delta[{a0!r},{b0!r}]", degree=beta)
        for xi in _loop_spanning(V, flavor, ctx.gens, min(R, 2)):
            alpha = V.degree(next(iter(xi.terms[0][0].keys())))
            target = W1.add_degree(alpha, beta)
            img = tau_apply(flavor, xi, lam)
            if img.degree != target:
                wits.append({"xi": repr(xi.terms), "lambda": lam.label, "recorded": img.degree,
                             "expected": target})
            for a, b in pairs:
                checked += 1
                deg = W1.neg_degree(W1.add_degree(W1.degree(a), W2.degree(b)))
                if deg != target and img(a, b):
                    wits.append({"xi": repr(xi.terms), "lambda": lam.label, "w1": repr(a),
                                 "w2": repr(b), "value": repr(img(a, b))})
    return wits, checked


def check_sigma_adjoint(ctx, R):
    V = ctx.V
    wits, checked = [], 0
    for lam in _universal(ctx):
        pairs = ctx.pairs(lam)
        W1, W2 = lam.W1, lam.W2
        for xi in _loop_spanning(V, "P", ctx.gens, min(R, 2)):
            tl = tau_apply("P", xi, lam)
            for a, b in pairs:
                checked += 1
                lhs = tl(a, b)
                rhs = lam.on_tensor(sigmaP_apply(xi, W1, W2, a, b))
                if _diff(lhs, rhs):
                    wits.append(_wit(xi=xi.terms, w1=a, w2=b, lhs=lhs, rhs=rhs))
        # sigma of the vacuum modes: the identity at t^{-1}, zero elsewhere
        for n in range(-R, R + 1):
            xi = LoopElement.mono(V.vacuum, n)
            for a, b in pairs:
                checked += 1
                got = sigmaP_apply(xi, W1, W2, a, b)
                want = Vec.basis((a, b)) if n == -1 else Vec()
                if got != want:
                    wits.append(_wit(xi=xi.terms, w1=a, w2=b, lhs=got, rhs=want))
    return wits, checked


# ---------------------------------------------------------------------------
# the table

ANCHORS = {
    "P-IDENT": "Y'_P(1, x) is the identity",
    "P-DERIV": "L(-1)-derivative property of Y'_P",
    "P-COMM": "commutator formula for Y'_P",
    "P-SL2": "L'_P(-1), L'_P(0), L'_P(1) satisfy the sl(2) brackets",
    "P-LYCOMM": "[L'_P(j), Y'_P(v, x)] for j = -1, 0, 1",
    "P-JACOBI-ON-COMPAT": "Jacobi identity for Y'_P on P(z)-compatible functionals",
    "P-STABLE": "P(z)-compatible functionals are stable under tau_P and L'_P",
    "Q-IDENT": "Y'_Q(1, x) is the identity",
    "Q-DERIV": "L(-1)-derivative property of Y'_Q",
    "Q-COMM": "commutator formula for Y'_Q",
    "Q-SL2": "L'_Q(-1), L'_Q(0), L'_Q(1) satisfy the sl(2) brackets",
    "Q-LYCOMM": "[L'_Q(j), Y'_Q(v, x)] for j = -1, 0, 1",
    "Q-JACOBI-ON-COMPAT": "Jacobi identity for Y'_Q on Q(z)-compatible functionals",
    "Q-STABLE": "Q(z)-compatible functionals are stable under tau_Q and L'_Q",
    "LEMMA-92": "(1 - y/z)^{L'_Q(0)} acts as a product of binomial operator series",
    "LEMMA-94": "conjugating Y'_Q(v, x) by (1 - y/z)^{L'_Q(0)} rescales x",
    "LEMMA-98": "(1 - y/x)^{L(0) - xL(-1)} = e^{yL(-1)} (1 - y/x)^{L(0)} when [L(0), L(-1)] = L(-1)",
    "LEMMA-CJ9": "conjugation formula for Y under e^{xL(1)}(-x^{-2})^{L(0)} against a delta kernel",
    "COMMALG-JACOBI-ALWAYS": "Jacobi identity for Y' holds on every functional over a commutative algebra",
    "TAU-A-COMP-P": "tau_P shifts the group degree additively",
    "TAU-A-COMP-Q": "tau_Q shifts the group degree additively",
    "SIGMA-ADJOINT": "sigma_P and tau_P are mutually adjoint; sigma_P of the vacuum field is 1",
    "DELTA-TWO-TERM": "x2^-1 d((x1 - x0)/x2) = x1^-1 d((x2 + x0)/x1)",
    "DELTA-THREE-TERM": "three-term delta identity",
    "DELTA-SUBSTITUTION": "delta substitution: x^-1 d(y/x) p(x) = x^-1 d(y/x) p(y)",
    "DELTA-IOTA-DIFFERENCE": "iota_+ 1/(z+t) - iota_- 1/(z+t) = z^-1 d(-t/z)",
    "DELTA-INVERSE-THREE-TERM": "three-term delta identity in x1^-1 with parameter z",
    "DELTA-PRODUCT-IDENTITY": "product of three delta kernels rewritten with inverted variables",
    "DELTA-OPPOSITE-KERNEL": "o maps the P(z)-kernel times Y_t to the same kernel times Y^o_t",
    "DELTA-OPPOSITE-KERNEL-REEXPANDED": "re-expanding o(P(z)-kernel times Y_t) in nonnegative powers of t",
    "DELTA-OPPOSITE-KERNEL-TRANSLATED": "translating o(P(z)-kernel times Y_t) by z gives the conjugated field",
    "DELTA-TRANSLATION-PLUS": "T^+_{-z} of the Q(z)-kernel times Y_t",
    "DELTA-TRANSLATION-MINUS": "T^-_{-z} of the Q(z)-kernel times Y_t",
    "DELTA-TRANSLATION-OPPOSITE": "T^o_{-z} of the Q(z)-kernel times Y_t",
}

ACTION_CHECKS = {
    "IDENT": check_ident, "DERIV": check_deriv, "COMM": check_comm,
    "SL2": check_sl2, "LYCOMM": check_lycomm,
}

PROPERTY_IDS = sorted(k for k in ANCHORS if not k.startswith("DELTA-"))
ALL_IDS = sorted(ANCHORS)


def verify_property(pid, ctx, window=4):
    """Run one property on a context; returns a PropertyReport."""
    if pid not in ANCHORS:
        raise UnknownProperty(pid)
    R = window
    win = {"radius": R}
    if pid.startswith("DELTA-"):
        return _delta_check(pid, ctx, R)
    head, _, tail = pid.partition("-")
    if head in ("P", "Q") and tail in ACTION_CHECKS:
        wits, checked = ACTION_CHECKS[tail](ctx, head, R)
        return _report(pid, ctx, win, wits, checked)
    if tail == "JACOBI-ON-COMPAT":
        wits, checked, unmet = check_jacobi_on_compat(ctx, head, R)
        rep = _report(pid, ctx, win, wits, checked, refused=unmet)
        if unmet and not checked:
            rep.status = "precondition-unmet"
        return rep
    if tail == "STABLE":
        wits, checked, images, unmet = check_stable(ctx, head, min(R, 2))
        rep = _report(pid, ctx, {"radius": min(R, 2)}, wits, checked, images=images, refused=unmet)
        if unmet and not images:
            rep.status = "precondition-unmet"
        return rep
    if pid == "LEMMA-92":
        return _report(pid, ctx, win, *check_lemma_92(ctx, R))
    if pid == "LEMMA-94":
        return _report(pid, ctx, win, *check_lemma_94(ctx, R))
    if pid == "LEMMA-98":
        return _report(pid, ctx, win, *check_lemma_98(ctx, R))
    if pid == "LEMMA-CJ9":
        return _report(pid, ctx, win, *check_lemma_cj9(ctx, R))
    if pid == "COMMALG-JACOBI-ALWAYS":
        try:
            wits, checked = check_commalg_jacobi(ctx, R)
        except UnsupportedInstance as exc:
            rep = _report(pid, ctx, win, [], 0, reason=str(exc))
            rep.status = "not-applicable"
            return rep
        return _report(pid, ctx, win, wits, checked)
    if pid.startswith("TAU-A-COMP-"):
        return _report(pid, ctx, win, *check_tau_degree(ctx, pid[-1], R))
    if pid == "SIGMA-ADJOINT":
        return _report(pid, ctx, win, *check_sigma_adjoint(ctx, R))
    raise UnknownProperty(pid)
