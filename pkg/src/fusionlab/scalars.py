"""Exact coefficients: rationals and Laurent polynomials in the parameter z."""
from fractions import Fraction
from math import factorial


class ZeroParameter(ValueError):
    pass


class NotInvertible(ArithmeticError):
    pass


def _norm(c):
    # keep integers as int, it is much faster than Fraction arithmetic
    if type(c) is Fraction and c.denominator == 1:
        return c.numerator
    return c


def as_rational(c):
    if isinstance(c, (int, Fraction)):
        return c
    if isinstance(c, str):
        return _norm(Fraction(c))
    raise TypeError(f"not a rational: {c!r}")


class ParamScalar:
    """Element of Q[z, z^-1], stored as {exponent: rational}."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms=None):
        if terms is None:
            terms = {}
        elif isinstance(terms, ParamScalar):
            terms = terms.terms
        elif not isinstance(terms, dict):
            terms = {0: terms}
        self.terms = {int(e): _norm(as_rational(c)) for e, c in terms.items() if c != 0}
        self._hash = None

    @classmethod
    def _raw(cls, terms):
        obj = cls.__new__(cls)
        obj.terms = terms
        obj._hash = None
        return obj

    @classmethod
    def monomial(cls, coeff, exp):
        if coeff == 0:
            return ZERO
        return cls._raw({exp: _norm(as_rational(coeff))})

    @staticmethod
    def lift(x):
        if isinstance(x, ParamScalar):
            return x
        if isinstance(x, (int, Fraction)):
            return ParamScalar._raw({0: _norm(x)} if x else {})
        return NotImplemented

    # ring structure
    def __add__(self, other):
        other = ParamScalar.lift(other)
        if other is NotImplemented:
            return other
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, 0) + c
            if s:
                out[e] = _norm(s)
            else:
                out.pop(e, None)
        return ParamScalar._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return ParamScalar._raw({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = ParamScalar.lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return ZERO
            return ParamScalar._raw({e: _norm(c * other) for e, c in self.terms.items()})
        if not isinstance(other, ParamScalar):
            return NotImplemented
        a, b = self.terms, other.terms
        if not a or not b:
            return ZERO
        if len(a) == 1 and len(b) == 1:
            (ea, ca), = a.items()
            (eb, cb), = b.items()
            return ParamScalar._raw({ea + eb: _norm(ca * cb)})
        out = {}
        for ea, ca in a.items():
            for eb, cb in b.items():
                e = ea + eb
                out[e] = out.get(e, 0) + ca * cb
        return ParamScalar._raw({e: _norm(c) for e, c in out.items() if c})

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.__mul__(other)
        return NotImplemented

    def is_monomial(self):
        return len(self.terms) == 1

    def inverse(self):
        if not self.is_monomial():
            raise NotInvertible(f"{self} is not a unit of Q[z, z^-1]")
        (e, c), = self.terms.items()
        return ParamScalar._raw({-e: _norm(Fraction(1) / c)})

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / other)
        return self * ParamScalar.lift(other).inverse()

    def __rtruediv__(self, other):
        return ParamScalar.lift(other) * self.inverse()

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        if self.is_monomial():
            (e, c), = self.terms.items()
            return ParamScalar._raw({e * n: _norm(Fraction(c) ** n)})
        out, base = ONE, self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # comparisons and hashing
    def __eq__(self, other):
        if isinstance(other, ParamScalar):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return not self.terms
            return self.terms == {0: other}
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            if not self.terms:
                self._hash = hash(0)
            elif list(self.terms) == [0]:
                self._hash = hash(self.terms[0])
            else:
                self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def constant(self):
        """The value if z-free, else raise."""
        if not self.terms:
            return 0
        if list(self.terms) != [0]:
            raise ValueError(f"{self} depends on z")
        return self.terms[0]

    def is_constant(self):
        return not self.terms or list(self.terms) == [0]

    def degrees(self):
        if not self.terms:
            return None
        return min(self.terms), max(self.terms)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, reverse=True):
            c = self.terms[e]
            if e == 0:
                parts.append(str(c))
                continue
            zp = "z" if e == 1 else f"z^{e}"
            if c == 1:
                parts.append(zp)
            elif c == -1:
                parts.append("-" + zp)
            else:
                parts.append(f"{c}*{zp}")
        return " + ".join(parts).replace("+ -", "- ")

    def to_json(self):
        return {str(e): str(c) for e, c in sorted(self.terms.items())}

    @classmethod
    def from_json(cls, d):
        if isinstance(d, (int, str)):
            return cls({0: as_rational(d) if isinstance(d, str) else d})
        return cls({int(e): as_rational(c) for e, c in d.items()})


ZERO = ParamScalar._raw({})
ONE = ParamScalar._raw({0: 1})
Z = ParamScalar._raw({1: 1})


def zpow(n, coeff=1):
    return ParamScalar.monomial(coeff, n)


def ps_arith(a, b, op):
    a, b = ParamScalar.lift(a), ParamScalar.lift(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def ps_eval(a, z0):
    """Substitute the rational z0 for z."""
    z0 = Fraction(z0)
    if z0 == 0:
        raise ZeroParameter("z must be nonzero")
    a = ParamScalar.lift(a)
    return _norm(sum((Fraction(c) * z0 ** e for e, c in a.terms.items()), Fraction(0)))


_binom_cache = {}


def gen_binom(n, k):
    """n(n-1)...(n-k+1)/k! for any integer n and k >= 0 (0 for k < 0)."""
    if k < 0:
        return 0
    key = (n, k)
    hit = _binom_cache.get(key)
    if hit is not None:
        return hit
    num = 1
    for i in range(k):
        num *= n - i
    val = num // factorial(k)
    if len(_binom_cache) < 200000:
        _binom_cache[key] = val
    return val


def falling_binom_fraction(a, k):
    """Binomial coefficient for a rational upper argument."""
    num = Fraction(1)
    for i in range(k):
        num *= Fraction(a) - i
    return _norm(num / factorial(k))
