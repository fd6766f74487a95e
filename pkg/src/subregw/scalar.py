"""Exact arithmetic in Q(K), the field of rational functions of the level parameter K.

Every coefficient in the engine is a :class:`ScalarQ`: a quotient of two
integer-coefficient polynomials in K, kept in a unique canonical form so
that equality of values is equality of representations.  No floating point
is used anywhere.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd as _int_gcd


class PoleError(ArithmeticError):
    """Specialization of a scalar at a zero of its denominator."""

    def __init__(self, message, factor=None, at=None):
        super().__init__(message)
        self.factor = factor
        self.at = at


# ---------------------------------------------------------------------------
# dense integer polynomials, ascending powers of K; () is the zero polynomial


def _trim(cs):
    cs = list(cs)
    while cs and cs[-1] == 0:
        cs.pop()
    return tuple(cs)


def _padd(a, b):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] += c
    return _trim(out)


def _pneg(a):
    return tuple(-c for c in a)


def _pmul(a, b):
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca:
            for j, cb in enumerate(b):
                if cb:
                    out[i + j] += ca * cb
    return _trim(out)


def _pcontent(a):
    g = 0
    for c in a:
        g = _int_gcd(g, abs(c))
        if g == 1:
            return 1
    return g


def _pscale_down(a, g):
    return tuple(c // g for c in a)


def _peval(a, x):
    """Evaluate at an exact rational point (Horner)."""
    acc = Fraction(0)
    for c in reversed(a):
        acc = acc * x + c
    return acc


def _pdivmod_frac(a, b):
    """Division with remainder over Q; a, b lists of Fraction, b nonzero."""
    a = list(a)
    q = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    inv_lead = 1 / b[-1]
    for i in range(len(a) - len(b), -1, -1):
        coef = a[i + len(b) - 1] * inv_lead
        if coef:
            q[i] = coef
            for j, cb in enumerate(b):
                a[i + j] -= coef * cb
    while a and not a[-1]:
        a.pop()
    return q, a


def _pgcd(a, b):
    """Primitive gcd in Z[K] with positive leading coefficient."""
    if not a:
        return _make_primitive(b)
    if not b:
        return _make_primitive(a)
    fa = [Fraction(c) for c in a]
    fb = [Fraction(c) for c in b]
    while fb:
        _, r = _pdivmod_frac(fa, fb)
        fa, fb = fb, r
    return _fractions_to_primitive(fa)


def _make_primitive(a):
    if not a:
        return ()
    g = _pcontent(a)
    a = _pscale_down(a, g)
    if a[-1] < 0:
        a = _pneg(a)
    return a


def _fractions_to_primitive(fs):
    den_lcm = 1
    for f in fs:
        den_lcm = den_lcm * f.denominator // _int_gcd(den_lcm, f.denominator)
    ints = [int(f * den_lcm) for f in fs]
    return _make_primitive(_trim(ints))


def _pdiv_exact(a, b):
    """Exact division in Z[K]; caller guarantees divisibility."""
    q, r = _pdivmod_frac([Fraction(c) for c in a], [Fraction(c) for c in b])
    if r:
        raise ArithmeticError("inexact polynomial division")
    return _trim(int(c) for c in q)


def _pstr(a, var="K"):
    if not a:
        return "0"
    parts = []
    for i in range(len(a) - 1, -1, -1):
        c = a[i]
        if not c:
            continue
        if i == 0:
            term = str(abs(c))
        elif i == 1:
            term = var if abs(c) == 1 else f"{abs(c)}*{var}"
        else:
            term = f"{var}^{i}" if abs(c) == 1 else f"{abs(c)}*{var}^{i}"
        if not parts:
            parts.append(term if c > 0 else "-" + term)
        else:
            parts.append(("+ " if c > 0 else "- ") + term)
    return " ".join(parts)


_ATOM_NAMES = {
    Fraction(0): "K",
    Fraction(1): "(K - 1)",
}


def _root_factor_name(k0):
    if k0 in _ATOM_NAMES:
        return _ATOM_NAMES[k0]
    p, q = k0.numerator, k0.denominator
    if q == 1:
        return f"(K - {p})" if p >= 0 else f"(K + {-p})"
    return f"({q}*K - {p})"


class ScalarQ:
    """Canonical rational function num/den in K.

    Invariants: den is nonzero with positive leading coefficient, the
    polynomial gcd of num and den is 1, the integer content common to num
    and den is 1, and the zero value is stored as 0/1.  Two values are
    equal iff their (num, den) tuples are identical.
    """

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num, den, _canonical=False):
        if not _canonical:
            s = normalize(num, den)
            num, den = s.num, s.den
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "_hash", None)

    # -- construction -------------------------------------------------

    @staticmethod
    def from_int(v):
        return _canon((int(v),) if v else (), (1,))

    @staticmethod
    def from_fraction(f):
        f = Fraction(f)
        return _canon((f.numerator,) if f.numerator else (), (f.denominator,))

    # -- predicates ----------------------------------------------------

    def is_zero(self):
        return not self.num

    def is_one(self):
        return self.num == (1,) and self.den == (1,)

    def constant(self):
        """The value as a Fraction if K-free, else None."""
        if len(self.num) <= 1 and len(self.den) == 1:
            return Fraction(self.num[0] if self.num else 0, self.den[0])
        return None

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not self.num:
            return other
        if not other.num:
            return self
        if self.den == other.den:
            return _canon(_padd(self.num, other.num), self.den)
        return _canon(
            _padd(_pmul(self.num, other.den), _pmul(other.num, self.den)),
            _pmul(self.den, other.den),
        )

    __radd__ = __add__

    def __neg__(self):
        return ScalarQ(_pneg(self.num), self.den, _canonical=True)

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not self.num or not other.num:
            return ZERO
        if self.is_one():
            return other
        if other.is_one():
            return self
        # cross-cancel before expanding; denominators recur heavily
        n1, d1, n2, d2 = self.num, self.den, other.num, other.den
        g = _pgcd(n1, d2)
        if g != (1,):
            n1, d2 = _pdiv_exact(n1, g), _pdiv_exact(d2, g)
        g = _pgcd(n2, d1)
        if g != (1,):
            n2, d1 = _pdiv_exact(n2, g), _pdiv_exact(d1, g)
        return _canon(_pmul(n1, n2), _pmul(d1, d2))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not other.num:
            raise ZeroDivisionError("division by zero polynomial")
        return self * ScalarQ(other.den, other.num)

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __pow__(self, e):
        if e < 0:
            return ONE / (self ** (-e))
        out = ONE
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    # -- comparison / hashing -------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = ScalarQ.from_fraction(other)
        if not isinstance(other, ScalarQ):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash((self.num, self.den))
            object.__setattr__(self, "_hash", h)
        return h

    # -- evaluation -----------------------------------------------------

    def eval_at(self, k0):
        """Exact value at K = k0 (a rational); raises PoleError at a pole."""
        k0 = Fraction(k0)
        dv = _peval(self.den, k0)
        if dv == 0:
            mult = 0
            rem = list(self.den)
            lin = [-k0.numerator, k0.denominator]  # q*K - p, root k0
            while rem and _peval(rem, k0) == 0:
                q, r = _pdivmod_frac([Fraction(c) for c in rem], [Fraction(c) for c in lin])
                assert not r
                rem = q
                mult += 1
            name = _root_factor_name(k0)
            raise PoleError(
                f"pole at K = {k0}: denominator factor {name}"
                + (f"^{mult}" if mult > 1 else "")
                + " vanishes",
                factor=name,
                at=k0,
            )
        return _peval(self.num, k0) / dv

    def den_vanishes_at(self, k0):
        """True when K = k0 is a pole of the canonical form."""
        return _peval(self.den, Fraction(k0)) == 0

    # -- io ---------------------------------------------------------------

    def __str__(self):
        n = _pstr(self.num)
        if self.den == (1,):
            return n
        ns = f"({n})" if " " in n else n
        d = _pstr(self.den)
        ds = f"({d})" if (" " in d or len(self.den) > 1) else d
        return f"{ns}/{ds}"

    def __repr__(self):
        return f"ScalarQ({self})"

    def to_json(self):
        return {
            "num": [str(c) for c in (self.num or (0,))],
            "den": [str(c) for c in self.den],
        }

    @staticmethod
    def from_json(data):
        return normalize(
            tuple(int(c) for c in data["num"]),
            tuple(int(c) for c in data["den"]),
        )


def _canon(num, den):
    num = _trim(num)
    den = _trim(den)
    if not den:
        raise ZeroDivisionError("division by zero polynomial")
    if not num:
        return ZERO if "_ZERO_READY" in globals() else ScalarQ((), (1,), _canonical=True)
    g = _pgcd(num, den)
    if g != (1,):
        num = _pdiv_exact(num, g)
        den = _pdiv_exact(den, g)
    cn, cd = _pcontent(num), _pcontent(den)
    c = _int_gcd(cn, cd)
    if c > 1:
        num = _pscale_down(num, c)
        den = _pscale_down(den, c)
    if den[-1] < 0:
        num = _pneg(num)
        den = _pneg(den)
    return ScalarQ(num, den, _canonical=True)


def normalize(num, den):
    """Canonical ScalarQ from raw integer-coefficient num/den polynomials."""
    return _canon(tuple(int(c) for c in num), tuple(int(c) for c in den))


def _coerce(x):
    if isinstance(x, ScalarQ):
        return x
    if isinstance(x, int):
        return ScalarQ.from_int(x)
    if isinstance(x, Fraction):
        return ScalarQ.from_fraction(x)
    return NotImplemented


ZERO = ScalarQ((), (1,), _canonical=True)
_ZERO_READY = True
ONE = ScalarQ((1,), (1,), _canonical=True)
K = ScalarQ((0, 1), (1,), _canonical=True)


def sq(value):
    """Shorthand: an exact constant scalar from an int or Fraction."""
    c = _coerce(value)
    if c is NotImplemented:
        raise TypeError(f"cannot convert {value!r} to ScalarQ")
    return c
