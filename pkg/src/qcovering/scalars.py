"""Exact scalar arithmetic for the covering ground ring Q(q)^pi.

Q(q)^pi = Q(q)[pi]/(pi^2 - 1) is not a field: 1 + pi and 1 - pi are zero
divisors.  It does, however, split as Q(q) x Q(q) through the idempotents
(1 +- pi)/2, so a scalar is stored as the pair of its specializations at
pi = +1 and pi = -1.  Every ring operation is then componentwise field
arithmetic in Q(q), and an element is invertible iff both components are
nonzero.  The a + pi*b presentation is recovered as a = (plus+minus)/2,
b = (plus-minus)/2.

Rational functions are kept in a canonical reduced form: integer Laurent
numerator, integer polynomial denominator with nonzero constant term and
positive leading coefficient, and no common factor (content included).
The bar involution q -> pi q^{-1}, pi -> pi acts componentwise as
q -> q^{-1} on the plus part and q -> -q^{-1} on the minus part.

Canonical text rendering (used by the CLI and golden files) lists Laurent
terms in descending powers of q with pi printed as ``p``, e.g.
``p*q + q^-1``.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd as _int_gcd

from .errors import NonInvertible, ScalarParseError

# ---------------------------------------------------------------------------
# integer Laurent polynomials as {exponent: coefficient} dicts


def _lp_add(a, b):
    out = dict(a)
    for e, c in b.items():
        s = out.get(e, 0) + c
        if s:
            out[e] = s
        else:
            out.pop(e, None)
    return out


def _lp_neg(a):
    return {e: -c for e, c in a.items()}


def _lp_mul(a, b):
    if not a or not b:
        return {}
    out = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            e = e1 + e2
            s = out.get(e, 0) + c1 * c2
            if s:
                out[e] = s
            else:
                out.pop(e, None)
    return out


def _lp_shift(a, k):
    if k == 0:
        return dict(a)
    return {e + k: c for e, c in a.items()}


def _lp_content(a):
    g = 0
    for c in a.values():
        g = _int_gcd(g, abs(c))
    return g


def _lp_subst_qinv(a):
    return {-e: c for e, c in a.items()}


def _lp_subst_neg_qinv(a):
    # q -> -q^{-1}
    return {-e: (c if e % 2 == 0 else -c) for e, c in a.items()}


# dense helpers for gcd of ordinary polynomials (min exponent 0)


def _dense_from(d):
    n = max(d)
    out = [0] * (n + 1)
    for e, c in d.items():
        out[e] = c
    return out


def _dense_trim(v):
    while v and v[-1] == 0:
        v.pop()
    return v


def _dense_primitive(v):
    g = 0
    for c in v:
        g = _int_gcd(g, abs(c))
    if g <= 1:
        return max(g, 0), v[:]
    return g, [c // g for c in v]


def _dense_prem(u, v):
    """Pseudo-remainder of u by v over Z[x]."""
    r = u[:]
    dv = len(v) - 1
    lv = v[-1]
    while _dense_trim(r) and len(r) - 1 >= dv:
        dr = len(r) - 1
        lead = r[-1]
        r = [lv * c for c in r]
        shift = dr - dv
        for i in range(dv + 1):
            r[i + shift] -= lead * v[i]
        _dense_trim(r)
    return r


def _dense_gcd(a, b):
    a = _dense_trim(a[:])
    b = _dense_trim(b[:])
    if not a:
        g = b
    elif not b:
        g = a
    else:
        ca, a = _dense_primitive(a)
        cb, b = _dense_primitive(b)
        c = _int_gcd(ca, cb)
        while b:
            r = _dense_prem(a, b)
            a, b = b, _dense_primitive(r)[1] if _dense_trim(r) else []
        g = [c * x for x in a]
    if g and g[-1] < 0:
        g = [-x for x in g]
    return g


def _dense_divexact(a, b):
    """Exact division a / b in Z[x]; b is known to divide a over Z."""
    out = [0] * (len(a) - len(b) + 1)
    r = a[:]
    lb = b[-1]
    nb = len(b)
    for k in range(len(out) - 1, -1, -1):
        top = r[k + nb - 1]
        if top:
            q, rem = divmod(top, lb)
            assert rem == 0, "inexact polynomial division"
            out[k] = q
            for i in range(nb):
                r[i + k] -= q * b[i]
    assert all(c == 0 for c in r), "inexact polynomial division"
    return {e: c for e, c in enumerate(out) if c}


_POLY_ONE = {0: 1}


def _rf_normalize(num, den):
    """Reduce num/den to the canonical representation."""
    num = {e: c for e, c in num.items() if c}
    den = {e: c for e, c in den.items() if c}
    if not den:
        raise ZeroDivisionError("zero denominator in Q(q)")
    if not num:
        return {}, dict(_POLY_ONE)
    sn = min(num)
    sd = min(den)
    n0 = _lp_shift(num, -sn)
    d0 = _lp_shift(den, -sd)
    if d0 != _POLY_ONE:
        g = _dense_gcd(_dense_from(n0), _dense_from(d0))
        if len(g) > 1 or (g and g[0] != 1):
            gd = {e: c for e, c in enumerate(g) if c}
            n0 = _dense_divexact(_dense_from(n0), _dense_from(gd))
            d0 = _dense_divexact(_dense_from(d0), _dense_from(gd))
    if d0[max(d0)] < 0:
        n0 = _lp_neg(n0)
        d0 = _lp_neg(d0)
    return _lp_shift(n0, sn - sd), d0


class RationalFunction:
    """A reduced fraction of integer Laurent polynomials in q."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num, den=None, _canonical=False):
        if den is None:
            den = dict(_POLY_ONE)
        if not _canonical:
            num, den = _rf_normalize(num, den)
        self.num = num
        self.den = den
        self._hash = None

    # -- constructors -----------------------------------------------------

    @staticmethod
    def from_int(n):
        return RationalFunction({0: n} if n else {}, dict(_POLY_ONE), _canonical=True)

    @staticmethod
    def from_fraction(fr):
        fr = Fraction(fr)
        num = {0: fr.numerator} if fr.numerator else {}
        return RationalFunction(num, {0: fr.denominator}, _canonical=True)

    @staticmethod
    def q_power(k, coeff=1):
        if coeff == 0:
            return RF_ZERO
        return RationalFunction({k: coeff}, dict(_POLY_ONE), _canonical=True)

    @staticmethod
    def from_laurent(d):
        """Laurent polynomial with Fraction/int coefficients."""
        den = 1
        for c in d.values():
            den = den * Fraction(c).denominator // _int_gcd(den, Fraction(c).denominator)
        num = {}
        for e, c in d.items():
            c = Fraction(c) * den
            if c:
                num[e] = int(c)
        return RationalFunction(num, {0: den})

    # -- queries ------------------------------------------------------------

    def is_zero(self):
        return not self.num

    def is_laurent(self):
        """True iff the denominator is a (positive) integer constant."""
        return set(self.den) <= {0}

    def is_integer_laurent(self):
        return self.den == _POLY_ONE

    def laurent_dict(self):
        """Coefficients as Fractions; requires is_laurent()."""
        assert self.is_laurent()
        d = self.den.get(0, 1)
        return {e: Fraction(c, d) for e, c in self.num.items()}

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        other = _rf_coerce(other)
        if other is None:
            return NotImplemented
        if self.den == _POLY_ONE and other.den == _POLY_ONE:
            return RationalFunction(_lp_add(self.num, other.num), dict(_POLY_ONE), _canonical=True)
        if self.den == other.den:
            return RationalFunction(_lp_add(self.num, other.num), dict(self.den))
        num = _lp_add(_lp_mul(self.num, other.den), _lp_mul(other.num, self.den))
        return RationalFunction(num, _lp_mul(self.den, other.den))

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(_lp_neg(self.num), dict(self.den), _canonical=True)

    def __sub__(self, other):
        other = _rf_coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _rf_coerce(other)
        if other is None:
            return NotImplemented
        if self.den == _POLY_ONE and other.den == _POLY_ONE:
            return RationalFunction(_lp_mul(self.num, other.num), dict(_POLY_ONE), _canonical=True)
        return RationalFunction(_lp_mul(self.num, other.num), _lp_mul(self.den, other.den))

    __rmul__ = __mul__

    def inverse(self):
        if not self.num:
            raise ZeroDivisionError("inverse of zero in Q(q)")
        sn = min(self.num)
        return RationalFunction(_lp_shift(self.den, -sn), _lp_shift(self.num, -sn))

    def __truediv__(self, other):
        other = _rf_coerce(other)
        if other is None:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k):
        if k < 0:
            return self.inverse() ** (-k)
        out = RF_ONE
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out

    # -- substitutions ------------------------------------------------------

    def subst_qinv(self):
        return RationalFunction(_lp_subst_qinv(self.num), _lp_subst_qinv(self.den))

    def subst_neg_qinv(self):
        return RationalFunction(_lp_subst_neg_qinv(self.num), _lp_subst_neg_qinv(self.den))

    # -- protocol -----------------------------------------------------------

    def __eq__(self, other):
        other = _rf_coerce(other)
        if other is None:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(
                (tuple(sorted(self.num.items())), tuple(sorted(self.den.items())))
            )
        return self._hash

    def __repr__(self):
        return f"RationalFunction({render_rf(self)!r})"


def _rf_coerce(x):
    if isinstance(x, RationalFunction):
        return x
    if isinstance(x, int):
        return RationalFunction.from_int(x)
    if isinstance(x, Fraction):
        return RationalFunction.from_fraction(x)
    return None


RF_ZERO = RationalFunction({}, dict(_POLY_ONE), _canonical=True)
RF_ONE = RationalFunction({0: 1}, dict(_POLY_ONE), _canonical=True)


# ---------------------------------------------------------------------------
# the pi-ring


class QPiScalar:
    """Element of Q(q)^pi held as its pair of specializations at pi = +-1."""

    __slots__ = ("plus", "minus", "_hash")

    def __init__(self, plus, minus):
        self.plus = plus
        self.minus = minus
        self._hash = None

    # -- constructors -------------------------------------------------------

    @staticmethod
    def from_int(n):
        r = RationalFunction.from_int(n)
        return QPiScalar(r, r)

    @staticmethod
    def from_fraction(fr):
        r = RationalFunction.from_fraction(fr)
        return QPiScalar(r, r)

    @staticmethod
    def q(k=1):
        r = RationalFunction.q_power(k)
        return QPiScalar(r, r)

    @staticmethod
    def pi():
        return QPiScalar(RF_ONE, -RF_ONE)

    @staticmethod
    def pi_power(m):
        if m % 2 == 0:
            return ONE
        return PI

    @staticmethod
    def from_pi_pair(a, b):
        """The element a + pi*b for rational functions a, b."""
        a = _rf_coerce(a)
        b = _rf_coerce(b)
        return QPiScalar(a + b, a - b)

    @staticmethod
    def from_components(plus, minus):
        return QPiScalar(_rf_coerce(plus), _rf_coerce(minus))

    # -- split --------------------------------------------------------------

    @property
    def a_part(self):
        return (self.plus + self.minus) * Fraction(1, 2)

    @property
    def b_part(self):
        return (self.plus - self.minus) * Fraction(1, 2)

    def specialize(self, sign):
        if sign == 1:
            return self.plus
        if sign == -1:
            return self.minus
        raise ValueError("pi specializes to +1 or -1")

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        other = _qpi_coerce(other)
        if other is None:
            return NotImplemented
        return QPiScalar(self.plus + other.plus, self.minus + other.minus)

    __radd__ = __add__

    def __neg__(self):
        return QPiScalar(-self.plus, -self.minus)

    def __sub__(self, other):
        other = _qpi_coerce(other)
        if other is None:
            return NotImplemented
        return QPiScalar(self.plus - other.plus, self.minus - other.minus)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _qpi_coerce(other)
        if other is None:
            return NotImplemented
        return QPiScalar(self.plus * other.plus, self.minus * other.minus)

    __rmul__ = __mul__

    def inverse(self):
        if self.plus.is_zero() or self.minus.is_zero():
            raise NonInvertible(
                "a pi-component vanishes; the element is a zero divisor or zero"
            )
        return QPiScalar(self.plus.inverse(), self.minus.inverse())

    def __truediv__(self, other):
        other = _qpi_coerce(other)
        if other is None:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, k):
        if k < 0:
            return self.inverse() ** (-k)
        out = ONE
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out

    # -- structure ----------------------------------------------------------

    def bar(self):
        """The bar involution q -> pi q^{-1}, pi -> pi."""
        return QPiScalar(self.plus.subst_qinv(), self.minus.subst_neg_qinv())

    def is_zero(self):
        return self.plus.is_zero() and self.minus.is_zero()

    def is_laurent(self):
        return self.plus.is_laurent() and self.minus.is_laurent()

    def is_integral(self):
        """Membership in A^pi = Z[q,q^-1] + pi Z[q,q^-1].

        Both components must be integer Laurent polynomials whose
        coefficients agree mod 2 exponentwise (so that the a, b parts of
        a + pi*b are themselves integral).
        """
        if not (self.plus.is_integer_laurent() and self.minus.is_integer_laurent()):
            return False
        for e in set(self.plus.num) | set(self.minus.num):
            if (self.plus.num.get(e, 0) - self.minus.num.get(e, 0)) % 2:
                return False
        return True

    def in_qinv_lattice(self):
        """Membership in q^{-1} Z^pi[q^{-1}]."""
        if not self.is_integral():
            return False
        exps = set(self.plus.num) | set(self.minus.num)
        return all(e < 0 for e in exps)

    # -- protocol -----------------------------------------------------------

    def __eq__(self, other):
        other = _qpi_coerce(other)
        if other is None:
            return NotImplemented
        return self.plus == other.plus and self.minus == other.minus

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.plus, self.minus))
        return self._hash

    def __repr__(self):
        return f"QPiScalar({render_qpi(self)!r})"


def _qpi_coerce(x):
    if isinstance(x, QPiScalar):
        return x
    if isinstance(x, (int, Fraction)):
        r = _rf_coerce(x)
        return QPiScalar(r, r)
    return None


ZERO = QPiScalar(RF_ZERO, RF_ZERO)
ONE = QPiScalar(RF_ONE, RF_ONE)
PI = QPiScalar.pi()
Q = QPiScalar.q()


class IntegralScalar:
    """A scalar certified to lie in A^pi = Z[q, q^-1] + pi Z[q, q^-1].

    Construction checks membership; the arithmetic stays inside the
    subring, and ``scalar`` embeds back into the full ring losslessly.
    """

    __slots__ = ("scalar",)

    def __init__(self, scalar):
        if not scalar.is_integral():
            raise ValueError(f"{render_qpi(scalar)} is not integral")
        self.scalar = scalar

    def __add__(self, other):
        return IntegralScalar(self.scalar + other.scalar)

    def __mul__(self, other):
        return IntegralScalar(self.scalar * other.scalar)

    def __neg__(self):
        return IntegralScalar(-self.scalar)

    def bar(self):
        return IntegralScalar(self.scalar.bar())

    def __eq__(self, other):
        if isinstance(other, IntegralScalar):
            return self.scalar == other.scalar
        return self.scalar == other

    def __hash__(self):
        return hash(self.scalar)

    def __repr__(self):
        return f"IntegralScalar({render_qpi(self.scalar)!r})"


# ---------------------------------------------------------------------------
# (q, pi)-combinatorics

_INT_CACHE = {}
_FACT_CACHE = {}


def qpi_integer(n, d=1):
    """[n] = ((pi q)^n - q^{-n}) / (pi q - q^{-1}) with q -> q^d, pi -> pi^d."""
    key = (n, d)
    if key not in _INT_CACHE:
        pq = QPiScalar.q(d) * QPiScalar.pi_power(d)
        num = pq ** n - QPiScalar.q(-d * n)
        den = pq - QPiScalar.q(-d)
        _INT_CACHE[key] = num / den
    return _INT_CACHE[key]


def qpi_factorial(n, d=1):
    if n < 0:
        raise ValueError("factorial of a negative integer")
    key = (n, d)
    if key not in _FACT_CACHE:
        out = ONE
        for s in range(1, n + 1):
            out = out * qpi_integer(s, d)
        _FACT_CACHE[key] = out
    return _FACT_CACHE[key]


def qpi_binomial(m, n, d=1):
    """[m choose n]; only the factorial range 0 <= n <= m is supported."""
    if m < 0:
        raise ValueError("negative-argument binomials are out of scope")
    if n < 0 or n > m:
        raise ValueError("binomial requires 0 <= n <= m")
    return qpi_factorial(m, d) / (qpi_factorial(n, d) * qpi_factorial(m - n, d))


def qpi_double_factorial(n, d=1):
    """[n]!! = [n][n-2]...; empty product for n <= 0."""
    out = ONE
    while n > 0:
        out = out * qpi_integer(n, d)
        n -= 2
    return out


# ---------------------------------------------------------------------------
# canonical text rendering


def _frac_str(fr):
    fr = Fraction(fr)
    if fr.denominator == 1:
        return str(fr.numerator)
    return f"{fr.numerator}/{fr.denominator}"


def _q_str(e):
    if e == 0:
        return ""
    if e == 1:
        return "q"
    return f"q^{e}"


def _mono_str(coeff_str, e):
    qs = _q_str(e)
    if not qs:
        return coeff_str
    if coeff_str == "1":
        return qs
    if coeff_str == "-1":
        return "-" + qs
    return f"{coeff_str}*{qs}"


def _join_terms(terms):
    if not terms:
        return "0"
    out = terms[0]
    for t in terms[1:]:
        if t.startswith("-"):
            out += " - " + t[1:]
        else:
            out += " + " + t
    return out


def _render_laurent_pair(a, b):
    """Render sum of (a_e + p*b_e) q^e over descending e; a, b Fraction dicts."""
    terms = []
    for e in sorted(set(a) | set(b), reverse=True):
        ca = a.get(e, Fraction(0))
        cb = b.get(e, Fraction(0))
        if cb == 0:
            cs = _frac_str(ca)
        elif ca == 0:
            if cb == 1:
                cs = "p"
            elif cb == -1:
                cs = "-p"
            else:
                cs = f"{_frac_str(cb)}*p"
        else:
            inner_b = "p" if cb == 1 else ("-p" if cb == -1 else f"{_frac_str(cb)}*p")
            if inner_b.startswith("-"):
                cs = f"({_frac_str(ca)} - {inner_b[1:]})"
            else:
                cs = f"({_frac_str(ca)} + {inner_b})"
        terms.append(_mono_str(cs, e))
    return _join_terms(terms)


def render_rf(x):
    """Canonical text for a plain rational function in q."""
    if x.is_zero():
        return "0"
    if x.is_laurent():
        return _render_laurent_pair(x.laurent_dict(), {})
    num = _render_laurent_pair({e: Fraction(c) for e, c in x.num.items()}, {})
    den = _render_laurent_pair({e: Fraction(c) for e, c in x.den.items()}, {})
    return f"({num})/({den})"


def render_qpi(x):
    """Canonical text for a QPiScalar, e.g. ``p*q + q^-1``."""
    a = x.a_part
    b = x.b_part
    if a.is_laurent() and b.is_laurent():
        return _render_laurent_pair(a.laurent_dict(), b.laurent_dict())
    if b.is_zero():
        return render_rf(a)
    bs = render_rf(b)
    pb = f"p*({bs})" if (" " in bs or "/" in bs) else ("p" if bs == "1" else f"p*{bs}")
    if a.is_zero():
        return pb
    return f"{render_rf(a)} + {pb}"


# ---------------------------------------------------------------------------
# parsing (inverse of the canonical rendering, plus ordinary arithmetic)


def _tokenize(text):
    toks = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            toks.append(("num", int(text[i:j])))
            i = j
        elif ch in "qp()+-*/^":
            toks.append((ch, None))
            i += 1
        else:
            raise ScalarParseError(f"unexpected character {ch!r} in scalar text")
    return toks


class _Parser:
    def __init__(self, toks):
        self.toks = toks
        self.pos = 0

    def peek(self):
        return self.toks[self.pos][0] if self.pos < len(self.toks) else None

    def next(self):
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def parse_expr(self):
        val = self.parse_term()
        while self.peek() in ("+", "-"):
            op = self.next()[0]
            rhs = self.parse_term()
            val = val + rhs if op == "+" else val - rhs
        return val

    def parse_term(self):
        val = self.parse_unary()
        while self.peek() in ("*", "/"):
            op = self.next()[0]
            rhs = self.parse_unary()
            val = val * rhs if op == "*" else val / rhs
        return val

    def parse_unary(self):
        sign = 1
        while self.peek() == "-":
            self.next()
            sign = -sign
        val = self.parse_power()
        return val if sign == 1 else -val

    def parse_power(self):
        base = self.parse_atom()
        if self.peek() == "^":
            self.next()
            esign = 1
            while self.peek() == "-":
                self.next()
                esign = -esign
            kind, value = self.next()
            if kind != "num":
                raise ScalarParseError("exponent must be an integer")
            return base ** (esign * value)
        return base

    def parse_atom(self):
        kind, value = self.next() if self.pos < len(self.toks) else (None, None)
        if kind == "num":
            return QPiScalar.from_int(value)
        if kind == "q":
            return Q
        if kind == "p":
            return PI
        if kind == "(":
            val = self.parse_expr()
            if self.peek() != ")":
                raise ScalarParseError("unbalanced parenthesis")
            self.next()
            return val
        raise ScalarParseError(f"unexpected token {kind!r}")


def parse_scalar(text):
    """Parse canonical (or ordinary arithmetic) scalar text into a QPiScalar."""
    toks = _tokenize(text)
    if not toks:
        raise ScalarParseError("empty scalar text")
    parser = _Parser(toks)
    val = parser.parse_expr()
    if parser.pos != len(toks):
        raise ScalarParseError("trailing input in scalar text")
    return val
