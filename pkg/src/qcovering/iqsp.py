"""The quasi-split coideal subalgebra and its i^pi-divided powers.

The subalgebra is generated by B_i = F_i + varsigma_i E_{tau i}
Kt_i^{-1}, the Jt_i and the torus elements fixed by -tau.  Its divided
powers for tau i = i come in two parities; both are polynomials in B_i
with Jt_i-corrected coefficients.  Elements are kept in a dual
presentation: an abstract polynomial in (B_i, Jt_i), on which the
coideal bar involution acts coefficientwise, together with its PBW
expansion in the ambient algebra (the two involutions differ, so no
presentation-free coideal bar exists on PBW data).
"""

from __future__ import annotations

from .errors import UnsupportedPresentation
from .quasi import embed_b_element, psi_b_element
from .scalars import ONE, QPiScalar, ZERO, qpi_factorial, qpi_integer

# An abstract coideal polynomial is a dict {(b_deg, j_exp): scalar} in
# the letters B = B_i and J = Jt_i (j_exp mod 2).


def ipoly_mul(x, y):
    out = {}
    for (a1, j1), c1 in x.items():
        for (a2, j2), c2 in y.items():
            k = (a1 + a2, (j1 + j2) % 2)
            s = out.get(k, ZERO) + c1 * c2
            if s.is_zero():
                out.pop(k, None)
            else:
                out[k] = s
    return out


def ipoly_scale(x, c):
    if c.is_zero():
        return {}
    return {k: c * v for k, v in x.items()}


def ipoly_add(x, y):
    out = dict(x)
    for k, c in y.items():
        s = out.get(k, ZERO) + c
        if s.is_zero():
            out.pop(k, None)
        else:
            out[k] = s
    return out


def psi_i_poly(x):
    """The coideal bar involution: B, Jt fixed, coefficients barred."""
    return {k: c.bar() for k, c in x.items()}


def render_ipoly(x, labels=("B", "J")):
    from .scalars import render_qpi

    if not x:
        return "0"
    parts = []
    for (a, j) in sorted(x, reverse=True):
        c = x[(a, j)]
        cs = render_qpi(c)
        factors = []
        if a == 1:
            factors.append(labels[0])
        elif a > 1:
            factors.append(f"{labels[0]}^{a}")
        if j:
            factors.append(labels[1])
        body = "*".join(factors)
        if not body:
            parts.append(f"({cs})")
        elif cs == "1":
            parts.append(body)
        else:
            parts.append(f"({cs})*{body}")
    return " + ".join(parts)


class IDividedPower:
    """An i^pi-divided power: abstract polynomial plus PBW expansion."""

    def __init__(self, i, m, parity, poly, value):
        self.i = i
        self.m = m
        self.parity = parity
        self.poly = poly
        self.value = value

    def psi_i(self):
        return psi_i_poly(self.poly)


def embed_b(alg, params, i):
    """B_i in PBW normal form."""
    return embed_b_element(alg, params, i)


def psi_b(alg, params, i):
    """The ambient bar image psi(B_i) (not the coideal involution)."""
    return psi_b_element(alg, params, i)


def idivided_poly(datum, params, i, m, parity):
    """The abstract (B, Jt)-polynomial of the divided power.

    tau i = i: the two parity families
        odd:  B^{(2k+eps)} built from (B^2 - vs_i pi_i q_i [2j-1]_i^2 Jt)
        even: B^{(2k+eps)} built from (B^2 - vs_i q_i [2j]_i^2 Jt) for
              odd m and [2j-2] for even m.
    tau i != i: plain divided powers B^m/[m]!.
    """
    d = datum.d(i)
    vs = params.varsigma[i]
    qi = QPiScalar.q(d)
    pii = QPiScalar.pi_power(datum.p(i))
    one = {(0, 0): ONE}
    b = {(1, 0): ONE}
    if params.tau[i] != i:
        poly = one
        for _ in range(m):
            poly = ipoly_mul(poly, b)
        return ipoly_scale(poly, qpi_factorial(m, d).inverse())
    k, odd = divmod(m, 2)
    poly = b if odd else one
    for j in range(1, k + 1):
        if parity == 1:
            shift = vs * pii * qi * qpi_integer(2 * j - 1, d) ** 2
        elif odd:
            shift = vs * qi * qpi_integer(2 * j, d) ** 2
        else:
            shift = vs * qi * qpi_integer(2 * j - 2, d) ** 2
        factor = ipoly_add({(2, 0): ONE}, {(0, 1): -shift})
        poly = ipoly_mul(poly, factor)
    return ipoly_scale(poly, qpi_factorial(m, d).inverse())


def ipoly_to_pbw(alg, params, i, poly):
    """Evaluate an abstract (B, Jt)-polynomial in the ambient algebra."""
    bi = embed_b(alg, params, i)
    powers = {0: alg.one()}
    top = max((a for (a, _) in poly), default=0)
    for a in range(1, top + 1):
        powers[a] = alg.mul(powers[a - 1], bi)
    jt = alg.gen_Jtilde(i)
    out = {}
    for (a, j), c in poly.items():
        term = powers[a]
        if j:
            term = alg.mul(term, jt)
        out = alg.add(out, alg.scale(term, c))
    return out


def idivided_power(alg, params, i, m, parity):
    """The i^pi-divided power with its PBW expansion."""
    poly = idivided_poly(alg.datum, params, i, m, parity)
    value = ipoly_to_pbw(alg, params, i, poly)
    return IDividedPower(i, m, parity, poly, value)


def psi_i_element(x):
    """Coideal bar of a dual-presentation element; PBW-only data is refused."""
    if isinstance(x, IDividedPower):
        return psi_i_poly(x.poly)
    if isinstance(x, dict) and all(
        isinstance(k, tuple) and len(k) == 2 and all(isinstance(v, int) for v in k)
        for k in x
    ):
        return psi_i_poly(x)
    raise UnsupportedPresentation(
        "the coideal bar involution needs the (B, Jt) presentation"
    )


def classical_idivided_poly(m, parity):
    """pi = 1, Jt = 1 specialization over plain rational functions in q.

    Returns {degree: RationalFunction}; the classical divided powers of
    the quasi-split rank-one coideal with parameter 1 folded in the same
    way (vs q [..]^2 shifts with vs q = 1).
    """
    from .scalars import RF_ONE, RationalFunction

    def cl_int(n):
        num = RationalFunction.q_power(n) - RationalFunction.q_power(-n)
        den = RationalFunction.q_power(1) - RationalFunction.q_power(-1)
        return num / den

    def cl_fact(n):
        out = RF_ONE
        for s in range(1, n + 1):
            out = out * cl_int(s)
        return out

    k, odd = divmod(m, 2)
    poly = {1: RF_ONE} if odd else {0: RF_ONE}
    for j in range(1, k + 1):
        if parity == 1:
            shift = cl_int(2 * j - 1) ** 2
        elif odd:
            shift = cl_int(2 * j) ** 2
        else:
            shift = cl_int(2 * j - 2) ** 2
        out = {}
        for a, c in poly.items():
            out[a + 2] = out.get(a + 2, RationalFunction.from_int(0)) + c
            out[a] = out.get(a, RationalFunction.from_int(0)) - c * shift
        poly = {a: c for a, c in out.items() if not c.is_zero()}
    inv = cl_fact(m).inverse()
    return {a: c * inv for a, c in poly.items()}
