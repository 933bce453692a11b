"""Independent classical sl2 oracle over plain rational functions.

Everything here is the pi = 1 theory implemented from the textbook
formulas: modules through E F^{(k)} = [n-k+1] F^{(k-1)}, the closed-form
quasi-R-matrix sum, and the split quasi-K-matrix closed form.  It shares
only the exact-arithmetic layer with the engine, no algebraic code.
"""

from qcovering.scalars import RF_ONE, RF_ZERO, RationalFunction


def cl_q(k=1):
    return RationalFunction.q_power(k)


def cl_int(n):
    if n == 0:
        return RF_ZERO
    return (cl_q(n) - cl_q(-n)) / (cl_q(1) - cl_q(-1))


def cl_fact(n):
    out = RF_ONE
    for s in range(1, n + 1):
        out = out * cl_int(s)
    return out


def cl_double_fact(n):
    out = RF_ONE
    while n > 0:
        out = out * cl_int(n)
        n -= 2
    return out


# vectors over arbitrary hashable labels: {label: RationalFunction}


def vadd(x, y):
    out = dict(x)
    for k, c in y.items():
        s = out.get(k, RF_ZERO) + c
        if s.is_zero():
            out.pop(k, None)
        else:
            out[k] = s
    return out


def vscale(x, c):
    if c.is_zero():
        return {}
    return {k: c * v for k, v in x.items()}


def vbar(x):
    return {k: c.subst_qinv() for k, c in x.items()}


class ClSimple:
    """L(n) on the divided-power basis 0..n."""

    def __init__(self, n):
        self.n = n
        self.labels = list(range(n + 1))

    def weight(self, k):
        return self.n - 2 * k

    def apply_E(self, vec):
        out = {}
        for k, c in vec.items():
            if k >= 1:
                out = vadd(out, {k - 1: c * cl_int(self.n - k + 1)})
        return out

    def apply_F(self, vec):
        out = {}
        for k, c in vec.items():
            if k + 1 <= self.n:
                out = vadd(out, {k + 1: c * cl_int(k + 1)})
        return out

    def apply_K(self, vec, power=1):
        return {k: c * cl_q(power * self.weight(k)) for k, c in vec.items()}


class ClTensor:
    """L(m) x L(n) through the coproduct E -> E x 1 + K x E, F -> F x K^{-1} + 1 x F."""

    def __init__(self, m1, m2):
        self.m1 = m1
        self.m2 = m2
        self.labels = [(a, b) for a in m1.labels for b in m2.labels]

    def weight(self, lab):
        return self.m1.weight(lab[0]) + self.m2.weight(lab[1])

    def apply_E(self, vec):
        out = {}
        for (a, b), c in vec.items():
            for a2, c2 in self.m1.apply_E({a: c}).items():
                out = vadd(out, {(a2, b): c2})
            tw = cl_q(self.m1.weight(a))
            for b2, c2 in self.m2.apply_E({b: c * tw}).items():
                out = vadd(out, {(a, b2): c2})
        return out

    def apply_F(self, vec):
        out = {}
        for (a, b), c in vec.items():
            tw = cl_q(-self.m2.weight(b))
            for a2, c2 in self.m1.apply_F({a: c * tw}).items():
                out = vadd(out, {(a2, b): c2})
            for b2, c2 in self.m2.apply_F({b: c}).items():
                out = vadd(out, {(a, b2): c2})
        return out

    def apply_theta(self, vec):
        """Closed form: sum (-1)^n q^{-n(n-1)/2} (q-q^{-1})^n / [n]! F^n x E^n."""
        depth = min(self.m1.n, self.m2.n)
        out = dict(vec)
        for n in range(1, depth + 1):
            coeff = cl_q(-n * (n - 1) // 2) * (cl_q(1) - cl_q(-1)) ** n / cl_fact(n)
            if n % 2:
                coeff = -coeff
            for (a, b), c in vec.items():
                v1 = {a: c}
                for _ in range(n):
                    v1 = self.m1.apply_F(v1)
                if not v1:
                    continue
                v2 = {b: RF_ONE}
                for _ in range(n):
                    v2 = self.m2.apply_E(v2)
                if not v2:
                    continue
                for a2, c1 in v1.items():
                    for b2, c2 in v2.items():
                        out = vadd(out, {(a2, b2): coeff * c1 * c2})
        return out

    def psi(self, vec):
        return self.apply_theta(vbar(vec))


def cl_upsilon_coeff(k, c):
    """a_{2k} of the split quasi-K-matrix at pi = 1."""
    return (-c * cl_q(2)) ** k * (cl_q(1) - cl_q(-1)) ** k * cl_q(-k * k) * \
        cl_double_fact(2 * k - 1)


def cl_apply_upsilon(module, vec, c, span):
    out = dict(vec)
    for k in range(1, span // 2 + 1):
        coeff = cl_upsilon_coeff(k, c) / cl_fact(2 * k)
        cur = vec
        dead = True
        img = {}
        for lab, cc in vec.items():
            v = {lab: cc}
            for _ in range(2 * k):
                v = module.apply_E(v)
                if not v:
                    break
            if v:
                dead = False
                img = vadd(img, v)
        if not dead:
            out = vadd(out, vscale(img, coeff))
    return out


def neg_part_rf(x):
    assert x.is_laurent()
    return RationalFunction.from_laurent(
        {e: c for e, c in x.laurent_dict().items() if e < 0}
    )


def cl_bar_basis(labels, keys, psi_fn):
    """Classical triangular solve; psi_fn acts on label-coordinate dicts."""
    order = sorted(labels, key=lambda l: (keys[l], repr(l)))
    out = {}
    for lab in order:
        x = {lab: RF_ONE}
        while True:
            img = psi_fn(x)
            d = vadd(img, vscale(x, -RF_ONE))
            if not d:
                break
            b = max(d, key=lambda l: (keys[l], repr(l)))
            assert (keys[b], repr(b)) < (keys[lab], repr(lab))
            t = neg_part_rf(d[b])
            x = vadd(x, vscale(out[b], t))
        out[lab] = x
    return out


def cl_tensor_diamond(m, n):
    """Canonical basis of L(m) x L(n): coords over the product basis."""
    T = ClTensor(ClSimple(m), ClSimple(n))
    keys = {(a, b): (a + b, b) for (a, b) in T.labels}
    return cl_bar_basis(T.labels, keys, T.psi), T


def cl_simple_icb(n, c):
    L = ClSimple(n)
    keys = {k: (k, 0) for k in L.labels}

    def psi_i(vec):
        return cl_apply_upsilon(L, vbar(vec), c, n)

    return cl_bar_basis(L.labels, keys, psi_i), L


def cl_tensor_icb(m, n, c):
    diamonds, T = cl_tensor_diamond(m, n)
    labels = list(T.labels)
    keys = {(a, b): (a + b, b) for (a, b) in labels}
    # change of basis: diamond coords <-> product coords

    def to_diamond(vec):
        coords = {}
        rem = dict(vec)
        for lab in sorted(labels, key=lambda l: (keys[l], repr(l)), reverse=True):
            c0 = rem.get(lab, RF_ZERO)
            if not c0.is_zero():
                coords[lab] = c0
                rem = vadd(rem, vscale(diamonds[lab], -c0))
        assert not rem
        return coords

    def psi_i(coords):
        vec = {}
        for lab, c0 in coords.items():
            vec = vadd(vec, vscale(diamonds[lab], c0))
        img = cl_apply_upsilon(T, T.psi(vec), c, m + n)
        return to_diamond(img)

    return cl_bar_basis(labels, keys, psi_i), T, diamonds
