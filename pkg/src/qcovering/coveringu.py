"""The covering quantum group in PBW normal form.

A PBW term is a key (fword, jvec, kvec, eword): an F-word on the left,
the torus part J^jvec K^kvec in the middle (J exponents live mod 2), an
E-word on the right.  E/F-words are pivot words of the radical quotient
of the half-algebra, so normal forms are canonical and weight spaces
finite dimensional.  Elements are {term: scalar} dicts.

Straightening moves E past F with the commutator relation
E_i F_j - pi^{p(i)p(j)} F_j E_i = delta_ij (Jt_i Kt_i - Kt_{-i}) /
(pi_i q_i - q_i^{-1}), and torus generators across E/F-words with the
q/pi-power twists; each such move strictly reduces the number of EF
inversions, so the rewriting terminates.

Tensor squares use the superalgebra sign rule
(a x b)(c x d) = pi^{p(b)p(c)} ac x bd.
"""

from __future__ import annotations

from .freehalf import fe_word
from .scalars import ONE, QPiScalar, ZERO


def _vec_add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _vec_mod2(a):
    return tuple(x % 2 for x in a)


class CoveringAlgebra:
    def __init__(self, half):
        self.half = half
        self.datum = half.datum
        self.root = half.root
        self.yr = half.root.y_rank
        self._zj = (0,) * self.yr
        self._zk = (0,) * self.yr
        self._ef_cache = {}
        self._commutator_scalar = {}
        for i in range(self.datum.rank):
            qi = QPiScalar.q(self.datum.d(i))
            pii = QPiScalar.pi_power(self.datum.p(i))
            self._commutator_scalar[i] = (pii * qi - qi.inverse()).inverse()

    # -- constructors --------------------------------------------------------

    def one(self):
        return {((), self._zj, self._zk, ()): ONE}

    def zero(self):
        return {}

    def gen_E(self, i):
        return {((), self._zj, self._zk, (i,)): ONE}

    def gen_F(self, i):
        return {((i,), self._zj, self._zk, ()): ONE}

    def gen_K(self, mu):
        return {((), self._zj, tuple(mu), ()): ONE}

    def gen_J(self, mu):
        return {((), _vec_mod2(tuple(mu)), self._zk, ()): ONE}

    def ktilde_vec(self, i, sign=1):
        v = [0] * self.yr
        for k, c in enumerate(self.half.root.i_y[i]):
            v[k] = sign * self.datum.d(i) * c
        return tuple(v)

    def gen_Ktilde(self, i, sign=1):
        return self.gen_K(self.ktilde_vec(i, sign))

    def gen_Jtilde(self, i):
        return self.gen_J(self.ktilde_vec(i))

    def element_from_free(self, x, side):
        """Image of a half-algebra element under + (E side) or - (F side)."""
        out = {}
        for w, c in self.half.reduce(x).items():
            if side == "+":
                out[((), self._zj, self._zk, w)] = c
            else:
                out[(w, self._zj, self._zk, ())] = c
        return out

    # -- gradings --------------------------------------------------------------

    def term_parity(self, t):
        fw, _, _, ew = t
        return (self.half.parity_of(fw) + self.half.parity_of(ew)) % 2

    def term_e_weight(self, t):
        return self.half.weight_of(t[3])

    def term_f_weight(self, t):
        return self.half.weight_of(t[0])

    def term_x_weight(self, t):
        up = self.root.weight_to_x(self.term_e_weight(t))
        dn = self.root.weight_to_x(self.term_f_weight(t))
        return self.root.x_sub(up, dn)

    # -- scalar twists -----------------------------------------------------------

    def _pair_nu(self, mu, nu):
        """<mu, nu'> for mu in Y (vector), nu in N[I]."""
        return self.root.pair(mu, self.root.weight_to_x(nu))

    def _move_torus_left_of_E(self, jv, kv, nu):
        """Scalar from E_w J^jv K^kv = s * J^jv K^kv E_w, |w| = nu."""
        n = self._pair_nu(kv, nu)
        m = self._pair_nu(jv, nu)
        return QPiScalar.q(-n) * QPiScalar.pi_power(m)

    def _move_torus_right_of_F(self, jv, kv, nu):
        """Scalar from J^jv K^kv F_w = s * F_w J^jv K^kv, |w| = nu."""
        n = self._pair_nu(kv, nu)
        m = self._pair_nu(jv, nu)
        return QPiScalar.q(-n) * QPiScalar.pi_power(m)

    # -- the EF straightening core ----------------------------------------------

    def _eword_F(self, ew, j):
        """Normal form of E_{ew} F_j, memoized on the raw word."""
        key = (ew, j)
        if key not in self._ef_cache:
            if not ew:
                out = {((j,), self._zj, self._zk, ()): ONE}
            else:
                ew1, i = ew[:-1], ew[-1]
                out = {}
                sign = QPiScalar.pi_power(self.datum.p(i) * self.datum.p(j))
                for (fw, jv, kv, ew2), c in self._eword_F(ew1, j).items():
                    for w3, c3 in self.half.reduce_concat(ew2, (i,)).items():
                        _acc(out, (fw, jv, kv, w3), sign * c * c3)
                if i == j:
                    denom = self._commutator_scalar[i]
                    nu1 = self.half.weight_of(ew1)
                    kt = self.ktilde_vec(i)
                    jt = _vec_mod2(kt)
                    red = self.half.reduce(fe_word(ew1))
                    s_plus = self._move_torus_left_of_E(jt, kt, nu1)
                    kt2 = self.ktilde_vec(i, -1)
                    s_minus = self._move_torus_left_of_E(self._zj, kt2, nu1)
                    for w3, c3 in red.items():
                        _acc(out, ((), jt, kt, w3), denom * s_plus * c3)
                        _acc(out, ((), self._zj, kt2, w3), -denom * s_minus * c3)
            self._ef_cache[key] = out
        return self._ef_cache[key]

    # -- multiplication ------------------------------------------------------------

    def _mul_right_F(self, elt, j):
        out = {}
        for (fw, jv, kv, ew), c in elt.items():
            for (fw2, jv2, kv2, ew2), c2 in self._eword_F(ew, j).items():
                s = self._move_torus_right_of_F(jv, kv, self.half.weight_of(fw2))
                for w3, c3 in self.half.reduce_concat(fw, fw2).items():
                    _acc(
                        out,
                        (w3, _vec_mod2(_vec_add(jv, jv2)), _vec_add(kv, kv2), ew2),
                        c * c2 * c3 * s,
                    )
        return out

    def _mul_right_torus(self, elt, j2, k2):
        out = {}
        for (fw, jv, kv, ew), c in elt.items():
            s = self._move_torus_left_of_E(j2, k2, self.half.weight_of(ew))
            _acc(out, (fw, _vec_mod2(_vec_add(jv, j2)), _vec_add(kv, k2), ew), c * s)
        return out

    def _mul_right_E(self, elt, i):
        out = {}
        for (fw, jv, kv, ew), c in elt.items():
            for w3, c3 in self.half.reduce_concat(ew, (i,)).items():
                _acc(out, (fw, jv, kv, w3), c * c3)
        return out

    def _term_mul(self, t1, t2):
        fw1, j1, k1, ew1 = t1
        fw2, j2, k2, ew2 = t2
        cur = {((), j1, k1, ew1): ONE}
        for j in fw2:
            cur = self._mul_right_F(cur, j)
        if any(j2) or any(k2):
            cur = self._mul_right_torus(cur, j2, k2)
        for i in ew2:
            cur = self._mul_right_E(cur, i)
        if fw1:
            out = {}
            for (fw, jv, kv, ew), c in cur.items():
                for w3, c3 in self.half.reduce_concat(fw1, fw).items():
                    _acc(out, (w3, jv, kv, ew), c * c3)
            cur = out
        return cur

    def mul(self, x, y):
        out = {}
        for t1, c1 in x.items():
            for t2, c2 in y.items():
                c12 = c1 * c2
                for t, c in self._term_mul(t1, t2).items():
                    _acc(out, t, c12 * c)
        return out

    def product(self, tokens):
        """Normal form of a product of generator tokens.

        Tokens: ('E', i), ('F', i), ('K', mu), ('J', mu), ('Kt', i, sign),
        ('Jt', i) with positional indices and Y-vectors mu.
        """
        out = self.one()
        for tok in tokens:
            kind = tok[0]
            if kind == "E":
                g = self.gen_E(tok[1])
            elif kind == "F":
                g = self.gen_F(tok[1])
            elif kind == "K":
                g = self.gen_K(tok[1])
            elif kind == "J":
                g = self.gen_J(tok[1])
            elif kind == "Kt":
                g = self.gen_Ktilde(tok[1], tok[2] if len(tok) > 2 else 1)
            elif kind == "Jt":
                g = self.gen_Jtilde(tok[1])
            else:
                raise ValueError(f"unknown generator token {tok!r}")
            out = self.mul(out, g)
        return out

    @staticmethod
    def add(x, y):
        out = dict(x)
        for t, c in y.items():
            _acc(out, t, c)
        return out

    @staticmethod
    def scale(x, c):
        if c.is_zero():
            return {}
        return {t: c * v for t, v in x.items()}

    # -- bar involution ------------------------------------------------------------

    def bar_psi(self, x):
        """psi: E_i, F_i, J fixed; K_mu -> J_mu K_{-mu}; coefficients barred."""
        out = {}
        for (fw, jv, kv, ew), c in x.items():
            nj = _vec_mod2(_vec_add(jv, kv))
            nk = tuple(-v for v in kv)
            _acc(out, (fw, nj, nk, ew), c.bar())
        return out

    # -- coproduct -------------------------------------------------------------------

    def coproduct(self, x, bound=None):
        out = TensorElement(self)
        for (fw, jv, kv, ew), c in x.items():
            cur = TensorElement(self)
            cur.terms[(((), jv, kv, ()), ((), jv, kv, ()))] = c
            for i in reversed(fw):
                cur = self._delta_F(i).mul(cur, bound)
            for i in ew:
                cur = cur.mul(self._delta_E(i), bound)
            out = out.add(cur)
        return out

    def _delta_E(self, i):
        t = TensorElement(self)
        one = ((), self._zj, self._zk, ())
        kt = self.ktilde_vec(i)
        t.terms[(((), self._zj, self._zk, (i,)), one)] = ONE
        t.terms[((((), _vec_mod2(kt), kt, ())), ((), self._zj, self._zk, (i,)))] = ONE
        return t

    def _delta_F(self, i):
        t = TensorElement(self)
        one = ((), self._zj, self._zk, ())
        ktm = self.ktilde_vec(i, -1)
        t.terms[(((i,), self._zj, self._zk, ()), ((), self._zj, ktm, ()))] = ONE
        t.terms[(one, ((i,), self._zj, self._zk, ()))] = ONE
        return t

    # -- rendering -------------------------------------------------------------------

    def render_term(self, t):
        fw, jv, kv, ew = t
        labels = self.datum.labels
        parts = []
        if fw:
            parts.append("F[" + ",".join(str(labels[i]) for i in fw) + "]")
        if any(jv):
            parts.append("J[" + ",".join(map(str, jv)) + "]")
        if any(kv):
            parts.append("K[" + ",".join(map(str, kv)) + "]")
        if ew:
            parts.append("E[" + ",".join(str(labels[i]) for i in ew) + "]")
        return ".".join(parts) if parts else "1"

    def render(self, x):
        from .scalars import render_qpi

        if not x:
            return "0"
        parts = []
        for t in sorted(x, key=self._term_sort_key):
            cs = render_qpi(x[t])
            ts = self.render_term(t)
            if ts == "1":
                parts.append(f"({cs})")
            else:
                parts.append(f"({cs})*{ts}")
        return " + ".join(parts)

    def _term_sort_key(self, t):
        fw, jv, kv, ew = t
        return (len(fw), fw, len(ew), ew, jv, kv)


def _acc(out, t, c):
    s = out.get(t, ZERO) + c
    if s.is_zero():
        out.pop(t, None)
    else:
        out[t] = s


def pbw_equal(x, y):
    diff = dict(x)
    for t, c in y.items():
        _acc(diff, t, -c)
    return not diff


class TensorElement:
    """Element of U x U with PBW legs and the super product sign rule."""

    def __init__(self, alg, terms=None):
        self.alg = alg
        self.terms = terms if terms is not None else {}

    @staticmethod
    def of_pair(alg, x, y):
        t = TensorElement(alg)
        for t1, c1 in x.items():
            for t2, c2 in y.items():
                _acc(t.terms, (t1, t2), c1 * c2)
        return t

    def add(self, other):
        out = TensorElement(self.alg, dict(self.terms))
        for t, c in other.terms.items():
            _acc(out.terms, t, c)
        return out

    def scale(self, c):
        if c.is_zero():
            return TensorElement(self.alg)
        return TensorElement(self.alg, {t: c * v for t, v in self.terms.items()})

    def mul(self, other, bound=None, prefilter=None):
        """Super product; ``prefilter`` may drop term pairs before
        straightening (sound only for gradings monotone under it)."""
        alg = self.alg
        out = TensorElement(alg)
        for (a1, a2), c in self.terms.items():
            pa2 = alg.term_parity(a2)
            for (b1, b2), c2 in other.terms.items():
                if prefilter is not None and not prefilter((a1, a2), (b1, b2)):
                    continue
                sign = QPiScalar.pi_power(pa2 * alg.term_parity(b1))
                coeff = c * c2 * sign
                left = alg._term_mul(a1, b1)
                right = alg._term_mul(a2, b2)
                for t1, d1 in left.items():
                    for t2, d2 in right.items():
                        _acc(out.terms, (t1, t2), coeff * d1 * d2)
        if bound is not None:
            out = out.truncate(bound)
        return out

    def truncate(self, pred):
        return TensorElement(
            self.alg, {t: c for t, c in self.terms.items() if pred(t[0], t[1])}
        )

    def apply_ri_leg2(self, i):
        """(1 x r_i); leg 2 must be a pure E-part."""
        alg = self.alg
        out = TensorElement(alg)
        for (t1, t2), c in self.terms.items():
            fw, jv, kv, ew = t2
            assert not fw and not any(jv) and not any(kv), "leg 2 is not in U^+"
            for w, c2 in alg.half.reduce(alg.half.ri_word(i, ew)).items():
                _acc(out.terms, (t1, ((), jv, kv, w)), c * c2)
        return out

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, TensorElement) and self.terms == other.terms

    def render(self):
        alg = self.alg
        from .scalars import render_qpi

        if not self.terms:
            return "0"
        keys = sorted(
            self.terms, key=lambda t: (alg._term_sort_key(t[0]), alg._term_sort_key(t[1]))
        )
        return " + ".join(
            f"({render_qpi(self.terms[t])})*{alg.render_term(t[0])} (x) {alg.render_term(t[1])}"
            for t in keys
        )
