"""The free half-algebra on the theta generators and its radical quotient.

Elements are sparse {word: scalar} dicts, a word being a tuple of
(0-based) indices.  The algebra carries the canonical symmetric bilinear
form fixed by (1,1) = 1 and (theta_i, theta_j) = delta_ij (1 - pi_i
q_i^{-2})^{-1}, evaluated by peeling letters through the adjunction with
the twisted derivations.  Per weight space the Gram nullspace is the
radical; pivot words (lexicographically first independent Gram rows)
give a deterministic basis of the quotient, together with transition
coordinates and a dual basis.

All caches are per-instance and idempotent, so concurrent readers are
safe once a HalfAlgebra is shared.
"""

from __future__ import annotations

from .errors import SameIndex, TruncationOverflow
from .linalg import qpi_independent_rows, qpi_inverse, qpi_nullspace
from .scalars import ONE, QPiScalar, ZERO, qpi_binomial, qpi_factorial

# -- sparse free elements ----------------------------------------------------


def fe_zero():
    return {}


def fe_word(w, coeff=ONE):
    return {tuple(w): coeff} if not coeff.is_zero() else {}


def fe_add(x, y):
    out = dict(x)
    for w, c in y.items():
        s = out.get(w, ZERO) + c
        if s.is_zero():
            out.pop(w, None)
        else:
            out[w] = s
    return out


def fe_scale(x, c):
    if c.is_zero():
        return {}
    return {w: c * v for w, v in x.items()}


def fe_mul(x, y):
    """Concatenation product, bilinear in both factors."""
    out = {}
    for w1, c1 in x.items():
        for w2, c2 in y.items():
            w = w1 + w2
            s = out.get(w, ZERO) + c1 * c2
            if s.is_zero():
                out.pop(w, None)
            else:
                out[w] = s
    return out


def fe_bar(x):
    """Bar on the half-algebra: words fixed, coefficients barred."""
    return {w: c.bar() for w, c in x.items()}


def fe_equal(x, y):
    return fe_add(x, fe_scale(y, -ONE)) == {}


def render_word(w, labels):
    if not w:
        return "1"
    return ".".join(f"t{labels[i]}" for i in w)


class QuotientBasis:
    """Per-weight data of f_nu: pivots, Gram matrix, radical, coordinates."""

    def __init__(self, nu, words, pivots, gram, gram_inv, radical, coords):
        self.nu = nu
        self.words = words
        self.pivots = pivots
        self.gram = gram
        self.gram_inv = gram_inv
        self.radical = radical
        self.coords = coords  # word -> tuple of scalars over pivots

    @property
    def dim(self):
        return len(self.pivots)

    @property
    def radical_dim(self):
        return len(self.radical)

    def dual_basis(self):
        """Elements b*_j with (b_k, b*_j) = delta_kj, as free elements."""
        out = []
        for j in range(self.dim):
            el = {}
            for k, w in enumerate(self.pivots):
                c = self.gram_inv[k][j]
                if not c.is_zero():
                    el[w] = c
            out.append(el)
        return out

    def to_json(self, labels):
        """Golden-file dump: pivot words, Gram matrix, radical basis."""
        from .scalars import render_qpi

        return {
            "weight": list(self.nu),
            "words": [render_word(w, labels) for w in self.words],
            "pivots": [render_word(w, labels) for w in self.pivots],
            "gram": [[render_qpi(x) for x in row] for row in self.gram],
            "radical": [[render_qpi(x) for x in v] for v in self.radical],
        }


class HalfAlgebra:
    def __init__(self, datum, root, height_bound=None):
        self.datum = datum
        self.root = root
        if height_bound is None:
            height_bound = 8 if datum.rank == 1 else 6
        self.height_bound = height_bound
        self._ir_cache = {}
        self._ri_cache = {}
        self._form_core_cache = {}
        self._prefactor_cache = {}
        self._qb_cache = {}
        self._words_cache = {}
        self._theta_norm = {}
        for i in range(datum.rank):
            qi = QPiScalar.q(datum.d(i))
            pii = QPiScalar.pi_power(datum.p(i))
            self._theta_norm[i] = (ONE - pii * qi ** (-2)).inverse()

    # -- gradings ------------------------------------------------------------

    def weight_of(self, w):
        nu = [0] * self.datum.rank
        for i in w:
            nu[i] += 1
        return tuple(nu)

    def parity_of(self, w):
        return sum(self.datum.parity[i] for i in w) % 2

    def words(self, nu):
        """All words of weight nu in lexicographic order."""
        nu = tuple(nu)
        if nu not in self._words_cache:
            out = [()]
            for _ in range(sum(nu)):
                nxt = []
                for w in out:
                    rem = list(nu)
                    for i in w:
                        rem[i] -= 1
                    for i in range(self.datum.rank):
                        if rem[i] > 0:
                            nxt.append(w + (i,))
                out = nxt
            self._words_cache[nu] = sorted(out)
        return self._words_cache[nu]

    # -- twisted derivations ---------------------------------------------------

    def _qdot(self, nu, i):
        """q^{nu . i} as a scalar, nu in N[I]."""
        return QPiScalar.q(sum(n * self.datum.dot[j][i] for j, n in enumerate(nu)))

    def ir_word(self, i, w):
        """Left twisted derivation on a word."""
        key = (i, w)
        if key not in self._ir_cache:
            if not w:
                out = {}
            else:
                j, rest = w[0], w[1:]
                out = {}
                if j == i:
                    out = fe_word(rest)
                tail = self.ir_word(i, rest)
                if tail:
                    f = QPiScalar.pi_power(self.datum.p(j) * self.datum.p(i)) * \
                        QPiScalar.q(self.datum.dot[j][i])
                    for w2, c in tail.items():
                        out = fe_add(out, {(j,) + w2: f * c})
            self._ir_cache[key] = out
        return self._ir_cache[key]

    def ri_word(self, i, w):
        """Right twisted derivation on a word."""
        key = (i, w)
        if key not in self._ri_cache:
            if not w:
                out = {}
            else:
                rest, j = w[:-1], w[-1]
                out = {}
                if j == i:
                    out = fe_word(rest)
                head = self.ri_word(i, rest)
                if head:
                    f = QPiScalar.pi_power(self.datum.p(j) * self.datum.p(i)) * \
                        QPiScalar.q(self.datum.dot[j][i])
                    for w2, c in head.items():
                        out = fe_add(out, {w2 + (j,): f * c})
            self._ri_cache[key] = out
        return self._ri_cache[key]

    def i_r(self, i, x):
        out = {}
        for w, c in x.items():
            out = fe_add(out, fe_scale(self.ir_word(i, w), c))
        return out

    def r_i(self, i, x):
        out = {}
        for w, c in x.items():
            out = fe_add(out, fe_scale(self.ri_word(i, w), c))
        return out

    # -- bilinear form -----------------------------------------------------------
    #
    # (w1, w2) factors as [prod over letters i of w1 of (theta_i, theta_i)]
    # times a Laurent-polynomial core computed by the same peeling
    # recursion without the normalization factors; the prefactor depends
    # only on the common weight, which keeps the Gram linear algebra in
    # the denominator-free fast path.

    def _form_core(self, w1, w2):
        if not w1:
            return ONE
        key = (w1, w2)
        if key not in self._form_core_cache:
            i, y = w1[0], w1[1:]
            acc = ZERO
            for w, c in self.ir_word(i, w2).items():
                term = self._form_core(y, w)
                if not term.is_zero():
                    acc = acc + c * term
            self._form_core_cache[key] = acc
        return self._form_core_cache[key]

    def form_prefactor(self, nu):
        nu = tuple(nu)
        if nu not in self._prefactor_cache:
            out = ONE
            for i, n in enumerate(nu):
                out = out * self._theta_norm[i] ** n
            self._prefactor_cache[nu] = out
        return self._prefactor_cache[nu]

    def form_words(self, w1, w2):
        if len(w1) != len(w2):
            return ZERO
        if not w1:
            return ONE
        nu = self.weight_of(w1)
        if nu != self.weight_of(w2):
            return ZERO
        core = self._form_core(w1, w2)
        if core.is_zero():
            return ZERO
        return self.form_prefactor(nu) * core

    def form(self, x, y):
        acc = ZERO
        for w1, c1 in x.items():
            for w2, c2 in y.items():
                v = self.form_words(w1, w2)
                if not v.is_zero():
                    acc = acc + c1 * c2 * v
        return acc

    # -- quotient bases -----------------------------------------------------------

    def quotient_basis(self, nu):
        nu = tuple(nu)
        if sum(nu) > self.height_bound:
            raise TruncationOverflow(
                f"weight {nu} exceeds the height bound {self.height_bound}"
            )
        if nu not in self._qb_cache:
            words = self.words(nu)
            core = [[self._form_core(w1, w2) for w2 in words] for w1 in words]
            keep = qpi_independent_rows(core)
            pivots = [words[k] for k in keep]
            sub = [[core[a][b] for b in keep] for a in keep]
            core_inv = qpi_inverse(sub) if keep else []
            radical = qpi_nullspace(core, n_cols=len(words)) if words else []
            pref = self.form_prefactor(nu)
            pref_inv = pref.inverse()
            gram = [[pref * x for x in row] for row in sub]
            gram_inv = [[pref_inv * x for x in row] for row in core_inv]
            coords = {}
            keep_pos = {k: r for r, k in enumerate(keep)}
            for idx, w in enumerate(words):
                if idx in keep_pos:
                    vec = tuple(ONE if r == keep_pos[idx] else ZERO for r in range(len(keep)))
                else:
                    rhs = [core[a][idx] for a in keep]
                    sol = [
                        sum((core_inv[r][c] * rhs[c] for c in range(len(keep))), ZERO)
                        for r in range(len(keep))
                    ]
                    vec = tuple(sol)
                coords[w] = vec
            self._qb_cache[nu] = QuotientBasis(
                nu, words, pivots, gram, gram_inv, radical, coords
            )
        return self._qb_cache[nu]

    def reduce(self, x):
        """Image of a free element in f, as a {pivot word: scalar} dict."""
        out = {}
        for w, c in x.items():
            qb = self.quotient_basis(self.weight_of(w))
            for k, p in enumerate(qb.pivots):
                v = qb.coords[w][k]
                if not v.is_zero():
                    s = out.get(p, ZERO) + c * v
                    if s.is_zero():
                        out.pop(p, None)
                    else:
                        out[p] = s
        return out

    def reduce_concat(self, w1, w2):
        """Pivot coordinates of the concatenation of two words."""
        return self.reduce(fe_word(w1 + w2))

    def in_radical(self, x):
        """True iff x pairs to zero with every word of its weight."""
        for w in set(map(self.weight_of, x)):
            qb = self.quotient_basis(w)
            for u in qb.words:
                acc = ZERO
                for w2, c in x.items():
                    if self.weight_of(w2) == w:
                        acc = acc + c * self.form_words(u, w2)
                if not acc.is_zero():
                    return False
        return True

    # -- distinguished elements -----------------------------------------------------

    def theta(self, i):
        return fe_word((i,))

    def serre_element(self, i, j):
        """The (q,pi)-Serre relator in theta_i, theta_j for i != j."""
        if i == j:
            raise SameIndex("Serre elements need two distinct indices")
        a = self.datum.a(i, j)
        n_top = 1 - a
        d = self.datum.d(i)
        pj = self.datum.p(j)
        pii = self.datum.p(i)
        out = {}
        for n in range(n_top + 1):
            exp = n * pj + (n * (n - 1) // 2)
            coeff = qpi_binomial(n_top, n, d) * QPiScalar.pi_power(pii * exp)
            if n % 2:
                coeff = -coeff
            word = (i,) * n + (j,) + (i,) * (n_top - n)
            out = fe_add(out, {word: coeff})
        return out

    def divided_power(self, i, m):
        if m == 0:
            return fe_word(())
        return fe_word((i,) * m, qpi_factorial(m, self.datum.d(i)).inverse())
