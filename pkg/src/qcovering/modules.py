"""Weight modules: Vermas, integrable simples, tensor products.

A module holds an ordered label list with weights/parities and explicit
sparse action maps for the Chevalley generators; torus generators act
diagonally through the weight.  Verma modules are free over the lowered
half-algebra, so labels are the pivot words; E-generators act through
the commutation of E past a lowered element (twisted derivations plus
torus scalars).  Simple quotients mod out the span of the over-exponent
generators w F_i^{<i,lam>+1}, with the projection computed per weight
space and per pi-component.  Tensor products act through the coproduct
with the superalgebra sign rule, and their bar involution is the
quasi-R-matrix composed with the componentwise bar.

Vectors are sparse {label: scalar} dicts; everything is immutable after
construction.
"""

from __future__ import annotations

from .errors import DepthExceeded, NotDominant, RankUnsupported
from .freehalf import fe_word
from .linalg import qpi_split, rf_rref
from .quasi import weights_of_height, weights_upto
from .scalars import ONE, QPiScalar, ZERO, qpi_factorial

# -- sparse vectors -----------------------------------------------------------


def vadd(x, y):
    out = dict(x)
    for k, c in y.items():
        s = out.get(k, ZERO) + c
        if s.is_zero():
            out.pop(k, None)
        else:
            out[k] = s
    return out


def vscale(x, c):
    if c.is_zero():
        return {}
    return {k: c * v for k, v in x.items()}


def vsub(x, y):
    return vadd(x, vscale(y, -ONE))


def vbar(x):
    return {k: c.bar() for k, c in x.items()}


class WeightModule:
    """Explicit weight module with basis-fixing bar involution."""

    def __init__(self, root, labels, weight, parity, e_act, f_act, highest=None, name=""):
        self.root = root
        self.datum = root.datum
        self.labels = list(labels)
        self.index = {l: a for a, l in enumerate(self.labels)}
        self.weight = weight
        self.parity = parity
        self.e_act = e_act  # i -> {label: vector}
        self.f_act = f_act
        self.highest = highest
        self.name = name

    @property
    def dim(self):
        return len(self.labels)

    def apply_E(self, i, vec):
        out = {}
        act = self.e_act[i]
        for l, c in vec.items():
            img = act.get(l)
            if img:
                out = vadd(out, vscale(img, c))
        return out

    def apply_F(self, i, vec):
        out = {}
        act = self.f_act[i]
        for l, c in vec.items():
            img = act.get(l)
            if img:
                out = vadd(out, vscale(img, c))
        return out

    def apply_K(self, mu, vec):
        out = {}
        for l, c in vec.items():
            s = QPiScalar.q(self.root.pair(mu, self.weight[l]))
            out[l] = c * s
        return out

    def apply_J(self, mu, vec):
        out = {}
        for l, c in vec.items():
            s = QPiScalar.pi_power(self.root.pair(mu, self.weight[l]))
            out[l] = c * s
        return out

    def psi(self, vec):
        """Basis-fixing anti-linear bar involution."""
        return vbar(vec)

    # -- generic element actions ------------------------------------------------

    def apply_pbw_term(self, alg, term, vec):
        fw, jv, kv, ew = term
        out = vec
        for i in reversed(ew):
            out = self.apply_E(i, out)
            if not out:
                return out
        if any(kv):
            out = self.apply_K(kv, out)
        if any(jv):
            out = self.apply_J(jv, out)
        for i in reversed(fw):
            out = self.apply_F(i, out)
            if not out:
                return out
        return out

    def apply_pbw(self, alg, elem, vec):
        out = {}
        for term, c in elem.items():
            img = self.apply_pbw_term(alg, term, vec)
            if img:
                out = vadd(out, vscale(img, c))
        return out

    def apply_free_plus(self, x, vec):
        """Action of the E-side image of a half-algebra element."""
        out = {}
        for w, c in x.items():
            cur = vec
            for i in reversed(w):
                cur = self.apply_E(i, cur)
                if not cur:
                    break
            if cur:
                out = vadd(out, vscale(cur, c))
        return out

    def apply_free_minus(self, x, vec):
        out = {}
        for w, c in x.items():
            cur = vec
            for i in reversed(w):
                cur = self.apply_F(i, cur)
                if not cur:
                    break
            if cur:
                out = vadd(out, vscale(cur, c))
        return out

    def apply_upsilon(self, ups, vec):
        """Action of the quasi-K-matrix (finite on bounded-above modules)."""
        if ups.height < self.height_span():
            raise DepthExceeded(
                f"quasi-K-matrix computed to height {ups.height} < module span"
            )
        out = {}
        for mu in sorted(ups.pieces):
            piece = ups.pieces[mu]
            if piece:
                img = self.apply_free_plus(piece, vec)
                if img:
                    out = vadd(out, img)
        return out

    def height_span(self):
        """Height of the weight support (bound for raising series)."""
        return self._span


# word-label modules record the lowering distance in the label itself
def word_dist(label):
    return len(label)


# -- Verma and simple modules ---------------------------------------------------


def verma(half, lam, height):
    """Verma module truncated at lowering height ``height``."""
    root = half.root
    datum = half.datum
    lam = tuple(lam)
    labels = []
    for nu in weights_upto(datum.rank, height):
        labels.extend(half.quotient_basis(nu).pivots)
    weight = {}
    parity = {}
    for w in labels:
        nu = half.weight_of(w)
        weight[w] = root.x_sub(lam, root.weight_to_x(nu))
        parity[w] = half.parity_of(w)
    f_act = {i: {} for i in range(datum.rank)}
    e_act = {i: {} for i in range(datum.rank)}
    for w in labels:
        nu = half.weight_of(w)
        for i in range(datum.rank):
            if sum(nu) < height:
                img = half.reduce_concat((i,), w)
                f_act[i][w] = {p: c for p, c in img.items()}
            e_act[i][w] = _verma_e_image(half, lam, i, w)
    mod = WeightModule(root, labels, weight, parity, e_act, f_act, highest=(), name=f"M{lam}")
    mod._span = max((len(w) for w in labels), default=0)
    mod.truncation_height = height
    return mod


def _verma_e_image(half, lam, i, w):
    """E_i (w eta) via the commutation of E past a lowered element."""
    datum = half.datum
    root = half.root
    nu = half.weight_of(w)
    if nu[i] == 0:
        return {}
    d = datum.d(i)
    qi = QPiScalar.q(d)
    pii = QPiScalar.pi_power(datum.p(i))
    denom = (pii * qi - qi.inverse()).inverse()
    p_w = half.parity_of(w)
    # Jt_i Kt_i acts on the weight of ir(w) eta
    nu_up = list(nu)
    nu_up[i] -= 1
    lam_up = root.x_sub(lam, root.weight_to_x(tuple(nu_up)))
    n_up = root.pair_i(i, lam_up)
    s_plus = QPiScalar.q(d * n_up) * QPiScalar.pi_power(datum.p(i) * n_up)
    n_top = root.pair_i(i, lam)
    s_minus = QPiScalar.q(-d * n_top) * QPiScalar.pi_power(datum.p(i) * (p_w - datum.p(i)))
    out = {}
    for p, c in half.reduce(half.ir_word(i, w)).items():
        out = vadd(out, {p: denom * s_plus * c})
    for p, c in half.reduce(half.ri_word(i, w)).items():
        out = vadd(out, {p: -denom * s_minus * c})
    return out


def simple(half, lam, max_height=None):
    """The integrable simple quotient of the Verma at a dominant weight."""
    root = half.root
    datum = half.datum
    lam = tuple(lam)
    ns = [root.pair_i(i, lam) for i in range(datum.rank)]
    if any(n < 0 for n in ns):
        raise NotDominant(f"{lam} pairs negatively with a simple coroot")
    cap = max_height if max_height is not None else half.height_bound
    # survivors per weight, found height by height
    surv = {(0,) * datum.rank: [()]}
    proj = {(0,) * datum.rank: None}
    h = 0
    while True:
        h += 1
        if h > cap:
            raise DepthExceeded(f"simple module did not close below height {cap}")
        alive = False
        for nu in weights_of_height(datum.rank, h):
            qb = half.quotient_basis(nu)
            rows = []
            for i in range(datum.rank):
                m = ns[i] + 1
                rem = list(nu)
                rem[i] -= m
                if min(rem) < 0:
                    continue
                for w in half.words(tuple(rem)):
                    img = half.reduce_concat(w, (i,) * m)
                    rows.append([img.get(p, ZERO) for p in qb.pivots])
            data = _quotient_projector(rows, len(qb.pivots))
            keep = [qb.pivots[a] for a in data[0]]
            surv[nu] = keep
            proj[nu] = (qb.pivots, data)
            if keep:
                alive = True
        if not alive:
            break
    labels = [w for nu in sorted(surv) for w in surv[nu]]
    weight = {}
    parity = {}
    for w in labels:
        nu = half.weight_of(w)
        weight[w] = root.x_sub(lam, root.weight_to_x(nu))
        parity[w] = half.parity_of(w)
    def project(nu, vec_by_pivot):
        if nu not in proj or proj[nu] is None:
            if nu not in proj:
                return {}
            return vec_by_pivot
        pivots, (free, rp, rm) = proj[nu]
        cols = {p: a for a, p in enumerate(pivots)}
        xp = [ZERO.plus] * len(pivots)
        xm = [ZERO.minus] * len(pivots)
        for p, c in vec_by_pivot.items():
            xp[cols[p]] = c.plus
            xm[cols[p]] = c.minus
        for rows, x in ((rp, xp), (rm, xm)):
            for pivcol, row in rows:
                f = x[pivcol]
                if not f.is_zero():
                    for a, entry in enumerate(row):
                        x[a] = x[a] - f * entry
        out = {}
        for a in free:
            c = QPiScalar(xp[a], xm[a])
            if not c.is_zero():
                out[pivots[a]] = c
        return out

    f_act = {i: {} for i in range(datum.rank)}
    e_act = {i: {} for i in range(datum.rank)}
    for w in labels:
        nu = half.weight_of(w)
        for i in range(datum.rank):
            nu2 = list(nu)
            nu2[i] += 1
            img = half.reduce_concat((i,), w)
            f_act[i][w] = project(tuple(nu2), img)
            e_img = _verma_e_image(half, lam, i, w)
            nu0 = list(nu)
            nu0[i] -= 1
            e_act[i][w] = project(tuple(nu0), e_img) if min(nu0) >= 0 else {}
    mod = WeightModule(root, labels, weight, parity, e_act, f_act, highest=(), name=f"L{lam}")
    mod._span = max((len(w) for w in labels), default=0)
    mod.truncation_height = None
    mod.hw_pairings = ns
    return mod


def _quotient_projector(rows, ncols):
    """Free columns plus per-component elimination data for projecting."""
    if not rows:
        return list(range(ncols)), [], []
    plus, minus = qpi_split(rows)
    rp, pp = rf_rref(plus)
    rm, pm = rf_rref(minus)
    if pp != pm:
        from .errors import DimensionMismatch

        raise DimensionMismatch("submodule rank differs between pi-specializations")
    free = [a for a in range(ncols) if a not in pp]
    red_p = [(c, rp[k]) for k, c in enumerate(pp)]
    red_m = [(c, rm[k]) for k, c in enumerate(pm)]
    return free, red_p, red_m


# -- tensor products ---------------------------------------------------------------


class TensorModule(WeightModule):
    """Tensor product acting through the coproduct with super signs."""

    def __init__(self, half, m1, m2, theta_exp=None):
        self.half = half
        self.m1 = m1
        self.m2 = m2
        root = m1.root
        labels = [(l1, l2) for l1 in m1.labels for l2 in m2.labels]
        weight = {
            (l1, l2): root.x_add(m1.weight[l1], m2.weight[l2]) for (l1, l2) in labels
        }
        parity = {
            (l1, l2): (m1.parity[l1] + m2.parity[l2]) % 2 for (l1, l2) in labels
        }
        super().__init__(root, labels, weight, parity, None, None,
                         highest=(m1.highest, m2.highest),
                         name=f"{m1.name}(x){m2.name}")
        self._span = m1.height_span() + m2.height_span()
        self._theta_exp = theta_exp

    def apply_E(self, i, vec):
        # Delta(E_i) = E_i x 1 + Jt_i Kt_i x E_i
        out = {}
        d = self.datum.d(i)
        p_i = self.datum.p(i)
        for (l1, l2), c in vec.items():
            img1 = self.m1.apply_E(i, {l1: ONE})
            for k1, c1 in img1.items():
                s = out.get((k1, l2), ZERO) + c * c1
                _store(out, (k1, l2), s)
            img2 = self.m2.apply_E(i, {l2: ONE})
            if img2:
                n = self.root.pair_i(i, self.m1.weight[l1])
                tw = QPiScalar.q(d * n) * QPiScalar.pi_power(p_i * n) * \
                    QPiScalar.pi_power(p_i * self.m1.parity[l1])
                for k2, c2 in img2.items():
                    s = out.get((l1, k2), ZERO) + c * tw * c2
                    _store(out, (l1, k2), s)
        return out

    def apply_F(self, i, vec):
        # Delta(F_i) = F_i x Kt_{-i} + 1 x F_i
        out = {}
        d = self.datum.d(i)
        p_i = self.datum.p(i)
        for (l1, l2), c in vec.items():
            img1 = self.m1.apply_F(i, {l1: ONE})
            if img1:
                n = self.root.pair_i(i, self.m2.weight[l2])
                tw = QPiScalar.q(-d * n)
                for k1, c1 in img1.items():
                    s = out.get((k1, l2), ZERO) + c * tw * c1
                    _store(out, (k1, l2), s)
            img2 = self.m2.apply_F(i, {l2: ONE})
            if img2:
                tw = QPiScalar.pi_power(p_i * self.m1.parity[l1])
                for k2, c2 in img2.items():
                    s = out.get((l1, k2), ZERO) + c * tw * c2
                    _store(out, (l1, k2), s)
        return out

    def theta_height(self):
        return min(self.m1.height_span(), self.m2.height_span())

    def apply_theta(self, vec):
        """Action of the quasi-R-matrix (exact: the module bounds it)."""
        half = self.half
        datum = self.datum
        from .datum import weight_e, weight_pi_nu, weight_q_nu

        out = dict(vec)
        for nu in weights_upto(datum.rank, self.theta_height()):
            if sum(nu) == 0:
                continue
            qb = half.quotient_basis(nu)
            if not qb.pivots:
                continue
            pref = weight_pi_nu(datum, nu) * weight_q_nu(datum, nu) * \
                QPiScalar.pi_power(weight_e(datum, nu))
            if sum(nu) % 2:
                pref = -pref
            p_nu = (sum(n * datum.parity[i] for i, n in enumerate(nu))) % 2
            duals = qb.dual_basis()
            for (l1, l2), c in vec.items():
                sgn = QPiScalar.pi_power(p_nu * self.m1.parity[l1])
                for b, bstar in zip(qb.pivots, duals):
                    v2 = self.m2.apply_free_plus(bstar, {l2: ONE})
                    if not v2:
                        continue
                    v1 = self.m1.apply_free_minus(fe_word(b), {l1: ONE})
                    if not v1:
                        continue
                    f = c * pref * sgn
                    for k1, c1 in v1.items():
                        for k2, c2 in v2.items():
                            s = out.get((k1, k2), ZERO) + f * c1 * c2
                            _store(out, (k1, k2), s)
        return out

    def psi(self, vec):
        """Theta after the componentwise bar (both factors fix their bases)."""
        return self.apply_theta(vbar(vec))


def _store(out, k, s):
    if s.is_zero():
        out.pop(k, None)
    else:
        out[k] = s


def tensor(half, m1, m2):
    return TensorModule(half, m1, m2)


# -- rank-1 canonical basis ----------------------------------------------------------


class BasedModuleData:
    """A distinguished basis given by vectors in module coordinates."""

    def __init__(self, module, labels, vectors, order_keys):
        self.module = module
        self.labels = list(labels)
        self.vectors = vectors
        self.order_keys = order_keys

    def matrix(self):
        return [
            [self.vectors[l].get(ml, ZERO) for l in self.labels]
            for ml in self.module.labels
        ]


def canonical_basis_rank1(half, mod):
    """Divided powers of the lowering generator applied to the top vector."""
    if half.datum.rank != 1:
        raise RankUnsupported("general-rank canonical bases are out of scope")
    labels = []
    vectors = {}
    keys = {}
    for w in mod.labels:
        k = len(w)
        lab = ("F", k)
        labels.append(lab)
        vectors[lab] = {w: qpi_factorial(k, half.datum.d(0)).inverse()}
        keys[lab] = (k, 0)
    labels.sort(key=lambda l: l[1])
    return BasedModuleData(mod, labels, vectors, keys)
