"""Super Cartan data, root data, involutions and embedding parameters.

A super Cartan datum is a finite index set with a symmetric even pairing
and a parity function subject to the usual conditions (positivity of the
d_i, non-positive off-diagonal entries, evenness constraints and the
bar-consistency d_i = p(i) mod 2).  A root datum realizes the datum
inside dual lattices Y, X.  All indices are handled positionally
(0-based); the I/O layer maps them to the user-facing labels.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import permutations

from .errors import NegativeWeight
from .scalars import QPiScalar, parse_scalar, render_qpi


class SuperCartanDatum:
    def __init__(self, labels, dot, parity):
        self.labels = tuple(labels)
        self.dot = tuple(tuple(row) for row in dot)
        self.parity = tuple(parity)
        self.rank = len(self.labels)

    def d(self, i):
        return self.dot[i][i] // 2

    def p(self, i):
        return self.parity[i]

    def a(self, i, j):
        # 2 (i . j) / (i . i); integral for valid data
        return 2 * self.dot[i][j] // self.dot[i][i]

    def cartan_matrix(self):
        return [[self.a(i, j) for j in range(self.rank)] for i in range(self.rank)]

    def is_odd(self, i):
        return self.parity[i] == 1

    def is_finite_type(self):
        """Positive definiteness of the symmetrized matrix (i.j)."""
        n = self.rank
        from fractions import Fraction

        m = [[Fraction(self.dot[i][j]) for j in range(n)] for i in range(n)]
        for k in range(n):
            # leading principal minors via in-place elimination
            if m[k][k] <= 0:
                return False
            for i in range(k + 1, n):
                f = m[i][k] / m[k][k]
                for j in range(k, n):
                    m[i][j] -= f * m[k][j]
        return True

    def __repr__(self):
        return f"SuperCartanDatum(labels={self.labels}, dot={self.dot}, parity={self.parity})"


class RootDatum:
    """Lattices Y, X with a perfect pairing and the two embeddings of I.

    ``i_y[i]`` is the image of i in Y, ``i_x[i]`` the image i' in X and
    ``pairing`` the matrix <e_k, f_l> of the pairing on the chosen bases.
    """

    def __init__(self, datum, pairing, i_y, i_x):
        self.datum = datum
        self.pairing = tuple(tuple(row) for row in pairing)
        self.i_y = tuple(tuple(v) for v in i_y)
        self.i_x = tuple(tuple(v) for v in i_x)
        self.y_rank = len(pairing)
        self.x_rank = len(pairing[0]) if pairing else 0

    @staticmethod
    def simply_connected(datum):
        """X with fundamental weights dual to the simple coroots.

        Y gets the coroot basis (i -> e_i), the pairing is the identity
        and i' is the i-th column of the Cartan matrix.
        """
        r = datum.rank
        pairing = [[1 if k == l else 0 for l in range(r)] for k in range(r)]
        i_y = [tuple(1 if k == i else 0 for k in range(r)) for i in range(r)]
        i_x = [tuple(datum.a(k, i) for k in range(r)) for i in range(r)]
        return RootDatum(datum, pairing, i_y, i_x)

    def pair(self, mu, lam):
        """<mu, lam> for mu in Y, lam in X (integer vectors)."""
        total = 0
        for k, mk in enumerate(mu):
            if mk:
                row = self.pairing[k]
                total += mk * sum(r * l for r, l in zip(row, lam))
        return total

    def pair_i(self, i, lam):
        return self.pair(self.i_y[i], lam)

    def weight_to_x(self, nu):
        """The image of nu in Z[I] under i -> i'."""
        out = [0] * self.x_rank
        for i, n in enumerate(nu):
            if n:
                for k, c in enumerate(self.i_x[i]):
                    out[k] += n * c
        return tuple(out)

    def x_add(self, lam, mu):
        return tuple(a + b for a, b in zip(lam, mu))

    def x_sub(self, lam, mu):
        return tuple(a - b for a, b in zip(lam, mu))

    def root_coordinates(self, delta):
        """Solve delta = sum_i c_i i' over Q; None if not in the span."""
        r = self.datum.rank
        # Gaussian elimination on the transpose system with Fractions
        rows = [[Fraction(self.i_x[i][k]) for i in range(r)] + [Fraction(delta[k])]
                for k in range(self.x_rank)]
        piv = []
        rr = 0
        for c in range(r):
            sel = None
            for i in range(rr, len(rows)):
                if rows[i][c]:
                    sel = i
                    break
            if sel is None:
                continue
            rows[rr], rows[sel] = rows[sel], rows[rr]
            f = rows[rr][c]
            rows[rr] = [x / f for x in rows[rr]]
            for i in range(len(rows)):
                if i != rr and rows[i][c]:
                    g = rows[i][c]
                    rows[i] = [x - g * y for x, y in zip(rows[i], rows[rr])]
            piv.append(c)
            rr += 1
        coords = [Fraction(0)] * r
        for row_idx, c in enumerate(piv):
            coords[c] = rows[row_idx][r]
        for i in range(rr, len(rows)):
            if rows[i][r]:
                return None
        # verify (columns may not span)
        for k in range(self.x_rank):
            if sum(coords[i] * self.i_x[i][k] for i in range(r)) != delta[k]:
                return None
        return coords

    def leq(self, lam, lam2):
        """lam <= lam2 iff lam2 - lam is a nonnegative integer root combination."""
        coords = self.root_coordinates(self.x_sub(lam2, lam))
        if coords is None:
            return False
        return all(c.denominator == 1 and c >= 0 for c in coords)


class IParams:
    """Involution tau of I together with the embedding parameters varsigma."""

    def __init__(self, tau, varsigma):
        self.tau = tuple(tau)
        self.varsigma = tuple(varsigma)

    @staticmethod
    def split(datum, varsigma=None):
        """tau = id; default parameters varsigma_i = q_i^{-1}."""
        if varsigma is None:
            varsigma = [QPiScalar.q(-datum.d(i)) for i in range(datum.rank)]
        elif isinstance(varsigma, (str, QPiScalar)):
            varsigma = [_coerce_scalar(varsigma)] * datum.rank
        else:
            varsigma = [_coerce_scalar(v) for v in varsigma]
        return IParams(tuple(range(datum.rank)), tuple(varsigma))


def _coerce_scalar(v):
    if isinstance(v, QPiScalar):
        return v
    if isinstance(v, str):
        return parse_scalar(v)
    if isinstance(v, int):
        return QPiScalar.from_int(v)
    if isinstance(v, dict):
        return QPiScalar.from_components(
            parse_scalar(v["plus"]).plus, parse_scalar(v["minus"]).plus
        )
    raise TypeError(f"cannot interpret {v!r} as a scalar")


# ---------------------------------------------------------------------------
# validation


def validate_datum(datum, root=None):
    """Check conditions (a)-(f); returns a list of human-readable violations."""
    out = []
    r = datum.rank
    for i in range(r):
        for j in range(r):
            if datum.dot[i][j] != datum.dot[j][i]:
                out.append(f"(symmetry) dot({i},{j}) != dot({j},{i})")
    for i in range(r):
        if datum.dot[i][i] <= 0 or datum.dot[i][i] % 2:
            out.append(f"(a) d_{i} = (i.i)/2 must be a positive integer")
    for i in range(r):
        for j in range(r):
            if i != j:
                if (2 * datum.dot[i][j]) % datum.dot[i][i]:
                    out.append(f"(b) a_{i}{j} = 2(i.j)/(i.i) is not an integer")
                elif datum.a(i, j) > 0:
                    out.append(f"(b) a_{i}{j} must be <= 0 for i != j")
    if not any(datum.parity):
        out.append("(c) a super datum needs a nonempty odd part")
    for i in range(r):
        if datum.parity[i] == 1:
            for j in range(r):
                if i != j and (2 * datum.dot[i][j]) % datum.dot[i][i] == 0 and datum.a(i, j) % 2:
                    out.append(f"(d) a_{i}{j} must be even since {i} is odd")
    for i in range(r):
        if datum.dot[i][i] % 2 == 0 and (datum.dot[i][i] // 2 - datum.parity[i]) % 2:
            out.append(f"(e) bar-consistency d_{i} = p({i}) mod 2 fails")
    for i in range(r):
        for j in range(r):
            if datum.dot[i][j] % 2:
                out.append(f"(f) (i.j) must be even at ({i},{j})")
    if root is not None:
        for i in range(r):
            for j in range(r):
                if (2 * datum.dot[i][j]) % datum.dot[i][i] == 0:
                    if root.pair_i(i, root.i_x[j]) != datum.a(i, j):
                        out.append(f"(root c) <i,j'> != a_{i}{j} at ({i},{j})")
        # X/Y-regularity: the embeddings must be injective with independent images
        for vecs, name in ((root.i_x, "X"), (root.i_y, "Y")):
            rows = [[Fraction(c) for c in v] for v in vecs]
            if _frac_rank(rows) != r:
                out.append(f"({name}-regularity) image of I is linearly dependent")
    return out


def _frac_rank(rows):
    rows = [row[:] for row in rows]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        sel = None
        for i in range(rank, len(rows)):
            if rows[i][c]:
                sel = i
                break
        if sel is None:
            continue
        rows[rank], rows[sel] = rows[sel], rows[rank]
        f = rows[rank][c]
        rows[rank] = [x / f for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][c]:
                g = rows[i][c]
                rows[i] = [x - g * y for x, y in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def validate_params(params, datum):
    """Check tau and the bar-admissibility conditions on varsigma."""
    out = []
    r = datum.rank
    tau = params.tau
    if sorted(tau) != list(range(r)):
        out.append("(tau) not a permutation of I")
        return out
    for i in range(r):
        if tau[tau[i]] != i:
            out.append("(tau) not an involution")
        for j in range(r):
            if datum.dot[i][j] != datum.dot[tau[i]][tau[j]]:
                out.append(f"(tau) does not preserve the pairing at ({i},{j})")
    for i in range(r):
        vs = params.varsigma[i]
        if vs.is_zero() or vs.plus.is_zero() or vs.minus.is_zero():
            out.append(f"(varsigma) parameter {i} is not invertible")
            continue
        qi = QPiScalar.q(datum.d(i))
        if tau[i] == i:
            if any(j != i and datum.a(i, j) != 0 for j in range(r)):
                if (vs * qi).bar() != vs * qi:
                    out.append(f"(bar1) varsigma_{i} q_{i} is not bar-invariant")
        else:
            aij = datum.a(i, tau[i])
            if aij == 0:
                if vs.bar() != vs or vs != params.varsigma[tau[i]]:
                    out.append(f"(bar2) fails at {i}")
            else:
                lhs = params.varsigma[tau[i]]
                rhs = QPiScalar.pi_power(datum.p(i)) * QPiScalar.q(-datum.d(i) * aij) * vs.bar()
                if lhs != rhs:
                    out.append(f"(bar3) fails at {i}")
    return out


# ---------------------------------------------------------------------------
# weights in Z[I]


def weight_ht(nu):
    return sum(nu)


def weight_parity(datum, nu):
    return sum(n * datum.parity[i] for i, n in enumerate(nu)) % 2


def weight_e(datum, nu):
    """e(nu) = sum_{a<b} p(i_a) p(i_b) over any ordering of the letters.

    Depends only on the multiset: with k odd letters it is k(k-1)/2.
    """
    if any(n < 0 for n in nu):
        raise NegativeWeight(f"{nu} has a negative entry")
    k = sum(n for i, n in enumerate(nu) if datum.parity[i])
    return k * (k - 1) // 2


def weight_e_bruteforce(datum, nu, all_orderings=False):
    """Order-by-order evaluation of e(nu); used as an independent oracle."""
    letters = []
    for i, n in enumerate(nu):
        letters.extend([i] * n)
    orders = set(permutations(letters)) if all_orderings else [tuple(letters)]
    vals = set()
    for order in orders:
        e = 0
        for a in range(len(order)):
            for b in range(a + 1, len(order)):
                e += datum.parity[order[a]] * datum.parity[order[b]]
        vals.add(e)
    return vals


def weight_q_nu(datum, nu):
    k = sum(datum.d(i) * n for i, n in enumerate(nu))
    return QPiScalar.q(k)


def weight_pi_nu(datum, nu):
    m = sum(datum.p(i) * n for i, n in enumerate(nu))
    return QPiScalar.pi_power(m)


def weight_stats(datum, nu):
    """(ht, parity, q_nu, pi_nu, e_nu) for nu in N[I]."""
    if any(n < 0 for n in nu):
        raise NegativeWeight(f"{nu} has a negative entry")
    return (
        weight_ht(nu),
        weight_parity(datum, nu),
        weight_q_nu(datum, nu),
        weight_pi_nu(datum, nu),
        weight_e(datum, nu),
    )


# ---------------------------------------------------------------------------
# the X_i quotient used for coideal weights

def b_weight_well_defined(root, tau):
    """i' + (tau i)' must vanish in X_i = X / <i' + (tau i)'> for all i."""
    gens = [root.x_add(root.i_x[i], root.i_x[tau[i]]) for i in range(root.datum.rank)]
    return gens


def x_i_equal(root, tau, lam, lam2):
    """Equality in X_i = X / <i' + (tau i)' : i in I>."""
    delta = root.x_sub(lam2, lam)
    gens = b_weight_well_defined(root, tau)
    rows = [[Fraction(g[k]) for g in gens] + [Fraction(delta[k])] for k in range(root.x_rank)]
    r = len(gens)
    piv = []
    rr = 0
    for c in range(r):
        sel = None
        for i in range(rr, len(rows)):
            if rows[i][c]:
                sel = i
                break
        if sel is None:
            continue
        rows[rr], rows[sel] = rows[sel], rows[rr]
        f = rows[rr][c]
        rows[rr] = [x / f for x in rows[rr]]
        for i in range(len(rows)):
            if i != rr and rows[i][c]:
                g = rows[i][c]
                rows[i] = [x - g * y for x, y in zip(rows[i], rows[rr])]
        piv.append(c)
        rr += 1
    coords = [Fraction(0)] * r
    for row_idx, c in enumerate(piv):
        coords[c] = rows[row_idx][r]
    for i in range(rr, len(rows)):
        if rows[i][r]:
            return False
    if any(c.denominator != 1 for c in coords):
        return False
    return all(
        sum(coords[i] * gens[i][k] for i in range(r)) == delta[k]
        for k in range(root.x_rank)
    )


def ihw_parity(root, i, lam):
    """Parity tag <i, lam> mod 2; well defined on the X_i class of lam."""
    return root.pair_i(i, lam) % 2


# ---------------------------------------------------------------------------
# built-in data


def _bo_datum(n, labels=None):
    """B(0,n): short odd root last, the osp(1|2n) series."""
    dot = [[0] * n for _ in range(n)]
    for i in range(n):
        dot[i][i] = 2 if i == n - 1 else 4
    for i in range(n - 1):
        dot[i][i + 1] = dot[i + 1][i] = -2
    parity = [0] * (n - 1) + [1]
    return SuperCartanDatum(labels or range(1, n + 1), dot, parity)


_BUILTINS = {}


def builtin_datum(name):
    """(SuperCartanDatum, RootDatum) for a named built-in datum."""
    if name not in _BUILTINS:
        if name in ("rank1", "bo1"):
            datum = _bo_datum(1)
        elif name == "bo2":
            datum = _bo_datum(2)
        elif name == "bo3":
            datum = _bo_datum(3)
        elif name == "km2":
            # rank-2 anisotropic Kac-Moody datum, a_12 a_21 = 12 > 4
            datum = SuperCartanDatum((1, 2), [[2, -6], [-6, 6]], [1, 1])
        else:
            raise KeyError(f"unknown built-in datum {name!r}")
        _BUILTINS[name] = (datum, RootDatum.simply_connected(datum))
    return _BUILTINS[name]


BUILTIN_NAMES = ("rank1", "bo2", "bo3", "km2")


# ---------------------------------------------------------------------------
# JSON descriptors


def datum_from_json(obj):
    datum = SuperCartanDatum(obj["I"], obj["dot"], obj["parity"])
    if "pairing" in obj or "iX" in obj:
        pairing = obj.get("pairing")
        i_x = obj.get("iX")
        i_y = obj.get("iY")
        if pairing is None:
            pairing = [[1 if k == l else 0 for l in range(datum.rank)] for k in range(datum.rank)]
        if i_y is None:
            i_y = [[1 if k == i else 0 for k in range(datum.rank)] for i in range(datum.rank)]
        if i_x is None:
            i_x = [[datum.a(k, i) for k in range(datum.rank)] for i in range(datum.rank)]
        root = RootDatum(datum, pairing, i_y, i_x)
    else:
        root = RootDatum.simply_connected(datum)
    tau = obj.get("tau")
    if tau is None:
        tau = list(range(datum.rank))
    else:
        label_pos = {lab: k for k, lab in enumerate(datum.labels)}
        tau = [label_pos[t] for t in tau]
    varsigma = obj.get("varsigma")
    if varsigma is None:
        params = IParams.split(datum)
        params = IParams(tau, params.varsigma)
    else:
        params = IParams(tau, [_coerce_scalar(v) for v in varsigma])
    return datum, root, params


def datum_to_json(datum, root, params):
    return {
        "I": list(datum.labels),
        "dot": [list(r) for r in datum.dot],
        "parity": list(datum.parity),
        "tau": [datum.labels[t] for t in params.tau],
        "varsigma": [render_qpi(v) for v in params.varsigma],
        "X_rank": root.x_rank,
        "pairing": [list(r) for r in root.pairing],
        "iX": [list(v) for v in root.i_x],
        "iY": [list(v) for v in root.i_y],
    }
