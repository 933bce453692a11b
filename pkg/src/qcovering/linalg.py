"""Dense exact linear algebra over Q(q) and componentwise over Q(q)^pi.

Matrices are lists of lists.  Over the pi-ring, every computation is run
separately at pi = +1 and pi = -1; the helpers below recombine results
and raise :class:`DimensionMismatch` when the two specializations
disagree structurally (different ranks or pivot patterns), which signals
a datum outside the hypotheses of the theory.
"""

from __future__ import annotations

from .errors import DimensionMismatch
from .scalars import QPiScalar, RF_ONE, RF_ZERO


def rf_rref(mat):
    """Row-reduce in place a copy of ``mat``; returns (rref, pivot_columns)."""
    if not mat:
        return [], []
    rows = [row[:] for row in mat]
    m, n = len(rows), len(rows[0])
    pivots = []
    r = 0
    for c in range(n):
        pivot = None
        for i in range(r, m):
            if not rows[i][c].is_zero():
                pivot = i
                break
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = rows[r][c].inverse()
        rows[r] = [x * inv for x in rows[r]]
        for i in range(m):
            if i != r and not rows[i][c].is_zero():
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    return rows, pivots


def rf_nullspace(mat, n_cols=None):
    """Basis of the right nullspace; one vector per free column."""
    if not mat:
        return []
    n = n_cols if n_cols is not None else len(mat[0])
    rref, pivots = rf_rref(mat)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        v = [RF_ZERO] * n
        v[fc] = RF_ONE
        for r, pc in enumerate(pivots):
            v[pc] = -rref[r][fc]
        basis.append(v)
    return basis


def rf_solve(mat, rhs):
    """One solution of mat * x = rhs, or None if inconsistent."""
    if not mat:
        return None
    n = len(mat[0])
    aug = [row[:] + [b] for row, b in zip(mat, rhs)]
    rref, pivots = rf_rref(aug)
    x = [RF_ZERO] * n
    for r, pc in enumerate(pivots):
        if pc == n:
            return None
        x[pc] = rref[r][n]
    # verify (guards against free columns interacting with the rhs)
    for row, b in zip(mat, rhs):
        acc = RF_ZERO
        for a, xi in zip(row, x):
            acc = acc + a * xi
        if acc != b:
            return None
    return x


def rf_inverse(mat):
    """Inverse of a square matrix, or None if singular."""
    n = len(mat)
    aug = [row[:] + [RF_ONE if i == j else RF_ZERO for j in range(n)] for i, row in enumerate(mat)]
    rref, pivots = rf_rref(aug)
    if pivots[:n] != list(range(n)):
        return None
    return [row[n:] for row in rref[:n]]


# ---------------------------------------------------------------------------
# componentwise wrappers over the pi-ring


def qpi_split(mat):
    plus = [[x.plus for x in row] for row in mat]
    minus = [[x.minus for x in row] for row in mat]
    return plus, minus


def qpi_join(plus, minus):
    return [
        [QPiScalar(a, b) for a, b in zip(rp, rm)]
        for rp, rm in zip(plus, minus)
    ]


def qpi_inverse(mat):
    plus, minus = qpi_split(mat)
    ip = rf_inverse(plus)
    im = rf_inverse(minus)
    if (ip is None) != (im is None):
        raise DimensionMismatch("matrix invertible in only one pi-specialization")
    if ip is None:
        return None
    return qpi_join(ip, im)


def qpi_solve(mat, rhs):
    """Componentwise solve; None if inconsistent in either specialization."""
    plus, minus = qpi_split(mat)
    bp = [x.plus for x in rhs]
    bm = [x.minus for x in rhs]
    xp = rf_solve(plus, bp)
    xm = rf_solve(minus, bm)
    if xp is None or xm is None:
        return None
    return [QPiScalar(a, b) for a, b in zip(xp, xm)]


def qpi_rank_profile(mat):
    """Pivot columns of the RREF, required to agree at pi = +-1."""
    plus, minus = qpi_split(mat)
    _, pp = rf_rref(plus)
    _, pm = rf_rref(minus)
    if pp != pm:
        raise DimensionMismatch(
            f"pivot profiles differ between pi=+1 ({pp}) and pi=-1 ({pm})"
        )
    return pp


def qpi_nullspace(mat, n_cols=None):
    """Nullspace basis recombined from the two specializations."""
    if not mat:
        return []
    n = n_cols if n_cols is not None else len(mat[0])
    plus, minus = qpi_split(mat)
    rp, pp = rf_rref(plus)
    rm, pm = rf_rref(minus)
    if pp != pm:
        raise DimensionMismatch(
            f"radical pivot profiles differ between pi=+1 ({pp}) and pi=-1 ({pm})"
        )
    free = [c for c in range(n) if c not in pp]
    basis = []
    for fc in free:
        vp = [RF_ZERO] * n
        vm = [RF_ZERO] * n
        vp[fc] = vm[fc] = RF_ONE
        for r, pc in enumerate(pp):
            vp[pc] = -rp[r][fc]
            vm[pc] = -rm[r][fc]
        basis.append([QPiScalar(a, b) for a, b in zip(vp, vm)])
    return basis


def qpi_independent_rows(mat):
    """Greedy maximal independent row set, consistent across pi = +-1.

    Rows are scanned in order; a row is kept iff it enlarges the span in
    both specializations (disagreement raises DimensionMismatch).
    """
    if not mat:
        return []
    kept = []
    ech_p = []
    ech_m = []

    def _try_add(ech, row):
        v = row[:]
        for lead, er in ech:
            if not v[lead].is_zero():
                f = v[lead]
                v = [a - f * b for a, b in zip(v, er)]
        for c, x in enumerate(v):
            if not x.is_zero():
                inv = x.inverse()
                return c, [y * inv for y in v]
        return None

    plus, minus = qpi_split(mat)
    for i in range(len(mat)):
        ap = _try_add(ech_p, plus[i])
        am = _try_add(ech_m, minus[i])
        if (ap is None) != (am is None):
            raise DimensionMismatch(
                f"row {i} independent in only one pi-specialization"
            )
        if ap is not None:
            ech_p.append(ap)
            ech_m.append(am)
            kept.append(i)
    return kept


# ---------------------------------------------------------------------------
# membership in finitely generated Laurent-polynomial modules
#
# Q[q, q^-1] is Euclidean (norm = exponent spread), so column reduction
# plus triangular division decides membership of a vector in the span of
# given columns.  Operates per pi-component on {exp: Fraction} dicts.

from fractions import Fraction as _Fraction


def _ld_trim(d):
    return {e: c for e, c in d.items() if c}


def _ld_sub_scaled(a, t, b):
    """a - t*b for Laurent dicts."""
    out = dict(a)
    for e2, c2 in t.items():
        for e1, c1 in b.items():
            e = e1 + e2
            s = out.get(e, _Fraction(0)) - c2 * c1
            if s:
                out[e] = s
            else:
                out.pop(e, None)
    return out


def _ld_norm(d):
    return max(d) - min(d)


def _ld_divmod(a, b):
    """a = b*t + r with norm(r) < norm(b); Laurent division over Q."""
    sa, sb = min(a), min(b)
    da = {e - sa: c for e, c in a.items()}
    db = {e - sb: c for e, c in b.items()}
    na, nb = max(da), max(db)
    lead_b = db[nb]
    t = {}
    r = dict(da)
    while r and max(r) >= nb:
        e = max(r)
        coeff = r[e] / lead_b
        t[e - nb] = coeff
        for e2, c2 in db.items():
            s = r.get(e2 + e - nb, _Fraction(0)) - coeff * c2
            if s:
                r[e2 + e - nb] = s
            else:
                r.pop(e2 + e - nb, None)
    tq = {e + sa - sb: c for e, c in t.items()}
    rr = {e + sa: c for e, c in r.items()}
    return tq, rr


def _laurent_membership_component(cols, target):
    cols = [[_ld_trim(dict(x)) for x in col] for col in cols]
    target = [_ld_trim(dict(x)) for x in target]
    nrows = len(target)
    pool = list(range(len(cols)))
    pivots = []
    for row in range(nrows):
        active = [j for j in pool if cols[j][row]]
        while len(active) > 1:
            active.sort(key=lambda j: _ld_norm(cols[j][row]))
            j0 = active[0]
            for k in active[1:]:
                t, _ = _ld_divmod(cols[k][row], cols[j0][row])
                if t:
                    cols[k] = [
                        _ld_sub_scaled(a, t, b) for a, b in zip(cols[k], cols[j0])
                    ]
            active = [j for j in active if cols[j][row]]
        if active:
            pivots.append((row, active[0]))
            pool.remove(active[0])
    for row, j in pivots:
        if target[row]:
            t, rem = _ld_divmod(target[row], cols[j][row])
            if rem:
                return False
            target = [_ld_sub_scaled(a, t, b) for a, b in zip(target, cols[j])]
    return all(not x for x in target)


def qpi_laurent_span_contains(cols, target):
    """Is target in the Z-free Laurent span of cols, per pi-component?

    Entries are QPiScalars; denominators are cleared by a common scalar
    first (a unit operation, so membership is unchanged).  Integer
    contents are NOT tracked: this is the Q[q,q^-1]-relaxation.
    """
    for comp in ("plus", "minus"):
        dens = set()
        for col in cols:
            for x in col:
                dens.add(tuple(sorted(getattr(x, comp).den.items())))
        for x in target:
            dens.add(tuple(sorted(getattr(x, comp).den.items())))
        clear = RF_ONE
        for den in dens:
            from .scalars import RationalFunction

            clear = clear * RationalFunction(dict(den), {0: 1})
        ccols = []
        for col in cols:
            scaled = [getattr(x, comp) * clear for x in col]
            assert all(s.is_laurent() for s in scaled)
            ccols.append([s.laurent_dict() for s in scaled])
        st = [getattr(x, comp) * clear for x in target]
        assert all(s.is_laurent() for s in st)
        if not _laurent_membership_component(ccols, [s.laurent_dict() for s in st]):
            return False
    return True
