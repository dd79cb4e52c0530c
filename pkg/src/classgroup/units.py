"""Unit group machinery on top of the relation matrix.

Units are carried as power products of the stored relation elements (plus
any roots appended by saturation), so the only exact objects are integer
exponent vectors.  Dependency detection runs p-adically with rigorous
precision bounds and every accepted relation is re-verified over the reals;
the regulator, LLL size reduction, saturation and compact representations
all operate on the same exponent-vector form.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import mpmath

from . import intpoly as ip
from . import lattice, nfcore, padic, zlinalg
from .padic import (NoAdmissiblePrime, NonUnitImage, PadicContext,
                    make_padic_context, raise_precision)


class PrecisionExhausted(Exception):
    """Working precision doubled past its retry budget."""


class LeopoldtAlert(Exception):
    """A p-adically detected dependency was refuted by the real logarithms.

    Under Leopoldt's conjecture this cannot happen; it is raised loudly and
    never silently accepted."""


class RootExtractionFailed(Exception):
    """A character-kernel class survived but is not an actual p-th power."""


def _quant(prec):
    return ((int(prec) + 63) // 64) * 64


def _unit_log_floor(n):
    """Universal lower bound on ||L(u)||_2 for non-torsion u of degree n."""
    return 21.0 * math.log(n) / (128.0 * n * n)


def _vp_cap(x, p, cap):
    if x == 0:
        return cap
    v = 0
    while v < cap and x % p == 0:
        x //= p
        v += 1
    return v


def _det_int(rows):
    """Exact integer determinant, fraction-free (Bareiss)."""
    M = [list(r) for r in rows]
    n = len(M)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for c in range(n - 1):
        if M[c][c] == 0:
            piv = next((i for i in range(c + 1, n) if M[i][c]), None)
            if piv is None:
                return 0
            M[c], M[piv] = M[piv], M[c]
            sign = -sign
        for i in range(c + 1, n):
            for j in range(c + 1, n):
                M[i][j] = (M[i][j] * M[c][c] - M[i][c] * M[c][j]) // prev
            M[i][c] = 0
        prev = M[c][c]
    return sign * M[-1][-1]


# ---------------------------------------------------------------------------
# generator pool

class Generators:
    """Shared pool of S-unit generators: the relation elements, extended by
    roots found during saturation.  Caches embedding data per precision and
    residue-field images per (q, root)."""

    def __init__(self, K, elements, rows=None, fb=None):
        self.K = K
        self.elements = [tuple(int(c) for c in e) for e in elements]
        self.nrel = len(self.elements)
        self.rows = [list(r) for r in rows] if rows is not None else None
        self.fb = fb
        self._index = {e: i for i, e in enumerate(self.elements)}
        self._emb = {}   # prec -> list of (logabs tuple, arg tuple) per gen
        self._res = {}   # (q, r) -> list of images mod q

    def __len__(self):
        return len(self.elements)

    def append(self, ib, row=None):
        """Add a generator; returns its index (existing index when known)."""
        ib = tuple(int(c) for c in ib)
        got = self._index.get(ib)
        if got is not None:
            return got
        self.elements.append(ib)
        if self.rows is not None:
            self.rows.append(list(row) if row is not None
                             else [0] * (len(self.fb) if self.fb else 0))
        self._index[ib] = len(self.elements) - 1
        return len(self.elements) - 1

    def _emb_block(self, prec):
        prec = _quant(prec)
        cache = self._emb.setdefault(prec, [])
        if len(cache) < len(self.elements):
            K = self.K
            E = K.ib_embedding_matrix(prec)
            places = K.r1 + K.r2
            with mpmath.workprec(prec + 32):
                for g in range(len(cache), len(self.elements)):
                    ib = self.elements[g]
                    logs, args = [], []
                    for v in range(places):
                        val = mpmath.mpc(0)
                        for i, c in enumerate(ib):
                            if c:
                                val += c * E[i][v]
                        logs.append(mpmath.log(abs(val)))
                        args.append(mpmath.arg(val))
                    cache.append((tuple(logs), tuple(args)))
        return cache

    def log_block(self, prec):
        return [t[0] for t in self._emb_block(prec)]

    def arg_block(self, prec):
        return [t[1] for t in self._emb_block(prec)]

    def residues(self, q, r):
        """Images of every generator under theta -> r in F_q; None when the
        map degenerates (q dividing the basis denominator)."""
        key = (q, r)
        cache = self._res.get(key)
        if cache is None:
            if self.K.wden % q == 0:
                return None
            cache = []
            self._res[key] = cache
        if len(cache) < len(self.elements):
            K = self.K
            dinv = pow(K.wden % q, -1, q)
            for g in range(len(cache), len(self.elements)):
                num, _den = K.ib_to_rat(self.elements[g])
                t = ip.peval(tuple(c % q for c in num), r) * dinv % q
                if t == 0:
                    return None
                cache.append(t)
        return cache


# ---------------------------------------------------------------------------
# power products

class UnitPowerProduct:
    """A unit (or S-unit) held as a sparse exponent vector over a generator
    pool: u = prod_i g_i^{x_i}."""

    def __init__(self, gens, exponents):
        self.gens = gens
        if isinstance(exponents, dict):
            self.exponents = {int(i): int(e) for i, e in exponents.items() if e}
        else:
            self.exponents = {i: int(e) for i, e in enumerate(exponents) if e}
        self.cached_real_logs = None    # (prec, weighted log tuple)
        self.cached_padic_logs = None   # ((p, m), residue tuple)

    def __repr__(self):
        return f"UnitPowerProduct({len(self.exponents)} term(s))"

    def dense(self):
        out = [0] * len(self.gens)
        for i, e in self.exponents.items():
            out[i] = e
        return out

    def pow(self, k):
        k = int(k)
        return UnitPowerProduct(self.gens, {i: e * k for i, e in self.exponents.items()})

    def mul(self, other):
        assert other.gens is self.gens
        out = dict(self.exponents)
        for i, e in other.exponents.items():
            out[i] = out.get(i, 0) + e
        return UnitPowerProduct(self.gens, out)

    def _expbits(self):
        if not self.exponents:
            return 1
        return max(abs(e) for e in self.exponents.values()).bit_length()

    def real_logs(self, prec=128):
        """Weighted real logs (c_v log|sigma_v(u)|), absolute error about
        2^-prec; the r1+r2 entries sum to zero for a unit."""
        got = self.cached_real_logs
        if got is not None and got[0] >= prec:
            return got[1]
        K = self.gens.K
        P = _quant(prec + self._expbits() + 96)
        logs = self.gens.log_block(P)
        places = K.r1 + K.r2
        with mpmath.workprec(P):
            acc = [mpmath.mpf(0)] * places
            for i, e in self.exponents.items():
                lg = logs[i]
                for v in range(places):
                    acc[v] += e * lg[v]
            for v in range(K.r1, places):
                acc[v] *= 2
        out = tuple(acc)
        self.cached_real_logs = (prec, out)
        return out

    def padic_logs(self, ctx):
        key = (ctx.p, ctx.m)
        got = self.cached_padic_logs
        if got is not None and got[0] == key:
            return got[1]
        items = sorted(self.exponents.items())
        bases = [self.gens.elements[i] for i, _ in items]
        out = ctx.powprod_log(bases, [e for _, e in items])
        self.cached_padic_logs = (key, out)
        return out


def _combine(gens, terms):
    """Power product prod u_j^{c_j} over (unit, coeff) pairs."""
    out = {}
    for u, c in terms:
        if not c:
            continue
        for i, e in u.exponents.items():
            out[i] = out.get(i, 0) + c * e
    return UnitPowerProduct(gens, out)


def padic_log_vector(ctx, u):
    """L_p(u) as n residues mod p^m (quadratic coordinates split as x, y)."""
    return u.padic_logs(ctx)


def _norm2(vec):
    with mpmath.workprec(96):
        s = mpmath.mpf(0)
        for v in vec:
            s += mpmath.mpf(v) ** 2
        s = mpmath.sqrt(s)
    return float(min(s, mpmath.mpf("1e300")))


# ---------------------------------------------------------------------------
# kernel vectors of the relation matrix

def kernel_units(M, hnf_script=None):
    """Candidate units from the left kernel of the relation matrix.

    With a recorded HNF script the kernel vectors are read off from the rows
    that reduce to zero during the elimination (plus diagonal-multiple
    candidates, which are kept only when they pass the exact membership
    test); without one a Dixon-based kernel solver is used.  Every returned
    vector satisfies X M = 0 over the integers, exactly."""
    fb = M.fb
    gens = getattr(M, "_unit_gens", None)
    if gens is None or gens.nrel != len(M.relations):
        gens = Generators(fb.K, [rel.ib for rel in M.relations],
                          rows=[list(r) for r in M.rows], fb=fb)
        M._unit_gens = gens
    if hnf_script is not None:
        script = getattr(hnf_script, "script", hnf_script)
        vecs = _script_kernel(M.rows, M.N, script)
    else:
        try:
            vecs = [list(v) for v in zlinalg.kernel_vectors(M.rows, M.N)]
        except zlinalg.LinalgError:
            res = zlinalg.hnf(M.rows, M.N, record_script=True)
            vecs = _script_kernel(M.rows, M.N, res.script)
    out = []
    seen = set()
    for v in vecs:
        if not any(v):
            continue
        acc = [0] * M.N
        for i, c in enumerate(v):
            if c:
                row = M.rows[i]
                for j in range(M.N):
                    acc[j] += c * row[j]
        assert not any(acc), "kernel candidate fails X M = 0"
        lead = next(c for c in v if c)
        key = tuple(v) if lead > 0 else tuple(-c for c in v)
        if key in seen:
            continue
        seen.add(key)
        out.append(UnitPowerProduct(gens, {i: c for i, c in enumerate(v) if c}))
    return out


def _script_kernel(rows, N, script):
    ops = [op for op in script if op[0] != "select"]
    k = len(rows)
    W = zlinalg.replay_script(rows, ops, N)
    U = zlinalg.replay_script([[1 if i == j else 0 for j in range(k)]
                               for i in range(k)], ops, k)
    vecs = [list(U[i]) for i in range(k) if not any(W[i])]
    sel = next((op[1] for op in script if op[0] == "select"), None)
    if sel:
        for si in sel:
            row = W[si]
            c = next((j for j in range(N - 1, -1, -1) if row[j]), None)
            if c is None or row[c] <= 1:
                continue
            # diagonal multiple of an HNF row composed with the script;
            # kept only if it happens to lie in the kernel
            cand = [row[c] * x for x in U[si]]
            acc = [row[c] * x for x in row]
            if not any(acc):
                vecs.append(cand)
    return vecs


# ---------------------------------------------------------------------------
# basis and regulator

class UnitBasis:
    """Independent units plus regulator and torsion bookkeeping."""

    def __init__(self, gens, torsion_order=None):
        self.gens = gens
        self.K = gens.K
        self.rank = self.K.r1 + self.K.r2 - 1
        self.units = []
        self.torsion_order = int(torsion_order) if torsion_order else self.K.torsion_order()
        self.regulator = 1.0 if self.rank == 0 else 0.0
        self.regulator_error = 0.0
        self.ctx = None   # live p-adic context, managed by insert_unit

    def __len__(self):
        return len(self.units)

    def recompute(self, precision=192):
        self.regulator, self.regulator_error = regulator(self, precision)


def regulator(basis, precision=192):
    """(R, error): |det| of the weighted log matrix with one place dropped.

    Convention: R = 1 for unit rank 0, R = 0 when the basis is not of full
    rank.  Every choice of dropped column is computed and must agree."""
    r = basis.rank
    if r == 0:
        return 1.0, 0.0
    if len(basis.units) < r:
        return 0.0, 0.0
    for P in (precision, 2 * precision):
        rows = [u.real_logs(P) for u in basis.units]
        with mpmath.workprec(P + 64):
            dets = []
            for drop in range(r + 1):
                sub = mpmath.matrix([[rows[i][v] for v in range(r + 1) if v != drop]
                                     for i in range(r)])
                dets.append(abs(mpmath.det(sub)))
            hi, lo = max(dets), min(dets)
            scale = max(mpmath.mpf(1), hi)
            if hi - lo <= scale * mpmath.ldexp(1, -40):
                err = float(hi - lo) + math.ldexp(1.0, -(P // 2))
                return float(sum(dets) / len(dets)), err
    raise PrecisionExhausted("regulator column drops disagree")


# ---------------------------------------------------------------------------
# p-adic dependency detection

def _padic_square_solve(cols, rhs, p, m):
    """Square subsystem choice plus exact Cramer determinants mod p^m.

    cols: one n-vector of residues per basis unit; rhs likewise.  Rows are
    picked greedily by least pivot valuation (the p-adic counterpart of
    largest-pivot selection), with an exhaustive fallback.  Returns
    (sel_rows, D, dets, vD) or None when every choice is singular."""
    n = len(rhs)
    s = len(cols)
    pm = p ** m
    A = [[cols[j][i] % pm for j in range(s)] for i in range(n)]

    def subset_det(sel):
        return _det_int([A[i] for i in sel]) % pm

    # greedy pass: fraction-free elimination, pivots of least valuation
    W = [list(r) for r in A]
    left = list(range(n))
    sel = []
    for c in range(s):
        best, bestv = None, None
        for i in left:
            v = _vp_cap(W[i][c], p, m)
            if bestv is None or v < bestv:
                best, bestv = i, v
        if bestv is None or bestv >= m:
            sel = None
            break
        sel.append(best)
        left.remove(best)
        for i in left:
            piv = W[best][c]
            row = [(W[i][j] * piv - W[best][j] * W[i][c]) % pm for j in range(s)]
            t = min((_vp_cap(x, p, m) for x in row if x), default=m)
            if 0 < t < m:
                row = [x // p ** t for x in row]
            W[i] = row
    if sel is not None:
        sel = sorted(sel)
        D = subset_det(sel)
        vD = _vp_cap(D, p, m)
    else:
        vD = m
    if sel is None or vD >= m - 2:
        best = None
        for comb in itertools.combinations(range(n), s):
            D2 = subset_det(list(comb))
            v2 = _vp_cap(D2, p, m)
            if best is None or v2 < best[2]:
                best = (list(comb), D2, v2)
            if v2 <= s:
                break
        sel, D, vD = best
        if vD >= m - 2:
            return None
    dets = []
    for j in range(s):
        Mj = [[rhs[i] % pm if jj == j else A[i][jj] for jj in range(s)] for i in sel]
        dets.append(_det_int(Mj) % pm)
    return sel, D, dets, vD


def _cramer_bits(cols, newcol, dlow):
    """Bit bounds for Cramer numerators and denominators over a greedily
    chosen set of places (rows maximizing successive orthogonal parts)."""
    s = len(cols)
    places = len(newcol)
    with mpmath.workprec(96):
        rows = [[mpmath.mpf(cols[j][v]) for j in range(s)] for v in range(places)]
        chosen = []
        basis = []
        avail = list(range(places))
        for _ in range(s):
            best, bestn, bestw = None, None, None
            for v in avail:
                w = list(rows[v])
                for bvec in basis:
                    bn = sum(x * x for x in bvec)
                    if bn > 0:
                        mu = sum(a * b for a, b in zip(w, bvec)) / bn
                        w = [a - mu * b for a, b in zip(w, bvec)]
                nrm = sum(x * x for x in w)
                if bestn is None or nrm > bestn:
                    best, bestn, bestw = v, nrm, w
            chosen.append(best)
            basis.append(bestw)
            avail.remove(best)
        bits_num = bits_den = -math.log2(max(dlow, 1e-300))
        for v in chosen:
            den_n = sum(x * x for x in rows[v])
            num_n = den_n + mpmath.mpf(newcol[v]) ** 2
            bits_den += float(mpmath.log(max(den_n, mpmath.mpf("1e-280")), 2)) / 2
            bits_num += float(mpmath.log(max(num_n, mpmath.mpf("1e-280")), 2)) / 2
    return max(1.0, bits_num), max(1.0, bits_den)


def _real_residual(units, new, xs):
    """|| sum x_i L(beta_i) - L(new) ||_2 at enough precision to be decisive."""
    xbits = max([1] + [x.numerator.bit_length() + x.denominator.bit_length()
                       for x in xs])
    prec = 64 + xbits
    rows = [u.real_logs(prec) for u in units]
    Ln = new.real_logs(prec)
    P = _quant(prec + 128)
    with mpmath.workprec(P):
        res = list(mpmath.mpf(0) - l for l in Ln)
        for x, row in zip(xs, rows):
            xf = mpmath.mpf(x.numerator) / x.denominator
            for v in range(len(res)):
                res[v] += xf * row[v]
    return _norm2(res)


def insert_unit(basis, new, ctx=None, euler_lower_bound_R=None):
    """Insert a candidate unit into an independent basis.

    Solves sum x_i L_p(beta_i) = L_p(new) on a square row subset, recovers
    rational x_i by rational reconstruction with Cramer/Hadamard bounds over
    a unit-log lower bound, and re-verifies any dependency over the reals.
    Returns (basis, dependency): the dependency is a tuple of Fractions (empty
    for a torsion unit) or None when `new` is independent and was added."""
    gens = basis.gens
    K = basis.K
    r = basis.rank
    s = len(basis.units)
    if not new.exponents:
        return basis, ()
    clow = _unit_log_floor(K.n)
    if _norm2(new.real_logs(64)) < clow / 2:
        return basis, ()    # torsion: L(u) = 0
    if s == 0:
        basis.units.append(new)
        basis.recompute()
        return basis, None
    if ctx is None:
        ctx = basis.ctx
    if ctx is None:
        minp = gens.fb.bound if gens.fb is not None else 1000
        ctx = make_padic_context(K, 32, min_p=max(1000, minp))
    cols96 = [u.real_logs(96) for u in basis.units]
    new96 = new.real_logs(96)
    if s == r and euler_lower_bound_R:
        dlow = float(euler_lower_bound_R)
    else:
        dlow = clow ** s * 2.0 ** (-s * s)
    bits_num, bits_den = _cramer_bits(cols96, new96, dlow)
    p = ctx.p
    m_need = max(24, math.ceil(2.0 * max(bits_num, bits_den) / math.log2(p)) + 16)
    dep = None
    for attempt in range(4):
        if ctx.m < m_need:
            ctx = raise_precision(ctx, m_need)
        basis.ctx = ctx
        try:
            A = [u.padic_logs(ctx) for u in basis.units]
            bb = new.padic_logs(ctx)
        except NonUnitImage:
            ctx = make_padic_context(K, m_need, min_p=ctx.p + 1)
            basis.ctx = ctx
            continue
        m = ctx.m
        pm = p ** m
        solved = _padic_square_solve(A, bb, p, m)
        if solved is None:
            m_need *= 2
            continue
        sel, D, dets, vD = solved
        # consistency of the rows left out: inconsistency proves independence
        guard = vD + 24 + s
        indep = False
        selset = set(sel)
        for i in range(K.n):
            if i in selset:
                continue
            delta = (sum(A[j][i] * dets[j] for j in range(s)) - bb[i] * D) % pm
            if delta and _vp_cap(delta, p, m) < m - guard:
                indep = True
                break
        if indep:
            basis.units.append(new)
            basis.recompute()
            return basis, None
        nb = 1 << max(8, int(bits_num) + 2)
        db = 1 << max(8, int(bits_den) + 2)
        if p ** (m - vD) <= 16 * nb * db:
            m_need = max(m_need * 2,
                         math.ceil((math.log2(nb) + math.log2(db) + 8) / math.log2(p)) + vD + 8)
            continue
        mod_red = p ** (m - vD)
        uD = (D // p ** vD) % mod_red
        uDinv = pow(uD, -1, mod_red)
        xs = []
        ok = True
        for Dj in dets:
            if Dj == 0:
                xs.append(Fraction(0))
                continue
            vj = _vp_cap(Dj, p, m)
            w = (Dj // p ** vj) * uDinv % mod_red
            rec = zlinalg.ratrecon(w, mod_red, nb, db)
            if rec is None:
                ok = False
                break
            a, bden = rec
            xs.append(Fraction(a, bden) * Fraction(p) ** (vj - vD))
        if not ok:
            m_need *= 2
            continue
        resid = _real_residual(basis.units, new, xs)
        if resid >= clow / 2:
            if attempt < 3:
                m_need *= 2
                continue
            raise LeopoldtAlert(
                f"p-adic dependency refuted over R: residual {resid:.3e} "
                f">= {clow / 2:.3e}; x = {tuple(map(str, xs))}")
        dep = tuple(xs)
        break
    if dep is None:
        raise PrecisionExhausted(f"insert_unit: no decision at p={p}, m={m_need}")
    dl = 1
    for x in dep:
        dl = math.lcm(dl, x.denominator)
    if dl == 1:
        return basis, dep
    # denominator: the span grows, rebuild the basis through an HNF transform
    rows = [[dl if i == j else 0 for j in range(s)] for i in range(s)]
    last = []
    for x in dep:
        v = x * dl
        assert v.denominator == 1
        last.append(int(v))
    rows.append(last)
    H, T, _kern = zlinalg.hnf_with_transform(rows, s)
    assert len(H.rows) == s, "dependent insert must keep the rank"
    inputs = list(basis.units) + [new]
    Rold = basis.regulator
    newunits = []
    for trow in T:
        alpha = _combine(gens, list(zip(inputs, trow)))
        assert alpha.exponents, "unimodular combination collapsed"
        newunits.append(alpha)
    basis.units = newunits
    basis.recompute()
    if Rold and basis.regulator:
        ratio = Rold / basis.regulator
        assert abs(ratio - round(ratio)) < 1e-6 and round(ratio) >= 1, \
            "regulator must drop by an integer factor"
    return basis, dep


# ---------------------------------------------------------------------------
# size reduction

def size_reduce_basis(basis):
    """LLL-reduce the basis in real-log space (exact unimodular bookkeeping
    on the exponent vectors).  The max log norm never increases and the
    regulator is unchanged; on any precision trouble this is a no-op."""
    s = len(basis.units)
    if s < 2:
        return basis
    logs = [u.real_logs(160) for u in basis.units]
    sigma = 80
    with mpmath.workprec(_quant(max(_log_mag_bits(logs), 1) + sigma + 96)):
        V = [[int(mpmath.nint(mpmath.ldexp(l, sigma))) for l in row] for row in logs]
    _reduced, T = lattice.lll_exact(V)
    if all(T[i][j] == (1 if i == j else 0) for i in range(s) for j in range(s)):
        return basis
    cand = []
    for trow in T:
        u = _combine(basis.gens, list(zip(basis.units, trow)))
        if not u.exponents:
            return basis
        cand.append(u)
    old_inf = max(_inf_norm(u.real_logs(64)) for u in basis.units)
    new_inf = max(_inf_norm(u.real_logs(64)) for u in cand)
    if new_inf > old_inf * (1 + 1e-9) + 1e-12:
        return basis
    Rold, Eold = basis.regulator, basis.regulator_error
    old_units = basis.units
    basis.units = cand
    basis.recompute()
    if Rold and abs(basis.regulator - Rold) > math.ldexp(max(1.0, Rold), -40) + Eold:
        basis.units = old_units
        basis.recompute()
    return basis


def _log_mag_bits(rows):
    top = 1.0
    for row in rows:
        for l in row:
            top = max(top, abs(float(l)))
    return int(math.log2(top)) + 1


def _inf_norm(vec):
    return max(abs(float(v)) for v in vec)


# ---------------------------------------------------------------------------
# compact representation

def _signed_digits(e, p):
    """Plain base-p digits of |e| carrying the sign of e entrywise."""
    sgn = -1 if e < 0 else 1
    v = abs(int(e))
    out = []
    while v:
        out.append(sgn * (v % p))
        v //= p
    return out


def _coords_from_embeddings(K, values, prec):
    """Integer coordinates over the integral basis from per-place values
    (real mpf for real places, mpc for complex ones); None if rounding is
    ambiguous."""
    n = K.n
    E = K.ib_embedding_matrix(prec)
    with mpmath.workprec(prec + 32):
        M = mpmath.matrix(n, n)
        b = mpmath.matrix(n, 1)
        row = 0
        for v in range(K.r1 + K.r2):
            if v < K.r1:
                for i in range(n):
                    M[row, i] = mpmath.re(E[i][v])
                b[row] = mpmath.re(values[v])
                row += 1
            else:
                for i in range(n):
                    M[row, i] = mpmath.re(E[i][v])
                    M[row + 1, i] = mpmath.im(E[i][v])
                b[row] = mpmath.re(values[v])
                b[row + 1] = mpmath.im(values[v])
                row += 2
        try:
            y = mpmath.lu_solve(M, b)
        except ZeroDivisionError:
            return None
        out = []
        for i in range(n):
            t = mpmath.nint(y[i])
            if abs(y[i] - t) > 0.25:
                return None
            out.append(int(t))
    return tuple(out)


def _power_product_denominator(gens, vec):
    """Smallest d > 0 with d * (the product) integral, from exact valuations."""
    if gens.rows is None or gens.fb is None:
        return 1
    vals = {}
    for i, c in enumerate(vec):
        if not c:
            continue
        row = gens.rows[i]
        for idx, e in enumerate(row):
            if e:
                vals[idx] = vals.get(idx, 0) + c * e
    need = {}
    for idx, v in vals.items():
        if v < 0:
            P = gens.fb.primes[idx]
            k = (-v + P.e - 1) // P.e
            need[P.p] = max(need.get(P.p, 0), k)
    d = 1
    for q, k in need.items():
        d *= q ** k
    return d


def _eval_power_product(gens, vec, logv, argv, prec):
    """Explicit element of a power product from tracked embedding data:
    returns (ib, den) or None when rounding fails."""
    K = gens.K
    den = _power_product_denominator(gens, vec)
    with mpmath.workprec(prec + 32):
        ld = mpmath.log(den) if den > 1 else mpmath.mpf(0)
        values = []
        for v in range(K.r1 + K.r2):
            mag = mpmath.exp(logv[v] + ld)
            if v < K.r1:
                values.append(mag * mpmath.cos(argv[v]))
            else:
                values.append(mag * mpmath.expjpi(argv[v] / mpmath.pi))
        coords = _coords_from_embeddings(K, values, prec)
    if coords is None:
        return None
    return coords, den


def _ib_residue(K, ib, q, r, dinv):
    num, _den = K.ib_to_rat(ib)
    return ip.peval(tuple(c % q for c in num), r) * dinv % q


def _modular_identity_ok(gens, exps, vecs, elems, p, count=10):
    """Image of prod g_i^{e_i} equals image of prod a_j^{p^j} in `count`
    residue fields F_q (theta -> root of f mod q)."""
    K = gens.K
    q = 1 << 20
    done = 0
    while done < count:
        q = ip.next_prime(q)
        if K.disc_f % q == 0 or K.wden % q == 0:
            continue
        if any(e[1] % q == 0 for e in elems):
            continue
        roots = ip.roots_mod_p(K.f, q)
        if not roots:
            continue
        r = roots[0]
        images = gens.residues(q, r)
        if images is None:
            continue
        lhs = 1
        for i, e in enumerate(exps):
            if e:
                lhs = lhs * pow(images[i], e % (q - 1), q) % q
        dinv = pow(K.wden % q, -1, q)
        rhs = 1
        for j, (ib, den) in enumerate(elems):
            t = _ib_residue(K, ib, q, r, dinv) * pow(den, -1, q) % q
            rhs = rhs * pow(t, pow(p, j, q - 1), q) % q
        if lhs != rhs:
            return False
        done += 1
    return True


def _babai_coeffs(red_wlogs, target, prec):
    """Round the weighted target onto the span of the reducer logs."""
    s = len(red_wlogs)
    with mpmath.workprec(prec):
        G = mpmath.matrix(s, s)
        rhs = mpmath.matrix(s, 1)
        for i in range(s):
            for j in range(s):
                G[i, j] = sum(a * b for a, b in zip(red_wlogs[i], red_wlogs[j]))
            rhs[i] = sum(a * b for a, b in zip(red_wlogs[i], target))
        try:
            c = mpmath.lu_solve(G, rhs)
        except ZeroDivisionError:
            return [0] * s
        return [int(mpmath.nint(c[i])) for i in range(s)]


def _compact_rep(u, p, reducers=None):
    """Digit expansion u = prod a_j^{p^j} with per-level size reduction.

    Returns (vecs, elems): exponent vector and explicit (ib, den) per level.
    The expansion identity is verified via real logs and via residue fields."""
    gens = u.gens
    K = gens.K
    e = u.dense()
    g = len(e)
    if not any(e):
        return [[0] * g], [(K.ib_one(), 1)]
    digits = [_signed_digits(v, p) for v in e]
    t = max(len(d) for d in digits)
    places = K.r1 + K.r2
    wt = [1] * K.r1 + [2] * K.r2
    expbits = max(abs(v) for v in e).bit_length()
    base_prec = _quant(320 + 2 * expbits)
    for _attempt in range(3):
        P = base_prec
        logs = gens.log_block(P)
        args = gens.arg_block(P)
        red_dense = red_wlogs = red_logs = red_args = None
        if reducers:
            red_dense = [r.dense() for r in reducers]
            red_logs = []
            red_args = []
            with mpmath.workprec(P):
                for rv in red_dense:
                    lr = [mpmath.mpf(0)] * places
                    ar = [mpmath.mpf(0)] * places
                    for i, c in enumerate(rv):
                        if c:
                            for v in range(places):
                                lr[v] += c * logs[i][v]
                                ar[v] += c * args[i][v]
                    red_logs.append(lr)
                    red_args.append(ar)
                red_wlogs = [[w * l for w, l in zip(wt, lr)] for lr in red_logs]
        vecs = [None] * t
        elems = [None] * t
        ok = True
        with mpmath.workprec(P):
            two_pi = 2 * mpmath.pi
            Wlog = [mpmath.mpf(0)] * places
            Warg = [mpmath.mpf(0)] * places
            gvec_prev = [0] * g
            glog_prev = [mpmath.mpf(0)] * places
            garg_prev = [mpmath.mpf(0)] * places
            for j in range(t - 1, -1, -1):
                bidx = [(i, digits[i][j]) for i in range(g)
                        if j < len(digits[i]) and digits[i][j]]
                Lb = [mpmath.mpf(0)] * places
                Ab = [mpmath.mpf(0)] * places
                for i, d in bidx:
                    for v in range(places):
                        Lb[v] += d * logs[i][v]
                        Ab[v] += d * args[i][v]
                for v in range(places):
                    Wlog[v] = p * Wlog[v] + Lb[v]
                    Warg[v] = mpmath.fmod(p * Warg[v] + Ab[v], two_pi)
                if reducers and j > 0:
                    target = [w * l for w, l in zip(wt, Wlog)]
                    c = _babai_coeffs(red_wlogs, target, P)
                    gvec = [0] * g
                    glog = [mpmath.mpf(0)] * places
                    garg = [mpmath.mpf(0)] * places
                    for ci, rv in zip(c, red_dense):
                        if ci:
                            for i in range(g):
                                gvec[i] += ci * rv[i]
                    for ci, lr, ar in zip(c, red_logs, red_args):
                        if ci:
                            for v in range(places):
                                glog[v] += ci * lr[v]
                                garg[v] += ci * ar[v]
                else:
                    gvec = [0] * g
                    glog = [mpmath.mpf(0)] * places
                    garg = [mpmath.mpf(0)] * places
                avec = [p * gvec_prev[i] - gvec[i] for i in range(g)]
                for i, d in bidx:
                    avec[i] += d
                alog = [p * glog_prev[v] + Lb[v] - glog[v] for v in range(places)]
                aarg = [mpmath.fmod(p * garg_prev[v] + Ab[v] - garg[v], two_pi)
                        for v in range(places)]
                mag = max([abs(float(l)) for l in alog] + [1.0])
                got = _eval_power_product(gens, avec, alog, aarg,
                                          _quant(192 + int(1.6 * mag)))
                if got is None:
                    ok = False
                    break
                vecs[j] = avec
                elems[j] = got
                gvec_prev, glog_prev, garg_prev = gvec, glog, garg
        if ok:
            # reconstruction sanity: digit recombination gives back u
            for i in range(g):
                acc = 0
                for j in range(t - 1, -1, -1):
                    acc = acc * p + (digits[i][j] if j < len(digits[i]) else 0)
                assert acc == e[i]
            if _expansion_checks_ok(gens, u, vecs, elems, p, Wlog):
                return vecs, elems
        base_prec *= 2
    raise PrecisionExhausted("compact representation verification failed")


def _expansion_checks_ok(gens, u, vecs, elems, p, Wlog):
    K = gens.K
    places = K.r1 + K.r2
    t = len(elems)
    prec = _quant(192 + t * max(1, p.bit_length()))
    E = K.ib_embedding_matrix(prec)
    with mpmath.workprec(prec):
        acc = [mpmath.mpf(0)] * places
        pj = 1
        for j in range(t):
            ib, den = elems[j]
            for v in range(places):
                val = mpmath.mpc(0)
                for i, c in enumerate(ib):
                    if c:
                        val += c * E[i][v]
                acc[v] += pj * (mpmath.log(abs(val)) - mpmath.log(den))
            pj *= p
        scale = max([abs(x) for x in Wlog] + [mpmath.mpf(1)])
        diff = max(abs(acc[v] - Wlog[v]) for v in range(places))
        if diff > scale * mpmath.ldexp(1, -30):
            return False
    return _modular_identity_ok(gens, u.dense(), vecs, elems, p)


def compact_representation(u, p, reducers=None):
    """u = prod a_i^{p^i}: base-p digits of the exponent vector with
    per-level size reduction against `reducers` (none: plain digits).
    Returns the small elements a_i as (ib, den) pairs, den = 1 for units.
    u is a p-th power iff a_0 is, so only a_0 ever needs the power test."""
    _vecs, elems = _compact_rep(u, p, reducers)
    return elems


# ---------------------------------------------------------------------------
# explicit p-th roots

def _nth_root_element(K, a_ib, a_den, p, d_b=1):
    """b with b^p = a (a = a_ib / a_den), as (ib of d_b * b, d_b); None when
    no such element exists.  Tries every consistent choice of real signs and
    complex phases, then verifies exactly."""
    coefbits = max([1] + [abs(c).bit_length() for c in a_ib]) + a_den.bit_length()
    prec = _quant(160 + 2 * coefbits)
    for _ in range(2):
        E = K.ib_embedding_matrix(prec)
        with mpmath.workprec(prec + 32):
            vals = []
            for v in range(K.r1 + K.r2):
                val = mpmath.mpc(0)
                for i, c in enumerate(a_ib):
                    if c:
                        val += c * E[i][v]
                vals.append(val / a_den)
            base = []
            for v in range(K.r1 + K.r2):
                if v < K.r1:
                    x = mpmath.re(vals[v])
                    if p % 2 == 0 and x < 0:
                        return None
                    mag = abs(x) ** (mpmath.mpf(1) / p)
                    base.append(mag if (p % 2 == 0 or x >= 0) else -mag)
                else:
                    base.append(abs(vals[v]) ** (mpmath.mpf(1) / p)
                                * mpmath.expjpi(mpmath.arg(vals[v]) / (p * mpmath.pi)))
            sign_sets = []
            for v in range(K.r1 + K.r2):
                if v < K.r1:
                    sign_sets.append((1, -1) if p % 2 == 0 else (1,))
                else:
                    sign_sets.append(tuple(mpmath.expjpi(2 * mpmath.mpf(k) / p)
                                           for k in range(p)))
            for combo in itertools.product(*sign_sets):
                cand_vals = [d_b * b * c for b, c in zip(base, combo)]
                coords = _coords_from_embeddings(K, cand_vals, prec)
                if coords is None:
                    continue
                lhs = K.ib_pow(coords, p)
                scale = d_b ** p
                if all(l * a_den == c * scale for l, c in zip(lhs, a_ib)):
                    return coords, d_b
        prec *= 2
    return None


# ---------------------------------------------------------------------------
# saturation

def torsion_order(K):
    """|mu(K)|, exactly (cyclotomic gcd test)."""
    return K.torsion_order()


def torsion_generator(K):
    """Integral-basis coordinates of a generator of mu(K)."""
    if K.r1 > 0 or K.torsion_order() == 2:
        return K.to_ib((-1,))
    o = K.torsion_order()
    w = nfcore._find_root_of_unity(K, o, K.roots(192),
                                   K.ib_embedding_matrix(192), 192)
    assert w is not None, "torsion order without a torsion generator"
    return w


def _char_stream(K, fb, p):
    """Degree-1 characters (q, root) with q = 1 mod p outside the base."""
    q = max(fb.bound, 256)
    while True:
        q = ip.next_prime(q)
        if (q - 1) % p or K.disc_f % q == 0 or K.wden % q == 0:
            continue
        for r in ip.roots_mod_p(K.f, q):
            yield q, r


def _order_p_table(q, p):
    for a in range(2, 60):
        z = pow(a, (q - 1) // p, q)
        if z != 1:
            tab = {}
            t = 1
            for k in range(p):
                tab[t] = k
                t = t * z % q
            return tab
    return None


def _shrink_kernel(vecs, cvals, p):
    piv = next((i for i, c in enumerate(cvals) if c), None)
    if piv is None:
        return vecs
    inv = pow(cvals[piv], -1, p)
    out = []
    for i, v in enumerate(vecs):
        if i == piv:
            continue
        f = cvals[i] * inv % p
        out.append([(a - f * b) % p for a, b in zip(v, vecs[piv])])
    return out


def _character_kernel(glist, fb, p, qlimit):
    """Intersection of ker(phi_Q) over degree-1 Q until stable for five
    consecutive characters."""
    gens = glist[0].gens
    K = gens.K
    dense = [u.dense() for u in glist]
    kernel = [[1 if i == j else 0 for j in range(len(glist))]
              for i in range(len(glist))]
    stable = 0
    seen = 0
    for q, r in _char_stream(K, fb, p):
        if seen >= qlimit or stable >= 5 or not kernel:
            break
        images = gens.residues(q, r)
        if images is None:
            continue
        tab = _order_p_table(q, p)
        if tab is None:
            continue
        vals = []
        for e in dense:
            tacc = 1
            for i, ei in enumerate(e):
                if ei:
                    tacc = tacc * pow(images[i], ei % (q - 1), q) % q
            vals.append(tab[pow(tacc, (q - 1) // p, q)])
        seen += 1
        cvals = [sum(v[j] * vals[j] for j in range(len(vals))) % p for v in kernel]
        if any(cvals):
            kernel = _shrink_kernel(kernel, cvals, p)
            stable = 0
        else:
            stable += 1
    return kernel


def _extract_root(basis, glist, vec, p):
    """p-th root of prod glist^vec as a power product; None on failure."""
    gens = basis.gens
    K = basis.K
    u = _combine(gens, [(glist[j], int(vec[j]) % p)
                        for j in range(len(glist)) if vec[j] % p])
    if not u.exponents:
        return ()
    e = u.dense()
    if all(v % p == 0 for v in e):
        return UnitPowerProduct(gens, {i: v // p for i, v in enumerate(e) if v // p})
    # reduce by p-th powers of the basis so the level-0 block stays small
    shift = [0] * len(basis.units)
    if basis.units:
        prec = _quant(96 + u._expbits())
        target = u.real_logs(prec)
        red = [bu.real_logs(prec) for bu in basis.units]
        shift = _babai_coeffs(red, [t / p for t in target], prec)
        u = _combine(gens, [(u, 1)] + [(basis.units[i], -p * c)
                                       for i, c in enumerate(shift)])
        if not u.exponents:
            return _combine(gens, list(zip(basis.units, shift)))
        e = u.dense()
        if all(v % p == 0 for v in e):
            inner = UnitPowerProduct(gens,
                                     {i: v // p for i, v in enumerate(e) if v // p})
            return _combine(gens, [(inner, 1)] + list(zip(basis.units, shift)))
    # valuation precheck: a p-th power has all valuations divisible by p
    if gens.rows is not None:
        vals = [0] * (len(gens.fb) if gens.fb else 0)
        for i, c in enumerate(e):
            if c:
                for idx, x in enumerate(gens.rows[i]):
                    if x:
                        vals[idx] += c * x
        if any(v % p for v in vals):
            return None
    vecs, elems = _compact_rep(u, p, reducers=basis.units)
    a0_ib, a0_den = elems[0]
    rowsum = [v // p for v in vals] if gens.rows is not None else []
    d_b = 1
    if gens.fb is not None:
        need = {}
        for idx, v in enumerate(rowsum):
            if v < 0:
                P = gens.fb.primes[idx]
                k = (-v + P.e - 1) // P.e
                need[P.p] = max(need.get(P.p, 0), k)
        for qq, k in need.items():
            d_b *= qq ** k
    got = _nth_root_element(K, a0_ib, a0_den, p, d_b)
    if got is None:
        return None
    b_ib, den = got
    brow = None
    if gens.fb is not None:
        brow = list(rowsum)
        for idx, P in enumerate(gens.fb.primes):
            if den % P.p == 0:
                brow[idx] += _vp_cap(den, P.p, 64) * P.e
    num_idx = gens.append(b_ib, row=brow)
    out = {num_idx: 1}
    if den > 1:
        drow = None
        if gens.fb is not None:
            drow = [0] * len(gens.fb)
            for idx, P in enumerate(gens.fb.primes):
                if den % P.p == 0:
                    drow[idx] = _vp_cap(den, P.p, 64) * P.e
        den_idx = gens.append(K.to_ib((den,)), row=drow)
        out[den_idx] = out.get(den_idx, 0) - 1
    pj = 1
    for j in range(1, len(vecs)):
        for i, c in enumerate(vecs[j]):
            if c:
                out[i] = out.get(i, 0) + pj * c
        pj *= p
    core = UnitPowerProduct(gens, out)
    return _combine(gens, [(core, 1)] + list(zip(basis.units, shift)))


def saturate(basis, fb, p, trials=3):
    """Enlarge the basis by p-th roots detected through residue characters.

    Characters phi_Q: U -> F_Q*/(F_Q*)^p are intersected until stable for
    five consecutive Q; each surviving class is given an explicit root
    (exactly verified) and inserted.  Unchanged when already saturated."""
    if basis.rank == 0 or not basis.units:
        return basis
    size_reduce_basis(basis)
    gens = basis.gens
    K = basis.K
    qlimit = 40
    budget = max(1, trials)
    for _pass in range(max(1, trials) * (basis.rank + 3)):
        glist = []
        if basis.torsion_order % p == 0:
            tau = torsion_generator(K)
            glist.append(UnitPowerProduct(gens, {gens.append(tau): 1}))
        glist.extend(basis.units)
        kernel = _character_kernel(glist, fb, p, qlimit)
        kernel = [v for v in kernel if any(v)]
        if not kernel:
            return basis
        progressed = False
        failed = 0
        for vec in kernel:
            root = _extract_root(basis, glist, vec, p)
            if root is None:
                failed += 1
                continue
            if root == () or not root.exponents:
                continue
            Rold = basis.regulator
            sold = len(basis.units)
            insert_unit(basis, root)
            grown = len(basis.units) > sold
            dropped = (basis.regulator and Rold
                       and basis.regulator < Rold * (1 - 1e-9))
            if grown or dropped:
                size_reduce_basis(basis)
                progressed = True
                break
        if progressed:
            continue
        if failed:
            budget -= 1
            if budget <= 0:
                raise RootExtractionFailed(
                    f"{failed} class(es) survive characters at p={p} "
                    f"without a p-th root")
            qlimit += 40
            continue
        return basis
    return basis
