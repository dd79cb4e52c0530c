"""Line and lattice sieving over (i, j) rectangles, special-q, and the
relation-collection driver.

Accumulators hold 2*log2 contributions in float32.  Primes p <= I step rows
directly; powers p^k below 4I are slice-added and the first level at or above
4I is topped up with the exact residual valuation, so a truly smooth point
cannot fall under the threshold.  Primes p > I walk Franke-Kleinjung bases.
Every candidate is trial-divided exactly and confirmed by verify_relation
before it becomes a row."""

from __future__ import annotations

import math
import random
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import intpoly as ip
from . import nfcore
from . import zlinalg
from .factorbase import DuplicatePair, RankDeficiency, select_polynomial


class DegenerateRoot(Exception):
    pass


class RankStalled(Exception):
    def __init__(self, missing, msg=""):
        self.missing = list(missing)
        super().__init__(msg or f"rank stalled; missing ideals: {self.missing}")


class Timeout(Exception):
    pass


def _lg(p):
    return 2.0 * math.log2(p)


def _vp(n, p):
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def default_slack(B, n):
    return 2.0 * math.log2(B) + n + 2.0


# ---------------------------------------------------------------------------
# Franke-Kleinjung basis and traversal


def fk_basis(p, r, I):
    """Basis ((a,b),(c,d)) of {(i,j): i = r*j mod p} with -I < a <= 0 <= c < I,
    c - a >= I, b > 0, d > 0, by continued-fraction descent."""
    assert p > I > 0
    r %= p
    if r == 0:
        raise DegenerateRoot("r = 0: vertical lattice, step the i = 0 column")
    a, b = -p, 0
    c, d = r, 1
    while True:
        if -a >= I and c >= I:
            if -a >= c:
                q = (-a) // c
                a, b = a + q * c, b + q * d
            else:
                q = c // (-a)
                c, d = c + q * a, d + q * b
        elif -a >= I:
            # final partial step keeps the span c - a >= I
            q = ((-a) - I) // c + 1
            a, b = a + q * c, b + q * d
            break
        elif c >= I:
            q = (c - I) // (-a) + 1
            c, d = c + q * a, d + q * b
            break
        else:
            break
    assert -I < a <= 0 <= c < I and c - a >= I and b > 0 and d > 0
    assert abs(a * d - b * c) == p
    return ((a, b), (c, d))


def lattice_enumerate(basis, I, J):
    """Yield the points of the fk_basis lattice in [-I/2, I/2) x [1, J] in
    increasing j, each exactly once ((0,0) itself is skipped)."""
    (a, b), (c, d) = basis
    half = I // 2
    i, j = 0, 0
    while True:
        u = i + half
        if u < I - c:
            i, j = i + c, j + d
        elif u >= -a:
            i, j = i + a, j + b
        else:
            i, j = i + a + c, j + b + d
        if j > J:
            return
        if -half <= i < half and j >= 1:
            yield (i, j)


# ---------------------------------------------------------------------------
# special-q


class SpecialQ:
    """Sublattice restriction of a SievePolynomial to x = r_q * y mod q.

    coeffs is the composite form P(i*a0 + j*a1, i*b0 + j*b1), little-endian
    in i; every value is divisible by q."""

    __slots__ = ("base", "q", "rq", "basis", "coeffs", "reduced")

    def __init__(self, base, q, rq, basis, coeffs):
        self.base = base
        self.q = q
        self.rq = rq
        self.basis = basis
        self.coeffs = coeffs
        red = []
        for cc in coeffs:
            d, m = divmod(cc, q)
            assert m == 0
            red.append(d)
        self.reduced = tuple(red)

    def xy(self, i, j):
        (a0, b0), (a1, b1) = self.basis
        return (i * a0 + j * a1, i * b0 + j * b1)

    def element(self, i, j):
        x, y = self.xy(i, j)
        return self.base.element(x, y)

    def eval(self, i, j):
        n = len(self.coeffs) - 1
        acc = 0
        for k in range(n, -1, -1):
            acc = acc * i + self.coeffs[k] * j ** (n - k)
        return acc


def make_special_q(P, q, r_q):
    """Gauss-reduced basis of {(x,y): x = r_q y mod q} plus the transformed
    form.  Every value of the transformed form carries the factor q."""
    from .lattice import gauss_reduce_2d
    (a0, b0), (a1, b1) = gauss_reduce_2d((q, 0), (r_q % q, 1))
    n = len(P.coeffs) - 1
    A = (a1, a0)   # a0*t + a1 little-endian
    Bv = (b1, b0)
    total = (0,)
    for k in range(n + 1):
        term = (P.coeffs[k],)
        for _ in range(k):
            term = ip.pmul(term, A)
        for _ in range(n - k):
            term = ip.pmul(term, Bv)
        total = ip.padd(total, term)
    coeffs = tuple(total) + (0,) * (n + 1 - len(total))
    return SpecialQ(P, q, r_q % q, ((a0, b0), (a1, b1)), coeffs)


def transport_roots(sq, p, roots, projective=False):
    """Map roots of the base form mod p to roots of the transformed form.

    Returns (affine roots tuple, projective flag of the transformed form)."""
    (a0, b0), (a1, b1) = sq.basis
    out = []
    proj = False
    for r in roots:
        den = (a0 - r * b0) % p
        if den:
            out.append((-(a1 - r * b1) * pow(den, -1, p)) % p)
        else:
            proj = True
    if projective:
        if b0 % p:
            out.append((-b1 * pow(b0, -1, p)) % p)
        else:
            proj = True
    return tuple(sorted(set(out))), proj


# ---------------------------------------------------------------------------
# row-level machinery


def _root_levels(f, p, cap, branch_cap=64):
    """[(p^k, roots of f mod p^k)] for k = 1..K, K minimal with p^K >= cap;
    None if lift branching exceeds branch_cap."""
    base = ip.roots_mod_p(tuple(c % p for c in f), p)
    levels = [(p, tuple(base))]
    pk = p
    cur = list(base)
    fp = ip.pderiv(f)
    while pk < cap and cur:
        pk1 = pk * p
        nxt = []
        for r in cur:
            fr = ip.peval(f, r)
            fpr = ip.peval(fp, r) % p
            if fpr:
                d = pow(ip.peval(fp, r) % pk1, -1, pk1)
                nxt.append((r - fr * d) % pk1)
            else:
                if fr % pk1 == 0:
                    nxt.extend(r + c * pk for c in range(p))
            if len(nxt) > branch_cap:
                return None
        cur = nxt
        pk = pk1
        levels.append((pk, tuple(cur)))
    return levels


def _apply_levels(acc, levels, I, w, mul, rowpoly, p):
    """Slice-add w at every level below the deepest; top the deepest level up
    with the exact residual valuation.  mul transports t-side roots onto the
    row (x = t*y0 mod p^k)."""
    half = I // 2
    deep_k = len(levels)
    for k in range(deep_k - 1):
        pk, roots = levels[k]
        for r in roots:
            acc[((r * mul) % pk + half) % pk::pk] += w
    pk, roots = levels[-1]
    for r in roots:
        pos = ((r * mul) % pk + half) % pk
        while pos < I:
            val = ip.peval(rowpoly, pos - half)
            if val:
                v = _vp(val, p)
                if v > deep_k - 1:
                    acc[pos] += (v - (deep_k - 1)) * w
            pos += pk


def _row_poly(coeffs, y0):
    n = len(coeffs) - 1
    return tuple(coeffs[k] * y0 ** (n - k) for k in range(n + 1))


def _generic_row_prime(acc, rowpoly, p, I, cap, w):
    """Exact sieve of one prime on one row straight from the row polynomial.
    Returns the uniform contribution (content valuation times w)."""
    g = min(_vp(c, p) for c in rowpoly if c)
    if g:
        pg = p ** g
        rowpoly = tuple(c // pg for c in rowpoly)
    levels = _root_levels(rowpoly, p, cap)
    if levels is None:
        # branch explosion: walk the mod-p classes and valuate exactly
        half = I // 2
        for r in ip.roots_mod_p(tuple(c % p for c in rowpoly), p):
            for pos in range((r + half) % p, I, p):
                val = ip.peval(rowpoly, pos - half)
                if val:
                    acc[pos] += _vp(val, p) * w
    elif levels[0][1]:
        _apply_levels(acc, levels, I, w, 1, rowpoly, p)
    return g * w


class _Tables:
    """Per-form sieving tables: primitive part, t-side root levels for line
    primes (p <= I), and first-level data for lattice primes (p > I)."""

    __slots__ = ("content", "prim", "line", "latt", "I", "B")

    def __init__(self, coeffs, fb, I, B):
        self.I = I
        self.B = B
        self.content = ip.pcontent(coeffs)
        self.prim = tuple(c // self.content for c in coeffs)
        cap = 4 * I
        self.line = {}
        self.latt = []
        for p in fb.rational_primes:
            if p <= I:
                self.line[p] = _root_levels(self.prim, p, cap)
            else:
                roots = ip.roots_mod_p(tuple(c % p for c in self.prim), p)
                proj = self.prim[-1] % p == 0
                deep = _root_levels(self.prim, p, p * p) if roots else None
                self.latt.append((p, _lg(p), tuple(roots), deep, proj))


def _sieve_row(tabs, j, rowpoly):
    """float32 accumulator and uniform base for row j, line primes only."""
    I = tabs.I
    cap = 4 * I
    acc = np.zeros(I, dtype=np.float32)
    base = 0.0
    for p, levels in tabs.line.items():
        w = _lg(p)
        if j % p == 0 or levels is None:
            base += _generic_row_prime(acc, rowpoly, p, I, cap, w)
        elif levels[0][1]:
            _apply_levels(acc, levels, I, w, j, rowpoly, p)
    return acc, base


def _lattice_row(tabs, acc, j, rowpoly):
    """Row j contribution of the p > I primes, exact (single-row callers)."""
    I = tabs.I
    base = 0.0
    for p, w, roots, deep, proj in tabs.latt:
        if not roots and not proj:
            continue
        if j % p == 0:
            base += _generic_row_prime(acc, rowpoly, p, I, 2, w)
        elif deep:
            _apply_levels(acc, deep, I, w, j, rowpoly, p)
    return base


def _lattice_rect(tabs, j0, J):
    """FK walk of the p > I primes over the rectangle: {j: [(pos, w)]} plus
    per-row uniform extras {j: base}.  First powers via the walk, deep powers
    topped up exactly where a lifted root lands in the window."""
    I = tabs.I
    half = I // 2
    hits = {}
    bases = {}

    def add(pos, j, w):
        hits.setdefault(j, []).append((pos, w))

    for p, w, roots, deep, proj in tabs.latt:
        for r in roots:
            if r == 0:
                for j in range(j0, J + 1):
                    add(half, j, w)
            else:
                for (i, j) in lattice_enumerate(fk_basis(p, r, I), I, J):
                    if j >= j0:
                        add(i + half, j, w)
        if deep is not None and len(deep) > 1:
            pk, rootsk = deep[-1]
            if rootsk and pk <= 64 * I * max(J, 1):
                for rk in rootsk:
                    for j in range(j0, J + 1):
                        c = (rk * j) % pk
                        if c >= half:
                            c -= pk
                        if -half <= c < half:
                            val = ip.peval(_row_poly(tabs.prim, j), c)
                            if val:
                                v = _vp(val, p)
                                if v > 1:
                                    add(c + half, j, (v - 1) * w)
        if proj:
            j = max(j0 + (-j0) % p, p)
            while j <= J:
                rowpoly = _row_poly(tabs.prim, j)
                g = min(_vp(c, p) for c in rowpoly if c)
                bases[j] = bases.get(j, 0.0) + g * w
                j += p
    return hits, bases


def _threshold_candidates(prim, j, acc, base, I, slack):
    """Positions whose sieved mass reaches 2*log2|P(x, j)| - slack."""
    n = len(prim) - 1
    half = I // 2
    xs = np.arange(-half, half, dtype=np.float64)
    vals = np.zeros(I, dtype=np.float64)
    mags = np.zeros(I, dtype=np.float64)
    powx = np.ones(I, dtype=np.float64)
    for k in range(n + 1):
        c = float(prim[k]) * float(j) ** (n - k)
        vals += c * powx
        mags += abs(c) * np.abs(powx)
        powx *= xs
    avals = np.abs(vals) - 1e-9 * mags
    np.clip(avals, 1.0, None, out=avals)
    target = 2.0 * np.log2(avals)
    keep = (acc + np.float32(base + slack)) >= target
    return [int(v) - half for v in np.nonzero(keep)[0]]


def line_sieve(P, y0, I, fb, threshold_slack=None):
    """Candidate i in [-I/2, I/2) on the single row y = y0 whose accumulated
    prime-power log mass reaches 2*log2|P(i, y0)| - slack.  A superset of the
    truly smooth positions; exact zeros of P are excluded."""
    assert I % 2 == 0 and I >= 4 and y0 >= 1
    B = fb.bound
    if threshold_slack is None:
        threshold_slack = default_slack(B, len(P.coeffs) - 1)
    tabs = _Tables(P.coeffs, fb, I, B)
    rowpoly = _row_poly(tabs.prim, y0)
    acc, base = _sieve_row(tabs, y0, rowpoly)
    base += _lattice_row(tabs, acc, y0, rowpoly)
    cand = _threshold_candidates(tabs.prim, y0, acc, base, I, threshold_slack)
    return [i for i in cand if ip.peval(rowpoly, i) != 0]


# ---------------------------------------------------------------------------
# rectangle driver


class Relation:
    __slots__ = ("ib", "row", "x", "y", "q", "tag")

    def __init__(self, ib, row, x, y, q, tag):
        self.ib = ib
        self.row = row
        self.x = x
        self.y = y
        self.q = q
        self.tag = tag

    def __repr__(self):
        return f"Relation({self.tag}, x={self.x}, y={self.y}, q={self.q})"


def _sign_key(ib):
    for c in ib:
        if c:
            return ib if c > 0 else tuple(-v for v in ib)
    return ib


class SieveStats:
    def __init__(self):
        self.rows = 0
        self.candidates = 0
        self.smooth = 0
        self.emitted = 0
        self.dup = 0
        self.not_smooth = 0
        self.zero = 0
        self.seconds = 0.0

    def as_dict(self):
        return {k: getattr(self, k) for k in
                ("rows", "candidates", "smooth", "emitted", "dup",
                 "not_smooth", "zero", "seconds")}


def _smooth(v, primes):
    if v < 0:
        v = -v
    for p in primes:
        if p * p > v:
            break
        while v % p == 0:
            v //= p
    # v is now 1 or prime (any composite residue would have kept a factor
    # below the break point)
    return v <= primes[-1]


def sieve_run(K, fb, job, I, J, slack=None, dedup=None, stats=None, j0=1):
    """Sieve the rectangle [-I/2, I/2) x [j0, J] for the SievePolynomial or
    SpecialQ job; returns exact, verified Relations.

    Candidates survive a fixed-point threshold, exact trial division, a
    gcd(i, j) = 1 duplicate check, and verify_relation."""
    assert I % 2 == 0 and I >= 4 and J >= j0 >= 1
    t_start = time.monotonic()
    B = fb.bound
    if isinstance(job, SpecialQ):
        coeffs, tag, qv = job.coeffs, "q", job.q
        elem, xy = job.element, job.xy
    else:
        coeffs, tag, qv = job.coeffs, "line", 0
        elem, xy = job.element, lambda i, j: (i, j)
    if slack is None:
        slack = default_slack(B, len(coeffs) - 1)
    if stats is None:
        stats = SieveStats()
    if dedup is None:
        dedup = set()
    tabs = _Tables(coeffs, fb, I, B)
    if not _smooth(tabs.content, fb.rational_primes):
        return []
    extra, extra_base = ({}, {}) if not tabs.latt else _lattice_rect(tabs, j0, J)
    out = []
    for j in range(j0, J + 1):
        rowpoly = _row_poly(tabs.prim, j)
        acc, base = _sieve_row(tabs, j, rowpoly)
        base += extra_base.get(j, 0.0)
        for pos, w in extra.get(j, ()):
            acc[pos] += w
        stats.rows += 1
        for i in _threshold_candidates(tabs.prim, j, acc, base, I, slack):
            stats.candidates += 1
            if math.gcd(i, j) != 1:
                continue
            val = ip.peval(rowpoly, i)
            if val == 0:
                stats.zero += 1
                continue
            if not _smooth(val, fb.rational_primes):
                continue
            stats.smooth += 1
            phi = elem(i, j)
            key = _sign_key(phi)
            if key in dedup:
                stats.dup += 1
                continue
            try:
                row = nfcore.verify_relation(K, fb, ib=phi)
            except nfcore.NotSmooth:
                stats.not_smooth += 1
                continue
            dedup.add(key)
            x, y = xy(i, j)
            out.append(Relation(phi, row, x, y, qv, tag))
            stats.emitted += 1
    stats.seconds += time.monotonic() - t_start
    return out


# ---------------------------------------------------------------------------
# orchestration


class RelationMatrix:
    """Verified relations plus their dense exponent rows over the base."""

    def __init__(self, fb):
        self.fb = fb
        self.N = len(fb)
        self.relations = []
        self.rows = []
        self.stats = SieveStats()

    def extend(self, rels):
        for r in rels:
            self.relations.append(r)
            self.rows.append(list(r.row))

    def __len__(self):
        return len(self.rows)

    def rank_profile(self):
        if not self.rows:
            return 0, (), (), tuple(range(self.N))
        return zlinalg.rank_profile_mod_p(self.rows, self.N)

    def missing_columns(self):
        rank, _prows, pcols, _zero = self.rank_profile()
        if rank >= self.N:
            return []
        have = set(pcols)
        return [c for c in range(self.N) if c not in have]


def _pair_root_for_ideal(K, P, Q):
    """Root r of P(t,1) mod q singling out the degree-1 ideal Q = (q, theta-r):
    x*alpha + y*beta lies in Q iff x = r*y mod q.  None if alpha in Q."""
    q = Q.p
    num_a, den = K.ib_to_rat(P.alpha)
    num_b, _ = K.ib_to_rat(P.beta)
    dinv = pow(den % q, -1, q)
    abar = ip.peval(tuple(c % q for c in num_a), Q.r) * dinv % q
    bbar = ip.peval(tuple(c % q for c in num_b), Q.r) * dinv % q
    if abar == 0:
        return None
    return (-bbar * pow(abar, -1, q)) % q


def collect_relations(K, fb, I=None, J=None, slack=None, seed=0, threads=1,
                      budget_relations=None, budget_seconds=None,
                      row_target=1.5, rank_goal=0.97, log_lines=None):
    """Drive sieving to a full-rank relation matrix over fb.

    Phase 1 streams whole-ring pairs; phase 2 runs special-q at primes the
    rank profile flags as missing; phase 3 sieves pairs drawn inside each
    still-missing prime, with doubled slack as a last resort.  Raises
    RankStalled (listing missing ideals) or Timeout (budgets)."""
    t0 = time.monotonic()
    N = len(fb)
    B = fb.bound
    if I is None:
        I = 64
        while I < min(2 * B, 8192):
            I *= 2
    if J is None:
        J = max(8, I // 64)
    rng = random.Random(seed)
    seen = set()
    dedup = set()
    M = RelationMatrix(fb)
    want_rows = max(int(math.ceil(row_target * N)), N + 4)

    def exhausted():
        if budget_seconds is not None and time.monotonic() - t0 > budget_seconds:
            return f"budget_seconds={budget_seconds} exceeded"
        if budget_relations is not None and len(M) >= budget_relations:
            return f"budget_relations={budget_relations} reached"
        return ""

    def check_budget():
        why = exhausted()
        if why and M.rank_profile()[0] < N:
            raise Timeout(f"{why} ({len(M)} relations, "
                          f"rank {M.rank_profile()[0]}/{N})")
        return bool(why)

    def run_jobs(jobs, cur_slack=None, j_lo=1, j_hi=None):
        job_stats = [SieveStats() for _ in jobs]
        results = []
        if threads > 1 and len(jobs) > 1:
            with ThreadPoolExecutor(max_workers=threads) as ex:
                futs = [ex.submit(sieve_run, K, fb, jb, I, j_hi or J,
                                  cur_slack if cur_slack is not None else slack,
                                  set(), st, j_lo)
                        for jb, st in zip(jobs, job_stats)]
                for f in futs:
                    results.append(f.result())
        else:
            for jb, st in zip(jobs, job_stats):
                results.append(sieve_run(K, fb, jb, I, j_hi or J,
                                         cur_slack if cur_slack is not None else slack,
                                         set(), st, j_lo))
        for st in job_stats:
            for k in ("rows", "candidates", "smooth", "emitted", "dup",
                      "not_smooth", "zero", "seconds"):
                setattr(M.stats, k, getattr(M.stats, k) + getattr(st, k))
        fresh = []
        for rels in results:
            for r in rels:
                key = _sign_key(r.ib)
                if key in dedup:
                    continue
                dedup.add(key)
                fresh.append(r)
                if log_lines is not None:
                    log_lines.append(format_relation(r))
        M.extend(fresh)
        return len(fresh)

    # phase 1: whole-ring pairs
    pairs = []
    j_hi = J
    stall = 0
    last_rank = -1
    flat = 0
    while True:
        if check_budget():
            break
        batch = []
        draw_failed = False
        for _ in range(max(threads, 2)):
            try:
                batch.append(select_polynomial(K, seen=seen, rng=rng,
                                               amp=math.log(B)))
            except (DuplicatePair, RankDeficiency):
                draw_failed = True
                break
        if batch:
            pairs.extend(batch)
            got = run_jobs(batch, j_hi=j_hi)
        else:
            got = 0
        if draw_failed and pairs:
            # pair space exhausted (small fields): deepen rows on known pairs
            new_hi = min(j_hi * 2, 1 << 14)
            if new_hi > j_hi:
                got += run_jobs(pairs, j_lo=j_hi + 1, j_hi=new_hi)
                j_hi = new_hi
        rank = M.rank_profile()[0]
        if len(M) >= want_rows and rank >= rank_goal * N:
            break
        # columns random pairs keep missing are phase 2/3 work: leave once
        # the rank curve goes flat with enough rows banked
        flat = flat + 1 if rank == last_rank else 0
        last_rank = rank
        if flat >= 3 and len(M) >= want_rows:
            break
        stall = stall + 1 if got == 0 else 0
        if stall >= 6:
            break

    # phase 2: special-q at missing degree-1 primes, deepening each round
    for round_no in range(4):
        missing = M.missing_columns()
        if not missing or check_budget():
            break
        jobs = []
        for c in missing:
            Q = fb.primes[c]
            if Q.r < 0 or Q.f != 1:
                continue
            for P in pairs[:6]:
                rq = _pair_root_for_ideal(K, P, Q)
                if rq is not None:
                    jobs.append(make_special_q(P, Q.p, rq))
                    break
        if not jobs:
            break
        lo = 1 if round_no == 0 else J * 2 ** (round_no - 1) + 1
        run_jobs(jobs, j_lo=lo, j_hi=J * 2 ** round_no)

    # phase 3: pairs drawn inside each still-missing prime
    for relax in (1.0, 2.0):
        missing = M.missing_columns()
        if not missing or check_budget():
            break
        jobs = []
        for c in missing:
            Q = fb.primes[c]
            try:
                jobs.append(select_polynomial(K, ag=Q, seen=seen, rng=rng,
                                              amp=math.log(B)))
            except (DuplicatePair, RankDeficiency):
                continue
        if jobs:
            cur = (slack if slack is not None
                   else default_slack(B, K.n)) * relax
            run_jobs(jobs, cur_slack=cur)

    missing = M.missing_columns()
    if missing:
        raise RankStalled([repr(fb.primes[c]) for c in missing])
    return M


def format_relation(rel):
    coeffs = ",".join(str(c) for c in rel.ib)
    exps = ",".join(f"{i}:{e}" for i, e in enumerate(rel.row) if e)
    return f"R {rel.q} {rel.x} {rel.y} : {coeffs} : {exps}"


def parse_relation(line):
    """Inverse of format_relation: returns (q, x, y, ib coords tuple)."""
    head, coeffs, _exps = line.split(" : ")
    parts = head.split()
    assert parts[0] == "R"
    q, x, y = (int(t) for t in parts[1:4])
    ib = tuple(int(t) for t in coeffs.split(","))
    return q, x, y, ib
