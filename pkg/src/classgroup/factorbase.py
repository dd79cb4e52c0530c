"""Smoothness bounds and the factor base of prime ideals.

Also houses sieving-pair selection: short elements alpha, beta of an ideal
under a randomly weighted T2 form, with the binary form N(x*alpha + y*beta)
recovered by exact interpolation."""

from __future__ import annotations

import math
import random
from fractions import Fraction

import mpmath

from . import intpoly as ip
from . import nfcore
from . import zlinalg
from .lattice import lll_reduce


class DuplicatePair(Exception):
    """Weight redraws kept landing on already-seen (alpha, beta) lattices."""


class RankDeficiency(Exception):
    pass


# ---------------------------------------------------------------------------
# bounds


def bach_bound(K):
    """ceil(12 * ln(|disc|)^2)."""
    d = abs(K.disc)
    if d < 3:
        raise nfcore.FieldError("|disc| must be >= 3")
    return math.ceil(12.0 * math.log(d) ** 2)


def _belabas_lhs(K, B, cache):
    total = 0.0
    logB = math.log(B)
    for p in ip.primes_up_to(B):
        p = int(p)
        split = cache.get(p)
        if split is None:
            split = [(P.f, P.e) for P in nfcore.factor_rational_prime(K, p)]
            cache[p] = split
        logp = math.log(p)
        for f, _e in split:
            nrm = p ** f
            if nrm > B:
                continue
            m = 1
            npm = nrm
            while npm <= B:
                total += (f * logp / math.sqrt(npm)) * (1.0 - math.log(npm) / logB)
                m += 1
                npm *= nrm
    return total


def _belabas_rhs(K, B):
    return (0.5 * math.log(abs(K.disc)) - 1.9 * K.n - 0.785 * K.r1
            + (2.468 * K.n + 1.832 * K.r1) / math.log(B))


def belabas_bound(K):
    """Smallest B whose truncated prime-power sum beats the analytic bound
    needed for the factor base to generate the class group under GRH;
    clamped to [20, bach_bound]."""
    hi_cap = bach_bound(K)
    cache = {}

    def ok(B):
        return _belabas_lhs(K, B, cache) > _belabas_rhs(K, B)

    if ok(20):
        return 20
    lo, hi = 20, 40
    while hi < hi_cap and not ok(hi):
        lo, hi = hi, hi * 2
    hi = min(hi, hi_cap)
    if not ok(hi):
        return hi_cap
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def default_bound(K):
    return max(belabas_bound(K), math.ceil(3.0 * K.n * math.log(abs(K.disc))))


# ---------------------------------------------------------------------------
# factor base


class FactorBase:
    """All prime ideals of norm <= bound, sorted by (norm, p, local key).

    primes is the spec-facing ideal list; ideals is an alias.  rational_primes
    lists every rational prime <= bound (some may carry no small-norm ideal,
    verification still must trial-divide them)."""

    def __init__(self, K, bound, ideals):
        self.K = K
        self.bound = int(bound)
        self.primes = tuple(ideals)
        self.ideals = self.primes
        self.rational_primes = tuple(int(p) for p in ip.primes_up_to(self.bound))
        self._pos = {self._key(P): i for i, P in enumerate(self.primes)}
        assert len(self._pos) == len(self.primes)

    @staticmethod
    def _key(P):
        return (P.p, P.e, P.f, P.r, P.gpoly, P.gen_ib)

    def __len__(self):
        return len(self.primes)

    def index_of(self, P):
        """Position of a PrimeIdeal (or (p, r) pair for degree-1 primes);
        None if outside the base."""
        if isinstance(P, tuple):
            p, r = P
            for i, Q in enumerate(self.primes):
                if Q.p == p and Q.r == r and Q.f == 1:
                    return i
            return None
        return self._pos.get(self._key(P))

    def dump(self):
        """One line per ideal: 'index p r f_deg norm'."""
        return "\n".join(
            f"{i} {P.p} {P.r} {P.f} {P.norm}" for i, P in enumerate(self.primes))


def build_factor_base(K, B):
    B = int(B)
    if B < 2:
        raise nfcore.FieldError("smoothness bound must be >= 2")
    ideals = []
    for p in ip.primes_up_to(B):
        for P in nfcore.factor_rational_prime(K, int(p)):
            if P.norm <= B:
                ideals.append(P)
    ideals.sort(key=lambda P: (P.norm, P.p) + P.sort_key())
    return FactorBase(K, B, ideals)


# ---------------------------------------------------------------------------
# sieving polynomials


class SievePolynomial:
    """Binary form P(x, y) = N(x*alpha + y*beta) for short ideal elements
    alpha, beta (IB coordinates).  coeffs is little-endian in x: coeffs[k]
    multiplies x^k y^(n-k).  content divides every value of P."""

    __slots__ = ("alpha", "beta", "coeffs", "content", "pair_hash", "weights",
                 "ag_tag", "root_table")

    def __init__(self, alpha, beta, coeffs, content, pair_hash, weights, ag_tag):
        self.alpha = alpha
        self.beta = beta
        self.coeffs = coeffs
        self.content = content
        self.pair_hash = pair_hash
        self.weights = weights
        self.ag_tag = ag_tag
        self.root_table = None

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def eval(self, x, y):
        n = self.degree
        acc = 0
        for k in range(n, -1, -1):
            acc = acc * x + self.coeffs[k] * y ** (n - k)
        return acc

    def element(self, x, y):
        """x*alpha + y*beta in IB coordinates."""
        return tuple(x * a + y * b for a, b in zip(self.alpha, self.beta))

    def build_roots(self, fb):
        """root_table[p] = (affine roots of P(X,1) mod p, projective flag);
        primes dividing every coefficient map to None (no sieving power)."""
        tab = {}
        for p in fb.rational_primes:
            if all(c % p == 0 for c in self.coeffs):
                tab[p] = None
                continue
            roots, proj = poly_roots_mod_p(self.coeffs, p)
            tab[p] = (roots, proj)
        self.root_table = tab
        return tab


def poly_roots_mod_p(coeffs, p):
    """Roots of P(X, 1) mod p plus a projective flag (leading coeff = 0 mod p).

    coeffs little-endian; an identically-zero reduction returns every residue."""
    cs = ip.trim(tuple(c % p for c in coeffs))
    proj = coeffs[-1] % p == 0
    if not cs:
        return tuple(range(p)), proj
    return tuple(sorted(ip.roots_mod_p(cs, p))), proj


def _independent(u, v):
    return any(u[i] * v[j] - u[j] * v[i]
               for i in range(len(u)) for j in range(i + 1, len(u)))


def _pair_hash(K, alpha, beta):
    H = zlinalg.hnf([list(alpha), list(beta)], K.n)
    return hash((K.n,) + tuple(H.rows))


def _interpolate_form(K, alpha, beta):
    """Exact coefficients of N(x*alpha + y*beta) from n+1 norm values."""
    n = K.n
    pts = []
    for t in range(n + 1):
        v = tuple(t * a + b for a, b in zip(alpha, beta))
        pts.append(K.ib_norm(v) if any(v) else 0)
    # Lagrange at t = 0..n, exact over Q
    coeffs = [Fraction(0)] * (n + 1)
    for t, val in enumerate(pts):
        if val == 0:
            continue
        num = [Fraction(1)]
        den = Fraction(1)
        for s in range(n + 1):
            if s == t:
                continue
            num = ip.pmul(num, (Fraction(-s), Fraction(1)))
            den *= t - s
        scale = Fraction(val) / den
        for k, c in enumerate(num):
            coeffs[k] += scale * c
    out = []
    for c in coeffs:
        assert c.denominator == 1
        out.append(int(c))
    return tuple(out)


def _weighted_embedding(K, weights, prec=80):
    """Rows per IB basis vector, r1 + 2*r2 real columns, place k scaled by
    exp(weights[k])."""
    M = K.ib_embedding_matrix(prec)
    s2 = math.sqrt(2.0)
    rows = []
    for i in range(K.n):
        row = []
        for k in range(K.r1 + K.r2):
            w = math.exp(weights[k])
            z = M[i][k]
            if k < K.r1:
                row.append(w * float(z.real))
            else:
                row.append(w * s2 * float(z.real))
                row.append(w * s2 * float(z.imag))
        rows.append(row)
    return rows


def _draw_weights(K, rng, amp):
    m = K.r1 + K.r2
    if m == 1:
        return (0.0,)
    w = [rng.uniform(-amp, amp) for _ in range(m)]
    mean = sum(w) / m
    return tuple(x - mean for x in w)


def select_polynomial(K, ag=None, weights=None, seen=None, rng=None, amp=None):
    """Pick short alpha, beta in the ideal ag (default the whole ring) under
    a weighted T2 form and return the interpolated SievePolynomial.

    A hash of the HNF of the (alpha, beta) row lattice is checked against
    `seen`; collisions redraw the weights up to 32 times, then DuplicatePair."""
    if rng is None:
        rng = random.Random(0)
    if amp is None:
        amp = max(1.0, math.log(max(20.0, 3.0 * K.n * math.log(abs(K.disc)))))
    if ag is None:
        rows = [[1 if i == j else 0 for j in range(K.n)] for i in range(K.n)]
        ag_tag = None
    else:
        rows = [list(r) for r in nfcore.prime_ideal_module(K, ag)]
        ag_tag = (ag.p, ag.r, ag.f, ag.e)
    fixed = weights is not None
    w = tuple(weights) if fixed else _draw_weights(K, rng, amp)
    for attempt in range(32):
        emb = _weighted_embedding(K, w)
        red, _t = lll_reduce(rows, emb)
        alpha, beta = red[0], red[1]
        if not _independent(alpha, beta):
            cands = [r for r in red[1:] if _independent(alpha, r)]
            if not cands:
                raise RankDeficiency("ideal lattice has rank < 2")
            beta = cands[0]
        h = _pair_hash(K, alpha, beta)
        if seen is None or h not in seen:
            if seen is not None:
                seen.add(h)
            coeffs = _interpolate_form(K, alpha, beta)
            content = ip.pcontent(coeffs)
            P = SievePolynomial(alpha, beta, coeffs, content, h, w, ag_tag)
            _check_form(K, P, rng)
            return P
        if fixed:
            fixed = False
        w = _draw_weights(K, rng, amp)
    raise DuplicatePair("32 weight redraws all collided")


def _check_form(K, P, rng):
    for _ in range(20):
        x = rng.randint(-40, 40)
        y = rng.randint(-40, 40)
        v = P.element(x, y)
        want = K.ib_norm(v) if any(v) else 0
        if P.eval(x, y) != want:
            raise nfcore.VerificationFailed("interpolated form mismatch")
