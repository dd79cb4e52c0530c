"""Class group assembly and the truncated Euler product certificate.

The relation matrix quotient Z^N / (row lattice) is the class group once the
lattice is complete.  HNF -> essential part -> SNF gives the invariant
factors; the truncated Euler product gives the GRH-conditional bound h* with
h* <= hR < 2h* against which a candidate (h, R) is certified.
"""

import math
from fractions import Fraction

import numpy as np

from . import intpoly as ip
from . import nfcore
from . import zlinalg


class NotFullRank(Exception):
    pass


class ClassGroup:
    """Invariant factors d_1, d_2, ... (each d_{i+1} | d_i, all > 1) and
    h = prod d_i.  generators, when requested, maps each cyclic factor to a
    product of factor-base primes: a tuple of (prime index, exponent) pairs."""

    __slots__ = ("invariant_factors", "h", "generators")

    def __init__(self, invariant_factors, h, generators=None):
        self.invariant_factors = tuple(invariant_factors)
        self.h = int(h)
        self.generators = generators

    def __repr__(self):
        return f"ClassGroup(h={self.h}, factors={list(self.invariant_factors)})"


class EulerEstimate:
    __slots__ = ("hstar", "truncation_bound", "window")

    def __init__(self, hstar, truncation_bound):
        self.hstar = float(hstar)
        self.truncation_bound = int(truncation_bound)
        self.window = (self.hstar, 2.0 * self.hstar)

    def __repr__(self):
        return (f"EulerEstimate(hstar={self.hstar:.6g}, "
                f"P0={self.truncation_bound})")


class CertifyResult:
    __slots__ = ("passed", "ratio", "hR", "status")

    def __init__(self, passed, ratio, hR, status):
        self.passed = bool(passed)
        self.ratio = float(ratio)
        self.hR = float(hR)
        self.status = status

    def __repr__(self):
        return (f"CertifyResult({self.status}, hR={self.hR:.6g}, "
                f"hR/hstar={self.ratio:.4f})")


# ---------------------------------------------------------------------------
# class group from relations


def _inverse_unimodular(V):
    """Exact inverse of a unimodular integer matrix (entries stay integers)."""
    l = len(V)
    A = [[Fraction(V[i][j]) for j in range(l)] +
         [Fraction(1 if j == i else 0) for j in range(l)] for i in range(l)]
    for c in range(l):
        piv = next(r for r in range(c, l) if A[r][c])
        A[c], A[piv] = A[piv], A[c]
        inv = 1 / A[c][c]
        A[c] = [x * inv for x in A[c]]
        for r in range(l):
            if r != c and A[r][c]:
                f = A[r][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    out = []
    for i in range(l):
        row = A[i][l:]
        assert all(x.denominator == 1 for x in row)
        out.append([int(x) for x in row])
    return out


def class_group_from_relations(M, generators=False):
    """ClassGroup of Z^N modulo the row lattice of the relation matrix.

    Requires full column rank (the lattice must have finite index); raises
    NotFullRank otherwise.  With generators=True each cyclic factor also gets
    an explicit generator as a power product of factor-base primes.
    """
    N = M.N
    rank = M.rank_profile()[0]
    if rank < N:
        raise NotFullRank(f"relation matrix has rank {rank} < {N}")
    H = zlinalg.hnf(M.rows, N).square()
    h = 1
    for i in range(N):
        h *= H[i][i]
    ess = zlinalg.essential_part(H)
    if not ess:
        return ClassGroup((), 1, generators=() if generators else None)
    S = zlinalg.snf(ess, transforms=generators)
    divisors = [d for d in S.divisors if d > 1]
    hd = 1
    for d in S.divisors:
        hd *= d
    assert hd == h  # determinant conservation through HNF and SNF
    gens = None
    if generators:
        # row coordinates x (class x = prod p_j^{x_j}) diagonalize as x V,
        # so the i-th cyclic generator is the i-th row of V^{-1}
        Vinv = _inverse_unimodular(S.V)
        gens = []
        for i, d in enumerate(S.divisors):
            if d <= 1:
                continue
            vec = [e % d for e in Vinv[i]]
            gens.append(tuple((j, e) for j, e in enumerate(vec) if e))
        gens = tuple(gens)
    return ClassGroup(divisors, h, generators=gens)


# ---------------------------------------------------------------------------
# truncated Euler product

# kappa_k = dim ker(Frob^k - 1) on F_p[x]/(f) determines the splitting type:
# an irreducible factor of degree j contributes gcd(j, k) to kappa_k.  For
# n <= 6 the first three kappas separate all partitions of n.

_KAPPA_DEPTH = {1: 1, 2: 1, 3: 1, 4: 2, 5: 3, 6: 3}


def _partitions(n):
    if n == 0:
        yield ()
        return
    for first in range(n, 0, -1):
        for rest in _partitions(n - first):
            if not rest or rest[0] <= first:
                yield (first,) + rest


def _splitting_table(n):
    """Map from (kappa_1, ..., kappa_depth) to the factor-degree partition."""
    depth = _KAPPA_DEPTH[n]
    table = {}
    for part in _partitions(n):
        key = tuple(sum(math.gcd(j, k) for j in part)
                    for k in range(1, depth + 1))
        assert key not in table
        table[key] = part
    return table


def _mod_bigint(value, P):
    """value % P vectorized for a python int of any size (P: int64 array)."""
    value = int(value)
    if -(1 << 62) < value < (1 << 62):
        return np.full_like(P, value) % P
    digits = []
    v = abs(value)
    while v:
        digits.append(v & ((1 << 30) - 1))
        v >>= 30
    acc = np.zeros_like(P)
    r = np.ones_like(P)
    shift = (1 << 30) % P
    for d in digits:
        acc = (acc + d * r) % P
        r = (r * shift) % P
    if value < 0:
        acc = (-acc) % P
    return acc


def _vec_scalar_powmod(a, e, P):
    """a^e mod P elementwise (int64 arrays; P < 2^24 so products fit)."""
    r = np.ones_like(P)
    a = a % P
    top = int(e.max()) if len(e) else 0
    for k in range(top.bit_length() - 1, -1, -1):
        r = (r * r) % P
        mask = (e >> k) & 1
        r = np.where(mask == 1, (r * a) % P, r)
    return r


class _FrobeniusBlock:
    """Vectorized arithmetic in F_p[x]/(f) across an array of primes P.

    Polynomials are int64 arrays of shape (n, m): one column per prime, one
    row per coefficient.  All primes must satisfy p^2 * n < 2^63 and
    p coprime to disc(f) (f stays squarefree mod p)."""

    def __init__(self, f_coeffs, P):
        n = len(f_coeffs) - 1
        assert f_coeffs[-1] == 1
        self.n = n
        self.P = P
        self.m = len(P)
        # x^(n+j) mod f for j = 0..n-2, reduced mod each prime
        red = []
        cur = [-c for c in f_coeffs[:n]]  # x^n mod f
        red.append(cur)
        for _ in range(n - 2):
            nxt = [0] + cur[:-1]
            lead = cur[-1]
            nxt = [nxt[i] - lead * f_coeffs[i] for i in range(n)]
            cur = nxt
            red.append(cur)
        self.red = np.stack([
            np.stack([_mod_bigint(c, P) for c in row]) for row in red])

    def _reduce(self, c):
        """Full product coeffs (2n-1, m) -> representative of degree < n."""
        n = self.n
        c = c % self.P
        lo = c[:n].copy()
        for j in range(n - 1):
            lo += c[n + j] * self.red[j]
        return lo % self.P

    def mul(self, a, b):
        n = self.n
        c = np.zeros((2 * n - 1, self.m), dtype=np.int64)
        for i in range(n):
            for j in range(n):
                c[i + j] += a[i] * b[j]
            c %= self.P  # keep partial sums far below 2^63
        return self._reduce(c)

    def mul_x(self, a):
        n = self.n
        c = np.zeros((n + 1, self.m), dtype=np.int64)
        c[1:] = a
        lo = c[:n].copy()
        lo += c[n] * self.red[0]
        return lo % self.P

    def x_pow_p(self):
        """x^p mod f per prime: the Frobenius image of x."""
        n = self.n
        state = np.zeros((n, self.m), dtype=np.int64)
        state[0] = 1
        top = int(self.P.max())
        for k in range(top.bit_length() - 1, -1, -1):
            state = self.mul(state, state)
            mask = ((self.P >> k) & 1) == 1
            if mask.any():
                state = np.where(mask, self.mul_x(state), state)
        return state

    def frobenius_matrix(self):
        """(n, n, m): column i holds (x^p)^i mod f."""
        n = self.n
        F = np.zeros((n, n, self.m), dtype=np.int64)
        F[0, 0] = 1
        y = self.x_pow_p()
        cur = y
        for i in range(1, n):
            F[:, i] = cur
            if i + 1 < n:
                cur = self.mul(cur, y)
        return F

    def mat_mul(self, A, B):
        C = np.einsum("ijm,jkm->ikm", A, B)
        return C % self.P

    def nullity(self, A):
        """dim ker over F_p per prime, via vectorized Gaussian elimination."""
        n, P, m = self.n, self.P, self.m
        A = A % P
        avail = np.ones((n, m), dtype=bool)
        rank = np.zeros(m, dtype=np.int64)
        cols = np.arange(m)
        for col in range(n):
            nz = (A[:, col, :] != 0) & avail
            has = nz.any(axis=0)
            pidx = np.argmax(nz, axis=0)
            prow = A[pidx, :, cols].T.copy()  # (n, m) pivot row per prime
            pval = prow[col]
            inv = _vec_scalar_powmod(np.where(has, pval, 1), P - 2, P)
            prow = (prow * inv) % P
            factor = A[:, col, :] % P
            elim = avail.copy()
            elim[pidx, cols] = False
            elim &= has
            delta = (factor[:, None, :] * prow[None, :, :]) % P
            A = np.where(elim[:, None, :], (A - delta) % P, A)
            newpiv = has & avail[pidx, cols]
            avail[pidx, cols] &= ~newpiv
            rank += has
        return n - rank


def _local_factor_exact(K, p):
    """log of (1 - 1/p) / prod_{P | p} (1 - 1/N(P)), by exact decomposition."""
    s = math.log1p(-1.0 / p)
    for P in nfcore.factor_rational_prime(K, p):
        s -= math.log1p(-float(p) ** (-P.f))
    return s


def euler_hstar(K, P0):
    """Truncated Euler product bound h* with window [h*, 2h*).

    E = (|mu| sqrt|disc| / (2^r1 (2pi)^r2)) * prod_{p <= P0} local(p)
    estimates hR; the product is calibrated as h* = E / sqrt(2) so that
    h* <= hR < 2h* on GRH.  local(p) = (1 - 1/p) / prod_{P|p}(1 - 1/N(P)),
    with splitting types read off Frobenius kernel dimensions in blocks
    (fixed summation order, deterministic)."""
    P0 = int(P0)
    if P0 < 100:
        raise ValueError("truncation bound must be >= 100")
    n = K.n
    primes = ip.primes_up_to(P0)
    disc_mask = _mod_bigint(K.disc_f, primes) == 0
    logsum = 0.0
    for p in primes[disc_mask]:
        logsum += _local_factor_exact(K, int(p))
    good = primes[~disc_mask]
    table = _splitting_table(n)
    depth = _KAPPA_DEPTH[n]
    f_coeffs = [int(c) for c in K.f]
    # fixed block size keeps memory flat and the summation order reproducible
    block = 1 << 16
    for lo in range(0, len(good), block):
        P = good[lo:lo + block]
        fb = _FrobeniusBlock(f_coeffs, P)
        F = fb.frobenius_matrix()
        eye = np.zeros_like(F)
        for i in range(n):
            eye[i, i] = 1
        kappas = []
        G = F
        for _k in range(depth):
            kappas.append(fb.nullity((G - eye) % P))
            if _k + 1 < depth:
                G = fb.mat_mul(G, F)
        key = np.stack(kappas)  # (depth, mblock)
        pa = P.astype(np.float64)
        covered = 0
        for t, part in table.items():
            mask = np.all(key == np.array(t, dtype=np.int64)[:, None], axis=0)
            cnt = int(mask.sum())
            if not cnt:
                continue
            covered += cnt
            sub = pa[mask]
            val = np.log1p(-1.0 / sub)
            for fdeg in part:
                val = val - np.log1p(-sub ** (-float(fdeg)))
            logsum += float(np.sum(val))
        assert covered == len(P)  # every kappa signature decodes to a type
    mu = K.torsion_order()
    logE = (math.log(mu) + 0.5 * math.log(abs(K.disc))
            - K.r1 * math.log(2.0) - K.r2 * math.log(2.0 * math.pi) + logsum)
    hstar = math.exp(logE) / math.sqrt(2.0)
    return EulerEstimate(hstar, P0)


def default_cutoff(B):
    """Default Euler truncation: max(2^16, B^2)."""
    return max(1 << 16, int(B) * int(B))


def certify(h, R, est):
    """Window test h* <= hR < 2h*.

    status 'pass' inside the window, 'low' below it (missing relations or
    unit index: collect more / saturate), 'high' above it (a verified-
    relation pipeline cannot overshoot; flags a bug)."""
    hR = float(h) * float(R)
    ratio = hR / est.hstar
    if hR < est.hstar:
        return CertifyResult(False, ratio, hR, "low")
    if hR >= 2.0 * est.hstar:
        return CertifyResult(False, ratio, hR, "high")
    return CertifyResult(True, ratio, hR, "pass")
