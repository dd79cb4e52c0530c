"""Exact integer linear algebra.

Conventions: matrices are lists of rows.  The Hermite normal form here is the
lower-triangular row style: each nonzero row has its last nonzero entry (the
pivot) on the diagonal position of its pivot column, pivots are positive,
entries below a pivot column in later rows are reduced to [0, pivot), and the
row lattice is preserved exactly.

Large inputs route through modular rank profiles, CRT determinants of row
subsets, and a mod-d reduction (valid because d Z^N is contained in the row
lattice once d is a multiple of a full-rank subset determinant).  Small inputs
use the exact Euclidean builder directly.
"""

from __future__ import annotations

import math
import random

import numpy as np

WORD_P = 1073741827  # prime above 2**30; products of two residues fit int64


class LinalgError(Exception):
    pass


def xgcd(a, b):
    """(g, x, y) with g = gcd(a, b) = a*x + b*y, g >= 0."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


class HNFResult:
    """Hermite form of a row lattice.

    rows: nonzero HNF rows as tuples, ordered by pivot column ascending.
    pivots: pivot column per row.
    rank: number of nonzero rows.
    det: product of pivots if the form is square full-rank, else 0.
    script: elementary row operation log (only when recorded).
    """

    def __init__(self, rows, pivots, ncols, script=None):
        self.rows = [tuple(r) for r in rows]
        self.pivots = list(pivots)
        self.ncols = ncols
        self.rank = len(self.rows)
        self.det = 0
        if self.rank == ncols:
            d = 1
            for r, c in zip(self.rows, self.pivots):
                d *= r[c]
            self.det = d
        self.script = script

    def diagonal(self):
        return [r[c] for r, c in zip(self.rows, self.pivots)]

    def square(self):
        """N x N matrix with zero rows inserted for pivotless columns."""
        out = [[0] * self.ncols for _ in range(self.ncols)]
        for r, c in zip(self.rows, self.pivots):
            out[c] = list(r)
        return out


def _last_nonzero(v, n):
    for i in range(n - 1, -1, -1):
        if v[i]:
            return i
    return -1


def _hnf_builder(rows, N, D=None, payload=0):
    """Euclidean insertion HNF.  Vectors have length N + payload; pivots live in
    the first N coordinates, payload coordinates just ride along (used for
    transforms / kernel tracking).  If D is given (or once full rank is reached
    with D=None), first-N entries are kept reduced mod D with pivots preserved.

    Returns (pivdict, kernels): pivdict maps pivot column -> full row,
    kernels collects inserted vectors that reduced to zero in the lattice part.
    """
    piv = {}
    kernels = []
    guard = D
    assert not (payload and D), "mod-D reduction breaks combination tracking"

    def modg(v, own_pivot=-1):
        if guard is None:
            return v
        w = list(v)
        for i in range(N):
            w[i] %= guard
        if own_pivot >= 0 and w[own_pivot] == 0:
            w[own_pivot] = guard
        return w

    for row in rows:
        v = [int(x) for x in row] + [0] * (payload - max(0, len(row) - N))
        if len(v) < N + payload:
            v += [0] * (N + payload - len(v))
        if guard is not None:
            v = modg(v)
        while True:
            c = _last_nonzero(v, N)
            if c < 0:
                if payload and _last_nonzero(v, N + payload) >= 0:
                    kernels.append(v)
                break
            if c in piv:
                h = piv[c]
                a, b = h[c], v[c]
                if b % a == 0:
                    q = b // a
                    v = [v[i] - q * h[i] for i in range(N + payload)]
                    if guard is not None:
                        v = modg(v)
                    continue
                g, x, y = xgcd(a, b)
                u, w = a // g, b // g
                newh = [x * h[i] + y * v[i] for i in range(N + payload)]
                newv = [u * v[i] - w * h[i] for i in range(N + payload)]
                newh[c] = g
                newv[c] = 0
                piv[c] = modg(newh, own_pivot=c)
                v = modg(newv)
                continue
            if v[c] < 0:
                v = [-t for t in v]
            piv[c] = modg(v, own_pivot=c)
            break
        if D is None and guard is None and payload == 0 and len(piv) == N:
            guard = 1
            for cc in piv:
                guard *= piv[cc][cc]
            for cc in list(piv):
                piv[cc] = modg(piv[cc], own_pivot=cc)
    _normalize_below(piv, N, payload, guard)
    return piv, kernels


def _normalize_below(piv, N, payload, guard):
    """Reduce entries at earlier pivot columns into [0, pivot).

    Rows are settled in ascending pivot-column order (so every reducer row is
    already final), and within a row the columns are settled descending (a
    reduction at column c only disturbs columns <= c)."""
    cols = sorted(piv)
    for idx, ci in enumerate(cols):
        hi = piv[ci]
        for cj in reversed(cols[:idx]):
            hj = piv[cj]
            q = hi[cj] // hj[cj]
            if q:
                hi = [hi[t] - q * hj[t] for t in range(N + payload)]
        piv[ci] = hi


def _result_from_piv(piv, N, script=None):
    cols = sorted(piv)
    rows = [tuple(piv[c][:N]) for c in cols]
    return HNFResult(rows, cols, N, script=script)


def _hnf_mod_d_numpy(rows, N, d):
    """HNF via mod-d arithmetic with numpy rows; requires d*Z^N inside the
    row lattice and d < 2**31."""
    piv = {c: None for c in range(N)}
    H = np.zeros((N, N), dtype=np.int64)
    for c in range(N):
        H[c, c] = d
    dd = int(d)
    for row in rows:
        v = np.array([int(x) % dd for x in row], dtype=np.int64)
        while True:
            nz = np.flatnonzero(v)
            if nz.size == 0:
                break
            c = int(nz[-1])
            h = H[c]
            a, b = int(h[c]), int(v[c])
            if b % a == 0:
                v = (v - (b // a) * h) % dd
                continue
            g, x, y = xgcd(a, b)
            u, w = a // g, b // g
            newh = (x * h + y * v) % dd
            newv = (u * v - w * h) % dd
            newh[c] = g
            newv[c] = 0
            H[c] = newh
            v = newv
    # below-pivot normalization: rows ascending, columns within a row
    # descending; python ints here since intermediates can exceed int64
    rows_out = [[int(x) for x in H[c]] for c in range(N)]
    for i in range(N):
        if rows_out[i][i] == 0:
            rows_out[i][i] = dd
        for j in range(i - 1, -1, -1):
            q = rows_out[i][j] // rows_out[j][j]
            if q:
                rj = rows_out[j]
                rows_out[i] = [a - q * b for a, b in zip(rows_out[i], rj)]
    return HNFResult([tuple(r) for r in rows_out], list(range(N)), N)


def _rank_mod_p_np(A, p):
    """Rank of int64 matrix mod p (destructive on a copy)."""
    R = A % p
    k, n = R.shape
    rank = 0
    for c in range(n):
        if rank == k:
            break
        col = R[rank:, c]
        nz = np.flatnonzero(col)
        if nz.size == 0:
            continue
        i = rank + int(nz[0])
        if i != rank:
            R[[rank, i]] = R[[i, rank]]
        inv = pow(int(R[rank, c]), -1, p)
        R[rank] = (R[rank] * inv) % p
        below = R[rank + 1:, c]
        nzb = np.flatnonzero(below)
        if nzb.size:
            idx = rank + 1 + nzb
            R[idx] = (R[idx] - np.outer(R[idx, c], R[rank])) % p
        rank += 1
    return rank


def rank_profile_mod_p(rows, N=None, p=WORD_P):
    """(rank, pivot_row_indices, pivot_columns, zero_columns) mod p.

    Deterministic algorithm: scan columns left to right, pick the earliest
    unused row with a nonzero entry.  p defaults to a fixed prime above 2**30.
    """
    if N is None:
        N = len(rows[0]) if rows else 0
    k = len(rows)
    if k == 0 or N == 0:
        return 0, [], [], list(range(N))
    A = np.array([[int(x) % p for x in r] for r in rows], dtype=np.int64)
    used = np.zeros(k, dtype=bool)
    pivot_rows, pivot_cols = [], []
    for c in range(N):
        col = A[:, c].copy()
        col[used] = 0
        nz = np.flatnonzero(col)
        if nz.size == 0:
            continue
        i = int(nz[0])
        used[i] = True
        pivot_rows.append(i)
        pivot_cols.append(c)
        inv = pow(int(A[i, c]), -1, p)
        A[i] = (A[i] * inv) % p
        others = np.flatnonzero(A[:, c])
        others = others[others != i]
        if others.size:
            A[others] = (A[others] - np.outer(A[others, c], A[i])) % p
    zero_cols = [c for c in range(N) if c not in set(pivot_cols)]
    return len(pivot_rows), pivot_rows, pivot_cols, zero_cols


def det_mod_p(rows, p):
    A = np.array([[int(x) % p for x in r] for r in rows], dtype=np.int64)
    n = A.shape[0]
    det = 1
    for c in range(n):
        nz = np.flatnonzero(A[c:, c])
        if nz.size == 0:
            return 0
        i = c + int(nz[0])
        if i != c:
            A[[c, i]] = A[[i, c]]
            det = -det
        piv = int(A[c, c])
        det = det * piv % p
        inv = pow(piv, -1, p)
        A[c] = (A[c] * inv) % p
        below = np.flatnonzero(A[c + 1:, c])
        if below.size:
            idx = c + 1 + below
            A[idx] = (A[idx] - np.outer(A[idx, c], A[c])) % p
    return det % p


_DET_PRIMES = []


def _det_primes():
    if not _DET_PRIMES:
        p = 1 << 30
        while len(_DET_PRIMES) < 4096:
            p += 1
            while not _is_word_prime(p):
                p += 1
            _DET_PRIMES.append(p)
    return _DET_PRIMES


def _is_word_prime(n):
    if n % 2 == 0:
        return False
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def det_crt(rows):
    """Exact determinant of a square integer matrix via CRT over word primes.

    Stops early once the balanced reconstruction is stable across two extra
    primes (then certain up to ~2**-60 chance against adversarial inputs),
    and always stops at the Hadamard bound."""
    n = len(rows)
    if n == 0:
        return 1
    # Hadamard bound in bits
    hb = 0.0
    for r in rows:
        s = sum(float(x) * float(x) for x in r)
        hb += 0.5 * math.log2(s) if s > 0 else 0.0
    max_primes = int(hb / 30.0) + 3
    M = 1
    acc = 0
    stable = 0
    last = None
    for p in _det_primes()[: max_primes + 8]:
        dp = det_mod_p(rows, p)
        # CRT combine
        if M == 1:
            acc, M = dp, p
        else:
            g, inv, _ = xgcd(M % p, p)
            t = (dp - acc) * inv % p
            acc += M * t
            M *= p
        bal = acc if acc <= M // 2 else acc - M
        if bal == last:
            stable += 1
            if stable >= 2:
                return bal
        else:
            stable = 0
            last = bal
        if M > 2 ** (hb + 2):
            return bal
    return last


def hnf(rows, N=None, record_script=False):
    """Hermite normal form of the row lattice.  See module docstring for the
    convention.  record_script=True routes through the elementary-operation
    recorder (exact, small inputs) and fills HNFResult.script."""
    rows = [list(r) for r in rows]
    if N is None:
        N = len(rows[0]) if rows else 0
    if record_script:
        return _hnf_script(rows, N)
    if not rows or N == 0:
        return HNFResult([], [], N)
    if N <= 64 or len(rows) <= 64:
        piv, _ = _hnf_builder(rows, N)
        return _result_from_piv(piv, N)
    rank, prows, pcols, _zc = rank_profile_mod_p(rows, N)
    if rank < N:
        piv, _ = _hnf_builder(rows, N)
        return _result_from_piv(piv, N)
    d1 = abs(det_crt([rows[i] for i in prows]))
    d = d1
    if d != 1:
        others = [i for i in range(len(rows)) if i not in set(prows)]
        if others:
            A = np.array(rows, dtype=np.int64)
            cand = list(prows)
            changed = False
            oi = 0
            for j in range(len(cand) - 1, max(len(cand) - 4, -1), -1):
                while oi < len(others):
                    trial = list(cand)
                    trial[j] = others[oi]
                    oi += 1
                    if _rank_mod_p_np(A[trial], WORD_P) == N:
                        cand = trial
                        changed = True
                        break
                if oi >= len(others):
                    break
            if changed:
                d2 = abs(det_crt([rows[i] for i in cand]))
                d = math.gcd(d1, d2)
    if d == 0:
        piv, _ = _hnf_builder(rows, N)
        return _result_from_piv(piv, N)
    if d == 1:
        eye = [tuple(1 if j == c else 0 for j in range(N)) for c in range(N)]
        return HNFResult(eye, list(range(N)), N)
    if d < 2 ** 31:
        return _hnf_mod_d_numpy(rows, N, d)
    piv, _ = _hnf_builder(rows, N, D=d)
    return _result_from_piv(piv, N)


def hnf_with_transform(rows, N=None):
    """(result, T, kernels): T is a list of combination vectors, one per HNF row,
    expressing that row as an integer combination of the input rows; kernels
    are combination vectors that map to zero.  Exact; intended for small
    inputs (unit bookkeeping, module arithmetic)."""
    rows = [list(r) for r in rows]
    k = len(rows)
    if N is None:
        N = len(rows[0]) if rows else 0
    aug = [list(r) + [1 if i == j else 0 for j in range(k)] for i, r in enumerate(rows)]
    piv, kernels = _hnf_builder(aug, N, payload=k)
    cols = sorted(piv)
    hrows = [tuple(piv[c][:N]) for c in cols]
    T = [tuple(piv[c][N:]) for c in cols]
    kern = [tuple(v[N:]) for v in kernels]
    return HNFResult(hrows, cols, N), T, kern


# ---------------------------------------------------------------------------
# script-recording HNF (textbook; used where the operation log matters)

def _hnf_script(rows, N):
    W = [list(r) for r in rows]
    k = len(W)
    ops = []

    def addmul(i, j, q):
        if q:
            W[i] = [W[i][t] + q * W[j][t] for t in range(N)]
            ops.append(("addmul", i, j, q))

    def neg(i):
        W[i] = [-t for t in W[i]]
        ops.append(("neg", i))

    pivot_of = {}
    assigned = set()
    for c in range(N - 1, -1, -1):
        live = [i for i in range(k) if i not in assigned and _last_nonzero(W[i], N) == c]
        if not live:
            continue
        base = live[0]
        for other in live[1:]:
            # euclid the pair until `other` is zero at column c
            while W[other][c]:
                q = W[base][c] // W[other][c]
                addmul(base, other, -q)
                W[base], W[other] = W[other], W[base]
                ops.append(("swap", base, other))
        if W[base][c] < 0:
            neg(base)
        pivot_of[c] = base
        assigned.add(base)
        # reduce this column in previously assigned rows with larger pivot cols
        for c2, i2 in pivot_of.items():
            if c2 > c:
                q = W[i2][c] // W[base][c]
                addmul(i2, base, -q)
    order = sorted(pivot_of)
    sel = [pivot_of[c] for c in order]
    ops.append(("select", tuple(sel)))
    hrows = [tuple(W[i]) for i in sel]
    return HNFResult(hrows, order, N, script=ops)


def replay_script(rows, script, N=None):
    """Apply a recorded operation script to input rows; returns the HNF rows."""
    W = [list(r) for r in rows]
    if N is None:
        N = len(W[0]) if W else 0
    sel = None
    for op in script:
        tag = op[0]
        if tag == "addmul":
            _, i, j, q = op
            W[i] = [W[i][t] + q * W[j][t] for t in range(N)]
        elif tag == "neg":
            _, i = op
            W[i] = [-t for t in W[i]]
        elif tag == "swap":
            _, i, j = op
            W[i], W[j] = W[j], W[i]
        elif tag == "select":
            sel = op[1]
        else:
            raise LinalgError(f"unknown op {tag}")
    return [tuple(W[i]) for i in sel] if sel is not None else [tuple(r) for r in W]


# ---------------------------------------------------------------------------
# essential part and Smith form

def essential_part(H):
    """Leading l x l block of a square HNF matrix, where l is the last index
    with a non-unit diagonal entry.  Empty if the form is the identity."""
    rows = H.rows if isinstance(H, HNFResult) else [list(r) for r in H]
    n = len(rows)
    l = 0
    for i in range(n):
        if rows[i][i] != 1:
            l = i + 1
    return [tuple(rows[i][:l]) for i in range(l)]


class SNFResult:
    def __init__(self, divisors, U=None, V=None):
        self.divisors = list(divisors)  # decreasing divisibility: d[i+1] | d[i]
        self.U = U
        self.V = V


def snf(A, transforms=False):
    """Smith normal form of a square integer matrix.

    Divisors are returned positive in decreasing divisibility order
    (each divides the previous).  With transforms=True also returns U, V with
    U * A * V diagonal in that same order."""
    A = [list(r) for r in A]
    n = len(A)
    m = len(A[0]) if A else 0
    assert all(len(r) == m for r in A)
    U = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    V = [[1 if i == j else 0 for j in range(m)] for i in range(m)]

    def row_addmul(i, j, q):
        A[i] = [A[i][t] + q * A[j][t] for t in range(m)]
        U[i] = [U[i][t] + q * U[j][t] for t in range(n)]

    def col_addmul(i, j, q):
        for r in A:
            r[i] += q * r[j]
        for r in V:
            r[i] += q * r[j]

    def row_swap(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def col_swap(i, j):
        for r in A:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]

    size = min(n, m)
    for t in range(size):
        while True:
            # locate smallest nonzero entry in the trailing block
            best = None
            for i in range(t, n):
                for j in range(t, m):
                    if A[i][j] and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                break
            i0, j0 = best
            if i0 != t:
                row_swap(t, i0)
            if j0 != t:
                col_swap(t, j0)
            dirty = False
            for i in range(t + 1, n):
                q = A[i][t] // A[t][t]
                if q:
                    row_addmul(i, t, -q)
                if A[i][t]:
                    dirty = True
            for j in range(t + 1, m):
                q = A[t][j] // A[t][t]
                if q:
                    col_addmul(j, t, -q)
                if A[t][j]:
                    dirty = True
            if dirty:
                continue
            # divisibility of the rest
            piv = A[t][t]
            offender = None
            for i in range(t + 1, n):
                for j in range(t + 1, m):
                    if A[i][j] % piv:
                        offender = i
                        break
                if offender:
                    break
            if offender is None:
                break
            row_addmul(t, offender, 1)
        if t < n and t < m and A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            U[t] = [-x for x in U[t]]
    divs = [A[i][i] for i in range(size) if A[i][i] != 0]
    # reverse to decreasing divisibility, permuting transforms to match
    k = len(divs)
    divs = divs[::-1]
    if not transforms:
        return SNFResult(divs)
    perm = list(range(k))[::-1] + list(range(k, n))
    permc = list(range(k))[::-1] + list(range(k, m))
    Up = [U[i] for i in perm]
    Vp = [[V[i][permc[j]] for j in range(m)] for i in range(m)]
    return SNFResult(divs, Up, Vp)


# ---------------------------------------------------------------------------
# Dixon-style p-adic solving and kernel extraction

def ratrecon(a, m, nbound=None, dbound=None):
    """Rational reconstruction of a mod m: returns (num, den) with
    num/den == a (mod m), |num| <= nbound, 0 < den <= dbound, gcd(den, m)=1;
    None if no such pair exists.  Default bounds sqrt(m/2)."""
    if nbound is None:
        nbound = math.isqrt(m // 2)
    if dbound is None:
        dbound = math.isqrt(m // 2)
    a %= m
    r0, r1 = m, a
    t0, t1 = 0, 1
    while r1 > nbound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        t0, t1 = t1, t0 - q * t1
    if r1 > nbound or abs(t1) > dbound or t1 == 0:
        return None
    if math.gcd(t1, m) != 1:
        return None
    num, den = r1, t1
    if den < 0:
        num, den = -num, -den
    if math.gcd(num, den) != 1:
        g = math.gcd(num, den)
        num //= g
        den //= g
    return num, den


def _inverse_mod_p(A, p):
    """Inverse of a square int64 matrix mod p via Gauss-Jordan; None if singular."""
    n = A.shape[0]
    R = A % p
    Inv = np.eye(n, dtype=np.int64)
    for c in range(n):
        nz = np.flatnonzero(R[c:, c])
        if nz.size == 0:
            return None
        i = c + int(nz[0])
        if i != c:
            R[[c, i]] = R[[i, c]]
            Inv[[c, i]] = Inv[[i, c]]
        inv = pow(int(R[c, c]), -1, p)
        R[c] = (R[c] * inv) % p
        Inv[c] = (Inv[c] * inv) % p
        others = np.flatnonzero(R[:, c])
        others = others[others != c]
        if others.size:
            f = R[others, c]
            R[others] = (R[others] - np.outer(f, R[c])) % p
            Inv[others] = (Inv[others] - np.outer(f, Inv[c])) % p
    return Inv


class DixonSolver:
    """Solves T x = b over Q for a fixed nonsingular integer T, by p-adic
    lifting with early rational reconstruction and exact verification."""

    def __init__(self, T, p=1048583):
        self.T = np.array(T, dtype=np.int64)
        self.n = self.T.shape[0]
        self.p = p
        self.Tinv = _inverse_mod_p(self.T, p)
        if self.Tinv is None:
            raise LinalgError("matrix singular mod p")
        # Hadamard-ish bound on solution heights, in p-digits
        hb = 0.0
        for r in self.T:
            s = float(np.dot(r.astype(float), r.astype(float)))
            hb += 0.5 * math.log2(s) if s > 0 else 0.0
        self.max_digits = max(8, int(2 * (hb + 64) / math.log2(p)) + 4)

    def solve(self, b):
        """Returns (num_vector, den) with T (num/den) = b, or raises if the
        lifting cannot reconstruct (cannot happen for nonsingular T)."""
        p, T, Tinv = self.p, self.T, self.Tinv
        # residuals stay bounded by ~N*max|T|, so int64 is safe in the common
        # case; otherwise fall back to exact object arithmetic
        maxt = int(np.max(np.abs(T))) if T.size else 0
        small = maxt * (self.n + p) < 2 ** 61 and all(abs(int(x)) < 2 ** 61 for x in b)
        if small:
            r = np.array([int(x) for x in b], dtype=np.int64)
        else:
            r = np.array([int(x) for x in b], dtype=object)
        digits = []
        pk = 1
        check_at = 8
        for k in range(self.max_digits):
            if small:
                rp = r % p
            else:
                rp = np.array([int(x) % p for x in r], dtype=np.int64)
            xk = (Tinv @ rp) % p
            digits.append(xk)
            if small:
                r = (r - T @ xk) // p
            else:
                r = (r - T.astype(object) @ xk.astype(object)) // p
            pk *= p
            if len(digits) >= check_at or k == self.max_digits - 1:
                check_at = len(digits) * 2
                sol = self._attempt(digits, pk, b)
                if sol is not None:
                    return sol
        raise LinalgError("dixon lifting failed to reconstruct")

    def _attempt(self, digits, pk, b):
        n = self.n
        xs = [0] * n
        mult = 1
        for d in digits:
            for j in range(n):
                xs[j] += mult * int(d[j])
            mult *= self.p
        nums = []
        den = 1
        for j in range(n):
            rr = ratrecon(xs[j] * den % pk, pk)
            if rr is None:
                return None
            nu, de = rr
            nums = [x * de for x in nums]
            nums.append(nu)
            den *= de
        g = den
        for x in nums:
            g = math.gcd(g, x)
            if g == 1:
                break
        if g > 1:
            nums = [x // g for x in nums]
            den //= g
        # modular verification at fixed word primes; T entries are kept
        # unreduced (they are small), only the solution is reduced
        for q in (2147483647, 2147483629, 2147483579):
            xq = np.array([x % q for x in nums], dtype=np.int64)
            bq = np.array([(int(x) * den) % q for x in b], dtype=np.int64)
            if np.any((self.T @ xq - bq) % q):
                return None
        return nums, den


def kernel_vectors(rows, N=None):
    """Primitive integer kernel vectors of the row lattice map: for a k x N
    integer matrix of full column rank, returns a list of k-vectors v with
    v . rows = 0, one for each non-pivot row (plus unit vectors for zero rows).

    The vectors span the kernel up to finite index (handled by the callers'
    dependency machinery)."""
    rows = [list(r) for r in rows]
    k = len(rows)
    if N is None:
        N = len(rows[0]) if rows else 0
    rank, prows, pcols, _ = rank_profile_mod_p(rows, N)
    if rank < N:
        raise LinalgError("kernel_vectors requires full column rank")
    pset = set(prows)
    T = [[rows[i][c] for c in range(N)] for i in prows]  # square, rows = pivot rows
    # solve x^T T = row_e  =>  T^T x = row_e^T
    Tt = [[T[j][i] for j in range(N)] for i in range(N)]
    solver = None
    out = []
    for e in range(k):
        if e in pset:
            continue
        if all(x == 0 for x in rows[e]):
            v = [0] * k
            v[e] = 1
            out.append(tuple(v))
            continue
        if solver is None:
            solver = DixonSolver(Tt)
        nums, den = solver.solve(rows[e])
        v = [0] * k
        v[e] = den
        for j, i in enumerate(prows):
            v[i] = -nums[j]
        g = 0
        for x in v:
            g = math.gcd(g, x)
        if g > 1:
            v = [x // g for x in v]
        out.append(tuple(v))
    return out
