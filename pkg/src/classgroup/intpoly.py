"""Exact integer and modular polynomial arithmetic.

Polynomials are tuples of Python ints in little-endian order: c[i] is the
coefficient of x**i.  The zero polynomial is the empty tuple.  Nothing in this
module uses floating point.
"""

from __future__ import annotations

import math
import random

import numpy as np


def trim(c):
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def degree(c):
    """Degree, with the zero polynomial at -1."""
    return len(c) - 1


def padd(a, b):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, x in enumerate(b):
        out[i] += x
    return trim(out)


def psub(a, b):
    out = list(a) + [0] * max(0, len(b) - len(a))
    for i, x in enumerate(b):
        out[i] -= x
    return trim(out)


def pneg(a):
    return tuple(-x for x in a)


def pscale(a, k):
    if k == 0:
        return ()
    return tuple(x * k for x in a)


def pmul(a, b):
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return trim(out)


def peval(a, x):
    """Horner evaluation; works for any ring element x (int, Fraction, mpf)."""
    r = 0
    for c in reversed(a):
        r = r * x + c
    return r


def pderiv(a):
    return trim([i * a[i] for i in range(1, len(a))])


def pcontent(a):
    g = 0
    for x in a:
        g = math.gcd(g, x)
    return g


def pprimitive(a):
    g = pcontent(a)
    if g <= 1:
        return tuple(a)
    return tuple(x // g for x in a)


def pdivmod_monic(a, b):
    """Quotient and remainder of a by monic b, exact over Z."""
    assert b and b[-1] == 1
    a = list(a)
    db, da = len(b) - 1, len(a) - 1
    if da < db:
        return (), trim(a)
    q = [0] * (da - db + 1)
    for k in range(da - db, -1, -1):
        c = a[db + k]
        if c:
            q[k] = c
            for i in range(db + 1):
                a[i + k] -= c * b[i]
    return trim(q), trim(a[:db])


def pcompose(a, b):
    """a(b(x))."""
    r = ()
    for c in reversed(a):
        r = padd(pmul(r, b), (c,) if c else ())
    return r


def sylvester(f, g):
    """Sylvester matrix of f and g as a list of rows (big-endian layout)."""
    n, m = degree(f), degree(g)
    assert n >= 0 and m >= 0
    size = n + m
    rows = []
    fr = list(reversed(f))
    gr = list(reversed(g))
    for i in range(m):
        rows.append([0] * i + fr + [0] * (size - i - n - 1))
    for i in range(n):
        rows.append([0] * i + gr + [0] * (size - i - m - 1))
    return rows


def bareiss_det(rows):
    """Exact determinant of a square integer matrix, fraction-free."""
    m = [list(r) for r in rows]
    n = len(m)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k]:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        pk = m[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * pk - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = pk
    return sign * m[n - 1][n - 1]


def resultant(f, g):
    """res(f, g) over Z.  For monic f and deg g < deg f this is prod g(alpha_i)."""
    if not f or not g:
        return 0
    if degree(g) == 0:
        return g[0] ** degree(f)
    if degree(f) == 0:
        return f[0] ** degree(g)
    return bareiss_det(sylvester(f, g))


def poly_discriminant(f):
    """Discriminant of monic f."""
    n = degree(f)
    assert n >= 1 and f[-1] == 1
    r = resultant(f, pderiv(f))
    if (n * (n - 1) // 2) % 2:
        r = -r
    return r


def qgcd(a, b):
    """Primitive gcd over Q of two integer polynomials (content-free, lc > 0)."""
    a, b = pprimitive(a), pprimitive(b)
    if degree(a) < degree(b):
        a, b = b, a
    while b:
        a = pprem(a, b)
        a, b = b, pprimitive(a)
    if a and a[-1] < 0:
        a = pneg(a)
    return a


def pprem(a, b):
    """Pseudo-remainder: remainder of lc(b)^(deg a - deg b + 1) * a by b."""
    a = list(a)
    db = degree(b)
    lc = b[-1]
    while degree(tuple(a)) >= db and a:
        a = list(trim(a))
        if degree(tuple(a)) < db:
            break
        k = degree(tuple(a)) - db
        c = a[-1]
        a = [x * lc for x in a]
        for i in range(db + 1):
            a[i + k] -= c * b[i]
    return trim(a)


_CYCLO_CACHE = {1: (-1, 1)}


def cyclotomic(m):
    """The m-th cyclotomic polynomial over Z."""
    if m in _CYCLO_CACHE:
        return _CYCLO_CACHE[m]
    # x^m - 1 divided by all lower cyclotomics
    num = tuple([-1] + [0] * (m - 1) + [1])
    for d in range(1, m):
        if m % d == 0:
            q, r = pdivmod_monic(num, cyclotomic(d))
            assert not r
            num = q
    _CYCLO_CACHE[m] = num
    return num


# ---------------------------------------------------------------------------
# primes

_sieve_limit = 0
_sieve_primes = None


def primes_up_to(n):
    """Sorted numpy int64 array of primes <= n (cached, grows monotonically)."""
    global _sieve_limit, _sieve_primes
    if n <= _sieve_limit:
        return _sieve_primes[_sieve_primes <= n]
    limit = max(n, 1 << 16)
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if mask[p]:
            mask[p * p:: p] = False
    _sieve_primes = np.nonzero(mask)[0].astype(np.int64)
    _sieve_limit = limit
    return _sieve_primes[_sieve_primes <= n]


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n):
    """Deterministic Miller-Rabin for n < 3.3e24; random extra rounds above."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    bases = _MR_BASES
    if n >= 3317044064679887385961981:
        rng = random.Random(n & 0xFFFFFFFF)
        bases = tuple(rng.randrange(2, n - 1) for _ in range(24))
    for a in bases:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime(n):
    n += 1
    if n <= 2:
        return 2
    if n % 2 == 0:
        n += 1
    while not is_prime(n):
        n += 2
    return n


def jacobi(a, n):
    """Jacobi symbol (a/n) for odd n > 0."""
    assert n > 0 and n % 2 == 1
    a %= n
    t = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                t = -t
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            t = -t
        a %= n
    return t if n == 1 else 0


# ---------------------------------------------------------------------------
# arithmetic mod p

def nmod(a, p):
    return trim([x % p for x in a])


def pmul_mod(a, b, p):
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return trim([v % p for v in out])


def pdivmod_mod(a, b, p):
    assert b
    binv = pow(b[-1], -1, p)
    a = [x % p for x in a]
    db = len(b) - 1
    q = [0] * max(0, len(a) - db)
    for k in range(len(a) - db - 1, -1, -1):
        c = a[db + k] * binv % p
        if c:
            q[k] = c
            for i in range(db + 1):
                a[i + k] = (a[i + k] - c * b[i]) % p
    return trim(q), trim(a[:db])


def pgcd_mod(a, b, p):
    a, b = nmod(a, p), nmod(b, p)
    while b:
        _, r = pdivmod_mod(a, b, p)
        a, b = b, r
    if a:
        inv = pow(a[-1], -1, p)
        a = tuple(x * inv % p for x in a)
    return a


def ppow_mod(base, e, f, p):
    """base(x)**e mod (f(x), p)."""
    _, r = pdivmod_mod(base, f, p)
    result = (1,)
    while e:
        if e & 1:
            result = pdivmod_mod(pmul_mod(result, r, p), f, p)[1]
        e >>= 1
        if e:
            r = pdivmod_mod(pmul_mod(r, r, p), f, p)[1]
    return result


def _sqfree_decomp_mod_p(f, p):
    """Yun-style squarefree decomposition in F_p[x]; list of (g, mult)."""
    out = []
    inv = pow(f[-1], -1, p)
    f = tuple(x * inv % p for x in nmod(f, p))

    def rec(f, mult):
        fp = nmod(pderiv(f), p)
        if not fp:
            # f = v(x^p) = v(x)^p; extract the p-th root
            v = trim([f[i] for i in range(0, len(f), p)])
            rec(v, mult * p)
            return
        c = pgcd_mod(f, fp, p)
        w = pdivmod_mod(f, c, p)[0]
        i = 1
        while degree(w) > 0:
            y = pgcd_mod(w, c, p)
            z = pdivmod_mod(w, y, p)[0]
            if degree(z) > 0:
                out.append((z, i * mult))
            w = y
            c = pdivmod_mod(c, y, p)[0]
            i += 1
        if degree(c) > 0:
            rec(c, mult)

    rec(f, 1)
    return out


def _ddf(f, p):
    """Distinct-degree split of squarefree monic f mod p; list of (product, d)."""
    out = []
    h = (0, 1)  # x
    v = f
    d = 0
    while degree(v) >= 1:
        d += 1
        if 2 * d > degree(v):
            out.append((v, degree(v)))
            break
        h = ppow_mod(h, p, v, p)
        g = pgcd_mod(psub(h, (0, 1)), v, p)
        if degree(g) > 0:
            out.append((g, d))
            v = pdivmod_mod(v, g, p)[0]
            _, h = pdivmod_mod(h, v, p)
    return out


def _edf(f, d, p, rng):
    """Equal-degree factorization (Cantor-Zassenhaus) of monic squarefree f,
    all of whose irreducible factors have degree d."""
    n = degree(f)
    if n == d:
        return [f]
    while True:
        a = tuple(rng.randrange(p) for _ in range(n - 1)) + (1,)
        if p == 2:
            # trace map
            t = a
            cur = a
            for _ in range(d - 1):
                cur = pdivmod_mod(pmul_mod(cur, cur, p), f, p)[1]
                t = nmod(padd(t, cur), p)
            g = pgcd_mod(t, f, p)
        else:
            e = (p ** d - 1) // 2
            t = ppow_mod(a, e, f, p)
            g = pgcd_mod(psub(t, (1,)), f, p)
        if 0 < degree(g) < n:
            return _edf(g, d, p, rng) + _edf(pdivmod_mod(f, g, p)[0], d, p, rng)


def factor_mod_p(f, p, seed=0):
    """Full factorization of f mod p: sorted list of (monic irreducible, mult)."""
    f = nmod(f, p)
    assert degree(f) >= 1
    rng = random.Random((seed << 20) ^ (p & 0xFFFFF) ^ 0x5EED)
    out = []
    for g, mult in _sqfree_decomp_mod_p(f, p):
        for h, d in _ddf(g, p):
            for irr in _edf(h, d, p, rng):
                out.append((irr, mult))
    out.sort(key=lambda t: (degree(t[0]), t[0]))
    return out


def roots_mod_p(f, p):
    """Sorted roots of f mod p, without multiplicity."""
    f = nmod(f, p)
    if degree(f) < 1:
        return []
    if p < 64:
        return [r for r in range(p) if peval(f, r) % p == 0]
    # gcd with x^p - x isolates the linear part
    h = ppow_mod((0, 1), p, f, p)
    g = pgcd_mod(psub(h, (0, 1)), f, p)
    if degree(g) < 1:
        return []
    if degree(g) == 1:
        return [(-g[0] * pow(g[1], -1, p)) % p]
    roots = []
    for irr, _ in factor_mod_p(g, p):
        if degree(irr) == 1:
            roots.append((-irr[0]) % p)
    return sorted(set(roots))


def hensel_root(f, r, p, k):
    """Lift a simple root r of f mod p to a root mod p**k (Newton)."""
    fp = pderiv(f)
    pk = p
    while pk < p ** k:
        pk = min(pk * pk, p ** k)
        d = peval(fp, r) % pk
        r = (r - peval(f, r) * pow(d, -1, pk)) % pk
    assert peval(f, r) % p ** k == 0
    return r


def hensel_lift_factor(f, g, p, k):
    """Lift a monic factor g of f mod p (coprime to its cofactor) to mod p**k.

    Returns (G, H) with f == G*H mod p**k, G == g mod p, G monic."""
    target = p ** k
    h = nmod(g, p)
    ginv = pow(h[-1], -1, p)
    h = tuple(c * ginv % p for c in h)  # the monic factor we track
    g0 = pdivmod_mod(f, h, p)[0]        # its cofactor
    s, t = _poly_bezout(g0, h, p)       # s*g0 + t*h == 1 mod p
    g_, h_, s_, t_ = g0, h, s, t
    m = p
    while m < target:
        m2 = min(m * m, target)
        # one quadratic step: f == g_*h_ with h_ monic, lifted mod m2
        e = nmod(psub(f, pmul(g_, h_)), m2)
        q_, r_ = pdivmod_mod_lift(pmul_mod(s_, e, m2), h_, m2)
        gn = nmod(padd(padd(g_, pmul_mod(t_, e, m2)), pmul_mod(q_, g_, m2)), m2)
        hn = nmod(padd(h_, r_), m2)
        b = nmod(psub(padd(pmul(s_, gn), pmul(t_, hn)), (1,)), m2)
        c_, d_ = pdivmod_mod_lift(pmul_mod(s_, b, m2), hn, m2)
        sn = nmod(psub(s_, d_), m2)
        tn = nmod(psub(psub(t_, pmul_mod(t_, b, m2)), pmul_mod(c_, gn, m2)), m2)
        g_, h_, s_, t_ = gn, hn, sn, tn
        m = m2
    return h_, g_


def pdivmod_mod_lift(a, b, q):
    """divmod in (Z/q)[x] where lc(b) is invertible mod q (q a prime power)."""
    binv = pow(b[-1], -1, q)
    a = [x % q for x in a]
    db = len(b) - 1
    qout = [0] * max(0, len(a) - db)
    for k in range(len(a) - db - 1, -1, -1):
        c = a[db + k] * binv % q
        if c:
            qout[k] = c
            for i in range(db + 1):
                a[i + k] = (a[i + k] - c * b[i]) % q
    return trim(qout), trim(a[:db])


def _poly_bezout(g, h, p):
    """s, t with s*g + t*h = 1 mod p for coprime g, h."""
    r0, r1 = nmod(g, p), nmod(h, p)
    s0, s1 = (1,), ()
    t0, t1 = (), (1,)
    while r1:
        q, r = pdivmod_mod(r0, r1, p)
        r0, r1 = r1, r
        s0, s1 = s1, nmod(psub(s0, pmul(q, s1)), p)
        t0, t1 = t1, nmod(psub(t0, pmul(q, t1)), p)
    assert degree(r0) == 0
    inv = pow(r0[0], -1, p)
    return tuple(c * inv % p for c in s0), tuple(c * inv % p for c in t0)


def roots_mod_pk(f, p, k, cap=64):
    """All roots of f mod p**k, by branching lifts.  None if count exceeds cap."""
    cur = [(r, 1) for r in roots_mod_p(f, p)]
    # also roots where f' vanishes need the branching treatment, included above
    for j in range(1, k):
        pj = p ** j
        nxt = []
        for r, _ in cur:
            fr = peval(f, r)
            assert fr % pj == 0
            fpr = peval(pderiv(f), r) % p
            if fpr:
                # simple root: unique lift
                pj1 = pj * p
                d = pow(peval(pderiv(f), r) % pj1, -1, pj1)
                r1 = (r - fr * d) % pj1
                nxt.append((r1, j + 1))
            else:
                if fr % (pj * p) == 0:
                    for c in range(p):
                        nxt.append((r + c * pj, j + 1))
                # else: no lift of this branch
            if len(nxt) > cap:
                return None
        cur = nxt
    return sorted(r for r, _ in cur)
