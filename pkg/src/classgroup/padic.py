"""p-adic logarithms for unit-group linear algebra.

A context fixes an odd prime p (unramified, p not dividing disc(f), every
factor of f mod p of degree at most 2) and Hensel-lifts the roots of f into
Z_p or its unramified quadratic extension Z_p[t]/(t^2 - c).  The log map
L_p: K* -> Q_p^n lists one coordinate per linear root and the two components
x, y of log = x + y*sqrt(c) per quadratic factor, so linear algebra over Q_p
sees an n-dimensional vector with exact error control.
"""

import math

from . import intpoly as ip


class NoAdmissiblePrime(Exception):
    pass


class NonUnitImage(Exception):
    pass


_SEARCH_CAP = 10 ** 6


# ---------------------------------------------------------------------------
# residue arithmetic helpers

def _sqrt_mod_p(a, p):
    """Tonelli-Shanks; a must be a quadratic residue mod the odd prime p."""
    a %= p
    if a == 0:
        return 0
    assert pow(a, (p - 1) // 2, p) == 1
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        t2, i = t, 0
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


def _qmul(u, v, c, mod):
    a, b = u
    d, e = v
    return ((a * d + c * b * e) % mod, (a * e + b * d) % mod)


def _qinv(u, c, mod, p):
    a, b = u
    nrm = (a * a - c * b * b) % mod
    if nrm % p == 0:
        raise NonUnitImage("inverse of a non-unit in the quadratic extension")
    ninv = pow(nrm, -1, mod)
    return (a * ninv % mod, (-b) * ninv % mod)


def _qpow(u, e, c, mod):
    r = (1, 0)
    u = (u[0] % mod, u[1] % mod)
    while e:
        if e & 1:
            r = _qmul(r, u, c, mod)
        u = _qmul(u, u, c, mod)
        e >>= 1
    return r


def _qpeval(coeffs, u, c, mod):
    r = (0, 0)
    for co in reversed(coeffs):
        r = _qmul(r, u, c, mod)
        r = ((r[0] + co) % mod, r[1])
    return r


def _peval_mod(coeffs, x, mod):
    r = 0
    for co in reversed(coeffs):
        r = (r * x + co) % mod
    return r


# ---------------------------------------------------------------------------
# context

class PadicContext:
    """Fixed prime p and precision m: every embedding image and log is an
    integer (or integer pair) modulo p^m.  Internal arithmetic carries a few
    guard digits so the published residues are exact."""

    def __init__(self, K, p, m):
        self.K = K
        self.p = int(p)
        self.m = int(m)
        self.guard = 3 + (2 * self.m).bit_length() // max(
            1, (self.p.bit_length() - 1))
        self.mm = self.m + self.guard
        self.pm = self.p ** self.m
        self.pmm = self.p ** self.mm
        self.c = None  # quadratic non-residue once a degree-2 factor appears
        self.factors = []  # ("lin", root) / ("quad", (a, b))
        self._build()
        self._log_cache = {}

    # -- construction ------------------------------------------------------

    def _build(self):
        K, p = self.K, self.p
        fac = ip.factor_mod_p(K.f, p)
        assert all(e == 1 for _g, e in fac)
        quads = []
        for g, _e in fac:
            d = ip.degree(g)
            if d == 1:
                self.factors.append(["lin", (-g[0]) % p])
            elif d == 2:
                quads.append(g)
            else:
                raise NoAdmissiblePrime(f"factor of degree {d} mod {p}")
        if quads:
            c = 2
            while pow(c, (p - 1) // 2, p) != p - 1:
                c += 1
            self.c = c
            for g in quads:
                # monic x^2 + Bx + C irreducible: root (-B + s*sqrt(c))/2
                B, C = g[1] % p, g[0] % p
                d = (B * B - 4 * C) % p
                s = _sqrt_mod_p(d * pow(c, -1, p) % p, p)
                inv2 = pow(2, -1, p)
                a = (-B) * inv2 % p
                b = s * inv2 % p
                self.factors.append(["quad", (a, b)])
        self._lift_roots()

    def _lift_roots(self):
        K, p, c = self.K, self.p, self.c
        f = K.f
        fprime = ip.pderiv(f)
        for rec in self.factors:
            prec = 1
            if rec[0] == "lin":
                rec[1] = ip.hensel_root(f, rec[1], p, self.mm)
            else:
                r = rec[1]
                while prec < self.mm:
                    prec = min(2 * prec, self.mm)
                    mod = p ** prec
                    fv = _qpeval(f, r, c, mod)
                    dv = _qpeval(fprime, r, c, mod)
                    step = _qmul(fv, _qinv(dv, c, mod, p), c, mod)
                    r = ((r[0] - step[0]) % mod, (r[1] - step[1]) % mod)
                assert _qpeval(f, r, c, self.pmm) == (0, 0)
                rec[1] = r

    # -- logarithms --------------------------------------------------------

    def _series_log(self, z_pair):
        """log(1 + z) in Z_p or the quadratic extension; z has valuation
        >= 1.  Works mod p^mm; the sum is exact mod p^m."""
        p, mm, pmm, c = self.p, self.mm, self.pmm, self.c
        quad = z_pair[1] is not None
        z = z_pair if quad else z_pair[0]
        if quad:
            acc = (0, 0)
            zk = (1, 0)
        else:
            acc = 0
            zk = 1
        k = 1
        while True:
            zk = _qmul(zk, z, c, pmm) if quad else zk * z % pmm
            if (zk == (0, 0) if quad else zk == 0):
                break
            a = 0
            kk = k
            while kk % p == 0:
                kk //= p
                a += 1
            kinv = pow(kk, -1, pmm)
            sign = 1 if k % 2 == 1 else -1
            if quad:
                t0 = zk[0] // (p ** a) if a else zk[0]
                t1 = zk[1] // (p ** a) if a else zk[1]
                acc = ((acc[0] + sign * t0 * kinv) % pmm,
                       (acc[1] + sign * t1 * kinv) % pmm)
            else:
                t = zk // (p ** a) if a else zk
                acc = (acc + sign * t * kinv) % pmm
            k += 1
            if k - int(math.log(k, p)) > mm:
                break
        return acc if quad else (acc, None)

    def _log_unit(self, w_pair):
        """log of a p-adic unit, via w^e = 1 + z with e | p^2 - 1."""
        p, pmm, c = self.p, self.pmm, self.c
        quad = w_pair[1] is not None
        if quad:
            if (w_pair[0] % p, w_pair[1] % p) == (0, 0):
                raise NonUnitImage(f"image divisible by {p}")
            if w_pair[1] % p == 0 and w_pair[0] % p == 1:
                e = 1
                z = (w_pair[0] - 1, w_pair[1])
            else:
                e = p * p - 1
                we = _qpow(w_pair, e, c, pmm)
                z = ((we[0] - 1) % pmm, we[1])
            la, lb = self._series_log((z[0] % pmm, z[1] % pmm))
            if e > 1:
                einv = pow(e, -1, pmm)
                la, lb = la * einv % pmm, lb * einv % pmm
            return (la, lb)
        w = w_pair[0]
        if w % p == 0:
            raise NonUnitImage(f"image divisible by {p}")
        if w % p == 1:
            e = 1
            z = w - 1
        else:
            e = p - 1
            z = (pow(w, e, pmm) - 1) % pmm
        l, _ = self._series_log((z % pmm, None))
        if e > 1:
            l = l * pow(e, -1, pmm) % pmm
        return (l, None)

    def element_log(self, ib):
        """L_p of a field element in integral-basis coordinates: a tuple of
        n residues mod p^m (two per quadratic factor: x, y of x + y sqrt c)."""
        ib = tuple(int(v) for v in ib)
        got = self._log_cache.get(ib)
        if got is not None:
            return got
        K, p, pmm, pm, c = self.K, self.p, self.pmm, self.pm, self.c
        num, den = K.ib_to_rat(ib)
        dinv = pow(den % pmm, -1, pmm)
        out = []
        for kind, root in self.factors:
            if kind == "lin":
                w = _peval_mod(num, root, pmm) * dinv % pmm
                l, _ = self._log_unit((w, None))
                out.append(l % pm)
            else:
                wv = _qpeval(num, root, c, pmm)
                wv = (wv[0] * dinv % pmm, wv[1] * dinv % pmm)
                la, lb = self._log_unit(wv)
                out.append(la % pm)
                out.append(lb % pm)
        out = tuple(out)
        self._log_cache[ib] = out
        return out

    def powprod_log(self, bases_ib, exps):
        """L_p of prod base_i^{x_i}: the exact integer combination of the
        base logs, reduced mod p^m (homomorphism property)."""
        pm = self.pm
        acc = [0] * self.K.n
        for ib, x in zip(bases_ib, exps):
            if not x:
                continue
            lv = self.element_log(ib)
            for i, l in enumerate(lv):
                acc[i] = (acc[i] + x * l) % pm
        return tuple(acc)


def make_padic_context(K, precision_digits, min_p=1000):
    """Smallest admissible prime above max(min_p, 1000): odd, not dividing
    disc(f), every factor of f mod p of degree <= 2.  Raises
    NoAdmissiblePrime past the search cap."""
    start = max(int(min_p), 1000)
    p = start + 1
    while p <= _SEARCH_CAP:
        if ip.is_prime(p) and K.disc_f % p != 0:
            fac = ip.factor_mod_p(K.f, p)
            if all(ip.degree(g) <= 2 for g, _e in fac):
                return PadicContext(K, p, precision_digits)
        p += 1
    raise NoAdmissiblePrime(f"no admissible prime in ({start}, {_SEARCH_CAP}]")


def raise_precision(ctx, new_m):
    """Same prime, higher precision (roots re-lifted, caches reset)."""
    assert new_m > ctx.m
    return PadicContext(ctx.K, ctx.p, new_m)
