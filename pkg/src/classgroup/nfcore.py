"""Number field core: field construction with maximal-order detection, prime
splitting, exact element arithmetic, norms, embeddings, ideal modules, torsion
and relation verification.

Elements of the field are integer coordinate tuples over the power basis
1, theta, ..., theta^(n-1) (little-endian), unless explicitly marked as
integral-basis ("ib") coordinates.  For monogenic fields the two coincide.
"""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath
import numpy as np

from . import intpoly as ip
from . import zlinalg as zl


class FieldError(Exception):
    pass


class NotMonic(FieldError):
    pass


class Reducible(FieldError):
    pass


class DegreeOutOfRange(FieldError):
    pass


class NonMaximalOrder(FieldError):
    pass


class ZeroElement(FieldError):
    pass


class PrecisionLost(FieldError):
    pass


class NotSmooth(Exception):
    """Raised when a candidate fails exact smoothness; carries the cofactor."""

    def __init__(self, cofactor):
        super().__init__(f"cofactor {cofactor}")
        self.cofactor = cofactor


class VerificationFailed(Exception):
    pass


class PrimeIdeal:
    """A prime ideal above p with residue degree f and ramification e.

    For primes not dividing the index the second generator is g(theta) for an
    irreducible factor g of f mod p; degree-1 ideals carry the root r in
    [0, p).  Index primes carry r = -1 and an explicit module basis."""

    __slots__ = ("p", "e", "f", "r", "gpoly", "gen_ib", "module", "norm")

    def __init__(self, p, e, f, r=-1, gpoly=None, gen_ib=None, module=None):
        self.p = p
        self.e = e
        self.f = f
        self.r = r
        self.gpoly = gpoly
        self.gen_ib = gen_ib
        self.module = module
        self.norm = p ** f

    def sort_key(self):
        tail = self.r if self.r >= 0 else tuple(self.gen_ib or ())
        return (self.f, self.e, (0, tail) if self.r >= 0 else (1, tail))

    def __repr__(self):
        if self.r >= 0:
            return f"({self.p}, theta-{self.r})"
        return f"({self.p}, f={self.f}, e={self.e})"


class NumberField:
    def __init__(self, f, r1, r2, disc_f, index, disc, wnum, wden, index_primes):
        self.f = tuple(f)
        self.n = len(f) - 1
        self.r1 = r1
        self.r2 = r2
        self.signature = (r1, r2)
        self.disc_f = disc_f
        self.index = index
        self.disc = disc
        self.wnum = [tuple(r) for r in wnum]  # rows: IB element i over power basis
        self.wden = wden
        self.monogenic = index == 1
        self._winv_num, self._winv_den = _mat_inverse_scaled(self.wnum, self.wden)
        self.index_primes = index_primes  # p -> [PrimeIdeal]
        self._tab = None
        self._split_cache = {}
        self._root_cache = {}
        self._hensel_cache = {}
        self._factor_lift_cache = {}
        self._pe_cache = {}
        self._torsion = None

    # -- basic element ops over the power basis ---------------------------

    def reduce_poly(self, a):
        """Reduce an integer polynomial mod f."""
        if ip.degree(a) < self.n:
            return ip.trim(a)
        return ip.pdivmod_monic(ip.trim(a), self.f)[1]

    def mul(self, a, b):
        return self.reduce_poly(ip.pmul(a, b))

    def norm(self, a):
        a = ip.trim(a)
        if not a:
            raise ZeroElement("norm of zero")
        if ip.degree(a) == 0:
            return a[0] ** self.n
        return ip.resultant(self.f, a)

    # -- integral basis conversions ---------------------------------------

    def to_ib(self, a):
        """Power-basis integer coords -> integral-basis integer coords."""
        if ip.degree(a) >= self.n:
            a = self.reduce_poly(a)
        if self.monogenic:
            return tuple(list(a) + [0] * (self.n - len(a)))
        return self.rat_to_ib(list(a) + [0] * (self.n - len(a)), 1)

    def rat_to_ib(self, numvec, den):
        """(numvec/den over power basis) -> IB coords; must be integral."""
        n = self.n
        out = []
        for j in range(n):
            s = 0
            for i in range(n):
                s += numvec[i] * self._winv_num[i][j]
            q, r = divmod(s, den * self._winv_den)
            if r:
                raise FieldError("element not in the maximal order")
            out.append(q)
        return tuple(out)

    def ib_to_rat(self, y):
        """IB coords -> (numvec, den) over the power basis."""
        n = self.n
        num = [0] * n
        for i in range(n):
            if y[i]:
                for j in range(n):
                    num[j] += y[i] * self.wnum[i][j]
        return num, self.wden

    def mult_table(self):
        if self._tab is None:
            n = self.n
            tab = [[None] * n for _ in range(n)]
            for i in range(n):
                for j in range(i, n):
                    prod = self.reduce_poly(ip.pmul(self.wnum[i], self.wnum[j]))
                    numvec = list(prod) + [0] * (n - len(prod))
                    tab[i][j] = tab[j][i] = self.rat_to_ib(numvec, self.wden * self.wden)
            self._tab = tab
        return self._tab

    def ib_mul(self, ya, yb):
        n = self.n
        tab = self.mult_table()
        out = [0] * n
        for i in range(n):
            ai = ya[i]
            if not ai:
                continue
            for j in range(n):
                bj = yb[j]
                if not bj:
                    continue
                t = tab[i][j]
                c = ai * bj
                for k in range(n):
                    out[k] += c * t[k]
        return tuple(out)

    def ib_pow(self, y, e):
        assert e >= 0
        result = self.ib_one()
        base = tuple(y)
        while e:
            if e & 1:
                result = self.ib_mul(result, base)
            e >>= 1
            if e:
                base = self.ib_mul(base, base)
        return result

    def ib_one(self):
        return self.to_ib((1,))

    def ib_norm(self, y):
        num, den = self.ib_to_rat(y)
        num = ip.trim(num)
        if not num:
            raise ZeroElement("norm of zero")
        # N(num/den) = N(num) / den^n
        nn = self.norm(num)
        q, r = divmod(nn, den ** self.n)
        assert r == 0
        return q

    # -- embeddings --------------------------------------------------------

    def roots(self, prec):
        """Complex embeddings of theta at working precision `prec` bits:
        r1 real roots ascending, then r2 upper-half-plane roots by (re, im)."""
        got = self._root_cache.get(prec)
        if got is not None:
            return got
        with mpmath.workprec(prec + 48):
            rts = mpmath.polyroots([mpmath.mpf(c) for c in reversed(self.f)],
                                   maxsteps=200, extraprec=prec // 2 + 64)
            rts = [mpmath.mpc(r) for r in rts]
            # r1 is known exactly; the r1 roots nearest the real axis are the
            # real ones, and of the rest exactly half lie in the upper plane
            rts.sort(key=lambda z: abs(z.imag))
            real = sorted([r.real for r in rts[: self.r1]])
            upper = [z for z in rts[self.r1:] if z.imag > 0]
            upper.sort(key=lambda z: (z.real, z.imag))
            out = [mpmath.mpc(r) for r in real] + upper
        if len(out) != self.r1 + self.r2:
            raise PrecisionLost("embedding classification unstable")
        self._root_cache[prec] = out
        return out

    def ib_embedding_matrix(self, prec):
        """sigma_j(IB_i) at precision prec; rows indexed by basis element."""
        rts = self.roots(prec)
        with mpmath.workprec(prec + 48):
            M = [[ip.peval(self.wnum[i], z) / self.wden for z in rts]
                 for i in range(self.n)]
        return M

    # -- torsion -----------------------------------------------------------

    def torsion_order(self):
        if self._torsion is None:
            self._torsion = _torsion_order(self)
        return self._torsion


def _mat_inverse_scaled(rows, den):
    """Exact inverse of rows/den: returns (Mnum, Mden) with inverse = Mnum/Mden."""
    n = len(rows)
    A = [[Fraction(rows[i][j], den) for j in range(n)] for i in range(n)]
    Inv = [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
    for c in range(n):
        piv = next((i for i in range(c, n) if A[i][c]), None)
        assert piv is not None, "integral basis matrix singular"
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            Inv[c], Inv[piv] = Inv[piv], Inv[c]
        ic = 1 / A[c][c]
        A[c] = [x * ic for x in A[c]]
        Inv[c] = [x * ic for x in Inv[c]]
        for i in range(n):
            if i != c and A[i][c]:
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[c])]
                Inv[i] = [x - f * y for x, y in zip(Inv[i], Inv[c])]
    lcm = 1
    for r in Inv:
        for x in r:
            lcm = lcm * x.denominator // math.gcd(lcm, x.denominator)
    Mnum = [[int(x * lcm) for x in r] for r in Inv]
    return Mnum, lcm


# ---------------------------------------------------------------------------
# field construction

def create_field(coeffs):
    """Build a NumberField from monic integer polynomial coefficients
    (little-endian).  Degree must be 2..6 and the polynomial irreducible.
    Non-monogenic fields get a proper integral basis; prime decompositions at
    index primes are computed once here."""
    try:
        coeffs = [int(c) for c in coeffs]
    except (TypeError, ValueError):
        raise FieldError("coefficients must be integers")
    coeffs = list(ip.trim(coeffs))
    n = len(coeffs) - 1
    if n < 1 or coeffs[-1] != 1:
        raise NotMonic(f"leading coefficient must be 1")
    if not (2 <= n <= 6):
        raise DegreeOutOfRange(f"degree {n} outside 2..6")
    if n == 2:
        return _quadratic_field(coeffs)
    import sympy

    x = sympy.Symbol("x")
    fpoly = sympy.Poly(sum(c * x ** i for i, c in enumerate(coeffs)), x)
    if not fpoly.is_irreducible:
        raise Reducible("polynomial factors over Q")
    disc_f = ip.poly_discriminant(tuple(coeffs))
    r1 = sympy.polys.polytools.count_roots(fpoly)
    r2 = (n - r1) // 2

    fac = sympy.factorint(abs(disc_f))
    bad = []
    for p, e in sorted(fac.items()):
        if e >= 2 and not _dedekind_p_maximal(tuple(coeffs), int(p)):
            bad.append(int(p))

    if not bad:
        wnum = [tuple(1 if j == i else 0 for j in range(n)) for i in range(n)]
        K = NumberField(coeffs, r1, r2, disc_f, 1, disc_f, wnum, 1, {})
        return K

    # non-trivial index: compute the maximal order and decompositions
    try:
        from sympy.polys.numberfields.basis import round_two
        from sympy.polys.numberfields.primes import prime_decomp

        T = sympy.Poly(fpoly, x, domain="QQ")
        ZK, dK = round_two(T)
        dK = int(dK)
        index_sq, rem = divmod(disc_f, dK)
        assert rem == 0
        index = math.isqrt(abs(index_sq))
        assert index * index == abs(index_sq)
        mat = ZK.matrix.to_list()
        den = int(ZK.denom) if ZK.denom is not None else 1
        # columns of mat are the basis over the power basis
        wnum = [tuple(int(mat[i][j]) for i in range(n)) for j in range(n)]
        K = NumberField(coeffs, r1, r2, disc_f, index, dK, wnum, den, {})
        for p in bad:
            decomp = []
            for P in prime_decomp(p, T, ZK=ZK, dK=sympy.Integer(dK)):
                gen_ib = _sympy_elt_to_ib(K, P.alpha)
                S = P.as_submodule()
                smat = S.matrix.to_list()
                sden = int(S.denom) if S.denom is not None else 1
                gens = []
                for j in range(n):
                    col = [int(smat[i][j]) for i in range(n)]
                    gens.append(K.rat_to_ib(col, sden))
                H = zl.hnf(gens, n)
                module = [list(r) for r in H.square()]
                decomp.append(PrimeIdeal(p, int(P.e), int(P.f), r=-1,
                                         gen_ib=gen_ib, module=module))
            decomp.sort(key=lambda q: q.sort_key())
            K.index_primes[p] = decomp
        return K
    except (ImportError, AssertionError) as exc:
        raise NonMaximalOrder(f"index divisible by {bad}: {exc}")


def _quadratic_field(coeffs):
    """Degree-2 fields natively: every quadratic maximal order is Z[omega]
    with omega = (dK + sqrt(dK))/2, so the integral basis and the index-prime
    decompositions come straight from the fundamental discriminant."""
    c, b = coeffs[0], coeffs[1]
    disc_f = b * b - 4 * c
    if disc_f >= 0 and math.isqrt(disc_f) ** 2 == disc_f:
        raise Reducible("polynomial factors over Q")
    r1, r2 = (2, 0) if disc_f > 0 else (0, 1)
    import sympy

    s = 1
    for p, e in sympy.factorint(abs(disc_f)).items():
        s *= int(p) ** (int(e) // 2)
    m = disc_f // (s * s)
    if m % 4 == 1:
        dK, index = m, s
    else:
        assert s % 2 == 0
        dK, index = 4 * m, s // 2
    if index == 1:
        wnum = [(1, 0), (0, 1)]
        return NumberField(coeffs, r1, r2, disc_f, 1, disc_f, wnum, 1, {})
    # second basis element omega over theta: sqrt(disc_f) = 2*theta + b
    if m % 4 == 1:
        wden = 2 * s
        w1 = (s + b, 2)            # omega = (1 + sqrt(m)) / 2
        Bg, Cg = -1, (1 - m) // 4  # minimal polynomial of omega
    else:
        wden = s
        w1 = (b, 2)                # omega = sqrt(m)
        Bg, Cg = 0, -m
    wnum = [(wden, 0), w1]
    K = NumberField(coeffs, r1, r2, disc_f, index, dK, wnum, wden, {})
    g = (Cg, Bg, 1)
    for p in sorted(sympy.factorint(index)):
        p = int(p)
        decomp = []
        for gi, e in ip.factor_mod_p(g, p):
            if ip.degree(gi) == 1:
                t = (-gi[0]) % p
                gen_ib = (-t, 1)
                # (x0 + x1*omega)*omega = (-Cg*x1, x0 - Bg*x1)
                rows = [[p, 0], [0, p], [-t, 1], [-Cg, -t - Bg]]
                module = [list(r) for r in zl.hnf(rows, 2).square()]
                decomp.append(PrimeIdeal(p, int(e), 1, r=-1,
                                         gen_ib=gen_ib, module=module))
            else:
                decomp.append(PrimeIdeal(p, int(e), 2, r=-1, gen_ib=(p, 0),
                                         module=[[p, 0], [0, p]]))
        decomp.sort(key=lambda q: q.sort_key())
        K.index_primes[p] = decomp
    return K


def _sympy_elt_to_ib(K, alpha):
    col = alpha.col.to_list()
    den = int(alpha.denom) if alpha.denom is not None else 1
    numvec = [int(col[i][0]) for i in range(K.n)]
    return K.rat_to_ib(numvec, den)


def _dedekind_p_maximal(f, p):
    """Dedekind's criterion: is Z[theta] maximal at p?"""
    fac = ip.factor_mod_p(f, p)
    g = (1,)
    h = (1,)
    for gi, e in fac:
        g = ip.pmul_mod(g, gi, p)
        for _ in range(e - 1):
            h = ip.pmul_mod(h, gi, p)
    glift = tuple(c % p for c in g)
    hlift = tuple(c % p for c in h)
    prod = ip.pmul(glift, hlift)
    diff = ip.psub(prod, f)
    F = tuple(c // p for c in diff)
    assert all(c % p == 0 for c in diff)
    d = ip.pgcd_mod(ip.nmod(F, p), ip.pgcd_mod(g, h, p), p)
    return ip.degree(d) == 0


# ---------------------------------------------------------------------------
# prime splitting

def factor_rational_prime(K, p):
    """Prime ideals above p with multiplicities, sorted deterministically.
    Valid for every p (index primes use the stored decomposition)."""
    got = K._split_cache.get(p)
    if got is not None:
        return got
    if p in K.index_primes:
        out = K.index_primes[p]
    else:
        out = []
        for g, e in ip.factor_mod_p(K.f, p):
            glift = tuple(c % p for c in g)
            if ip.degree(g) == 1:
                r = (-glift[0]) % p
                out.append(PrimeIdeal(p, e, 1, r=r, gpoly=glift))
            else:
                out.append(PrimeIdeal(p, e, ip.degree(g), r=-1, gpoly=glift))
        out.sort(key=lambda q: q.sort_key())
    K._split_cache[p] = out
    return out


def prime_ideal_module(K, P):
    """n x n HNF rows (IB coords) of the ideal (p, g(theta))."""
    if P.module is not None:
        return P.module
    n = K.n
    rows = []
    for i in range(n):
        rows.append([P.p if j == i else 0 for j in range(n)])
    gen = K.to_ib(tuple(P.gpoly)) if P.gen_ib is None else P.gen_ib
    for i in range(n):
        basis = tuple(1 if j == i else 0 for j in range(n))
        rows.append(list(K.ib_mul(gen, basis)))
    H = zl.hnf(rows, n)
    P.module = [list(r) for r in H.square()]
    return P.module


def module_mul(K, A, B):
    """Product of two full modules given by n x n generator rows (IB)."""
    n = K.n
    rows = []
    for a in A:
        for b in B:
            rows.append(list(K.ib_mul(a, b)))
    return [list(r) for r in zl.hnf(rows, n).square()]


def module_pow(K, A, e):
    assert e >= 1
    result = None
    base = A
    while e:
        if e & 1:
            result = base if result is None else module_mul(K, result, base)
        e >>= 1
        if e:
            base = module_mul(K, base, base)
    return result


def module_contains(rows, y):
    """Membership of IB vector y in the full module with HNF rows."""
    n = len(y)
    v = list(y)
    for i in range(n - 1, -1, -1):
        piv = rows[i][i]
        if piv == 0:
            if v[i]:
                return False
            continue
        q, r = divmod(v[i], piv)
        if r:
            return False
        if q:
            for t in range(i + 1):
                v[t] -= q * rows[i][t]
    return all(x == 0 for x in v)


def module_norm(rows):
    d = 1
    for i, r in enumerate(rows):
        d *= r[i]
    return abs(d)


def prime_power_module(K, P, k):
    """Cached module of P**k."""
    key = (P.p, P.f, P.e, P.r, tuple(P.gpoly or ()), tuple(P.gen_ib or ()), k)
    got = K._pe_cache.get(key)
    if got is None:
        base = prime_ideal_module(K, P)
        got = module_pow(K, base, k) if k > 1 else base
        K._pe_cache[key] = got
    return got


def ideal_valuation(K, P, y_ib, cap):
    """v_P of the element with IB coords y_ib, capped at `cap` (membership
    ladder; used at ramified and index primes)."""
    v = 0
    while v < cap and module_contains(prime_power_module(K, P, v + 1), y_ib):
        v += 1
    return v


# ---------------------------------------------------------------------------
# relation verification

def _lifted_root(K, p, r, k):
    key = (p, r)
    got = K._hensel_cache.get(key)
    if got is None or got[0] < k:
        rk = ip.hensel_root(K.f, r, p, k)
        K._hensel_cache[key] = (k, rk)
        return rk
    return got[1] % p ** k


def _lifted_factor(K, p, gpoly, k):
    key = (p, tuple(gpoly))
    got = K._factor_lift_cache.get(key)
    if got is None or got[0] < k:
        G, _ = ip.hensel_lift_factor(K.f, gpoly, p, k)
        K._factor_lift_cache[key] = (k, G)
        return G
    return tuple(c % p ** k for c in got[1])


def _vp(n, p):
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def verify_relation(K, fb, phi=None, ib=None):
    """Exact factorization of the principal ideal (phi) over the factor base.

    phi is a power-basis integer coefficient tuple; alternatively pass ib
    (integral-basis coordinates) for elements not integral over the power
    basis.  Returns a dense exponent list parallel to fb.ideals.  Raises
    NotSmooth (with the offending cofactor) if any prime outside the base
    divides, and VerificationFailed on internal inconsistency."""
    if ib is not None:
        y_ib = tuple(ib)
        numvec, den = K.ib_to_rat(y_ib)
        num = ip.trim(tuple(numvec))
        if not num:
            raise ZeroElement("zero relation")
        nn = K.norm(num)
        N, rem = divmod(nn, den ** K.n)
        assert rem == 0
    else:
        num = ip.trim(tuple(phi))
        if not num:
            raise ZeroElement("zero relation")
        den = 1
        N = K.norm(num)
        y_ib = None
    absn = abs(N)
    row = [0] * len(fb.ideals)
    if absn == 1:
        return row
    for p in fb.rational_primes:
        if absn % p:
            continue
        a = _vp(absn, p)
        absn //= p ** a
        ideals_p = factor_rational_prime(K, p)
        total = 0
        vals = []
        for P in ideals_p:
            if P.e == 1 and P.f == 1 and P.r >= 0:
                # p never divides den: den | wden and wden's primes are all
                # index primes, which take the module branch below
                assert den % p
                rk = _lifted_root(K, p, P.r, a + 1)
                t = ip.peval(num, rk) % p ** (a + 1)
                v = a if t == 0 else min(_vp(t, p), a)
            elif P.e == 1 and P.r == -1 and P.gpoly is not None:
                # v_p(Res(G, num)) = f * v for the lifted local factor G; the
                # lift precision p**(a+1) is exact as long as f*v <= a, which
                # smoothness forces
                assert den % p
                G = _lifted_factor(K, p, P.gpoly, a + 1)
                R = ip.resultant(G, tuple(c % p ** (a + 1) for c in num))
                if R == 0:
                    raise VerificationFailed(f"resultant vanished at {p}")
                vp, rem = divmod(_vp(R, p), P.f)
                if rem or vp > a:
                    raise VerificationFailed(f"ragged valuation at {p}")
                v = vp
            else:
                if y_ib is None:
                    y_ib = K.to_ib(num)
                v = ideal_valuation(K, P, y_ib, a)
            vals.append(v)
            total += P.f * v
        if total != a:
            raise VerificationFailed(
                f"valuations at {p} sum to {total}, expected {a} for {num}")
        for P, v in zip(ideals_p, vals):
            if v == 0:
                continue
            idx = fb.index_of(P)
            if idx is None:
                raise NotSmooth(P.norm)
            row[idx] = v
    if absn != 1:
        raise NotSmooth(absn)
    return row


# ---------------------------------------------------------------------------
# logarithmic embeddings

def real_log_vector(K, power_product, precision=53):
    """log|sigma_i(u)| for u given as [(element, exponent), ...] over the
    power basis; r1 + r2 unweighted entries.  Result error below
    2**(-precision/2), achieved by doubling working precision until two
    ladder rungs agree."""
    items = [(ip.trim(tuple(e)), int(x)) for e, x in power_product if int(x) != 0]
    for e, _ in items:
        if not e:
            raise ZeroElement("log of zero")
    tol_exp = -(precision // 2 + 8)
    wp = max(precision + 64, 128)
    prev = None
    while wp <= 16384:
        rts = K.roots(wp)
        with mpmath.workprec(wp):
            vec = []
            for i in range(K.r1 + K.r2):
                s = mpmath.mpf(0)
                for e, ex in items:
                    val = ip.peval(e, rts[i])
                    av = abs(val)
                    if av == 0:
                        raise PrecisionLost("embedding underflow")
                    s += ex * mpmath.log(av)
                vec.append(s)
        if prev is not None:
            delta = max(abs(a - b) for a, b in zip(vec, prev)) if vec else 0
            if delta < mpmath.mpf(2) ** tol_exp:
                return vec
        prev = vec
        wp *= 2
    raise PrecisionLost("log vector did not stabilize")


# ---------------------------------------------------------------------------
# torsion

def _torsion_order(K):
    if K.r1 > 0:
        return 2
    n = K.n
    cands = [m for m in range(3, 20) if _euler_phi(m) <= n and n % _euler_phi(m) == 0]
    best = 2
    prec = 192
    rts = K.roots(prec)
    emb = K.ib_embedding_matrix(prec)
    for m in sorted(cands):
        order = m if m % 2 == 0 else 2 * m
        if order <= best:
            continue
        if _find_root_of_unity(K, m, rts, emb, prec) is not None:
            best = order
    return best


def _euler_phi(m):
    out = 1
    mm = m
    p = 2
    while p * p <= mm:
        if mm % p == 0:
            out *= p - 1
            mm //= p
            while mm % p == 0:
                out *= p
                mm //= p
        p += 1
    if mm > 1:
        out *= mm - 1
    return out


def _find_root_of_unity(K, m, rts, emb, prec):
    """Element of O_K with Phi_m(w) = 0, or None.  Embedding assignment plus
    exact verification."""
    import itertools

    n, r2 = K.n, K.r2
    if r2 * 2 != n:
        return None  # totally imaginary required for m > 2
    phim = ip.cyclotomic(m)
    ks = [k for k in range(1, m) if math.gcd(k, m) == 1]
    with mpmath.workprec(prec):
        # real linear system: for each complex embedding j, sum_i y_i emb[i][j]
        # equals the target root; unknowns y real -> 2 real equations each
        A = []
        for j in range(r2):
            A.append([complex(emb[i][K.r1 + j]) for i in range(n)])
        for assign in itertools.product(ks, repeat=r2):
            rhs = [complex(mpmath.e ** (2j * mpmath.pi * k / m)) for k in assign]
            M = np.zeros((n, n))
            b = np.zeros(n)
            for j in range(r2):
                for i in range(n):
                    M[2 * j][i] = A[j][i].real
                    M[2 * j + 1][i] = A[j][i].imag
                b[2 * j] = rhs[j].real
                b[2 * j + 1] = rhs[j].imag
            try:
                y = np.linalg.solve(M, b)
            except np.linalg.LinAlgError:
                continue
            yr = [round(float(v)) for v in y]
            if max(abs(float(v) - r) for v, r in zip(y, yr)) > 0.25:
                continue
            w = tuple(yr)
            if all(x == 0 for x in w):
                continue
            # exact check Phi_m(w) == 0 in O_K
            acc = tuple(0 for _ in range(n))
            pw = K.ib_one()
            for c in phim:
                if c:
                    acc = tuple(a + c * t for a, t in zip(acc, pw))
                pw = K.ib_mul(pw, w)
            if all(x == 0 for x in acc):
                return w
    return None
