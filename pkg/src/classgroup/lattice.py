"""Lattice reduction helpers: floating LLL over an explicit embedding,
exact-rational LLL for small bases with extreme dynamic range, and
two-dimensional Gauss (Lagrange) reduction over Z."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


def lll_reduce(rows, embed, delta=0.99):
    """LLL-reduce integer vectors under the quadratic form |embed(v)|^2.

    rows: list of integer coordinate vectors (a basis of the abstract lattice).
    embed: real matrix as list of rows, one per abstract coordinate; the form
    of v is the Euclidean norm of sum_i v_i * embed[i].

    Returns (new_rows, transform) where transform is unimodular with
    new_rows = transform . rows.  Exact integer bookkeeping, float Gram."""
    B = [list(r) for r in rows]
    k = len(B)
    if k == 0:
        return [], []
    m = len(B[0])
    E = np.array(embed, dtype=np.float64)
    assert E.shape[0] == m
    T = [[1 if i == j else 0 for j in range(k)] for i in range(k)]

    def gso():
        X = np.array(B, dtype=np.float64) @ E
        mu = np.zeros((k, k))
        star = np.zeros_like(X)
        norms = np.zeros(k)
        for i in range(k):
            v = X[i].copy()
            for j in range(i):
                if norms[j] > 0:
                    mu[i, j] = float(np.dot(X[i], star[j]) / norms[j])
                v -= mu[i, j] * star[j]
            star[i] = v
            norms[i] = float(np.dot(v, v))
        return mu, norms

    mu, norms = gso()
    i = 1
    guard = 0
    max_iters = 4000 * (k + 1)
    while i < k:
        guard += 1
        if guard > max_iters:
            break
        # size-reduce row i against previous rows
        changed = False
        for j in range(i - 1, -1, -1):
            q = round(mu[i, j])
            if q:
                B[i] = [a - q * b for a, b in zip(B[i], B[j])]
                T[i] = [a - q * b for a, b in zip(T[i], T[j])]
                changed = True
        if changed:
            mu, norms = gso()
        if norms[i] >= (delta - mu[i, i - 1] ** 2) * norms[i - 1] or norms[i - 1] == 0:
            i += 1
        else:
            B[i - 1], B[i] = B[i], B[i - 1]
            T[i - 1], T[i] = T[i], T[i - 1]
            mu, norms = gso()
            i = max(i - 1, 1)
    return [tuple(r) for r in B], [tuple(r) for r in T]


def lll_exact(rows, delta=Fraction(99, 100)):
    """LLL over exact rationals under the plain Euclidean form.

    For unit-log lattices the entries span hundreds of orders of magnitude,
    which overflows the float Gram path; this version keeps the whole
    Gram-Schmidt state in Fractions.  Only sane for small bases (k <= 8).

    Returns (new_rows, transform) with transform unimodular."""
    B = [list(map(int, r)) for r in rows]
    k = len(B)
    T = [[1 if i == j else 0 for j in range(k)] for i in range(k)]
    if k <= 1:
        return [tuple(r) for r in B], [tuple(r) for r in T]

    def gso():
        mu = [[Fraction(0)] * k for _ in range(k)]
        star = []
        norms = [Fraction(0)] * k
        for i in range(k):
            v = [Fraction(x) for x in B[i]]
            for j in range(i):
                if norms[j]:
                    mu[i][j] = sum(Fraction(a) * b for a, b in zip(B[i], star[j])) / norms[j]
                    v = [a - mu[i][j] * b for a, b in zip(v, star[j])]
            star.append(v)
            norms[i] = sum(a * a for a in v)
        return mu, norms

    mu, norms = gso()
    i = 1
    guard = 0
    max_iters = 4000 * (k + 1)
    while i < k:
        guard += 1
        if guard > max_iters:
            break
        changed = False
        for j in range(i - 1, -1, -1):
            q = math.floor(mu[i][j] + Fraction(1, 2))
            if q:
                B[i] = [a - q * b for a, b in zip(B[i], B[j])]
                T[i] = [a - q * b for a, b in zip(T[i], T[j])]
                changed = True
        if changed:
            mu, norms = gso()
        if norms[i - 1] == 0 or norms[i] >= (delta - mu[i][i - 1] ** 2) * norms[i - 1]:
            i += 1
        else:
            B[i - 1], B[i] = B[i], B[i - 1]
            T[i - 1], T[i] = T[i], T[i - 1]
            mu, norms = gso()
            i = max(i - 1, 1)
    return [tuple(r) for r in B], [tuple(r) for r in T]


def gauss_reduce_2d(u, v):
    """Lagrange-reduce two integer 2-vectors.  Output vectors are normalized
    to positive second coordinate (or positive first if the second is zero),
    shorter vector first; ties keep the reduced order."""
    u, v = list(u), list(v)

    def n2(w):
        return w[0] * w[0] + w[1] * w[1]

    while True:
        if n2(u) > n2(v):
            u, v = v, u
        d = n2(u)
        if d == 0:
            break
        q = round(_dot(u, v) / d)
        if q == 0:
            break
        v = [v[0] - q * u[0], v[1] - q * u[1]]

    def norm_sign(w):
        if w[1] < 0 or (w[1] == 0 and w[0] < 0):
            return [-w[0], -w[1]]
        return w

    u, v = norm_sign(u), norm_sign(v)
    if n2(v) < n2(u):
        u, v = v, u
    return (tuple(u), tuple(v))


def _dot(u, v):
    return u[0] * v[0] + u[1] * v[1]
