#!/usr/bin/env python3
"""Generate Hecke eigenvalue fixtures for the bundled real-quadratic newforms.

This sandbox has no access to online modular forms databases, so the a_ell
tables shipped under fixtures/ are computed from scratch with weight-2
modular symbols for Gamma_0(N):

  * Manin symbols are indexed by P^1(Z/N) and subjected to the two-term and
    three-term relations x + xS = 0, x + xT + xT^2 = 0.
  * The quotient space V (dimension 2g + #cusps - 1) carries the Hecke
    action; T_ell is computed through the coset representatives
    [1, j; 0, ell] (j mod ell) and [ell, 0; 0, 1] (the latter only for
    ell coprime to N), with modular symbols {a, b} converted back to Manin
    symbols by Manin's continued-fraction trick.
  * For each target newform orbit we locate the simultaneous eigensystem by
    intersecting kernels of g(T_ell^t) for candidate minimal polynomials g
    (all algebraic integers of the target field within the Weil box), then
    extract a dual eigenvector phi over K = Q(sqrt(m)).  Eigenvalues are
    recovered as a_n = phi(T_n x) / phi(x).

Everything is exact (Fraction arithmetic).  Self-checks:
  * dim V == 2*genus + (#cusps - 1) with the genus from the standard
    index/elliptic-point/cusp count formula;
  * Weil bounds at good primes, a_ell in {0, +-1} patterns at bad primes;
  * T_4 consistency a_4 == a_2^2 - 2 (all levels here are odd);
  * independence of the base symbol used for the eigenvalue ratios;
  * the generated order Z[f] has exactly the declared discriminant;
  * anchor eigenvalues for 35a and 125a (a_2 = -beta, a_3 = beta - 1 with
    beta = (1+sqrt(17))/2, and a_2 = -alpha, a_3 = alpha - 2 with
    alpha = (1+sqrt(5))/2).

Usage: python3 tools/gen_eigenvalues.py [--bound 1000] [--out fixtures]
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from math import gcd, isqrt
from pathlib import Path

# ----------------------------------------------------------------------------
# small number theory helpers


def primes_upto(n: int) -> list[int]:
    sieve = bytearray([1]) * (n + 1)
    sieve[0:2] = b"\x00\x00"
    for p in range(2, isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(sieve[p * p :: p]))
    return [i for i in range(2, n + 1) if sieve[i]]


def factorize(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a|n) (textbook implementation, n may be any int)."""
    if n == 0:
        return 1 if a in (1, -1) else 0
    if n < 0:
        return (-1 if a < 0 else 1) * kronecker(a, -n)
    t = 1
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            t = -t
    a %= n
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                t = -t
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            t = -t
        a %= n
    return t if n == 1 else 0


def genus_x0(N: int) -> tuple[int, int]:
    """Return (genus, number of cusps) of X_0(N)."""
    fac = factorize(N)
    mu = N
    for p in fac:
        mu = mu // p * (p + 1)
    if N % 4 == 0:
        nu2 = 0
    else:
        nu2 = 1
        for p in fac:
            # the p = 2 factor is 1 when N == 2 mod 4 (x^2 + 1 has the double
            # root 1 mod 2); the Kronecker symbol (-1|2) = 1 would overcount
            nu2 *= 1 if p == 2 else 1 + kronecker(-1, p)
    if N % 9 == 0:
        nu3 = 0
    else:
        nu3 = 1
        for p in fac:
            nu3 *= 1 + kronecker(-3, p)
    # number of cusps
    ninf = 0
    for d in range(1, N + 1):
        if N % d == 0:
            from math import gcd as _g

            g = _g(d, N // d)
            # Euler phi of g
            phi = g
            for p in factorize(g):
                phi = phi // p * (p - 1)
            ninf += phi
    num = 12 + mu - 3 * nu2 - 4 * nu3 - 6 * ninf
    assert num % 12 == 0
    return num // 12, ninf


# ----------------------------------------------------------------------------
# field K = Q(sqrt(sf)) elements as (rational, rational) pairs r + s*sqrt(sf)


class QF:
    __slots__ = ("r", "s")

    def __init__(self, r, s=0):
        self.r = Fraction(r)
        self.s = Fraction(s)

    def __add__(self, o):
        return QF(self.r + o.r, self.s + o.s)

    def __sub__(self, o):
        return QF(self.r - o.r, self.s - o.s)

    def __neg__(self):
        return QF(-self.r, -self.s)

    def __eq__(self, o):
        return self.r == o.r and self.s == o.s

    def __hash__(self):
        return hash((self.r, self.s))

    def is_zero(self):
        return self.r == 0 and self.s == 0

    def __repr__(self):
        return f"({self.r}+{self.s}*rt)"


def qf_mul(a: QF, b: QF, sf: int) -> QF:
    return QF(a.r * b.r + sf * a.s * b.s, a.r * b.s + a.s * b.r)


def qf_inv(a: QF, sf: int) -> QF:
    n = a.r * a.r - sf * a.s * a.s
    if n == 0:
        raise ZeroDivisionError("ramified zero divisor in Q(sqrt(sf))")
    return QF(a.r / n, -a.s / n)


def qf_conj(a: QF) -> QF:
    return QF(a.r, -a.s)


# ----------------------------------------------------------------------------
# exact dense linear algebra over Q (Fraction)

Mat = list  # list of rows; rows are lists of Fraction


def mat_mul(A: Mat, B: Mat) -> Mat:
    n, k, m = len(A), len(B), len(B[0])
    out = [[Fraction(0)] * m for _ in range(n)]
    for i in range(n):
        Ai = A[i]
        Oi = out[i]
        for t in range(k):
            a = Ai[t]
            if a:
                Bt = B[t]
                for j in range(m):
                    if Bt[j]:
                        Oi[j] += a * Bt[j]
    return out


def mat_identity(n: int) -> Mat:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def kernel_Q(M: Mat) -> Mat:
    """Column basis of the right kernel of M (rows x cols), as cols x dim."""
    rows = [row[:] for row in M]
    ncols = len(M[0]) if M else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, len(rows)):
            if rows[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fcol in free:
        v = [Fraction(0)] * ncols
        v[fcol] = Fraction(1)
        for ri, pc in enumerate(pivots):
            v[pc] = -rows[ri][fcol]
        basis.append(v)
    # return as matrix with basis vectors as columns
    return [[basis[j][i] for j in range(len(basis))] for i in range(ncols)]


def solve_restriction(A: Mat, B: Mat) -> Mat:
    """Given A (m x m) and full-column-rank B (m x k) with A*B = B*R for
    some R, recover R (k x k)."""
    m = len(B)
    k = len(B[0]) if B else 0
    AB = mat_mul(A, B)
    # pick k independent rows of B by elimination
    aug = [[B[i][j] for j in range(k)] + [AB[i][j] for j in range(k)] for i in range(m)]
    # row-reduce on the first k columns
    r = 0
    for c in range(k):
        piv = None
        for i in range(r, m):
            if aug[i][c] != 0:
                piv = i
                break
        assert piv is not None, "B not full column rank"
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = 1 / aug[r][c]
        aug[r] = [x * inv for x in aug[r]]
        for i in range(m):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        r += 1
    assert r == k
    R = [[aug[i][k + j] for j in range(k)] for i in range(k)]
    # consistency: A*B == B*R
    BR = mat_mul(B, R)
    assert AB == BR, "restriction inconsistent (subspace not stable)"
    return R


def kernel_K(M: list[list[QF]], sf: int) -> list[list[QF]]:
    """Right kernel over K = Q(sqrt(sf)); returns cols x dim matrix of QF."""
    rows = [row[:] for row in M]
    ncols = len(M[0]) if M else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, len(rows)):
            if not rows[i][c].is_zero():
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = qf_inv(rows[r][c], sf)
        rows[r] = [qf_mul(x, inv, sf) for x in rows[r]]
        for i in range(len(rows)):
            if i != r and not rows[i][c].is_zero():
                f = rows[i][c]
                rows[i] = [x - qf_mul(f, y, sf) for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fcol in free:
        v = [QF(0) for _ in range(ncols)]
        v[fcol] = QF(1)
        for ri, pc in enumerate(pivots):
            v[pc] = -rows[ri][fcol]
        basis.append(v)
    return [[basis[j][i] for j in range(len(basis))] for i in range(ncols)]


# ----------------------------------------------------------------------------
# Manin symbols for Gamma_0(N)


class ManinSpace:
    def __init__(self, N: int):
        self.N = N
        units = [u for u in range(1, N) if gcd(u, N) == 1]
        lookup = [-1] * (N * N)
        reps: list[tuple[int, int]] = []
        for c in range(N):
            for d in range(N):
                if lookup[c * N + d] != -1:
                    continue
                if gcd(gcd(c, d), N) != 1:
                    continue
                k = len(reps)
                reps.append((c, d))
                for u in units:
                    lookup[(c * u) % N * N + (d * u) % N] = k
        self.reps = reps
        self.lookup = lookup
        self.n = len(reps)
        self._build_quotient()

    def index(self, c: int, d: int) -> int:
        return self.lookup[(c % self.N) * self.N + (d % self.N)]

    def _build_quotient(self):
        N = self.N
        rows: list[dict[int, Fraction]] = []
        seen = set()
        for i, (c, d) in enumerate(self.reps):
            # x + xS = 0 with S = [0,-1;1,0]: (c,d) -> (d,-c)
            j = self.index(d, -c)
            key = tuple(sorted((i, j)))
            if ("S", key) not in seen:
                seen.add(("S", key))
                row: dict[int, Fraction] = {}
                for t in (i, j):
                    row[t] = row.get(t, Fraction(0)) + 1
                rows.append(row)
            # x + xT + xT^2 = 0 with T = [0,-1;1,-1]:
            # (c,d) -> (d, -c-d) -> (-c-d, c)
            j1 = self.index(d, -c - d)
            j2 = self.index(-c - d, c)
            key = tuple(sorted((i, j1, j2)))
            if ("T", key) not in seen:
                seen.add(("T", key))
                row = {}
                for t in (i, j1, j2):
                    row[t] = row.get(t, Fraction(0)) + 1
                rows.append(row)
        # sparse Gaussian elimination
        pivots: dict[int, dict[int, Fraction]] = {}
        for row in rows:
            row = dict(row)
            while row:
                c0 = min(row)
                if c0 in pivots:
                    f = row[c0]
                    prow = pivots[c0]
                    for c1, v in prow.items():
                        nv = row.get(c1, Fraction(0)) - f * v
                        if nv:
                            row[c1] = nv
                        elif c1 in row:
                            del row[c1]
                else:
                    inv = 1 / row[c0]
                    row = {c1: v * inv for c1, v in row.items()}
                    pivots[c0] = row
                    break
        # back substitution to full RREF
        for c0 in sorted(pivots, reverse=True):
            row = pivots[c0]
            changed = True
            while changed:
                changed = False
                for c1 in list(row):
                    if c1 != c0 and c1 in pivots:
                        f = row[c1]
                        for c2, v in pivots[c1].items():
                            nv = row.get(c2, Fraction(0)) - f * v
                            if nv:
                                row[c2] = nv
                            elif c2 in row:
                                del row[c2]
                        changed = True
            pivots[c0] = row
        free = [i for i in range(self.n) if i not in pivots]
        self.free = free
        self.free_pos = {f: k for k, f in enumerate(free)}
        self.dim = len(free)
        # projection of each generator onto the free basis
        proj: list[dict[int, Fraction]] = []
        for i in range(self.n):
            if i in self.free_pos:
                proj.append({self.free_pos[i]: Fraction(1)})
            else:
                row = pivots[i]
                proj.append(
                    {self.free_pos[c]: -v for c, v in row.items() if c != i}
                )
        self.proj = proj

    # ---- modular symbol <-> Manin symbol machinery

    def lift_to_sl2(self, c: int, d: int) -> tuple[int, int, int, int]:
        """Lift (c:d) in P^1(Z/N) to [a,b;c',d'] in SL_2(Z)."""
        N = self.N
        c %= N
        d %= N
        for dc in range(0, 10 * N, 1):
            for cc in (c, c + N, c + 2 * N):
                d2 = d + dc * N
                if gcd(cc, d2) == 1:
                    # solve a*d2 - b*cc = 1
                    g, x, y = ext_gcd(d2, -cc)
                    assert g in (1, -1)
                    a, b = x * g, y * g  # a*d2 - b*cc = 1
                    assert a * d2 - b * cc == 1
                    return a, b, cc, d2
        raise RuntimeError("lift failed")

    def manin_of_zero_to(self, p: int, q: int) -> list[int]:
        """Symbol indices (with multiplicity) of {0, p/q}; q == 0 means oo."""
        out = [self.index(0, 1)]  # {0, oo}
        if q == 0:
            return out
        if p == 0:
            return []  # {0, 0} = 0
        g = gcd(abs(p), abs(q))
        p //= g
        q //= g
        if q < 0:
            p, q = -p, -q
        # continued fraction of p/q with floor division
        a_list = []
        pp, qq = p, q
        while qq:
            a = pp // qq
            a_list.append(a)
            pp, qq = qq, pp - a * qq
        # convergents; k = -1 term already emitted ({0,oo} = (q_{-1}:q_{-2}))
        pkm1, qkm1 = 1, 0  # p_{-1}/q_{-1}
        pk, qk = a_list[0], 1  # p_0/q_0
        out.append(self.index(qk, -qkm1))  # sign (-1)^(k-1) = -1 at k = 0
        sign = 1  # (-1)^(k-1) for k = 1
        for k in range(1, len(a_list)):
            pk, pkm1 = a_list[k] * pk + pkm1, pk
            qk, qkm1 = a_list[k] * qk + qkm1, qk
            out.append(self.index(qk, sign * qkm1))
            sign = -sign
        assert (pk, qk) == (p, q)
        return out


def ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        qq = old_r // r
        old_r, r = r, old_r - qq * r
        old_s, s = s, old_s - qq * s
        old_t, t = t, old_t - qq * t
    return old_r, old_s, old_t


def apply_frac(g: tuple[int, int, int, int], pq: tuple[int, int]) -> tuple[int, int]:
    a, b, c, d = g
    p, q = pq
    return (a * p + b * q, c * p + d * q)


def hecke_cosets(ell: int, N: int) -> list[tuple[int, int, int, int]]:
    cosets = [(1, j, 0, ell) for j in range(ell)]
    if N % ell != 0:
        cosets.append((ell, 0, 0, 1))
    return cosets


def tn_cosets(n: int, N: int) -> list[tuple[int, int, int, int]]:
    """Coset representatives for T_n, n arbitrary (sum over ad=n, gcd(a,N)=1,
    0 <= b < d)."""
    out = []
    for a in range(1, n + 1):
        if n % a or gcd(a, N) != 1:
            continue
        d = n // a
        for b in range(d):
            out.append((a, b, 0, d))
    return out


class HeckeEngine:
    """Hecke action through endpoint paths + continued fractions."""

    def __init__(self, space: ManinSpace):
        self.space = space
        self._sym_endpoints: dict[int, tuple[tuple[int, int], tuple[int, int]]] = {}

    def endpoints(self, i: int) -> tuple[tuple[int, int], tuple[int, int]]:
        """Manin symbol i corresponds to the path {b/d, a/c}."""
        if i not in self._sym_endpoints:
            c, d = self.space.reps[i]
            a, b, cc, dd = self.space.lift_to_sl2(c, d)
            self._sym_endpoints[i] = ((b, dd), (a, cc))
        return self._sym_endpoints[i]

    def hecke_image_symbols(
        self, i: int, cosets: list[tuple[int, int, int, int]]
    ) -> tuple[list[int], list[int]]:
        """Return (plus, minus) lists of symbol indices for T(cosets) e_i."""
        alpha, beta = self.endpoints(i)
        plus: list[int] = []
        minus: list[int] = []
        sp = self.space
        for g in cosets:
            ga = apply_frac(g, alpha)
            gb = apply_frac(g, beta)
            plus.extend(sp.manin_of_zero_to(*gb))
            minus.extend(sp.manin_of_zero_to(*ga))
        return plus, minus

    def hecke_matrix(self, cosets) -> Mat:
        """Matrix of the Hecke operator on the quotient, free basis."""
        sp = self.space
        m = sp.dim
        cols = []
        for f in sp.free:
            plus, minus = self.hecke_image_symbols(f, cosets)
            acc: dict[int, Fraction] = {}
            for j in plus:
                for k, v in sp.proj[j].items():
                    acc[k] = acc.get(k, Fraction(0)) + v
            for j in minus:
                for k, v in sp.proj[j].items():
                    acc[k] = acc.get(k, Fraction(0)) - v
            cols.append(acc)
        A = [[Fraction(0)] * m for _ in range(m)]
        for jcol, acc in enumerate(cols):
            for irow, v in acc.items():
                A[irow][jcol] = v
        return A


# ----------------------------------------------------------------------------
# eigensystem search


def ok_candidates(ell: int, sf: int) -> list[tuple[int, Fraction, Fraction]]:
    """Algebraic integers of O_K with both embeddings |.| <= 2 sqrt(ell),
    as (degree, r, s) with value r + s sqrt(sf); degree 2 entries keep s > 0
    (conjugates represent the same minimal polynomial)."""
    out = []
    bound_sq = 4 * ell
    half = sf % 4 == 1
    # enumerate r + s sqrt(sf), with (r, s) integers or half-integers together
    denom = 2 if half else 1
    import math

    smax = int(math.isqrt(bound_sq // sf)) + 2
    for s2 in range(0, denom * smax + denom + 1):
        s = Fraction(s2, denom)
        for r2 in range(-denom * (int(math.isqrt(bound_sq)) + 2),
                        denom * (int(math.isqrt(bound_sq)) + 2) + 1):
            r = Fraction(r2, denom)
            if half and (r2 - s2) % 2 != 0:
                continue
            if not half and (r2 % denom or s2 % denom):
                continue
            # embeddings r +- s sqrt(sf): check (r+s*sqrt)^2 <= 4l exactly:
            # r^2 + s^2 sf + 2 r s sqrt(sf) <= 4l  <=>  use both signs
            base = r * r + s * s * sf
            cross = 2 * r * s
            # |r + s sqrt| <= B  <=> base + cross*sqrt(sf) <= B^2 etc.
            ok = True
            for sgn in (1, -1):
                lhs = base
                rhs = Fraction(bound_sq) - lhs
                c = sgn * cross
                # need c*sqrt(sf) <= rhs
                if rhs < 0:
                    ok = False
                    break
                if c > 0 and c * c * sf > rhs * rhs:
                    ok = False
                    break
            if not ok:
                continue
            if s == 0:
                out.append((1, r, Fraction(0)))
            else:
                out.append((2, r, s))
    return out


def eval_minpoly_on(R: Mat, deg: int, r: Fraction, s: Fraction, sf: int) -> Mat:
    """g(R) where g is the minimal polynomial of r + s sqrt(sf)."""
    k = len(R)
    I = mat_identity(k)
    if deg == 1:
        return [[R[i][j] - (r if i == j else 0) for j in range(k)] for i in range(k)]
    tr = 2 * r
    nm = r * r - s * s * sf
    R2 = mat_mul(R, R)
    return [
        [R2[i][j] - tr * R[i][j] + (nm if i == j else 0) for j in range(k)]
        for i in range(k)
    ]


def find_orbits(N: int, sf: int, engine: HeckeEngine, verbose=True):
    """Find all 4-dimensional rational Hecke-stable subspaces corresponding
    to quadratic eigensystems over Q(sqrt(sf)).  Returns list of
    (basis B (m x 4), evs: {ell: (deg, r, s)})."""
    sp = engine.space
    m = sp.dim
    usable = [l for l in [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31] if N % l]
    AT: dict[int, Mat] = {}

    def get_AT(l):
        if l not in AT:
            A = engine.hecke_matrix(hecke_cosets(l, N))
            AT[l] = [[A[j][i] for j in range(m)] for i in range(m)]
        return AT[l]

    state = [(mat_identity(m), {})]
    for l in usable:
        A = get_AT(l)
        new_state = []
        for B, evs in state:
            k = len(B[0])
            if k == 4 and any(d == 2 for d, _, _ in evs.values()):
                # already a single quadratic orbit candidate; keep refining
                # only if a later prime would split it -- check stability by
                # attempting a split anyway (cheap at dim 4)
                pass
            R = solve_restriction(A, B)
            split_any = False
            for deg, r, s in ok_candidates(l, sf):
                G = eval_minpoly_on(R, deg, r, s, sf)
                Kr = kernel_Q(G)
                kd = len(Kr[0]) if Kr and Kr[0] else 0
                if kd == 0:
                    continue
                if kd == k:
                    # whole space is generalized eigenspace; record ev
                    new_state.append((B, {**evs, l: (deg, r, s)}))
                else:
                    new_state.append((mat_mul(B, Kr), {**evs, l: (deg, r, s)}))
                split_any = True
            if not split_any:
                # no candidate matched: not a system within the Weil box of
                # K (e.g. eigenvalue outside K); drop this branch
                continue
        state = new_state
        # prune: drop branches that can no longer be a quadratic orbit
        state = [
            (B, evs)
            for B, evs in state
            if len(B[0]) >= 2
            and (len(B[0]) >= 4 or not any(d == 2 for d, _, _ in evs.values()))
        ]
        # a genuine quadratic orbit has rational dimension 4; branches of
        # dim < 4 whose eigenvalues so far are all rational may still be
        # rational forms; keep only dim >= 4 or potential (dim>=2, all deg 1
        # could become quadratic later only if dim >= 4... actually a branch
        # with all-rational evs and dim 2 is a rational eigenform; drop)
        state = [
            (B, evs)
            for B, evs in state
            if not (len(B[0]) < 4 and all(d == 1 for d, _, _ in evs.values()))
        ]
        if verbose:
            sys.stderr.write(
                f"  [N={N}] after T_{l}: {len(state)} branch(es), dims "
                f"{[len(B[0]) for B, _ in state]}\n"
            )
        if all(len(B[0]) == 4 for B, _ in state) and state:
            # try to finish early once every branch is a clean orbit and at
            # least one quadratic eigenvalue is pinned
            if all(any(d == 2 for d, _, _ in evs.values()) for _, evs in state):
                break
    orbits = []
    for B, evs in state:
        if len(B[0]) == 4 and any(d == 2 for d, _, _ in evs.values()):
            orbits.append((B, evs, AT))
    return orbits


def dual_eigenvector(N, sf, engine, B, evs, AT):
    """Extract dual eigenvector phi in K^m for the orbit spanned by B."""
    sp = engine.space
    m = sp.dim
    # pick a prime with quadratic eigenvalue
    lstar, (deg, r, s) = next(
        (l, v) for l, v in sorted(evs.items()) if v[0] == 2
    )
    R = solve_restriction(AT[lstar], B)  # 4x4 over Q
    alpha = QF(r, s)
    RK = [[QF(R[i][j]) for j in range(4)] for i in range(4)]
    for i in range(4):
        RK[i][i] = RK[i][i] - alpha
    E = kernel_K(RK, sf)  # 4 x dim
    edim = len(E[0]) if E and E[0] else 0
    assert edim == 2, f"expected K-eigenspace of dim 2, got {edim}"
    # verify every computed Hecke restriction acts as a scalar on E
    for l, A in AT.items():
        Rl = solve_restriction(A, B)
        RlK = [[QF(Rl[i][j]) for j in range(4)] for i in range(4)]
        # Rl * E columns
        for col in range(edim):
            v = [E[i][col] for i in range(4)]
            w = [
                sum((qf_mul(RlK[i][j], v[j], sf) for j in range(4)), QF(0))
                for i in range(4)
            ]
            # w must be lambda * v with the same lambda for all cols: find
            # ratio on a nonzero coordinate
            lam = None
            for i in range(4):
                if not v[i].is_zero():
                    lam = qf_mul(w[i], qf_inv(v[i], sf), sf)
                    break
            assert lam is not None
            for i in range(4):
                assert w[i] == qf_mul(lam, v[i], sf), (
                    f"T_{l} not scalar on candidate orbit (N={N})"
                )
    w = [E[i][0] for i in range(4)]
    phi = [QF(0) for _ in range(m)]
    for i in range(m):
        acc = QF(0)
        for j in range(4):
            if B[i][j]:
                acc = acc + qf_mul(QF(B[i][j]), w[j], sf)
        phi[i] = acc
    return phi


def eigenvalues(N, sf, engine, phi, bound, verbose=True):
    """a_ell for all primes ell <= bound via a_n phi(x) = phi(T_n x)."""
    sp = engine.space
    # extend phi to all Manin generators, with cleared denominators
    from math import lcm

    dens = [1]
    for z in phi:
        dens.append(z.r.denominator)
        dens.append(z.s.denominator)
    L = 1
    for d in dens:
        L = lcm(L, d)
    phi_full: list[tuple[int, int]] = []
    for i in range(sp.n):
        rr = Fraction(0)
        ss = Fraction(0)
        for k, v in sp.proj[i].items():
            z = phi[k]
            rr += v * z.r
            ss += v * z.s
        rr *= L
        ss *= L
        assert rr.denominator == 1 and ss.denominator == 1
        phi_full.append((int(rr), int(ss)))

    # choose base symbols with nonzero phi
    bases = [i for i in range(sp.n) if phi_full[i] != (0, 0)]
    assert len(bases) >= 2
    x0, x1 = bases[0], bases[1]

    def ratio(plus, minus, x):
        sr = ss_ = 0
        for j in plus:
            a, b = phi_full[j]
            sr += a
            ss_ += b
        for j in minus:
            a, b = phi_full[j]
            sr -= a
            ss_ -= b
        num = QF(sr, ss_)
        den = QF(*phi_full[x])
        return qf_mul(num, qf_inv(den, sf), sf)

    out = {}
    for ell in primes_upto(bound):
        cos = hecke_cosets(ell, N)
        a = ratio(*engine.hecke_image_symbols(x0, cos), x0)
        if ell <= 50:
            a2 = ratio(*engine.hecke_image_symbols(x1, cos), x1)
            assert a == a2, f"base-symbol dependence at ell={ell} (N={N})"
        # checks
        if N % ell:
            # Weil: both embeddings of a have |.| <= 2 sqrt(ell):
            # equivalent to Tr(4l - a^2) >= 0 and Nm(4l - a^2) >= 0
            t = QF(4 * ell, 0) - qf_mul(a, a, sf)
            assert 2 * t.r >= 0 and t.r * t.r - sf * t.s * t.s >= 0, (
                f"Weil bound violated at ell={ell} (N={N}): {a}"
            )
        else:
            v = 0
            nn = N
            while nn % ell == 0:
                nn //= ell
                v += 1
            if v == 1:
                assert a.s == 0 and a.r in (1, -1), f"bad U_{ell} (N={N}): {a}"
            else:
                assert a.is_zero(), f"bad U_{ell}, ell^2|N (N={N}): {a}"
        out[ell] = a
    # multiplicativity check: a_4 = a_2^2 - 2 (levels are odd)
    assert N % 2, "levels expected odd"
    plus, minus = engine.hecke_image_symbols(x0, tn_cosets(4, N))
    a4 = ratio(plus, minus, x0)
    assert a4 == qf_mul(out[2], out[2], sf) - QF(4, 0) + QF(2, 0), (
        f"T_4 inconsistency (N={N})"
    )
    if verbose:
        sys.stderr.write(f"  [N={N}] eigenvalues up to {bound} done\n")
    return out


# ----------------------------------------------------------------------------
# order bookkeeping and output


FUND = {5: 5, 13: 13, 17: 17, 2: 8, 3: 12}


def to_fund_coords(a: QF, sf: int) -> tuple[Fraction, Fraction]:
    """Write a = x + y*w0 with w0 the standard generator of O_K."""
    D0 = FUND[sf]
    t0 = 1 if D0 == sf else 2  # sqrt(D0) = t0 sqrt(sf)
    y = 2 * a.s / t0
    x = a.r - y * Fraction(D0, 2)
    return x, y


def order_disc(avals: dict[int, QF], sf: int) -> int:
    """Discriminant of Z[{a_ell}] inside O_K."""
    D0 = FUND[sf]
    g = 0
    for a in avals.values():
        x, y = to_fund_coords(a, sf)
        assert x.denominator == 1 and y.denominator == 1, "not an algebraic integer"
        g = gcd(g, abs(int(y)))
    assert g > 0, "rational eigenvalue system"
    return g * g * D0


def to_disc_coords(a: QF, sf: int, disc: int) -> tuple[int, int]:
    """Coordinates of a on the basis (1, w) with w = (disc + sqrt(disc))/2."""
    D0 = FUND[sf]
    c2 = disc // D0
    c = isqrt(c2)
    assert c * c * D0 == disc
    t0 = 1 if D0 == sf else 2
    y = 2 * a.s / (c * t0)
    x = a.r - y * Fraction(disc, 2)
    assert x.denominator == 1 and y.denominator == 1, f"not in order disc={disc}"
    return int(x), int(y)


def conj_all(avals: dict[int, QF]) -> dict[int, QF]:
    return {l: qf_conj(a) for l, a in avals.items()}


# reducibility probe: does a_ell = 1 + ell mod P hold for all good ell,
# where P is a prime of O over p given by a root r of the minimal polynomial
# of w_disc mod p (split/ramified), or the inert prime?


def splitting_roots(disc: int, p: int) -> list[int]:
    c = ((disc * disc - disc) // 4) % p
    return [t for t in range(p) if (t * t - disc * t + c) % p == 0]


def probe_reducible_1_chi(avals, sf, disc, p, N, bound=200) -> list[int]:
    """Return the roots r (tags over p) at which a_ell == 1 + ell mod P
    for all good ell <= bound.  Only split/ramified p handled."""
    roots = splitting_roots(disc, p)
    good_roots = []
    for r in roots:
        ok = True
        for l, a in avals.items():
            if l > bound or l == p or N % l == 0:
                continue
            x, y = to_disc_coords(a, sf, disc)
            # w = r mod P
            am = (x + y * ((disc % p) * 0 + r)) % p
            if (am - (1 + l)) % p != 0:
                ok = False
                break
        if ok:
            good_roots.append(r)
    return good_roots


# ----------------------------------------------------------------------------
# main driver


TARGETS = {
    # level: list of (squarefree part of the coefficient field, label rule).
    # Labels are attributed by field; when two orbits share the field, a
    # reducibility probe distinguishes them.  The recorded disc is always
    # the computed disc of Z[f] (which can differ from the endomorphism-ring
    # disc of a particular curve in the isogeny class, e.g. 31a).
    23: [(5, "23a")],
    29: [(2, "29a")],
    31: [(5, "31a")],
    35: [(17, "35a")],
    39: [(2, "39a")],
    67: [(5, "67?")],  # two orbits: probe 11-reducibility -> 67c else 67a
    73: [(13, "73a"), (5, "73b")],
    85: [(2, "85a"), (3, "85b")],
    125: [(5, "125a")],
    133: [(13, "133d"), (5, "133?")],  # sqrt5-reducible -> 133e else 133c
    147: [(2, "147a")],
    167: [(5, "167a")],
    261: [(5, "261c")],
    # two orbits over Q(sqrt5) at 275: the table's 275a is the one with
    # rho_p5 reducible as 1 + chi_5 (the other is its eps_5-twist)
    275: [(5, "275?"), (13, "275b")],
    289: [(13, "289a")],
}


def orient(avals: dict[int, QF], sf: int, label: str) -> dict[int, QF]:
    """Fix the embedding.  Anchors for 35a/125a; else first nonzero s > 0."""
    if label == "35a":
        want = {2: QF(Fraction(-1, 2), Fraction(-1, 2)),
                3: QF(Fraction(-1, 2), Fraction(1, 2))}
    elif label == "125a":
        want = {2: QF(Fraction(-1, 2), Fraction(-1, 2)),
                3: QF(Fraction(-3, 2), Fraction(1, 2))}
    else:
        want = None
    if want is not None:
        for cand in (avals, conj_all(avals)):
            if all(cand[l] == v for l, v in want.items()):
                return cand
        raise AssertionError(f"anchor mismatch for {label}: a2={avals[2]}, a3={avals[3]}")
    for l in sorted(avals):
        if avals[l].s != 0:
            return avals if avals[l].s > 0 else conj_all(avals)
    raise AssertionError("rational system")


def run_level(N: int, bound: int, outdir: Path, verbose=True):
    t0 = time.time()
    sp = ManinSpace(N)
    g, ninf = genus_x0(N)
    assert sp.dim == 2 * g + ninf - 1, (
        f"dim mismatch N={N}: dim={sp.dim}, 2g+c-1={2 * g + ninf - 1}"
    )
    engine = HeckeEngine(sp)
    wanted = TARGETS[N]
    results = []
    for sf in sorted({w[0] for w in wanted}):
        orbits = find_orbits(N, sf, engine, verbose=verbose)
        for B, evs, AT in orbits:
            phi = dual_eigenvector(N, sf, engine, B, evs, AT)
            avals = eigenvalues(N, sf, engine, phi, bound, verbose=verbose)
            disc = order_disc(avals, sf)
            results.append((sf, disc, avals))
    # attribute labels (by coefficient field, disambiguated by probes)
    labelled = {}
    for sf_w, rule in wanted:
        cands = [(sf, disc, av) for sf, disc, av in results if sf == sf_w]
        if rule == "67?":
            assert len(cands) == 2, f"N=67: expected 2 orbits over Q(sqrt5)"
            for sf, disc, av in cands:
                lab = "67c" if probe_reducible_1_chi(av, sf, disc, 11, N) else "67a"
                assert lab not in labelled
                labelled[lab] = (sf, disc, av)
        elif rule == "275?":
            assert len(cands) == 2, "N=275: expected 2 orbits over Q(sqrt5)"
            picked = [
                (sf, disc, av)
                for sf, disc, av in cands
                if probe_reducible_1_chi(av, sf, disc, 5, N)
            ]
            assert len(picked) == 1, "N=275: 1+chi_5 probe must pick one orbit"
            labelled["275a"] = picked[0]
        elif rule == "133?":
            cands = [c for c in cands]
            assert len(cands) == 2, f"N=133: expected 2 orbits over Q(sqrt5)"
            for sf, disc, av in cands:
                lab = "133e" if probe_reducible_1_chi(av, sf, disc, 5, N) else "133c"
                assert lab not in labelled
                labelled[lab] = (sf, disc, av)
        else:
            assert cands, f"N={N}: no orbit over Q(sqrt {sf_w})"
            if len(cands) > 1:
                sys.stderr.write(
                    f"  [N={N}] WARNING: {len(cands)} orbits over "
                    f"Q(sqrt {sf_w}); taking the first for {rule} "
                    f"(discs {[c[1] for c in cands]})\n"
                )
            labelled[rule] = cands[0]
    for label, (sf, disc, avals) in sorted(labelled.items()):
        avals = orient(avals, sf, label)
        ap = [[l, *to_disc_coords(a, sf, disc)] for l, a in sorted(avals.items())]
        doc = {
            "schema": "bsd-kit/1",
            "label": label,
            "level": N,
            "disc": disc,
            "coeff_bound": bound,
            "fricke": None,
            "ap": ap,
        }
        path = outdir / f"newform_{label}.json"
        path.write_text(json.dumps(doc, indent=1) + "\n")
        if verbose:
            sys.stderr.write(
                f"  [N={N}] wrote {path.name} (disc {disc}) "
                f"in {time.time() - t0:.1f}s\n"
            )


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--bound", type=int, default=1000)
    ap.add_argument("--out", type=str, default="fixtures")
    ap.add_argument("--levels", type=str, default="")
    args = ap.parse_args()
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    levels = (
        [int(x) for x in args.levels.split(",")] if args.levels else sorted(TARGETS)
    )
    for N in levels:
        sys.stderr.write(f"level {N}...\n")
        run_level(N, args.bound, outdir)


if __name__ == "__main__":
    main()
