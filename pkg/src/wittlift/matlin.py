"""Matrix algebra over the coefficient rings.

Covers characteristic polynomials and eigenvalues, Hensel diagonalization of
2x2 matrices over truncated Witt rings, multiplicative Jordan decomposition,
the tame-relation branch test, split-diagonal extraction from subgroups with
full residual image, and the module-basis / integral-model algorithms over
the fraction field of a truncated Witt ring.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import coeffring as cr
from .errors import (
    DoesNotSpan,
    EigenvaluesNotInField,
    ParamMismatch,
    PrecisionExhausted,
    RepeatedResidualEigenvalues,
    ResidualImageTooSmall,
    Singular,
    UnboundedGroup,
)

_INF = 10 ** 9


def _is_field(ring):
    return isinstance(ring, cr.FieldParams)


def ring_zero(ring):
    return cr.ff_zero(ring) if _is_field(ring) else cr.witt_zero(ring)


def ring_one(ring):
    return cr.ff_one(ring) if _is_field(ring) else cr.witt_one(ring)


def ring_from_int(ring, k):
    return cr.ff_from_int(ring, k) if _is_field(ring) else cr.witt_from_int(ring, k)


def _elem_is_unit(x):
    return not x.is_zero() if isinstance(x, cr.FFElem) else x.is_unit()


@dataclass(frozen=True)
class Mat:
    """Square matrix over FFElem or WittElem entries (row-major tuples)."""

    ring: object
    rows: tuple

    @property
    def n(self):
        return len(self.rows)

    @classmethod
    def from_rows(cls, ring, rows):
        return cls(ring, tuple(tuple(r) for r in rows))

    @classmethod
    def from_ints(cls, ring, rows):
        return cls.from_rows(ring, [[ring_from_int(ring, v) for v in r] for r in rows])

    @classmethod
    def identity(cls, ring, n):
        one, zero = ring_one(ring), ring_zero(ring)
        return cls.from_rows(ring, [[one if i == j else zero for j in range(n)]
                                    for i in range(n)])

    @classmethod
    def zero(cls, ring, n):
        zero = ring_zero(ring)
        return cls.from_rows(ring, [[zero] * n for _ in range(n)])

    def __add__(self, other):
        return Mat.from_rows(self.ring, [[a + b for a, b in zip(r1, r2)]
                                         for r1, r2 in zip(self.rows, other.rows)])

    def __sub__(self, other):
        return Mat.from_rows(self.ring, [[a - b for a, b in zip(r1, r2)]
                                         for r1, r2 in zip(self.rows, other.rows)])

    def __mul__(self, other):
        n = self.n
        cols = [[other.rows[k][j] for k in range(n)] for j in range(n)]
        out = []
        for r in self.rows:
            row = []
            for col in cols:
                acc = r[0] * col[0]
                for a, b in zip(r[1:], col[1:]):
                    acc = acc + a * b
                row.append(acc)
            out.append(row)
        return Mat.from_rows(self.ring, out)

    def scale(self, s):
        return Mat.from_rows(self.ring, [[s * a for a in r] for r in self.rows])

    def trace(self):
        acc = self.rows[0][0]
        for i in range(1, self.n):
            acc = acc + self.rows[i][i]
        return acc

    def det(self):
        zero = ring_zero(self.ring)
        acc = zero
        for perm in itertools.permutations(range(self.n)):
            sign = _perm_sign(perm)
            term = self.rows[0][perm[0]]
            for i in range(1, self.n):
                term = term * self.rows[i][perm[i]]
            acc = acc + term if sign > 0 else acc - term
        return acc

    def is_identity(self):
        return self == Mat.identity(self.ring, self.n)

    def inverse(self):
        """Gaussian elimination with unit pivots (valid over the local ring)."""
        n = self.n
        a = [list(r) for r in self.rows]
        inv = [list(r) for r in Mat.identity(self.ring, n).rows]
        for c in range(n):
            pr = None
            for i in range(c, n):
                if _elem_is_unit(a[i][c]):
                    pr = i
                    break
            if pr is None:
                raise Singular("matrix is not invertible")
            a[c], a[pr] = a[pr], a[c]
            inv[c], inv[pr] = inv[pr], inv[c]
            piv = a[c][c].inverse()
            a[c] = [v * piv for v in a[c]]
            inv[c] = [v * piv for v in inv[c]]
            for i in range(n):
                if i != c and not a[i][c].is_zero():
                    f = a[i][c]
                    a[i] = [x - f * y for x, y in zip(a[i], a[c])]
                    inv[i] = [x - f * y for x, y in zip(inv[i], inv[c])]
        return Mat.from_rows(self.ring, inv)

    def __pow__(self, e):
        if e < 0:
            return self.inverse() ** (-e)
        result = Mat.identity(self.ring, self.n)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def residue(self):
        return Mat.from_rows(self.ring.residue_field,
                             [[a.residue() for a in r] for r in self.rows])

    def reduce(self, m2):
        return Mat.from_rows(cr.make_witt_ring(self.ring.ell, self.ring.d, m2),
                             [[a.reduce(m2) for a in r] for r in self.rows])

    def embed(self, d_big):
        ring = (cr.make_field(self.ring.ell, d_big) if _is_field(self.ring)
                else cr.make_witt_ring(self.ring.ell, d_big, self.ring.m))
        fn = (lambda a: cr.ff_embed(a, d_big)) if _is_field(self.ring) else \
            (lambda a: cr.embed(a, d_big))
        return Mat.from_rows(ring, [[fn(a) for a in r] for r in self.rows])

    def lift_trivial(self, m):
        if _is_field(self.ring):
            ring = cr.make_witt_ring(self.ring.ell, self.ring.d, m)
            return Mat.from_rows(ring, [[cr.lift_trivial(a, m) for a in r]
                                        for r in self.rows])
        ring = cr.make_witt_ring(self.ring.ell, self.ring.d, m)
        return Mat.from_rows(ring, [[cr.WittElem(ring, tuple(c % ring.q for c in a.coeffs))
                                     for a in r] for r in self.rows])

    def entry_key(self):
        return tuple(tuple(a.sort_key() for a in r) for r in self.rows)

    def __repr__(self):
        return f"Mat({[[list(a.coeffs) for a in r] for r in self.rows]})"


def _perm_sign(perm):
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


# ---------------------------------------------------------------------------
# characteristic polynomial and eigenvalues


def char_poly(g):
    """det(xI - g) as an ascending coefficient list over g's ring."""
    ring, n = g.ring, g.n
    zero, one = ring_zero(ring), ring_one(ring)

    def padd(a, b):
        ln = max(len(a), len(b))
        return [(a[i] if i < len(a) else zero) + (b[i] if i < len(b) else zero)
                for i in range(ln)]

    def pmul(a, b):
        out = [zero] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            for j, bj in enumerate(b):
                out[i + j] = out[i + j] + ai * bj
        return out

    acc = [zero]
    for perm in itertools.permutations(range(n)):
        sign = _perm_sign(perm)
        term = [one]
        for i in range(n):
            e = g.rows[i][perm[i]]
            entry = [-e, one] if perm[i] == i else [-e]
            term = pmul(term, entry)
        if sign < 0:
            term = [-c for c in term]
        acc = padd(acc, term)
    while len(acc) < n + 1:
        acc.append(zero)
    return acc


@dataclass(frozen=True)
class Eig:
    """One eigenvalue record: residual root, extension degree over the base
    coefficient field, multiplicity, and (when available) the exact value —
    an FFElem for field input or a Hensel-lifted WittElem for Witt input."""

    residual: object
    ext_degree: int
    multiplicity: int
    value: object = None


def char_poly_eigs(g):
    """(characteristic polynomial, eigenvalue records in canonical order)."""
    cp = char_poly(g)
    field_input = _is_field(g.ring)
    if field_input:
        res_poly = list(cp)
        base_field = g.ring
    else:
        base_field = g.ring.residue_field
        res_poly = [c.residue() for c in cp]
    eigs = []
    for f, mult in cr.ff_factorize(res_poly):
        k = cr.poly_deg(f)
        if k == 1:
            rbar = -f[0]
            value = rbar if field_input else None
            if not field_input and mult == 1:
                try:
                    value = cr.hensel_root(list(cp), rbar)
                except Exception:
                    value = None
            eigs.append(Eig(rbar, 1, mult, value))
        else:
            # the factor's roots live in the degree-k extension of the base
            ext = base_field.d * k
            f_big = [cr.ff_embed(c, ext) for c in f]
            for root, _ in cr.ff_roots(f_big):
                eigs.append(Eig(root, k, mult, root if field_input else None))
    eigs.sort(key=lambda e: (e.ext_degree, e.residual.sort_key()))
    return cp, eigs


def splitting_roots(poly_ff):
    """All roots of a polynomial over F_{l^d} in its splitting field.

    Returns (field params of the splitting field, list of (root, mult))."""
    factors = cr.ff_factorize(poly_ff)
    base = poly_ff[0].params
    e = 1
    for f, _ in factors:
        k = cr.poly_deg(f)
        e = e * k // _gcd(e, k)
    ext = base.d * e
    roots = []
    for f, mult in factors:
        f_big = [cr.ff_embed(c, ext) for c in f] if e > 1 else list(f)
        for root, rmult in cr.ff_roots(f_big):
            roots.append((root, rmult * mult))
    roots.sort(key=lambda rm: rm[0].sort_key())
    return cr.make_field(base.ell, ext), roots


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


# ---------------------------------------------------------------------------
# Hensel diagonalization (2x2 over a truncated Witt ring)


def hensel_diagonalize(g):
    """(P, D) with P*D*P^{-1} = g exactly, for distinct residual eigenvalues.

    Eigenvalues are ordered by the canonical serialization of their residues,
    so the output is deterministic.
    """
    if g.n != 2:
        raise ParamMismatch("hensel_diagonalize is 2x2 only")
    cp = char_poly(g)
    res_poly = [c.residue() for c in cp]
    factors = cr.ff_factorize(res_poly)
    roots = []
    for f, mult in factors:
        if cr.poly_deg(f) > 1:
            raise EigenvaluesNotInField("residual eigenvalues not in the residue field")
        if mult > 1:
            raise RepeatedResidualEigenvalues("residual eigenvalues coincide")
        roots.append(-f[0])
    roots.sort(key=lambda r: r.sort_key())
    lams = [cr.hensel_root(list(cp), r) for r in roots]
    ring = g.ring
    cols = []
    for lam in lams:
        a = g - Mat.identity(ring, 2).scale(lam)
        row = None
        for r in a.rows:
            if r[0].is_unit() or r[1].is_unit():
                row = r
                break
        if row is None:
            raise RepeatedResidualEigenvalues("kernel has no unit direction")
        v = (row[1], -row[0])
        if v[0].is_unit():
            v = (cr.witt_one(ring), v[1] * v[0].inverse())
        else:
            v = (v[0] * v[1].inverse(), cr.witt_one(ring))
        cols.append(v)
    p = Mat.from_rows(ring, [[cols[0][0], cols[1][0]], [cols[0][1], cols[1][1]]])
    d = Mat.from_rows(ring, [[lams[0], cr.witt_zero(ring)],
                             [cr.witt_zero(ring), lams[1]]])
    if p * d * p.inverse() != g:
        raise RepeatedResidualEigenvalues("diagonalization failed to reconstruct")
    return p, d


# ---------------------------------------------------------------------------
# Jordan decomposition and the tame-relation branch test


def matrix_order(y, cap=10 ** 7):
    acc = y
    ident = Mat.identity(y.ring, y.n)
    for k in range(1, cap + 1):
        if acc == ident:
            return k
        acc = acc * y
    raise Singular("order exceeds cap (matrix not of finite order?)")


def jordan_decompose(y):
    """Multiplicative Jordan decomposition y = y_s * y_u over F_{l^d}.

    Computed from the order e = l^a * e' of y: y_s = y^(l^a * u) with
    l^a * u = 1 mod e'.
    """
    if not _elem_is_unit(y.det()):
        raise Singular("matrix is singular")
    ell = y.ring.ell
    e = matrix_order(y)
    a = 0
    e_prime = e
    while e_prime % ell == 0:
        e_prime //= ell
        a += 1
    if e_prime == 1:
        y_s = Mat.identity(y.ring, y.n)
    else:
        u = pow(ell ** a, -1, e_prime)
        y_s = y ** (ell ** a * u)
    y_u = y_s.inverse() * y
    return y_s, y_u


@dataclass(frozen=True)
class TameBranch:
    kind: str  # not_conjugate_relation | semisimple_finite_order | eigenvalue_ratio
    pair: tuple = None


def check_tame_relation(x, y, q):
    """Classify x*y*x^{-1} = y^q per the tame dichotomy.

    Either y is semisimple of finite order, or x has eigenvalues with ratio
    the image of q (computed over the splitting field of x's characteristic
    polynomial).
    """
    if q <= 1:
        raise ParamMismatch("q must be > 1")
    if not _elem_is_unit(x.det()) or not _elem_is_unit(y.det()):
        raise Singular("inputs must be invertible")
    if x * y * x.inverse() != y ** q:
        return TameBranch("not_conjugate_relation")
    field_input = _is_field(x.ring)
    y_res = y if field_input else y.residue()
    _, y_u = jordan_decompose(y_res)
    if y_u.is_identity():
        return TameBranch("semisimple_finite_order")
    cp = char_poly(x)
    res_poly = list(cp) if field_input else [c.residue() for c in cp]
    split_field, roots = splitting_roots(res_poly)
    qf = cr.ff_from_int(split_field, q)
    flat = [r for r, mult in roots for _ in range(mult)]
    for i, lam1 in enumerate(flat):
        for j, lam2 in enumerate(flat):
            if i != j and lam1 == lam2 * qf:
                return TameBranch("eigenvalue_ratio", (lam1, lam2))
    raise RuntimeError("tame dichotomy violated (unexpected)")


# ---------------------------------------------------------------------------
# split-diagonal extraction (the full-residual-image subgroup lemma)


def _residual_closure(res_mats, cap=200000):
    """BFS closure with word tracking; words are tuples of generator indices."""
    ident = Mat.identity(res_mats[0].ring, res_mats[0].n)
    seen = {ident.entry_key(): (ident, ())}
    frontier = [(ident, ())]
    while frontier:
        nxt = []
        for m, w in frontier:
            for gi, g in enumerate(res_mats):
                m2 = m * g
                k = m2.entry_key()
                if k not in seen:
                    entry = (m2, w + (gi,))
                    seen[k] = entry
                    nxt.append(entry)
                    if len(seen) > cap:
                        raise ResidualImageTooSmall("closure exceeded cap")
        frontier = nxt
    return seen


def find_split_diagonal(gens):
    """Locate a conjugate of diag(a, 1) with a Frobenius-fixed, a != +-1 mod l.

    gens generate a subgroup of GL_2(W(F_{l^d})/l^m) whose mod-l reduction
    must be all of GL_2(F_l).  Returns (C, D) with C * D * C^{-1} equal to the
    l^(m-1) power of a word in the generators, and D = diag(a, 1) exactly.
    """
    ring = gens[0].ring
    ell, m = ring.ell, ring.m
    res = [g.residue() for g in gens]
    closure = _residual_closure(res)
    target_size = (ell ** 2 - 1) * (ell ** 2 - ell)
    prime_field_only = all(
        all(all(c == 0 for c in a.coeffs[1:]) for a in row)
        for mat, _ in closure.values() for row in mat.rows)
    if len(closure) != target_size or not prime_field_only:
        raise ResidualImageTooSmall(
            f"residual image has {len(closure)} elements, need GL_2(F_{ell})")
    # first BFS element of the form diag(abar, 1) with abar not 0, +-1
    word = None
    items = sorted(closure.values(), key=lambda mw: (len(mw[1]), mw[1]))
    for mat, w in items:
        r = mat.rows
        if (r[0][1].is_zero() and r[1][0].is_zero()
                and r[1][1] == cr.ff_one(mat.ring)
                and r[0][0].coeffs[0] not in (0, 1, ell - 1)):
            word = w
            break
    if word is None:
        raise ResidualImageTooSmall("no split residual diagonal found")
    g = Mat.identity(ring, 2)
    for gi in word:
        g = g * gens[gi]
    p, d = hensel_diagonalize(g)
    power = ell ** (m - 1)
    lam = [d.rows[0][0] ** power, d.rows[1][1] ** power]
    one = cr.witt_one(ring)
    if lam[1] != one:
        lam = [lam[1], lam[0]]
        # swap the eigenbasis columns to match
        p = Mat.from_rows(ring, [[p.rows[0][1], p.rows[0][0]],
                                 [p.rows[1][1], p.rows[1][0]]])
    assert lam[1] == one
    a = lam[0]
    assert cr.in_subring(a, 1)
    dd = Mat.from_rows(ring, [[a, cr.witt_zero(ring)], [cr.witt_zero(ring), one]])
    return p, dd


def root_of_unity_bound(ring):
    """The valuation threshold from the one-unit root-of-unity lemma.

    In an unramified truncation only l has positive valuation, so the bound
    is v(l) = 1: any root of unity congruent to 1 mod l^2 is 1.
    """
    return 1


# ---------------------------------------------------------------------------
# fraction-field elements and the integral-model algorithms


@dataclass(frozen=True)
class KElem:
    """num / l^den over the fraction field of a working-precision Witt ring.

    num is None for the exact zero.  Relative precision is num's precision
    minus den; the guard in effective_valuation keeps ambiguity visible.
    """

    ring: object
    num: object
    den: int

    @classmethod
    def zero(cls, ring):
        return cls(ring, None, 0)

    @classmethod
    def from_witt(cls, x, den=0):
        return cls(x.ring, x, den)

    @classmethod
    def from_int_pair(cls, ring, numerator, den=0):
        if numerator == 0:
            return cls.zero(ring)
        return cls(ring, cr.witt_from_int(ring, numerator), den)

    def is_exact_zero(self):
        return self.num is None

    def valuation(self):
        if self.num is None:
            return _INF
        return self.num.valuation() - self.den

    def __add__(self, other):
        if self.num is None:
            return other
        if other.num is None:
            return self
        den = max(self.den, other.den)
        ell = self.ring.ell
        a = cr.witt_scale(self.num, ell ** (den - self.den))
        b = cr.witt_scale(other.num, ell ** (den - other.den))
        s = a + b
        return KElem(self.ring, s, den)

    def __neg__(self):
        if self.num is None:
            return self
        return KElem(self.ring, -self.num, self.den)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if self.num is None or other.num is None:
            return KElem.zero(self.ring)
        return KElem(self.ring, self.num * other.num, self.den + other.den)

    def inverse(self):
        if self.num is None:
            raise Singular("division by zero")
        v = self.num.valuation()
        if v >= self.ring.m:
            raise PrecisionExhausted("cannot invert an (effectively) zero element")
        ell = self.ring.ell
        unit = cr.WittElem(self.ring,
                           tuple((c // ell ** v) % self.ring.q for c in self.num.coeffs))
        inv_unit = unit.inverse()
        # value = l^den / (l^v * unit)
        if self.den >= v:
            return KElem(self.ring, cr.witt_scale(inv_unit, ell ** (self.den - v)), 0)
        return KElem(self.ring, inv_unit, v - self.den)

    def __truediv__(self, other):
        return self * other.inverse()

    def key(self):
        if self.num is None:
            return ("zero",)
        v = min(self.num.valuation(), self.den)
        ell = self.ring.ell
        num = cr.WittElem(self.ring,
                          tuple((c // ell ** v) % self.ring.q for c in self.num.coeffs)) \
            if v else self.num
        return (num.coeffs, self.den - v)

    def __repr__(self):
        if self.num is None:
            return "K(0)"
        return f"K({list(self.num.coeffs)}/{self.ring.ell}^{self.den})"


def kelem_from_rational(ring, numerator, denominator=1):
    """Build a KElem from an integer pair; the denominator must be a power of l."""
    ell = ring.ell
    if denominator < 0:
        numerator, denominator = -numerator, -denominator
    den = 0
    while denominator > 1 and denominator % ell == 0:
        denominator //= ell
        den += 1
    if denominator != 1:
        raise ParamMismatch("denominator must be a power of l")
    if numerator == 0:
        return KElem.zero(ring)
    return KElem(ring, cr.witt_from_int(ring, numerator), den)


def _effectively_zero(x, guard):
    return x.is_exact_zero() or x.valuation() >= guard


def module_basis(gens, expect_span=True, guard=None):
    """A V-basis of the module generated by gens (vectors of KElem).

    Implements the minimal-valuation elimination: the generator whose entry
    has the smallest valuation becomes a pivot, and every other generator's
    entry in that row is cleared by subtracting an integral multiple.
    """
    if not gens:
        raise DoesNotSpan("no generators")
    ring = None
    for v in gens:
        for x in v:
            if x.num is not None:
                ring = x.ring
                break
        if ring:
            break
    if ring is None:
        raise DoesNotSpan("all generators are zero")
    if guard is None:
        guard = ring.m - 6
    n = len(gens[0])
    cols = [list(v) for v in gens]
    remaining = list(range(n))
    basis = []
    while cols and remaining:
        best = None
        for j, col in enumerate(cols):
            for i in remaining:
                x = col[i]
                if _effectively_zero(x, guard):
                    continue
                v = x.valuation()
                if best is None or v < best[0]:
                    best = (v, j, i)
        if best is None:
            break
        _, j, i = best
        pivot = cols.pop(j)
        inv = pivot[i].inverse()
        for col in cols:
            if not _effectively_zero(col[i], guard):
                f = col[i] * inv
                for r in range(n):
                    col[r] = col[r] - f * pivot[r]
            col[i] = KElem.zero(ring)
        basis.append((i, pivot))
        remaining.remove(i)
    if remaining and expect_span:
        raise DoesNotSpan(f"generators span a module of rank {len(basis)} < {n}")
    for col in cols:
        for i in remaining:
            if not _effectively_zero(col[i], guard):
                raise PrecisionExhausted("leftover mass below pivot threshold")
    basis.sort(key=lambda p: p[0])
    return [tuple(v) for _, v in basis]


def _ksolve(columns, target, guard):
    """Solve sum x_j * columns[j] = target by the same pivoting; returns x."""
    n = len(target)
    k = len(columns)
    a = [[columns[j][i] for j in range(k)] for i in range(n)]
    b = list(target)
    row_used = []
    sol = [None] * k
    rows_left = list(range(n))
    cols_left = list(range(k))
    while cols_left and rows_left:
        best = None
        for j in cols_left:
            for i in rows_left:
                if _effectively_zero(a[i][j], guard):
                    continue
                v = a[i][j].valuation()
                if best is None or v < best[0]:
                    best = (v, i, j)
        if best is None:
            break
        _, pi, pj = best
        inv = a[pi][pj].inverse()
        for i in rows_left:
            if i == pi or _effectively_zero(a[i][pj], guard):
                continue
            f = a[i][pj] * inv
            for j in cols_left:
                a[i][j] = a[i][j] - f * a[pi][j]
            b[i] = b[i] - f * b[pi]
        row_used.append((pi, pj))
        rows_left.remove(pi)
        cols_left.remove(pj)
    for i in rows_left:
        if not _effectively_zero(b[i], guard):
            return None
    zero = KElem.zero(target[0].ring)
    for j in cols_left:
        sol[j] = zero
    for pi, pj in reversed(row_used):
        acc = b[pi]
        for j in range(k):
            if j != pj and sol[j] is not None and not _effectively_zero(a[pi][j], guard):
                acc = acc - a[pi][j] * sol[j]
        sol[pj] = acc * a[pi][pj].inverse()
    return sol


def integral_model(gens, max_iter=50, den_budget=None):
    """Conjugator P with P^{-1} g P integral for all generator matrices g.

    Saturates M <- sum_j (V^n + g_j M) from the standard lattice; the basis
    columns of the stable lattice form P.  Raises UnboundedGroup when the
    saturation fails to stabilize within the iteration or denominator budget.
    """
    n = len(gens[0])
    ring = None
    for g in gens:
        for row in g:
            for x in row:
                if x.num is not None:
                    ring = x.ring
    if ring is None:
        raise ParamMismatch("zero generators")
    guard = ring.m - 6
    if den_budget is None:
        den_budget = ring.m // 3

    def matvec(g, v):
        out = []
        for i in range(n):
            acc = KElem.zero(ring)
            for j in range(n):
                acc = acc + g[i][j] * v[j]
            out.append(acc)
        return tuple(out)

    def mat_inverse(g):
        cols = [tuple(g[i][j] for i in range(n)) for j in range(n)]
        inv_cols = []
        for b in range(n):
            target = tuple(KElem.from_int_pair(ring, 1 if i == b else 0)
                           for i in range(n))
            sol = _ksolve(cols, target, guard)
            if sol is None:
                raise Singular("generator not invertible")
            inv_cols.append(sol)
        return [[inv_cols[j][i] for j in range(n)] for i in range(n)]

    all_gens = list(gens) + [mat_inverse(g) for g in gens]
    basis = [tuple(KElem.from_int_pair(ring, 1 if i == j else 0) for i in range(n))
             for j in range(n)]
    for _ in range(max_iter):
        candidates = list(basis)
        candidates += [tuple(KElem.from_int_pair(ring, 1 if i == j else 0)
                             for i in range(n)) for j in range(n)]
        for g in all_gens:
            candidates += [matvec(g, b) for b in basis]
        for v in candidates:
            for x in v:
                if x.num is not None and x.den - x.num.valuation() > den_budget:
                    raise UnboundedGroup("denominators keep growing")
        new_basis = module_basis(candidates, expect_span=True, guard=guard)
        old_cols = [tuple(b) for b in basis]
        stable = True
        for v in new_basis:
            sol = _ksolve(old_cols, v, guard)
            if sol is None or any((not x.is_exact_zero()) and x.valuation() < 0
                                  for x in sol):
                stable = False
                break
        if stable:
            p_rows = [[new_basis[j][i] for j in range(n)] for i in range(n)]
            p_inv = mat_inverse(p_rows)
            for g in gens:
                conj = _kmatmul(_kmatmul(p_inv, g, ring), p_rows, ring)
                for row in conj:
                    for x in row:
                        if not x.is_exact_zero() and x.valuation() < 0:
                            raise UnboundedGroup("conjugated generator not integral")
            return p_rows
        basis = new_basis
    raise UnboundedGroup(f"saturation did not stabilize in {max_iter} iterations")


def _kmatmul(a, b, ring):
    n = len(a)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = KElem.zero(ring)
            for k in range(n):
                acc = acc + a[i][k] * b[k][j]
            row.append(acc)
        out.append(row)
    return out
