"""Finite-level tube measures and Frobenius statistics.

The measure of {gamma : v(f(gamma)) > alpha} inside GL_n(Z/l^m) (or a
generated subgroup) is computed as an exact counting fraction by full
enumeration, or as a seeded unbiased estimate above a size threshold.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import coeffring as cr
from .errors import AlphaExceedsPrecision, NotConjugationInvariant, ParamMismatch
from .galois_model import evaluate_word
from .matlin import Mat

ENUM_LIMIT = 10 ** 7


@dataclass(frozen=True)
class Monomial:
    coeff: int
    exps: tuple  # one exponent per matrix entry, row-major


@dataclass(frozen=True)
class TubeQuery:
    """A tube {gamma : v(f(gamma)) > alpha} at level m."""

    ell: int
    n: int
    m: int
    alpha: int
    monomials: tuple  # of Monomial
    generators: tuple = ()  # empty = full GL_n(Z/l^m); else integer matrices

    def __post_init__(self):
        if self.alpha > self.m or self.alpha < 0:
            raise AlphaExceedsPrecision(
                f"alpha = {self.alpha} outside 0..{self.m}")
        for mono in self.monomials:
            if len(mono.exps) != self.n * self.n:
                raise ParamMismatch("monomial arity != n^2")


def det_minus_one_query(ell, m, alpha):
    """The 2x2 query f = det - 1 over the full GL_2(Z/l^m)."""
    return TubeQuery(ell, 2, m, alpha, (
        Monomial(1, (1, 0, 0, 1)),
        Monomial(-1, (0, 1, 1, 0)),
        Monomial(-1, (0, 0, 0, 0)),
    ))


def _poly_eval_rows(query, rows, modulus):
    """Evaluate the polynomial on an (N, n^2) integer array, mod modulus."""
    acc = np.zeros(len(rows), dtype=np.int64)
    for mono in query.monomials:
        term = np.full(len(rows), mono.coeff % modulus, dtype=np.int64)
        for j, e in enumerate(mono.exps):
            for _ in range(e):
                term = term * rows[:, j] % modulus
        acc = (acc + term) % modulus
    return acc


def _det_unit_mask(query, rows, ell):
    n = query.n
    mats = rows.reshape(len(rows), n, n)
    if n == 1:
        dets = mats[:, 0, 0]
    elif n == 2:
        dets = mats[:, 0, 0] * mats[:, 1, 1] - mats[:, 0, 1] * mats[:, 1, 0]
    elif n == 3:
        dets = (mats[:, 0, 0] * (mats[:, 1, 1] * mats[:, 2, 2]
                                 - mats[:, 1, 2] * mats[:, 2, 1])
                - mats[:, 0, 1] * (mats[:, 1, 0] * mats[:, 2, 2]
                                   - mats[:, 1, 2] * mats[:, 2, 0])
                + mats[:, 0, 2] * (mats[:, 1, 0] * mats[:, 2, 1]
                                   - mats[:, 1, 1] * mats[:, 2, 0]))
    else:
        raise ParamMismatch("tube queries support n <= 3")
    return dets % ell != 0


def _enumerate_full(query):
    ell, n, m = query.ell, query.n, query.m
    modulus = ell ** m
    total = modulus ** (n * n)
    if total > ENUM_LIMIT:
        return None
    grids = np.meshgrid(*([np.arange(modulus)] * (n * n)), indexing="ij")
    rows = np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)
    return rows[_det_unit_mask(query, rows, ell)]


def _enumerate_subgroup(query):
    ell, n, m = query.ell, query.n, query.m
    modulus = ell ** m
    ring = cr.make_witt_ring(ell, 1, m)
    gens = [Mat.from_ints(ring, g) for g in query.generators]
    ident = Mat.identity(ring, n)
    seen = {ident.entry_key(): ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = x * g
                k = y.entry_key()
                if k not in seen:
                    if len(seen) >= ENUM_LIMIT:
                        raise ParamMismatch("subgroup closure exceeds the "
                                            "enumeration limit")
                    seen[k] = y
                    nxt.append(y)
        frontier = nxt
    rows = np.array([[mat.rows[i][j].coeffs[0] for i in range(n)
                      for j in range(n)] for mat in seen.values()],
                    dtype=np.int64) % modulus
    return rows


@dataclass(frozen=True)
class TubeResult:
    fraction: Fraction
    exact: bool
    population: int
    sample_count: int = 0
    std_error: float = 0.0
    seed: int = 0


def tube_measure(query, seed=0, sample_count=200000):
    """Exact fraction by enumeration, or a seeded estimate when too large."""
    ell, m, alpha = query.ell, query.m, query.alpha
    modulus = ell ** m
    if query.generators:
        rows = _enumerate_subgroup(query)
    else:
        rows = _enumerate_full(query)
    if rows is not None:
        vals = _poly_eval_rows(query, rows, modulus)
        if alpha >= m:
            hits = 0
        else:
            hits = int(np.count_nonzero(vals % ell ** (alpha + 1) == 0))
        return TubeResult(Fraction(hits, len(rows)), True, len(rows))
    # sampled path (full group too large to enumerate)
    rng = random.Random(seed)
    n = query.n
    hits = 0
    got = 0
    batch = 5000
    while got < sample_count:
        take = min(batch, sample_count - got)
        cand = np.array([[rng.randrange(modulus) for _ in range(n * n)]
                         for _ in range(take)], dtype=np.int64)
        mask = _det_unit_mask(query, cand, ell)
        cand = cand[mask]
        vals = _poly_eval_rows(query, cand, modulus)
        if alpha < m:
            hits += int(np.count_nonzero(vals % ell ** (alpha + 1) == 0))
        got += len(cand)
    p = hits / got if got else 0.0
    se = (p * (1 - p) / got) ** 0.5 if got else 0.0
    return TubeResult(Fraction(hits, got), False, 0, got, se, seed)


# ---------------------------------------------------------------------------
# Frobenius scan over a deformation's places


def _eval_poly_witt(monomials, mat):
    ring = mat.ring
    entries = [mat.rows[i][j] for i in range(mat.n) for j in range(mat.n)]
    acc = cr.witt_zero(ring)
    for mono in monomials:
        term = cr.witt_from_int(ring, mono.coeff)
        for x, e in zip(entries, mono.exps):
            for _ in range(e):
                term = term * x
        acc = acc + term
    return acc


def _check_conjugation_invariant(monomials, ring, n, rng):
    for _ in range(20):
        g = Mat.from_rows(ring, [[cr.WittElem(ring, tuple(
            rng.randrange(ring.q) for _ in range(ring.d)))
            for _ in range(n)] for _ in range(n)])
        if not g.det().is_unit():
            continue
        h = Mat.from_rows(ring, [[cr.WittElem(ring, tuple(
            rng.randrange(ring.q) for _ in range(ring.d)))
            for _ in range(n)] for _ in range(n)])
        if not h.det().is_unit():
            continue
        if _eval_poly_witt(monomials, g) != \
                _eval_poly_witt(monomials, h * g * h.inverse()):
            raise NotConjugationInvariant(
                "polynomial is not invariant under conjugation")


def frobenius_scan(rho, places, monomials, alpha, seed=0):
    """Fraction of places with v(f(rho(sigma_v))) > alpha, exactly."""
    ring = rho.ring
    if alpha > ring.m or alpha < 0:
        raise AlphaExceedsPrecision(f"alpha = {alpha} outside 0..{ring.m}")
    rng = random.Random(seed)
    _check_conjugation_invariant(monomials, ring, 2, rng)
    hits = 0
    per_place = []
    for place in places:
        val = _eval_poly_witt(monomials, evaluate_word(rho, place.sigma))
        v = val.valuation()
        per_place.append((place.label, v))
        if v > alpha:
            hits += 1
    return Fraction(hits, len(places)) if places else Fraction(0), per_place
