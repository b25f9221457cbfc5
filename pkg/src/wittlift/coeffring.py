"""Exact arithmetic in F_{l^d} and in truncated unramified Witt rings W(F_{l^d})/l^m.

The Witt ring W(F_{l^d})/l^m is realized as (Z/l^m)[x]/(f~) where f~ is the
coefficient-wise trivial lift of the monic irreducible modulus f of F_{l^d}.
Elements of both rings are stored as length-d coefficient tuples (ascending
powers of the class of x).  All values are immutable; the module-level caches
(Frobenius generator images, embedding roots) are write-once and idempotent.

Canonical text form of a Witt element: ``l^m:d:[c0,...,c_{d-1}]``.
"""

from __future__ import annotations

import functools
import random
import re
from dataclasses import dataclass

from .errors import (
    EllTooSmall,
    NonDivisibleDegrees,
    NotASimpleRoot,
    NotPrime,
    ParamMismatch,
    ZeroInverse,
    ZeroPolynomial,
)

_FACTOR_SEED = 0x5EED  # fixed seed: equal-degree splitting stays reproducible


def _is_prime(n):
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31):
        if n % p == 0:
            return n == p
    k, f = n - 1, 0
    while k % 2 == 0:
        k //= 2
        f += 1
    for a in (2, 3, 5, 7, 11, 13, 17):
        x = pow(a, k, n)
        if x in (1, n - 1):
            continue
        for _ in range(f - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


# ---------------------------------------------------------------------------
# ring parameter types


@dataclass(frozen=True)
class FieldParams:
    """The finite field F_{l^d} with a fixed monic irreducible modulus."""

    ell: int
    d: int
    modulus: tuple  # length d+1, ascending, leading coefficient 1

    @property
    def order(self):
        return self.ell ** self.d

    def __repr__(self):
        return f"GF({self.ell}^{self.d})"


@dataclass(frozen=True)
class WittRingParams:
    """W(F_{l^d})/l^m as (Z/l^m)[x]/(trivial lift of the field modulus)."""

    ell: int
    d: int
    m: int
    lifted_modulus: tuple

    @property
    def q(self):
        return self.ell ** self.m

    @property
    def residue_field(self):
        return make_field(self.ell, self.d)

    def __repr__(self):
        return f"W(GF({self.ell}^{self.d}))/{self.ell}^{self.m}"


def _poly_mulmod(a, b, modulus, q):
    """Product of two coefficient tuples of length d, reduced mod (modulus, q)."""
    d = len(modulus) - 1
    prod = [0] * (2 * d - 1) if d > 1 else [0]
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % q
    # monic modulus: x^d == -(lower part)
    for i in range(len(prod) - 1, d - 1, -1):
        c = prod[i]
        if c:
            prod[i] = 0
            for j in range(d):
                prod[i - d + j] = (prod[i - d + j] - c * modulus[j]) % q
    return tuple(prod[:d])


def _int_poly_is_irreducible(coeffs, ell):
    """Irreducibility of a monic integer-coefficient polynomial over F_ell.

    Uses the x^(ell^k) fixed-point criterion: f of degree d is irreducible
    iff x^(ell^d) == x mod f and gcd-degree checks pass at every prime k | d.
    """
    d = len(coeffs) - 1
    if d == 1:
        return True

    def powmod_x(e):
        # x^e mod (f, ell), square and multiply on coefficient tuples
        result = (1,) + (0,) * (d - 1)
        base = (0, 1) + (0,) * (d - 2)
        while e:
            if e & 1:
                result = _poly_mulmod(result, base, coeffs, ell)
            base = _poly_mulmod(base, base, coeffs, ell)
            e >>= 1
        return result

    x_cls = (0, 1) + (0,) * (d - 2)
    if powmod_x(ell ** d) != x_cls:
        return False
    primes = set()
    k = d
    p = 2
    while p * p <= k:
        while k % p == 0:
            primes.add(p)
            k //= p
        p += 1
    if k > 1:
        primes.add(k)
    for p in primes:
        h = powmod_x(ell ** (d // p))
        diff = tuple((hi - xi) % ell for hi, xi in zip(h, x_cls))
        # gcd(h - x, f) must be 1
        if _int_poly_gcd_is_one(diff, coeffs, ell) is False:
            return False
    return True


def _int_poly_gcd_is_one(a, f, ell):
    """True iff gcd(a, f) = 1 over F_ell (a given as tuple, f monic)."""
    a = list(a)
    b = list(f)

    def deg(p):
        for i in range(len(p) - 1, -1, -1):
            if p[i] % ell:
                return i
        return -1

    while True:
        da, db = deg(a), deg(b)
        if db == -1:
            return da == 0
        if da < db:
            a, b = b, a
            continue
        inv = pow(b[deg(b)], -1, ell)
        shift = da - db
        c = a[da] * inv % ell
        for i in range(db + 1):
            a[i + shift] = (a[i + shift] - c * b[i]) % ell


@functools.lru_cache(maxsize=None)
def make_field(ell, d):
    """Field parameters for F_{l^d} with the smallest monic irreducible modulus.

    The search enumerates the non-leading coefficient tuple as base-l digits of
    0, 1, 2, ... (least significant digit = constant term), so the choice is
    deterministic.
    """
    if not _is_prime(ell):
        raise NotPrime(f"{ell} is not prime")
    if ell <= 3:
        raise EllTooSmall(f"ell must be >= 5, got {ell}")
    if d < 1:
        raise ParamMismatch("extension degree must be >= 1")
    for k in range(ell ** d):
        coeffs = []
        kk = k
        for _ in range(d):
            coeffs.append(kk % ell)
            kk //= ell
        coeffs.append(1)
        if d == 1 or (coeffs[0] != 0 and _int_poly_is_irreducible(tuple(coeffs), ell)):
            return FieldParams(ell, d, tuple(coeffs))
    raise RuntimeError("no irreducible modulus found")  # unreachable


@functools.lru_cache(maxsize=None)
def make_witt_ring(ell, d, m):
    """W(F_{l^d})/l^m with the trivial lift of make_field's modulus."""
    if m < 1:
        raise ParamMismatch("precision level must be >= 1")
    fp = make_field(ell, d)
    return WittRingParams(ell, d, m, fp.modulus)


# ---------------------------------------------------------------------------
# elements


@dataclass(frozen=True)
class FFElem:
    """Element of F_{l^d}, stored as a length-d coefficient tuple."""

    params: FieldParams
    coeffs: tuple

    def _check(self, other):
        if self.params != other.params:
            raise ParamMismatch(f"{self.params} vs {other.params}")

    def __add__(self, other):
        self._check(other)
        p = self.params.ell
        return FFElem(self.params, tuple((a + b) % p for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other):
        self._check(other)
        p = self.params.ell
        return FFElem(self.params, tuple((a - b) % p for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self):
        p = self.params.ell
        return FFElem(self.params, tuple(-a % p for a in self.coeffs))

    def __mul__(self, other):
        self._check(other)
        return FFElem(
            self.params,
            _poly_mulmod(self.coeffs, other.coeffs, self.params.modulus, self.params.ell),
        )

    def __pow__(self, e):
        if e < 0:
            return self.inverse() ** (-e)
        result = ff_one(self.params)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def inverse(self):
        if self.is_zero():
            raise ZeroInverse("0 has no inverse")
        # a^(q-2) avoids an extended-gcd code path; q is small here
        return self ** (self.params.order - 2)

    def __truediv__(self, other):
        return self * other.inverse()

    def is_zero(self):
        return all(c == 0 for c in self.coeffs)

    def sort_key(self):
        return self.coeffs

    def __repr__(self):
        return f"ff({list(self.coeffs)})"


def ff_zero(params):
    return FFElem(params, (0,) * params.d)


def ff_one(params):
    return FFElem(params, (1,) + (0,) * (params.d - 1))


def ff_from_int(params, k):
    return FFElem(params, (k % params.ell,) + (0,) * (params.d - 1))


def ff_gen(params):
    """Class of x (equals the constant -c0 when d = 1)."""
    if params.d == 1:
        return FFElem(params, (-params.modulus[0] % params.ell,))
    return FFElem(params, (0, 1) + (0,) * (params.d - 2))


def ff_elements(params):
    """All elements, in serialization order."""
    ell, d = params.ell, params.d
    for k in range(ell ** d):
        coeffs = []
        kk = k
        for _ in range(d):
            coeffs.append(kk % ell)
            kk //= ell
        yield FFElem(params, tuple(coeffs))


@dataclass(frozen=True)
class WittElem:
    """Element of W(F_{l^d})/l^m, stored as a length-d coefficient tuple mod l^m."""

    ring: WittRingParams
    coeffs: tuple

    def _check(self, other):
        if self.ring != other.ring:
            raise ParamMismatch(f"{self.ring} vs {other.ring}")

    def __add__(self, other):
        self._check(other)
        q = self.ring.q
        return WittElem(self.ring, tuple((a + b) % q for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other):
        self._check(other)
        q = self.ring.q
        return WittElem(self.ring, tuple((a - b) % q for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self):
        q = self.ring.q
        return WittElem(self.ring, tuple(-a % q for a in self.coeffs))

    def __mul__(self, other):
        self._check(other)
        return WittElem(
            self.ring,
            _poly_mulmod(self.coeffs, other.coeffs, self.ring.lifted_modulus, self.ring.q),
        )

    def __pow__(self, e):
        if e < 0:
            return self.inverse() ** (-e)
        result = witt_one(self.ring)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def inverse(self):
        """Inverse of a unit, by residual inversion plus Newton lifting."""
        if not self.is_unit():
            raise ZeroInverse("not a unit")
        y = lift_trivial(self.residue().inverse(), self.ring.m)
        two = witt_from_int(self.ring, 2)
        # y <- y(2 - xy) doubles the number of correct l-adic digits
        k = 1
        while k < self.ring.m:
            y = y * (two - self * y)
            k *= 2
        return y

    def __truediv__(self, other):
        return self * other.inverse()

    def is_zero(self):
        return all(c == 0 for c in self.coeffs)

    def is_unit(self):
        return not self.residue().is_zero()

    def valuation(self):
        """min_i v_l(c_i), saturated at m for the zero element."""
        ell, m = self.ring.ell, self.ring.m
        best = m
        for c in self.coeffs:
            if c:
                v = 0
                while c % ell == 0:
                    c //= ell
                    v += 1
                best = min(best, v)
        return best

    def residue(self):
        fp = self.ring.residue_field
        return FFElem(fp, tuple(c % self.ring.ell for c in self.coeffs))

    def reduce(self, m2):
        """Reduction to precision m2 <= m (a ring map)."""
        if m2 > self.ring.m:
            raise ParamMismatch("cannot reduce to higher precision")
        ring2 = make_witt_ring(self.ring.ell, self.ring.d, m2)
        q2 = ring2.q
        return WittElem(ring2, tuple(c % q2 for c in self.coeffs))

    def sort_key(self):
        return self.coeffs

    def __repr__(self):
        return witt_to_str(self)


def witt_zero(ring):
    return WittElem(ring, (0,) * ring.d)


def witt_one(ring):
    return WittElem(ring, (1,) + (0,) * (ring.d - 1))


def witt_from_int(ring, k):
    return WittElem(ring, (k % ring.q,) + (0,) * (ring.d - 1))


def witt_gen(ring):
    if ring.d == 1:
        return WittElem(ring, (-ring.lifted_modulus[0] % ring.q,))
    return WittElem(ring, (0, 1) + (0,) * (ring.d - 2))


def witt_elements(ring):
    q, d = ring.q, ring.d
    for k in range(q ** d):
        coeffs = []
        kk = k
        for _ in range(d):
            coeffs.append(kk % q)
            kk //= q
        yield WittElem(ring, tuple(coeffs))


def lift_trivial(a, m):
    """The coefficient-wise (non-multiplicative) lift F_{l^d} -> W(F_{l^d})/l^m."""
    ring = make_witt_ring(a.params.ell, a.params.d, m)
    return WittElem(ring, a.coeffs)


def witt_scale(x, k):
    """x * k for an integer k (avoids building witt_from_int repeatedly)."""
    q = x.ring.q
    return WittElem(x.ring, tuple(c * k % q for c in x.coeffs))


# ---------------------------------------------------------------------------
# serialization


_WITT_RE = re.compile(r"^(\d+)\^(\d+):(\d+):\[([-\d,\s]*)\]$")


def witt_to_str(x):
    return f"{x.ring.ell}^{x.ring.m}:{x.ring.d}:[{','.join(str(c) for c in x.coeffs)}]"


def witt_from_str(s):
    mo = _WITT_RE.match(s.strip())
    if not mo:
        raise ParamMismatch(f"bad witt element literal: {s!r}")
    ell, m, d = int(mo.group(1)), int(mo.group(2)), int(mo.group(3))
    body = mo.group(4).strip()
    coeffs = tuple(int(t) for t in body.split(",")) if body else ()
    if len(coeffs) != d:
        raise ParamMismatch(f"expected {d} coefficients in {s!r}")
    ring = make_witt_ring(ell, d, m)
    return WittElem(ring, tuple(c % ring.q for c in coeffs))


# ---------------------------------------------------------------------------
# Teichmuller lift and Frobenius


def teichmuller(a, m):
    """The unique multiplicative lift of a to W(F_{l^d})/l^m (x^{l^d} = x)."""
    if m < 1:
        raise ParamMismatch("precision must be >= 1")
    y = lift_trivial(a, m)
    e = a.params.order
    for _ in range(m - 1):
        y2 = y ** e
        if y2 == y:
            break
        y = y2
    return y


_FROB_CACHE = {}


def _frobenius_gen_powers(ring):
    """Powers 1, g, g^2, ... of the Frobenius image g of the ring generator."""
    cached = _FROB_CACHE.get(ring)
    if cached is not None:
        return cached
    if ring.d == 1:
        powers = None  # Frobenius is the identity
    else:
        # residual image of the generator under a -> a^l, Hensel-lifted to a
        # root of the lifted modulus
        fp = ring.residue_field
        gbar = ff_gen(fp) ** ring.ell
        poly = [witt_from_int(ring, c) for c in ring.lifted_modulus]
        g = hensel_root(poly, gbar)
        powers = [witt_one(ring)]
        for _ in range(ring.d - 1):
            powers.append(powers[-1] * g)
    _FROB_CACHE[ring] = powers
    return powers


def witt_frobenius(x):
    """The canonical Frobenius lift; reduces to a -> a^l, has order dividing d."""
    powers = _frobenius_gen_powers(x.ring)
    if powers is None:
        return x
    acc = witt_zero(x.ring)
    for c, p in zip(x.coeffs, powers):
        acc = acc + witt_scale(p, c)
    return acc


def witt_frobenius_power(x, k):
    k %= x.ring.d
    for _ in range(k):
        x = witt_frobenius(x)
    return x


def ff_frobenius(a, k=1):
    return a ** (a.params.ell ** (k % a.params.d if a.params.d else 1))


# ---------------------------------------------------------------------------
# Hensel's lemma


def hensel_root(poly, rbar):
    """Unique root of poly congruent to the simple residual root rbar.

    poly is an ascending list of WittElem; rbar an FFElem with poly(rbar) = 0
    and poly'(rbar) != 0 residually.  Newton iteration in exact arithmetic.
    """
    ring = poly[0].ring
    m = ring.m

    def ev(p, t):
        acc = witt_zero(ring)
        for c in reversed(p):
            acc = acc * t + c
        return acc

    deriv = [witt_scale(c, i) for i, c in enumerate(poly)][1:]
    r = lift_trivial(rbar, m)
    if not ev(poly, r).residue().is_zero():
        raise NotASimpleRoot("residual value is nonzero")
    d0 = ev(deriv, r)
    if not d0.is_unit():
        raise NotASimpleRoot("residual derivative vanishes")
    for _ in range(m + 1):
        fr = ev(poly, r)
        if fr.is_zero():
            break
        r = r - fr * ev(deriv, r).inverse()
    return r


# ---------------------------------------------------------------------------
# polynomial arithmetic over F_{l^d} (lists of FFElem, ascending)


def poly_trim(p):
    while p and p[-1].is_zero():
        p = p[:-1]
    return p


def poly_deg(p):
    return len(p) - 1


def poly_add(a, b):
    params = (a or b)[0].params
    n = max(len(a), len(b))
    z = ff_zero(params)
    out = []
    for i in range(n):
        x = a[i] if i < len(a) else z
        y = b[i] if i < len(b) else z
        out.append(x + y)
    return poly_trim(out)


def poly_sub(a, b):
    return poly_add(a, [-c for c in b])


def poly_mul(a, b):
    if not a or not b:
        return []
    params = a[0].params
    out = [ff_zero(params) for _ in range(len(a) + len(b) - 1)]
    for i, ai in enumerate(a):
        if ai.is_zero():
            continue
        for j, bj in enumerate(b):
            out[i + j] = out[i + j] + ai * bj
    return poly_trim(out)


def poly_divmod(a, b):
    b = poly_trim(list(b))
    if not b:
        raise ZeroPolynomial("division by zero polynomial")
    a = list(poly_trim(list(a)))
    params = b[0].params
    inv_lead = b[-1].inverse()
    quot = [ff_zero(params)] * max(0, len(a) - len(b) + 1)
    while len(a) >= len(b):
        c = a[-1] * inv_lead
        shift = len(a) - len(b)
        quot[shift] = c
        for i in range(len(b)):
            a[shift + i] = a[shift + i] - c * b[i]
        a = list(poly_trim(a))
        if not a:
            break
    return poly_trim(quot), a


def poly_mod(a, b):
    return poly_divmod(a, b)[1]


def poly_gcd(a, b):
    a, b = poly_trim(list(a)), poly_trim(list(b))
    while b:
        a, b = b, poly_mod(a, b)
    if a:
        inv = a[-1].inverse()
        a = [c * inv for c in a]
    return a

def poly_monic(a):
    a = poly_trim(list(a))
    if not a:
        return a
    inv = a[-1].inverse()
    return [c * inv for c in a]


def poly_powmod(base, e, mod):
    params = mod[0].params
    result = [ff_one(params)]
    base = poly_mod(base, mod)
    while e:
        if e & 1:
            result = poly_mod(poly_mul(result, base), mod)
        base = poly_mod(poly_mul(base, base), mod)
        e >>= 1
    return result


def poly_deriv(a):
    params = a[0].params
    out = []
    for i in range(1, len(a)):
        c = ff_zero(params)
        for _ in range(i % params.ell):
            c = c + a[i]
        out.append(c)
    return poly_trim(out)


def poly_eval(a, t):
    acc = ff_zero(t.params)
    for c in reversed(a):
        acc = acc * t + c
    return acc


def _poly_sort_key(p):
    return (poly_deg(p), tuple(c.sort_key() for c in p))


def ff_factorize(poly):
    """Factor a polynomial over F_{l^d} into monic irreducibles.

    Returns a list of (factor, multiplicity) pairs in canonical order
    (degree, then lexicographic on coefficient serialization).  The product of
    the factors equals the input up to the leading unit.
    """
    poly = poly_trim(list(poly))
    if not poly:
        raise ZeroPolynomial("cannot factor the zero polynomial")
    params = poly[0].params
    rng = random.Random(_FACTOR_SEED)
    factors = {}

    def add(f, mult):
        key = tuple(c.coeffs for c in f)
        if key in factors:
            factors[key] = (f, factors[key][1] + mult)
        else:
            factors[key] = (f, mult)

    yield_list = []

    def collect_squarefree(f, outer_mult):
        f = poly_monic(f)
        if poly_deg(f) == 0:
            return
        df = poly_deriv(f)
        if not df:
            ell = params.ell
            root_exp = params.order // ell
            g = [f[i * ell] ** root_exp for i in range(poly_deg(f) // ell + 1)]
            collect_squarefree(g, outer_mult * ell)
            return
        c = poly_gcd(f, df)
        w = poly_divmod(f, c)[0]
        mult = 1
        while poly_deg(w) > 0:
            y = poly_gcd(w, c)
            part = poly_divmod(w, y)[0]
            if poly_deg(part) > 0:
                yield_list.append((part, outer_mult * mult))
            w = y
            c = poly_divmod(c, y)[0]
            mult += 1
        if poly_deg(c) > 0:
            collect_squarefree(c, outer_mult)

    collect_squarefree(poly, 1)

    q = params.order
    for part, mult in yield_list:
        # distinct-degree then equal-degree splitting
        f = part
        k = 1
        x_poly = [ff_zero(params), ff_one(params)]
        h = x_poly
        while poly_deg(f) >= 2 * k:
            h = poly_powmod(h, q, f)
            g = poly_gcd(poly_sub(h, x_poly), f)
            if poly_deg(g) > 0:
                for irr in _equal_degree_split(g, k, rng):
                    add(irr, mult)
                f = poly_divmod(f, g)[0]
                h = poly_mod(h, f)
            k += 1
        if poly_deg(f) > 0:
            add(poly_monic(f), mult)

    out = sorted(factors.values(), key=lambda fm: _poly_sort_key(fm[0]))
    return [(f, mult) for f, mult in out]


def _equal_degree_split(f, k, rng):
    """Cantor-Zassenhaus split of a product of degree-k irreducibles."""
    params = f[0].params
    n = poly_deg(f)
    if n == k:
        return [poly_monic(f)]
    q = params.order
    e = (q ** k - 1) // 2
    while True:
        r = [FFElem(params, tuple(rng.randrange(params.ell) for _ in range(params.d)))
             for _ in range(n)]
        r = poly_trim(r)
        if poly_deg(r) < 1:
            continue
        g = poly_gcd(r, f)
        if 0 < poly_deg(g) < n:
            pass
        else:
            s = poly_powmod(r, e, f)
            g = poly_gcd(poly_sub(s, [ff_one(params)]), f)
            if not (0 < poly_deg(g) < n):
                continue
        left = _equal_degree_split(g, k, rng)
        right = _equal_degree_split(poly_divmod(f, g)[0], k, rng)
        return left + right


def ff_roots(poly):
    """Roots in the coefficient field, with multiplicity, canonically ordered."""
    out = []
    for f, mult in ff_factorize(poly):
        if poly_deg(f) == 1:
            out.append((-f[0], mult))
    out.sort(key=lambda rm: rm[0].sort_key())
    return out


# ---------------------------------------------------------------------------
# embeddings and subring membership


_EMBED_CACHE = {}


def _embedding_powers(small, big):
    """Powers of the image of the small ring generator inside the big ring.

    Base pairs choose the Hensel lift of the lexicographically smallest
    residual root of the small modulus; composite degree jumps factor through
    the largest intermediate divisor so that 2-power chains compose exactly.
    """
    key = (small, big)
    cached = _EMBED_CACHE.get(key)
    if cached is not None:
        return cached
    if big.d % small.d != 0 or small.m != big.m:
        raise NonDivisibleDegrees(f"no embedding {small} -> {big}")
    if small.d == big.d:
        powers = None
    else:
        intermediates = [e for e in range(small.d + 1, big.d)
                         if e % small.d == 0 and big.d % e == 0]
        if intermediates:
            mid = make_witt_ring(small.ell, max(intermediates), small.m)
            g_mid = _embed_gen(small, mid)
            g = embed(g_mid, big.d)
        else:
            g = _embed_gen(small, big)
        powers = [witt_one(big)]
        for _ in range(small.d - 1):
            powers.append(powers[-1] * g)
    _EMBED_CACHE[key] = powers
    return powers


def _embed_gen(small, big):
    """Direct image of the small generator: smallest residual root, lifted."""
    big_field = big.residue_field
    res_poly = [ff_from_int(big_field, c) for c in small.lifted_modulus]
    roots = ff_roots(res_poly)
    if not roots:
        raise NonDivisibleDegrees("small modulus has no root in the big field")
    rbar = roots[0][0]
    poly = [witt_from_int(big, c) for c in small.lifted_modulus]
    return hensel_root(poly, rbar)


def embed(x, d_big):
    """Injective ring map W(F_{l^d})/l^m -> W(F_{l^d'})/l^m for d | d'."""
    if d_big % x.ring.d != 0:
        raise NonDivisibleDegrees(f"{x.ring.d} does not divide {d_big}")
    big = make_witt_ring(x.ring.ell, d_big, x.ring.m)
    powers = _embedding_powers(x.ring, big)
    if powers is None:
        return x
    acc = witt_zero(big)
    for c, p in zip(x.coeffs, powers):
        acc = acc + witt_scale(p, c)
    return acc


def ff_embed(a, d_big):
    """Residual counterpart of embed (runs the Witt machinery at m = 1)."""
    x = lift_trivial(a, 1)
    return embed(x, d_big).residue()


def in_subring(x, d0):
    """True iff x lies in the image of W(F_{l^{d0}})/l^m, for d0 | d."""
    if x.ring.d % d0 != 0:
        raise NonDivisibleDegrees(f"{d0} does not divide {x.ring.d}")
    return witt_frobenius_power(x, d0) == x
