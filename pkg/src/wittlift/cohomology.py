"""Group cohomology in degree one for finitely presented groups.

The coefficient modules are the trace-zero adjoint of a residual
representation (basis e12, h, e21), its scalar extensions, and the twisted
contragredient dual.  Cocycles are stored by their values on generators and
extended to words by f(gh) = f(g) + g.f(h); relator constraints become an
explicit linear system, so Z^1 is a nullspace and B^1 an image.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import coeffring as cr
from . import linalg
from .errors import (
    DetNotEpsilon,
    LiftsDoNotReduce,
    NotACocycle,
    ParamMismatch,
    UnknownGenerator,
)
from .matlin import Mat


@dataclass(frozen=True)
class GModule:
    """A finite-dimensional module: an action matrix per generator."""

    field: object  # FieldParams, F_{l^d}
    dim: int
    action: dict  # generator name -> Mat over field (dim x dim)
    twist: str  # "adjoint" | "cartier_dual" | "custom"
    epsilon: dict  # generator name -> integer (needed for the dual pairing)

    def act_gen(self, name, e=1):
        if name not in self.action:
            raise UnknownGenerator(name)
        return self.action[name] ** e

    def word_matrix(self, word):
        acc = Mat.identity(self.field, self.dim)
        for name, e in word:
            acc = acc * self.act_gen(name, e)
        return acc


def matvec(mat, vec):
    out = []
    for row in mat.rows:
        acc = row[0] * vec[0]
        for a, b in zip(row[1:], vec[1:]):
            acc = acc + a * b
        out.append(acc)
    return tuple(out)


def vec_add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def vec_neg(a):
    return tuple(-x for x in a)


def vec_zero(field, dim):
    return (cr.ff_zero(field),) * dim


def vec_is_zero(v):
    return all(x.is_zero() for x in v)


# ---------------------------------------------------------------------------
# module construction


def adjoint_coords(mat22):
    """Coordinates of a trace-zero 2x2 [[a,b],[c,-a]] in the basis (e12, h, e21)."""
    return (mat22.rows[0][1], mat22.rows[0][0], mat22.rows[1][0])


def adjoint_from_coords(ring, coords):
    """Inverse of adjoint_coords: (b, a, c) -> [[a, b], [c, -a]]."""
    b, a, c = coords
    return Mat.from_rows(ring, [[a, b], [c, -a]])


def build_module(rhobar, d, twist="adjoint"):
    """The trace-zero conjugation module of a level-1 deformation, over F_{l^d}.

    twist "cartier_dual" gives the contragredient multiplied by epsilon.
    """
    if rhobar.ring.m != 1:
        raise ParamMismatch("build_module expects a level-1 deformation")
    base = rhobar.ring.residue_field
    if d % base.d != 0:
        raise ParamMismatch("coefficient degree must be a multiple of the residual degree")
    field = cr.make_field(base.ell, d)
    basis = [
        Mat.from_ints(base, [[0, 1], [0, 0]]),   # e12
        Mat.from_ints(base, [[1, 0], [0, -1]]),  # h
        Mat.from_ints(base, [[0, 0], [1, 0]]),   # e21
    ]
    action = {}
    eps = dict(rhobar.group.epsilon)
    for name in rhobar.group.generators:
        g = rhobar.image(name).residue()
        ginv = g.inverse()
        cols = [adjoint_coords(g * x * ginv) for x in basis]
        rows = [[cr.ff_embed(cols[j][i], d) for j in range(3)] for i in range(3)]
        a = Mat.from_rows(field, rows)
        if twist == "cartier_dual":
            e = cr.ff_from_int(field, eps[name])
            inv_t = a.inverse()
            a = Mat.from_rows(field, [[inv_t.rows[j][i] * e for j in range(3)]
                                      for i in range(3)])
        elif twist != "adjoint":
            raise ParamMismatch(f"unknown twist {twist!r}")
        action[name] = a
    return GModule(field, 3, action, twist, eps)


def module_from_action(field, action, epsilon=None, twist="custom"):
    """Wrap explicit generator action matrices (used for test modules)."""
    dim = next(iter(action.values())).n if action else 0
    return GModule(field, dim, dict(action), twist, dict(epsilon or {}))


def dual_module(module):
    """Contragredient twisted by epsilon, for any module with epsilon data."""
    action = {}
    for name, a in module.action.items():
        e = cr.ff_from_int(module.field, module.epsilon.get(name, 1))
        inv = a.inverse()
        action[name] = Mat.from_rows(module.field,
                                     [[inv.rows[j][i] * e for j in range(module.dim)]
                                      for i in range(module.dim)])
    return GModule(module.field, module.dim, action, "cartier_dual", module.epsilon)


def pairing(x, phi):
    """The standard pairing sum_i x_i * phi_i."""
    acc = x[0] * phi[0]
    for a, b in zip(x[1:], phi[1:]):
        acc = acc + a * b
    return acc


# ---------------------------------------------------------------------------
# cocycles


@dataclass(frozen=True)
class Cocycle:
    module: GModule
    values: dict  # generator name -> tuple of FFElem

    def __call__(self, word):
        return cocycle_eval(self.module, self.values, word)

    def is_zero(self):
        return all(vec_is_zero(v) for v in self.values.values())


def cocycle_eval(module, values, word):
    """Extend generator values to a word via f(gh) = f(g) + g.f(h)."""
    field, dim = module.field, module.dim
    acc = vec_zero(field, dim)
    prefix = Mat.identity(field, dim)
    for name, e in word:
        if name not in values:
            raise UnknownGenerator(name)
        a = module.act_gen(name)
        v = values[name]
        if e >= 0:
            for _ in range(e):
                acc = vec_add(acc, matvec(prefix, v))
                prefix = prefix * a
        else:
            ainv = a.inverse()
            vinv = vec_neg(matvec(ainv, v))  # f(g^-1) = -g^-1.f(g)
            for _ in range(-e):
                prefix = prefix * ainv
                acc = vec_add(acc, matvec(prefix * a, vinv))
    return acc


def _unit_values(group, module, gi, ci):
    field, dim = module.field, module.dim
    values = {}
    for j, name in enumerate(group.generators):
        v = [cr.ff_zero(field)] * dim
        if j == gi:
            v[ci] = cr.ff_one(field)
        values[name] = tuple(v)
    return values


def relator_system(group, module):
    """Rows of the linear map (values on generators) -> (relator evaluations).

    Columns index (generator, coordinate); rows index (relator, coordinate).
    This is the numerically assembled Fox-derivative system.
    """
    field, dim = module.field, module.dim
    ngen = len(group.generators)
    cols = []
    for gi in range(ngen):
        for ci in range(dim):
            values = _unit_values(group, module, gi, ci)
            col = []
            for rel in group.relators:
                col.extend(cocycle_eval(module, values, rel))
            cols.append(col)
    if not group.relators:
        return [[cr.ff_zero(field)] * (ngen * dim)]
    return [[cols[j][i] for j in range(ngen * dim)]
            for i in range(len(group.relators) * dim)]


def _vec_to_values(group, module, flat):
    dim = module.dim
    return {name: tuple(flat[i * dim:(i + 1) * dim])
            for i, name in enumerate(group.generators)}


def coboundary_of(group, module, m_elem):
    """The coboundary g -> g.m - m as a Cocycle."""
    values = {}
    for name in group.generators:
        values[name] = vec_add(matvec(module.act_gen(name), m_elem),
                               vec_neg(m_elem))
    return Cocycle(module, values)


def cocycle_space(group, module):
    """(Z^1 basis, B^1 basis, h^1) as echelonized flat vectors over F_{l^d}."""
    field, dim = module.field, module.dim
    ngen = len(group.generators)
    rows = relator_system(group, module)
    z1 = linalg.nullspace(rows, field)
    if not group.relators:
        # the relator system is the zero map; nullspace of the zero row
        z1 = linalg.nullspace([[cr.ff_zero(field)] * (ngen * dim)], field)
    b_raw = []
    for ci in range(dim):
        m_elem = [cr.ff_zero(field)] * dim
        m_elem[ci] = cr.ff_one(field)
        cob = coboundary_of(group, module, tuple(m_elem))
        b_raw.append([x for name in group.generators for x in cob.values[name]])
    b1, _ = linalg.rref(b_raw)
    b1 = b1[:linalg.rank(b_raw)]
    h1 = len(z1) - len(b1)
    return z1, b1, h1


def invariants_dim(group, module):
    """dim of the G-fixed subspace (common eigenspace for eigenvalue 1)."""
    field, dim = module.field, module.dim
    rows = []
    ident = Mat.identity(field, dim)
    for name in group.generators:
        a = module.act_gen(name) - ident
        rows.extend([list(r) for r in a.rows])
    return len(linalg.nullspace(rows, field))


def cocycle_from_flat(group, module, flat):
    return Cocycle(module, _vec_to_values(group, module, flat))


def cocycle_flat(group, cocycle):
    return [x for name in group.generators for x in cocycle.values[name]]


# ---------------------------------------------------------------------------
# local restriction and the locally-trivial kernel


def restrict_and_classify(f, place):
    """Classify f at a place: zero_class, unramified_nonzero, or ramified.

    The local group is generated by the sigma and tau words; its coboundaries
    are pairs ((A_sigma - I)m, (A_tau - I)m).
    """
    module = f.module
    field, dim = module.field, module.dim
    a_sig = module.word_matrix(place.sigma)
    a_tau = module.word_matrix(place.tau)
    fs = f(place.sigma)
    ft = f(place.tau)
    ident = Mat.identity(field, dim)
    ds = a_sig - ident
    dt = a_tau - ident
    # stacked system: does some m give both components as coboundaries?
    stacked = [[ds.rows[i][j] for j in range(dim)] for i in range(dim)] + \
              [[dt.rows[i][j] for j in range(dim)] for i in range(dim)]
    if linalg.solve(stacked, list(fs) + list(ft), field) is not None:
        return "zero_class"
    tau_rows = [[dt.rows[i][j] for j in range(dim)] for i in range(dim)]
    if linalg.solve(tau_rows, list(ft), field) is not None:
        return "unramified_nonzero"
    return "ramified"


def sha_kernel(group, module, places):
    """Echelonized basis of locally-trivial classes modulo coboundaries."""
    field, dim = module.field, module.dim
    ngen = len(group.generators)
    ncoc = ngen * dim
    places = list(places)
    nplace = len(places)
    unknowns = ncoc + nplace * dim  # cocycle coords plus one m_v per place
    rows = []
    zero = cr.ff_zero(field)
    base_rows = relator_system(group, module)
    for r in base_rows:
        rows.append(list(r) + [zero] * (nplace * dim))
    ident = Mat.identity(field, dim)
    for pi, place in enumerate(places):
        for word in (place.sigma, place.tau):
            a = module.word_matrix(word)
            delta = a - ident
            # f(word) - (A - I) m_v = 0, coordinates of f(word) linear in coords
            word_cols = []
            for gi in range(ngen):
                for ci in range(dim):
                    values = _unit_values(group, module, gi, ci)
                    word_cols.append(cocycle_eval(module, values, word))
            for i in range(dim):
                row = [word_cols[j][i] for j in range(ncoc)]
                row += [zero] * (nplace * dim)
                for j in range(dim):
                    row[ncoc + pi * dim + j] = -delta.rows[i][j]
                rows.append(row)
    sols = linalg.nullspace(rows, field)
    proj = [s[:ncoc] for s in sols]
    _, b1, _ = cocycle_space(group, module)
    return linalg.independent_complement(b1, proj, field)


# ---------------------------------------------------------------------------
# relator defects and obstruction solving


def normalize_det(group, name, lift):
    """Scale a level-(m+1) generator lift so its determinant equals epsilon.

    The discrepancy is a 1-unit congruent to 1 mod l^m; its square root is
    1 + l^m w/2, which exists since l is odd.
    """
    ring = lift.ring
    ell, m1 = ring.ell, ring.m
    want = cr.witt_from_int(ring, group.epsilon[name])
    det = lift.det()
    if det == want:
        return lift
    delta = want * det.inverse()
    diff = delta - cr.witt_one(ring)
    if diff.valuation() < m1 - 1:
        raise DetNotEpsilon(f"det discrepancy at {name} is not 1 mod l^{m1 - 1}")
    lm = ell ** (m1 - 1)
    w = tuple((c // lm) % ell for c in diff.coeffs)
    inv2 = pow(2, -1, ell)
    s = cr.witt_one(ring) + cr.WittElem(ring, tuple(lm * (c * inv2 % ell)
                                                    for c in w))
    out = lift.scale(s)
    if out.det() != want:
        raise DetNotEpsilon(f"determinant normalization failed at {name}")
    return out


def _defect_coords(e_mat, m, field):
    """Extract z with e_mat = I + l^m z, as adjoint coordinates over F_{l^d}."""
    ring = e_mat.ring
    ell = ring.ell
    lm = ell ** m
    ident = Mat.identity(ring, 2)
    diff = e_mat - ident
    entries = {}
    for i in range(2):
        for j in range(2):
            x = diff.rows[i][j]
            if any(c % lm for c in x.coeffs):
                raise LiftsDoNotReduce("relator image is not I mod l^m")
            entries[(i, j)] = cr.FFElem(field,
                                        tuple((c // lm) % ell for c in x.coeffs))
    if not (entries[(0, 0)] + entries[(1, 1)]).is_zero():
        raise DetNotEpsilon("relator defect has nonzero trace; normalize det first")
    return (entries[(0, 1)], entries[(0, 0)], entries[(1, 0)])


def relator_defects(rho_m, lifts):
    """Defect z_r per relator of the group, for generator lifts at level m+1."""
    group = rho_m.group
    m = rho_m.ring.m
    ring1 = next(iter(lifts.values())).ring
    if ring1.m != m + 1 or ring1.d != rho_m.ring.d:
        raise ParamMismatch("lifts must live one level above rho_m")
    for name in group.generators:
        if lifts[name].reduce(m) != rho_m.image(name):
            raise LiftsDoNotReduce(f"lift at {name} does not reduce to rho_m")
    field = ring1.residue_field
    out = []
    for rel in group.relators:
        acc = Mat.identity(ring1, 2)
        for name, e in rel:
            acc = acc * (lifts[name] ** e)
        out.append(_defect_coords(acc, m, field))
    return out


@dataclass(frozen=True)
class LiftSolveResult:
    ok: bool
    adjustment: dict = None  # generator name -> adjoint coords over F_{l^d}
    obstruction: tuple = None  # unsolvable stacked defect vector


def lift_solve(group, module, defects):
    """Solve the relator linearization for an adjustment cancelling defects.

    The module must be the adjoint module of the residual representation at
    the lifts' coefficient degree.  On success the assignment c satisfies
    (Fox system) . c = -z, so (I + l^m c(g)) lift(g) kills every defect.
    """
    field, dim = module.field, module.dim
    if not group.relators:
        return LiftSolveResult(True, {name: vec_zero(field, dim)
                                      for name in group.generators})
    rows = relator_system(group, module)
    rhs = [-x for z in defects for x in z]
    sol = linalg.solve(rows, rhs, field)
    if sol is None:
        return LiftSolveResult(False, None, tuple(rhs))
    return LiftSolveResult(True, _vec_to_values(group, module, sol))


def apply_adjustment(lifts, adjustment, m):
    """Replace each lift g by (I + l^m c(g)) . lift(g)."""
    out = {}
    for name, lift in lifts.items():
        ring = lift.ring
        c = adjustment[name]
        add = adjoint_from_coords(ring, tuple(
            cr.WittElem(ring, tuple(ring.ell ** m * (cc % ring.ell)
                                    for cc in x.coeffs))
            for x in c))
        out[name] = (Mat.identity(ring, 2) + add) * lift
    return out


def check_cocycle(group, module, values):
    """Verify the relator conditions; raises NotACocycle on failure."""
    for rel in group.relators:
        if not vec_is_zero(cocycle_eval(module, values, rel)):
            raise NotACocycle(f"fails relator {rel}")
    return Cocycle(module, values)
