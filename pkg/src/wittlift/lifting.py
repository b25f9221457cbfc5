"""The deformation-tower engine.

Builds a tower of representations rho_1, rho_2, ... of a surrogate group,
where rho_m lives over W(F_{l^{2^(m-1)}})/l^m.  Each step embeds the
coefficients, lifts the generator images one level, repairs relator defects,
and twists by a 1-cocycle so that a chosen place's Frobenius trace escapes
the previous coefficient subring.  The resulting trace log feeds a
transcendence-style certificate: no small degree d admits all traces.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import coeffring as cr
from . import linalg
from .cohomology import (
    Cocycle,
    adjoint_from_coords,
    apply_adjustment,
    build_module,
    cocycle_eval,
    lift_solve,
    normalize_det,
    relator_defects,
    relator_system,
    restrict_and_classify,
    sha_kernel,
    _unit_values,
    _vec_to_values,
    dual_module,
    vec_zero,
)
from .errors import (
    Inconsistent,
    NotACocycle,
    OracleNotFound,
    ParamMismatch,
    PoolExhausted,
    SchemaError,
    ShaNotTrivial,
    SupportConditionUnavailable,
    Unreachable,
)
from .galois_model import (
    SCHEMA_VERSION,
    Deformation,
    deformation_from_json_dict,
    deformation_to_json_dict,
    evaluate_word,
    is_unramified_at,
    validate_deformation,
    check_running_hypotheses,
)
from .matlin import Mat, char_poly_eigs


# ---------------------------------------------------------------------------
# twisting


def twist(rho, f):
    """g -> (I + l^(m-1) f~(g)) rho(g); validates the result is a homomorphism."""
    ring = rho.ring
    m = ring.m
    if m < 2:
        raise ParamMismatch("twisting needs level m >= 2")
    if f.module.field.d != ring.d:
        raise ParamMismatch("cocycle degree does not match the deformation")
    images = {}
    lm = ring.ell ** (m - 1)
    for name in rho.group.generators:
        c = f.values[name]
        add = adjoint_from_coords(ring, tuple(
            cr.WittElem(ring, tuple(lm * (cc % ring.ell) for cc in x.coeffs))
            for x in c))
        images[name] = (Mat.identity(ring, 2) + add) * rho.image(name)
    out = Deformation(rho.group, ring, images)
    for rel in rho.group.relators:
        if not evaluate_word(out, rel).is_identity():
            raise NotACocycle(f"twist breaks relator {rel}")
    return out


def trace_delta_digit(rho, f, word):
    """The residual coefficient of the trace change of twist(rho, f) at a word:
    tr' = tr + l^(m-1) * tr(f~(word) rho(word))."""
    fw = cocycle_eval(f.module, f.values, word)
    fmat = adjoint_from_coords(f.module.field, fw)
    rres = evaluate_word(rho, word).residue()
    return (fmat * rres).trace()


# ---------------------------------------------------------------------------
# trace targeting


def _digit_of(x, k):
    """The k-th l-adic digit of a WittElem, as an element of the residue field."""
    ell = x.ring.ell
    lk = ell ** k
    return cr.FFElem(x.ring.residue_field,
                     tuple((c // lk) % ell for c in x.coeffs))


def _word_eval_columns(group, module, word):
    """cocycle_eval of every unit cocycle at a word (one column per unknown)."""
    cols = []
    for gi in range(len(group.generators)):
        for ci in range(module.dim):
            cols.append(cocycle_eval(module, _unit_values(group, module, gi, ci),
                                     word))
    return cols


def _locked_rows(group, module, places):
    """Rows forcing a cocycle's extension to vanish at sigma and tau words."""
    rows, rhs = [], []
    zero = cr.ff_zero(module.field)
    for place in places:
        for word in (place.sigma, place.tau):
            cols = _word_eval_columns(group, module, word)
            for i in range(module.dim):
                rows.append([c[i] for c in cols])
                rhs.append(zero)
    return rows, rhs


def solve_trace_targets(rho, module, targets, locked_places=()):
    """A cocycle f with twist(rho, f) hitting every (place, trace) target
    exactly and vanishing at the locked places' sigma/tau words.

    Targets must agree with the current traces mod l^(m-1) (Inconsistent
    otherwise); an unsolvable system raises Unreachable.
    """
    group = rho.group
    ring = rho.ring
    m = ring.m
    field = module.field
    rows = [list(r) for r in relator_system(group, module)]
    rhs = [cr.ff_zero(field)] * len(rows)
    for place, want in targets:
        cur = evaluate_word(rho, place.sigma).trace()
        diff = want - cur
        if diff.valuation() < m - 1:
            raise Inconsistent(
                f"target at {place.label} differs from the current trace "
                f"below the top digit")
        u = _digit_of(diff, m - 1)
        cols = _word_eval_columns(group, module, place.sigma)
        rres = evaluate_word(rho, place.sigma).residue()
        row = [(adjoint_from_coords(field, c) * rres).trace() for c in cols]
        rows.append(row)
        rhs.append(u)
    lrows, lrhs = _locked_rows(group, module, locked_places)
    rows.extend(lrows)
    rhs.extend(lrhs)
    sol = linalg.solve(rows, rhs, field)
    if sol is None:
        raise Unreachable("trace targets are not in the span of the "
                          "twist functionals")
    return Cocycle(module, _vec_to_values(group, module, sol))


# ---------------------------------------------------------------------------
# niceness and the place oracle


def is_nice(place, rhobar):
    """q not +-1 mod l, tau unramified, and residual Frobenius eigenvalues
    with ratio q."""
    ell = rhobar.ring.ell
    if place.q % ell in (1, ell - 1, 0):
        return False
    if not is_unramified_at(rhobar, place)[0]:
        return False
    g = evaluate_word(rhobar, place.sigma).residue()
    _, eigs = char_poly_eigs_field(g)
    for e1 in eigs:
        for e2 in eigs:
            if e1 is e2:
                continue
            fld = e1.params
            if e1 == e2 * cr.ff_from_int(fld, place.q):
                return True
    # a repeated eigenvalue with ratio q would need q = 1 mod l: excluded
    return False


def char_poly_eigs_field(g):
    """Eigenvalues of a matrix over a finite field, in the splitting field."""
    from .matlin import char_poly, splitting_roots
    cp = char_poly(g)
    fld, roots = splitting_roots(cp)
    flat = [r for r, mult in roots for _ in range(mult)]
    return cp, flat


def is_rho_m_nice(place, rho_m):
    """is_nice residually, plus exact unramifiedness and exact Hensel-lifted
    eigenvalue ratio q in W/l^m."""
    rhobar = rho_m.reduce(1)
    if not is_nice(place, rhobar):
        return False
    if not is_unramified_at(rho_m, place)[0]:
        return False
    g = evaluate_word(rho_m, place.sigma)
    _, eigs = char_poly_eigs(g)
    lifted = [e.value for e in eigs if e.ext_degree == 1 and e.value is not None]
    if len(lifted) != 2:
        return False
    q = cr.witt_from_int(rho_m.ring, place.q)
    return lifted[0] == lifted[1] * q or lifted[1] == lifted[0] * q


@dataclass(frozen=True)
class OracleConstraints:
    rho_m_nice: bool = False
    patterns: tuple = ()  # (Cocycle, want_nonzero: bool) pairs


def oracle_find_places(pool, rho_m, constraints=OracleConstraints(),
                       exclude=()):
    """First pool place (label order) meeting the constraints, or OracleNotFound.

    Constraint classes must be independent in H^1 (checked when present).
    """
    if constraints.patterns:
        _check_pattern_independence(rho_m.group, constraints.patterns)
    for place in sorted(pool, key=lambda p: p.label):
        if place.label in exclude:
            continue
        if constraints.rho_m_nice and not is_rho_m_nice(place, rho_m):
            continue
        ok = True
        for coc, want_nonzero in constraints.patterns:
            cls = restrict_and_classify(coc, place)
            if want_nonzero and cls == "zero_class":
                ok = False
                break
            if not want_nonzero and cls != "zero_class":
                ok = False
                break
        if ok:
            return place
    raise OracleNotFound("no pool place satisfies the constraints")


def _check_pattern_independence(group, patterns):
    from .cohomology import cocycle_space, cocycle_flat
    if not patterns:
        return
    module = patterns[0][0].module
    _, b1, _ = cocycle_space(group, module)
    vecs = [cocycle_flat(group, coc) for coc, _ in patterns]
    stacked = [list(r) for r in b1] + [list(v) for v in vecs]
    if linalg.rank(stacked) != len(b1) + len(vecs):
        raise ParamMismatch("constraint classes are dependent in H^1")


# ---------------------------------------------------------------------------
# auxiliary-set selection


def _local_coker_dim(module, place):
    ident = Mat.identity(module.field, module.dim)
    delta = module.word_matrix(place.sigma) - ident
    rows = [list(r) for r in delta.rows]
    return module.dim - linalg.rank(rows)


def _localization_ranks(group, module, dmodule, s_r_places, q_places):
    """The three rank checks behind auxiliary selection: injectivity of the
    localization map for the module and its dual over S+R+Q, and surjectivity
    onto the unramified local quotients at Q."""
    all_places = list(s_r_places) + list(q_places)
    inj1 = len(sha_kernel(group, module, all_places)) == 0
    inj2 = len(sha_kernel(group, dmodule, all_places)) == 0
    from .cohomology import cocycle_space
    z1, b1, _ = cocycle_space(group, module)
    want = sum(_local_coker_dim(module, p) for p in q_places)
    if want == 0:
        surj = True
        got = 0
    else:
        ident = Mat.identity(module.field, module.dim)
        rows = []
        for z in z1:
            values = _vec_to_values(group, module, z)
            row = []
            for p in q_places:
                fv = cocycle_eval(module, values, p.sigma)
                delta = module.word_matrix(p.sigma) - ident
                # coordinates of fv in coker(delta): append raw, rank below
                row.extend(fv)
            rows.append(row)
        # rank of the composed map = rank of restrictions modulo im(delta)
        im_rows = []
        for p_i, p in enumerate(q_places):
            delta = module.word_matrix(p.sigma) - ident
            for col in range(module.dim):
                vec = [cr.ff_zero(module.field)] * (module.dim * len(q_places))
                for i in range(module.dim):
                    vec[p_i * module.dim + i] = delta.rows[i][col]
                im_rows.append(vec)
        base = linalg.rank(im_rows)
        got = linalg.rank(im_rows + rows) - base
        surj = got == want
    return {"inj_module": inj1, "inj_dual": inj2,
            "surj_unramified": surj, "coker_target": want, "coker_rank": got}


def select_auxiliary(rho_m, module, s_r_places, pool):
    """Greedily add nice pool places until the localization rank checks pass.

    Requires the locally-trivial kernels over the starting set to vanish for
    both the module and its dual (ShaNotTrivial otherwise is raised only when
    no enlargement can fix it and the kernel persists over the full pool).
    """
    group = rho_m.group
    dmod = dual_module(module)
    q_places = []
    used = {p.label for p in s_r_places}
    while True:
        ranks = _localization_ranks(group, module, dmod, s_r_places, q_places)
        if ranks["inj_module"] and ranks["inj_dual"] and ranks["surj_unramified"]:
            return tuple(q_places), ranks
        try:
            place = oracle_find_places(pool, rho_m,
                                       OracleConstraints(rho_m_nice=True),
                                       exclude=used)
        except OracleNotFound:
            full = list(s_r_places) + [p for p in pool if p.label not in
                                       {q.label for q in s_r_places}]
            if sha_kernel(group, module, full) or sha_kernel(group, dmod, full):
                raise ShaNotTrivial("locally-trivial classes persist over the "
                                    "entire pool")
            raise PoolExhausted("no further nice places available and rank "
                                f"checks incomplete: {ranks}")
        used.add(place.label)
        q_places.append(place)


# ---------------------------------------------------------------------------
# obstruction resolution


def resolve_obstructions(candidate, rho_prev, module, r_targets=(),
                         locked_places=(), pool=()):
    """Repair relator defects of a candidate level-(m+1) lift.

    Finds a generator adjustment h (digit l^m) cancelling all relator defects
    while leaving the traces at r_targets and the locked places' local data
    unchanged; returns (h values, newly ramified place labels).  With no
    defects the zero adjustment is returned.
    """
    group = rho_prev.group
    field = module.field
    lifts = {g: candidate.image(g) for g in group.generators}
    defects = relator_defects(rho_prev, lifts)
    dim = module.dim
    ngen = len(group.generators)
    zero_adj = {g: vec_zero(field, dim) for g in group.generators}
    if all(all(x.is_zero() for x in z) for z in defects):
        return zero_adj, ()
    rows = [list(r) for r in relator_system(group, module)]
    rhs = [-x for z in defects for x in z]
    # preservation: the adjustment must not move the targeted traces ...
    for place in r_targets:
        cols = _word_eval_columns(group, module, place.sigma)
        rres = evaluate_word(candidate, place.sigma).residue()
        rows.append([(adjoint_from_coords(field, c) * rres).trace()
                     for c in cols])
        rhs.append(cr.ff_zero(field))
    # ... nor the locked places' local reductions
    lrows, lrhs = _locked_rows(group, module, locked_places)
    rows.extend(lrows)
    rhs.extend(lrhs)
    sol = linalg.solve(rows, rhs, field)
    if sol is None:
        raise SupportConditionUnavailable(
            "no adjustment cancels the defects under the support constraints")
    h = _vec_to_values(group, module, sol)
    adjusted = apply_adjustment(lifts, h, rho_prev.ring.m)
    out = Deformation(group, candidate.ring, adjusted)
    newly = tuple(p.label for p in group.places
                  if is_unramified_at(candidate, p)[0]
                  and not is_unramified_at(out, p)[0])
    return h, newly


# ---------------------------------------------------------------------------
# tower plans, steps, and certificates


@dataclass(frozen=True)
class TowerPlan:
    """Recipe for a tower: which place carries the escaping trace per level."""

    rhobar: Deformation
    max_level: int
    r_labels: dict  # level (>= 2) -> place label
    locked_labels: tuple = ()
    escape: bool = True  # False gives the Frobenius-fixed negative control
    require_nice: bool = False

    def place_for(self, level):
        return self.rhobar.group.place(self.r_labels[level])


@dataclass(frozen=True)
class TowerLevel:
    rho: Deformation
    r_label: str
    target_trace: object  # WittElem or None at level 1
    twist_values: dict
    lift_adjustment: dict
    ramified: tuple


@dataclass(frozen=True)
class Tower:
    plan: TowerPlan
    levels: tuple  # TowerLevel per level 1..M


def tower_step(rho_m, plan, level):
    """One stage: embed to degree 2^m, lift, repair relators, twist traces."""
    group = rho_m.group
    m = rho_m.ring.m
    if level != m + 1:
        raise ParamMismatch("tower_step must target the next level")
    d_big = 2 ** m
    embedded = rho_m.embed(d_big)
    lifts = {}
    for name in group.generators:
        lifted = embedded.image(name).lift_trivial(m + 1)
        lifts[name] = normalize_det(group, name, lifted)
    ring1 = next(iter(lifts.values())).ring
    module = build_module(rho_m.reduce(1), d_big)
    defects = relator_defects(embedded, lifts)
    res = lift_solve(group, module, defects)
    if not res.ok:
        raise SupportConditionUnavailable("relator defects are unsolvable")
    lifts = apply_adjustment(lifts, res.adjustment, m)
    candidate = Deformation(group, ring1, lifts)
    place = plan.place_for(level)
    if plan.require_nice and not is_rho_m_nice(place, rho_m):
        raise ParamMismatch(f"place {place.label} is not rho_m-nice")
    cur = evaluate_word(candidate, place.sigma).trace()
    if plan.escape:
        gen_digit = cr.ff_gen(ring1.residue_field)
        target = cur + cr.WittElem(
            ring1, tuple(ring1.ell ** m * c for c in gen_digit.coeffs))
        prev_degree = 2 ** (m - 1)
        if cr.in_subring(target, prev_degree):
            raise ParamMismatch("constructed target fails the escape invariant")
    else:
        target = cur
    locked = [group.place(lab) for lab in plan.locked_labels]
    f = solve_trace_targets(candidate, module, [(place, target)], locked)
    out = twist(candidate, f)
    # exact plug-back of the target and reduction compatibility
    got = evaluate_word(out, place.sigma).trace()
    if got != target:
        raise Unreachable("trace target missed after twisting")
    if out.reduce(m).images != embedded.images:
        raise ParamMismatch("reduction compatibility violated")
    rep = validate_deformation(out)
    if not rep.ok:
        raise ParamMismatch(f"stage failed validation: {rep.failures}")
    lvl = TowerLevel(out, place.label, target, dict(f.values),
                     dict(res.adjustment), rep.ramified_places)
    return lvl


def build_tower(plan):
    """Run the plan from rho_1 to max_level; returns (Tower, Certificate)."""
    rhobar = plan.rhobar
    if not check_running_hypotheses(rhobar):
        raise ParamMismatch("residual representation fails the running "
                            "hypotheses")
    rep = validate_deformation(rhobar)
    levels = [TowerLevel(rhobar, "", None, {}, {}, rep.ramified_places)]
    rho = rhobar
    for level in range(2, plan.max_level + 1):
        lvl = tower_step(rho, plan, level)
        levels.append(lvl)
        rho = lvl.rho
    tower = Tower(plan, tuple(levels))
    cert = make_certificate(tower, 2 ** (plan.max_level - 1))
    return tower, cert


def logged_traces(tower):
    """(place label, level, trace) for every targeted place, at native rings."""
    out = []
    for i, lvl in enumerate(tower.levels[1:], start=2):
        place = tower.plan.rhobar.group.place(lvl.r_label)
        tr = evaluate_word(lvl.rho, place.sigma).trace()
        out.append((lvl.r_label, i, tr))
    return out


def field_of_definition(traces, d_max):
    """Minimal d <= d_max dividing every trace's ambient degree with all
    traces Frobenius^d-fixed, or None."""
    for d in range(1, d_max + 1):
        ok = True
        for tr in traces:
            amb = tr.ring.d
            if amb % d != 0 or not cr.in_subring(tr, d):
                ok = False
                break
        if ok:
            return d
    return None


def make_certificate(tower, d_top):
    """Per degree d <= d_top, a witness that d cannot define all traces.

    A "frobenius" witness is a trace not fixed by Frobenius^gcd(d, ambient);
    a "degree" witness is a trace whose ambient degree d does not divide.
    Degrees with neither kind of witness are reported as uncovered.
    """
    traces = logged_traces(tower)
    entries = []
    for d in range(1, d_top + 1):
        found = None
        for label, level, tr in traces:
            amb = tr.ring.d
            g = _gcd(d, amb)
            if not cr.in_subring(tr, g):
                found = {"d": d, "kind": "frobenius", "place": label,
                         "level": level, "check_degree": g,
                         "trace": cr.witt_to_str(tr)}
                break
        if found is None:
            for label, level, tr in traces:
                if tr.ring.d % d != 0:
                    found = {"d": d, "kind": "degree", "place": label,
                             "level": level, "trace": cr.witt_to_str(tr)}
                    break
        if found is None:
            found = {"d": d, "kind": "uncovered"}
        entries.append(found)
    return {"schema_version": SCHEMA_VERSION, "d_top": d_top,
            "entries": entries}


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


# ---------------------------------------------------------------------------
# serialization


def tower_to_json_dict(tower):
    lvls = []
    for lvl in tower.levels:
        lvls.append({
            "deformation": deformation_to_json_dict(lvl.rho),
            "r_label": lvl.r_label,
            "target_trace": cr.witt_to_str(lvl.target_trace)
            if lvl.target_trace is not None else None,
            "twist": {k: [a.coeffs for a in v]
                      for k, v in lvl.twist_values.items()},
            "lift_adjustment": {k: [a.coeffs for a in v]
                                for k, v in lvl.lift_adjustment.items()},
            "ramified": list(lvl.ramified),
        })
    return {
        "schema_version": SCHEMA_VERSION,
        "group": tower.plan.rhobar.group.to_json_dict(),
        "max_level": tower.plan.max_level,
        "r_labels": {str(k): v for k, v in tower.plan.r_labels.items()},
        "escape": tower.plan.escape,
        "levels": lvls,
    }


def verify_tower_dict(data):
    """Re-validate a serialized tower; returns a list of failure strings."""
    from .galois_model import ModelGroup
    if data.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError("unsupported or missing schema_version")
    group = ModelGroup.from_json_dict(data["group"])
    failures = []
    prev = None
    for i, lvl in enumerate(data["levels"], start=1):
        rho = deformation_from_json_dict(lvl["deformation"], group)
        if rho.ring.m != i:
            failures.append(f"level {i}: wrong precision {rho.ring.m}")
        rep = validate_deformation(rho)
        if not rep.ok:
            failures.append(f"level {i}: {rep.failures}")
        if lvl["target_trace"] is not None:
            place = group.place(lvl["r_label"])
            tr = evaluate_word(rho, place.sigma).trace()
            if cr.witt_to_str(tr) != lvl["target_trace"]:
                failures.append(f"level {i}: trace at {lvl['r_label']} does "
                                "not match the logged target")
        if prev is not None:
            red = rho.reduce(i - 1)
            emb = prev.embed(rho.ring.d)
            if red.images != emb.images:
                failures.append(f"level {i}: reduction incompatibility")
        prev = rho
    return failures
