"""Tests for cocycle spaces, local classification, and obstruction solving."""

import random

import pytest

import wittlift.coeffring as cr
from wittlift.cohomology import (
    Cocycle,
    apply_adjustment,
    build_module,
    check_cocycle,
    coboundary_of,
    cocycle_eval,
    cocycle_space,
    dual_module,
    invariants_dim,
    lift_solve,
    matvec,
    module_from_action,
    normalize_det,
    pairing,
    relator_defects,
    restrict_and_classify,
    sha_kernel,
)
from wittlift.errors import DetNotEpsilon, LiftsDoNotReduce, NotACocycle
from wittlift.galois_model import (
    Deformation,
    ModelGroup,
    Place,
    evaluate_word,
    parse_word,
)
from wittlift.matlin import Mat
from wittlift.presets import (
    deformation_tame,
    finite_groups,
    residual_tame,
    surrogate_tame,
    module_suite,
)
from helpers_bruteforce import brute_force_h1

F5 = cr.make_field(5, 1)


def trivial_module(group, dim=1):
    return module_from_action(
        F5, {g: Mat.identity(F5, dim) for g in group.generators})


def test_h1_of_cyclic_group_trivial_module():
    c5 = ModelGroup(("a",), (parse_word("a^5"),), (), {"a": 1})
    _, _, h1 = cocycle_space(c5, trivial_module(c5))
    assert h1 == 1  # Hom(Z/5, F_5)


def test_h1_of_s3_trivial_module():
    s3 = ModelGroup(("s", "t"),
                    (parse_word("s^2"), parse_word("t^3"), parse_word("s t s t")),
                    (), {"s": 1, "t": 1})
    _, _, h1 = cocycle_space(s3, trivial_module(s3))
    assert h1 == 0


def test_free_group_has_no_relator_constraints():
    fr = ModelGroup(("x", "y"), (), (), {"x": 1, "y": 1})
    z1, b1, h1 = cocycle_space(fr, trivial_module(fr, 3))
    assert len(z1) == 6 and len(b1) == 0 and h1 == 6


def test_adjoint_action_diagonal_example():
    ring = cr.make_witt_ring(5, 1, 1)
    g1 = ModelGroup(("g",), (), (), {"g": 2})
    rho = Deformation(g1, ring, {"g": Mat.from_ints(ring, [[2, 0], [0, 1]])})
    mod = build_module(rho, 1)
    act = mod.action["g"]
    assert [act.rows[i][i].coeffs[0] for i in range(3)] == [2, 1, 3]
    assert all(act.rows[i][j].is_zero()
               for i in range(3) for j in range(3) if i != j)


def test_relators_act_trivially_on_adjoint():
    rho = residual_tame()
    mod = build_module(rho, 2)
    ident = Mat.identity(mod.field, 3)
    for rel in rho.group.relators:
        assert mod.word_matrix(rel) == ident


def test_cartier_dual_pairing():
    rho = residual_tame()
    mod = build_module(rho, 1)
    dual = build_module(rho, 1, "cartier_dual")
    rng = random.Random(2)
    for _ in range(200):
        name = rng.choice(rho.group.generators)
        x = tuple(cr.ff_from_int(F5, rng.randrange(5)) for _ in range(3))
        phi = tuple(cr.ff_from_int(F5, rng.randrange(5)) for _ in range(3))
        eps = cr.ff_from_int(F5, rho.group.epsilon[name])
        lhs = pairing(matvec(mod.action[name], x), matvec(dual.action[name], phi))
        assert lhs == pairing(x, phi) * eps


def test_double_dual_is_original():
    rho = residual_tame()
    mod = build_module(rho, 1)
    dd = dual_module(dual_module(mod))
    rng = random.Random(3)
    for _ in range(100):
        word = tuple((rng.choice(rho.group.generators), rng.choice([1, -1, 2]))
                     for _ in range(3))
        assert mod.word_matrix(word) == dd.word_matrix(word)


def test_fox_h1_matches_brute_force():
    mismatches = []
    for name, group, images, order in finite_groups():
        for mod_name, module in module_suite(group, images):
            z1, b1, h1 = cocycle_space(group, module)
            bz, bb, bh = brute_force_h1(group, images, module)
            if (len(z1), len(b1), h1) != (bz, bb, bh):
                mismatches.append((name, mod_name, (len(z1), len(b1), h1),
                                   (bz, bb, bh)))
    assert mismatches == []


def test_coboundary_dimension_identity():
    for name, group, images, order in finite_groups():
        for mod_name, module in module_suite(group, images):
            _, b1, _ = cocycle_space(group, module)
            assert len(b1) == module.dim - invariants_dim(group, module), \
                (name, mod_name)


def test_z1_elements_vanish_on_relators():
    from wittlift.cohomology import _vec_to_values
    for name, group, images, order in finite_groups():
        for mod_name, module in module_suite(group, images):
            z1, _, _ = cocycle_space(group, module)
            for z in z1:
                values = _vec_to_values(group, module, z)
                for rel in group.relators:
                    assert all(x.is_zero()
                               for x in cocycle_eval(module, values, rel))


def test_restrict_and_classify_branches():
    fr = ModelGroup(("x", "y"), (), (), {"x": 1, "y": 1})
    mod = trivial_module(fr, 1)
    place = Place("v", parse_word("x"), parse_word("y"), 7)
    one, zero = cr.ff_one(F5), cr.ff_zero(F5)
    assert restrict_and_classify(
        Cocycle(mod, {"x": (zero,), "y": (zero,)}), place) == "zero_class"
    assert restrict_and_classify(
        Cocycle(mod, {"x": (one,), "y": (zero,)}), place) == "unramified_nonzero"
    assert restrict_and_classify(
        Cocycle(mod, {"x": (zero,), "y": (one,)}), place) == "ramified"


def test_coboundary_is_zero_class_everywhere():
    rho = residual_tame()
    group = rho.group
    mod = build_module(rho, 1)
    rng = random.Random(9)
    for _ in range(10):
        m = tuple(cr.ff_from_int(F5, rng.randrange(5)) for _ in range(3))
        cob = coboundary_of(group, mod, m)
        for place in group.places:
            assert restrict_and_classify(cob, place) == "zero_class"


def test_sha_kernel_empty_place_set_is_h1():
    fr = ModelGroup(("x", "y"), (), (), {"x": 1, "y": 1})
    mod = trivial_module(fr, 1)
    assert len(sha_kernel(fr, mod, [])) == 2
    places = [Place("v1", parse_word("x"), parse_word("x"), 7),
              Place("v2", parse_word("y"), parse_word("y"), 7)]
    assert sha_kernel(fr, mod, places) == []


def test_sha_kernel_matches_direct_enumeration():
    """Ш over the tame surrogate's place set, cross-checked elementwise."""
    from wittlift.cohomology import _vec_to_values, cocycle_flat
    from wittlift import linalg
    rho = residual_tame()
    group = rho.group
    mod = build_module(rho, 1)
    places = list(group.places)
    sha = sha_kernel(group, mod, places)
    # every reported class is locally trivial everywhere
    for vec in sha:
        coc = Cocycle(mod, _vec_to_values(group, mod, vec))
        for place in places:
            assert restrict_and_classify(coc, place) == "zero_class"
    # direct kernel dimension oracle: scan all of Z^1 reduced against B^1
    z1, b1, _ = cocycle_space(group, mod)
    locally_trivial = []
    for z in z1:
        coc = Cocycle(mod, _vec_to_values(group, mod, z))
        if all(restrict_and_classify(coc, p) == "zero_class" for p in places):
            locally_trivial.append(z)
    # dimension of the span of locally-trivial basis vectors beyond B^1;
    # (scanning basis vectors only undercounts in general, so compare spans)
    stacked = [list(r) for r in b1] + [list(v) for v in sha]
    for z in locally_trivial:
        assert linalg.rank(stacked + [list(z)]) == linalg.rank(stacked)


# ---------------------------------------------------------------------------
# relator defects and lift_solve


def _trivial_lifts(rho, m1):
    lifts = {}
    for name in rho.group.generators:
        lifted = rho.image(name).lift_trivial(m1)
        lifts[name] = normalize_det(rho.group, name, lifted)
    return lifts


def test_relator_defects_zero_for_true_lift():
    rho = deformation_tame(2)
    lifts = {g: deformation_tame(3).image(g) for g in rho.group.generators}
    defects = relator_defects(rho, lifts)
    assert all(all(x.is_zero() for x in z) for z in defects)


def test_relator_defects_rejects_non_reducing_lift():
    rho = deformation_tame(2)
    lifts = {g: deformation_tame(3).image(g) for g in rho.group.generators}
    ring3 = lifts["s"].ring
    lifts["s"] = lifts["s"] + Mat.from_ints(ring3, [[1, 0], [0, 0]])
    with pytest.raises(LiftsDoNotReduce):
        relator_defects(rho, lifts)


def test_lift_solve_plug_back_seeded_defects():
    rng = random.Random(1234)
    group = surrogate_tame()
    for trial in range(10):
        m = rng.choice([1, 2, 3])
        rho = deformation_tame(m)
        lifts = _trivial_lifts(rho, m + 1)
        # seed a defect: multiply one generator lift by I + l^m * (trace-zero)
        name = rng.choice(group.generators)
        ring1 = lifts[name].ring
        lm = 5 ** m
        a, b, c = (rng.randrange(5) for _ in range(3))
        bad = Mat.from_ints(ring1, [[1 + lm * a, lm * b],
                                    [lm * c, 1 - lm * a]])
        lifts[name] = bad * lifts[name]
        module = build_module(rho.reduce(1), 1)
        defects = relator_defects(rho, lifts)
        res = lift_solve(group, module, defects)
        assert res.ok
        fixed = apply_adjustment(lifts, res.adjustment, m)
        for rel in group.relators:
            acc = Mat.identity(ring1, 2)
            for gname, e in rel:
                acc = acc * (fixed[gname] ** e)
            assert acc.is_identity()


def test_lift_solve_defect_trace_must_vanish():
    rho = deformation_tame(2)
    lifts = _trivial_lifts(rho, 3)
    ring3 = lifts["s"].ring
    # break the determinant on purpose: defect extraction must refuse
    lifts["t"] = Mat.from_ints(ring3, [[1 + 25, 1], [0, 1]])
    with pytest.raises(DetNotEpsilon):
        relator_defects(rho, lifts)


def test_check_cocycle_raises_on_junk():
    group = surrogate_tame()
    rho = residual_tame()
    module = build_module(rho, 1)
    one = cr.ff_one(F5)
    zero = cr.ff_zero(F5)
    bad = {g: (one, zero, zero) for g in group.generators}
    with pytest.raises(NotACocycle):
        check_cocycle(group, module, bad)
