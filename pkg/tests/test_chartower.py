import random

import pytest

from covertower import (
    CharCertificate,
    CharSubgroup,
    GenericPresentation,
    IndexOverflow,
    IntersectionIndexOverflow,
    NotInvariant,
    SurfacePresentation,
    apply_automorphism,
    build_char_tower,
    builtin_test_automorphisms,
    canonicalize,
    char_core,
    char_core_within,
    char_order,
    contains,
    deck_group,
    fiber_product_preserves_char,
    flatten_cover_subgroup,
    free_reduce,
    full_subgroup,
    handle_swap,
    hom_enumeration,
    homology_cover,
    inner_automorphism,
    intersect,
    is_identity,
    is_invariant_under,
    is_normal,
    is_subgroup_of,
    kernel_subgroup,
    low_index_subgroups,
    make_subgroup,
    reidemeister_schreier,
    restrict_aut,
    restrict_to_cover,
    twisted_subgroup,
    verify_certificate,
    words_equal,
)
from covertower.cosets import Subgroup


def _random_word(rng, k, max_len):
    return free_reduce(
        rng.choice([1, -1]) * rng.randint(1, k) for _ in range(rng.randint(0, max_len))
    )


def test_automorphisms_round_trip():
    rng = random.Random(3)
    for genus in (2, 3):
        pres = SurfacePresentation(genus)
        for phi in builtin_test_automorphisms(pres):
            assert phi.verified
            for _ in range(25):
                w = _random_word(rng, 2 * genus, 10)
                back = apply_automorphism(phi, apply_automorphism(phi, w), inverse=True)
                assert words_equal(pres, back, w)


def test_handle_swap_moves_the_first_handle(pres2):
    phi = handle_swap(pres2)
    assert apply_automorphism(phi, (1,)) == (3,)
    assert apply_automorphism(phi, (2,)) == (4,)


def test_inner_automorphism_matches_conjugation(pres2):
    phi = inner_automorphism(pres2, (1, 2))
    assert words_equal(pres2, apply_automorphism(phi, (3,)), (1, 2, 3, -2, -1))


def test_hom_enumeration_counts(pres2):
    assert len(hom_enumeration(pres2, 1)) == 1
    assert len(hom_enumeration(pres2, 2)) == 16


def test_hom_enumeration_generic_route_agrees(pres2):
    # The surface-specific enumeration must produce exactly the same
    # assignments as the generic filtered scan over the same relator.
    generic = GenericPresentation(pres2.generator_count, pres2.relators)
    fast = set(hom_enumeration(pres2, 2))
    slow = set(hom_enumeration(generic, 2))
    assert fast == slow


def test_kernel_subgroup(pres2):
    trivial = kernel_subgroup(pres2, [(0, 1)] * 4)
    assert trivial.index == 1
    three_cycle = kernel_subgroup(pres2, [(1, 2, 0), (0, 1, 2), (0, 1, 2), (0, 1, 2)])
    assert three_cycle.index == 3
    assert is_normal(three_cycle)


def test_char_core_of_index_two_is_the_homology_cover(pres2, index_two_subgroups):
    cover = homology_cover(pres2, 2)
    for sub in index_two_subgroups[:4]:
        core = char_core(sub)
        assert canonicalize(core.subgroup) == canonicalize(cover.subgroup)
        assert core.certificate.kind == "hom-kernel-intersection"
        assert core.certificate.level == 2
        assert verify_certificate(core)


def test_char_core_at_index_three_overflows(pres2):
    sub = next(s for s in low_index_subgroups(pres2, 3) if s.index == 3)
    with pytest.raises(IntersectionIndexOverflow):
        char_core(sub)


def test_homology_covers(pres2):
    assert homology_cover(pres2, 1).subgroup.index == 1
    two = homology_cover(pres2, 2)
    assert two.subgroup.index == 16
    assert two.certificate.kind == "homology-level"
    assert two.certificate.level == 2
    assert verify_certificate(two)
    three = homology_cover(pres2, 3)
    assert three.subgroup.index == 81
    assert deck_group(three.subgroup).exponent == 3
    four = homology_cover(pres2, 4)
    assert four.subgroup.index == 256
    assert deck_group(four.subgroup).exponent == 4
    with pytest.raises(IndexOverflow):
        homology_cover(pres2, 11)


def test_generator_commutators_lie_in_every_homology_cover(pres2):
    for n in (2, 3):
        cover = homology_cover(pres2, n).subgroup
        for i in range(1, 5):
            for j in range(1, 5):
                assert contains(cover, (i, j, -i, -j))


def test_fiber_product_of_homology_levels(pres2):
    two = homology_cover(pres2, 2)
    three = homology_cover(pres2, 3)
    six = fiber_product_preserves_char(two, three)
    assert six.certificate.kind == "homology-level"
    assert six.certificate.level == 6
    assert canonicalize(six.subgroup) == canonicalize(homology_cover(pres2, 6).subgroup)
    assert verify_certificate(six)


def test_fiber_product_reuses_parent_certificate(pres2):
    two = homology_cover(pres2, 2)
    four = homology_cover(pres2, 4)
    nested = fiber_product_preserves_char(two, four)
    assert canonicalize(nested.subgroup) == canonicalize(four.subgroup)
    assert nested.certificate.level == 4


def test_fiber_product_generic_certificate(pres2, index_two_subgroups):
    core = char_core(index_two_subgroups[0])
    three = homology_cover(pres2, 3)
    mixed = fiber_product_preserves_char(core, three)
    assert mixed.certificate.kind == "intersection"
    assert len(mixed.certificate.parents) == 2
    assert mixed.subgroup.index == 16 * 81
    assert verify_certificate(mixed)


def test_tampered_certificate_fails_verification(pres2):
    two = homology_cover(pres2, 2)
    forged = CharSubgroup(two.subgroup, CharCertificate("homology-level", level=3))
    assert not verify_certificate(forged)


def _f2_reduce(vector, basis):
    for pivot, row in basis.items():
        if vector >> pivot & 1:
            vector ^= row
    return vector


def test_char_core_within_matches_mod_two_linear_algebra(index_two_subgroups):
    # Relative core at relative index 2 is the mod-2 homology cover of the
    # cover group; rebuild it from scratch with bitmask linear algebra.
    ambient = index_two_subgroups[0]
    inner = intersect(ambient, index_two_subgroups[1])
    within = char_core_within(ambient, inner)
    assert within.certificate.kind == "hom-kernel-intersection"

    pres = reidemeister_schreier(ambient)
    m = pres.generator_count
    basis = {}
    for relator in pres.relators:
        vector = 0
        for x in relator:
            vector ^= 1 << (abs(x) - 1)
        vector = _f2_reduce(vector, basis)
        if vector:
            basis[vector.bit_length() - 1] = vector
    classes = sorted({_f2_reduce(v, basis) for v in range(1 << m)})
    assert len(classes) == 64
    position = {rep: i for i, rep in enumerate(classes)}
    table = tuple(
        tuple(position[_f2_reduce(rep ^ (1 << j), basis)] for j in range(m))
        for rep in classes
    )
    oracle = canonicalize(Subgroup(pres, table, position[0]))
    assert canonicalize(within.relative) == oracle
    assert canonicalize(within.absolute) == canonicalize(
        flatten_cover_subgroup(ambient, oracle)
    )
    assert is_subgroup_of(within.absolute, inner)
    assert within.absolute.index == 128


def test_char_order_tri_state(pres2, index_two_subgroups):
    full = full_subgroup(pres2)
    h = index_two_subgroups[0]
    k2 = homology_cover(pres2, 2)
    assert char_order(k2, full) == "yes"
    assert char_order(h, h) == "yes"
    assert char_order(h, index_two_subgroups[1]) == "no"
    non_normal = next(
        s for s in low_index_subgroups(pres2, 3) if s.index == 3 and not is_normal(s)
    )
    assert char_order(non_normal, full) == "no"
    assert char_order(k2.subgroup, h) == "unknown"


def test_invariance_and_restriction(pres2, index_two_subgroups):
    cover = homology_cover(pres2, 2).subgroup
    auts = builtin_test_automorphisms(pres2)
    assert is_invariant_under(cover, auts)
    restricted = restrict_aut(handle_swap(pres2), cover)
    assert len(restricted.images) == 49
    for image in restricted.images:
        assert contains(cover, image)
    h = index_two_subgroups[0]
    assert not is_invariant_under(h, (handle_swap(pres2),))
    with pytest.raises(NotInvariant):
        restrict_aut(handle_swap(pres2), h)


def test_build_char_tower(pres2):
    tower = build_char_tower(
        pres2, [{"kind": "homology", "n": 2}, {"kind": "homology", "n": 4}]
    )
    degrees = sorted(node.degree for node in tower.nodes)
    assert degrees == [1, 16, 256]
    genera = sorted(node.genus for node in tower.nodes)
    assert genera == [2, 17, 257]
    tags = {}
    for edge in tower.edges:
        sub_deg = tower.node(edge.sub).degree
        sup_deg = tower.node(edge.super).degree
        assert sub_deg == edge.relative_degree * sup_deg
        tags[(sub_deg, sup_deg)] = edge.char_tag
    assert tags[(16, 1)] == "yes"
    assert tags[(256, 1)] == "yes"
    assert tags[(256, 16)] == "unknown"


def test_tower_rejects_non_invariant_bare_subgroup(pres2, index_two_subgroups):
    with pytest.raises(NotInvariant):
        build_char_tower(
            pres2, [{"kind": "subgroup", "subgroup": index_two_subgroups[0]}]
        )


def test_tower_accepts_invariant_bare_subgroup(pres2):
    cover = homology_cover(pres2, 2).subgroup
    tower = build_char_tower(pres2, [{"kind": "subgroup", "subgroup": cover}])
    node = next(nd for nd in tower.nodes if nd.degree == 16)
    assert node.char.certificate.kind == "supplied-aut-invariance"
    assert node.char.certificate.partial
    assert verify_certificate(node.char)


def test_char_core_step_in_tower(pres2):
    tower = build_char_tower(
        pres2, [{"kind": "char-core", "index": 2, "ordinal": 0}]
    )
    cover = homology_cover(pres2, 2).subgroup
    node = next(nd for nd in tower.nodes if nd.degree == 16)
    assert canonicalize(node.char.subgroup) == canonicalize(cover)
