"""Exact arithmetic for towers of finite coverings of compact surfaces.

Subgroups of surface groups are concrete coset tables; towers of
characteristic covers, virtual automorphisms between finite-index
subgroups, the torus model on the upper half-plane, and the rational
bundle-exponent ledger are all built from them with certified, replayable
arithmetic.
"""

from .config import DEFAULT_CONFIG, RunConfig
from .errors import (
    BudgetExceeded,
    CovertowerError,
    IdentificationInvalid,
    IncompatibleTower,
    InconsistentInput,
    IndexOverflow,
    IntersectionIndexOverflow,
    NotAnIsomorphism,
    NotInvariant,
    NotInvertible,
    NotNormal,
    NotRestrictable,
    NotTransitive,
    RelatorViolated,
    SchemaError,
    SingularMatrix,
)
from .words import (
    GenericPresentation,
    SurfacePresentation,
    Word,
    commutator_word,
    concat,
    conjugate_word,
    dehn_reduce,
    free_reduce,
    inverse_word,
    is_identity,
    words_equal,
)
from .cosets import (
    CoveringArrow,
    DeckGroup,
    Subgroup,
    canonicalize,
    conjugate_subgroup,
    contains,
    covering_genus,
    deck_group,
    evaluate_schreier_word,
    factor_through,
    flatten_cover_subgroup,
    full_subgroup,
    intersect,
    is_normal,
    is_subgroup_of,
    make_subgroup,
    reidemeister_schreier,
    restrict_to_cover,
    rewrite_in_schreier_generators,
    schreier_generators,
    twisted_subgroup,
)
from .enumerate import low_index_subgroups
from .chartower import (
    Automorphism,
    CharCertificate,
    CharSubgroup,
    RelativeCharSubgroup,
    TowerEdge,
    TowerGraph,
    TowerNode,
    apply_automorphism,
    build_char_tower,
    builtin_test_automorphisms,
    char_core,
    char_core_within,
    char_order,
    cofinality_witness,
    fiber_product_preserves_char,
    handle_swap,
    hom_enumeration,
    homology_cover,
    inner_automorphism,
    is_invariant_under,
    kernel_subgroup,
    restrict_aut,
    verify_certificate,
)
from .vaut import (
    CyclePath,
    RebasedVaut,
    TwoArrowCycle,
    VirtualAutomorphism,
    apply_rebased,
    apply_vaut,
    apply_vaut_inverse,
    bounded_mcl_search,
    caut_witness,
    compose,
    cycle_from_subgroups,
    from_two_arrow,
    generation_certified,
    germ_equals,
    identity_vaut,
    inverse,
    is_mcl_witness,
    preimage_subgroup,
    rebase_back,
    rebase_vaut,
    reduce_cycle,
    validate_vaut,
    vaut_from_automorphism,
)
from .genus_one import (
    RationalMobius,
    SublatticeMatrix,
    UpperHalfPoint,
    act,
    compose_mobius,
    covering_modulus_map,
    dense_orbit_approx,
    hnf,
    i_point,
    identity_mobius,
    mobius_from_integer_matrix,
    mobius_from_rational_matrix,
    vaut_as_matrix,
)
from .io import (
    canonical_json_bytes,
    char_subgroup_from_doc,
    content_hash,
    cycle_doc,
    cycle_from_doc,
    load_doc,
    store_doc,
    subgroup_doc,
    subgroup_from_doc,
    tower_doc,
    tower_dot,
    tower_from_doc,
    vaut_doc,
    vaut_from_doc,
    workspace_dir,
)
from .ledger import (
    BundleClass,
    CurvatureClass,
    PicTorsionInfo,
    StratumLabel,
    UniversalBundle,
    check_composition_diagram,
    curvature_of,
    descent_factor,
    hurwitz_bound,
    ledger_report,
    mumford_exponent,
    pic_structure,
    pullback_exponent,
    serre_dual,
    tensor_bundles,
    torsion_residue,
    universal_bundle,
    universal_mumford_check,
    wp_coherence,
    wp_limit_scale,
    wp_pullback_coefficient,
)

__version__ = "0.1.0"
