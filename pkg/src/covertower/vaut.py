"""Virtual automorphisms: isomorphisms between finite-index subgroups.

A virtual automorphism is stored by its images on the Schreier generators
of its domain, as words in the ambient group.  Two of them are germ-equal
when they agree on the common restriction of their domains; since both are
homomorphisms and the ambient surface group has unique roots, agreement on
the Schreier generators of the intersection already pins the germ.

Verification of "the images generate the codomain" is exact and needs no
coset enumeration from generator sets: the image subgroup M of a
homomorphism from a genus-h surface group is either of finite index in the
codomain K or free of rank at most h (a free quotient of a closed surface
group has rank at most half its first Betti number, by the isotropy of the
pulled-back cup product).  If the images span a subspace of H_1(K, Z/2) of
dimension at least h+1, the free case is excluded, finite index forces
M = K by comparing first Betti numbers, and Hopficity upgrades the map to
an isomorphism.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .config import DEFAULT_CONFIG, RunConfig
from .cosets import (
    CoveringArrow,
    SchreierSystem,
    Subgroup,
    canonicalize,
    contains,
    evaluate_schreier_word,
    factor_through,
    flatten_cover_subgroup,
    full_subgroup,
    intersect,
    is_subgroup_of,
    reidemeister_schreier,
    restrict_to_cover,
    rewrite_in_schreier_generators,
    schreier_generators,
    schreier_system,
)
from .chartower import Automorphism, CharSubgroup, apply_automorphism
from .errors import (
    BudgetExceeded,
    IdentificationInvalid,
    IndexOverflow,
    NotInvertible,
    NotRestrictable,
)
from .words import (
    GenericPresentation,
    SurfacePresentation,
    Word,
    free_reduce,
    inverse_word,
    words_equal,
)


@dataclass(frozen=True)
class VirtualAutomorphism:
    """Isomorphism domain -> codomain between equal-index subgroups.

    ``images[i]`` is the image of the i-th Schreier generator of the
    (canonical) domain, written in ambient letters.  ``inverse_images``
    are the corresponding witnesses for the codomain's Schreier
    generators; constructors in this module always supply them.
    """

    domain: Subgroup
    codomain: Subgroup
    images: tuple[Word, ...]
    inverse_images: Optional[tuple[Word, ...]] = None


@dataclass(frozen=True)
class RebasedVaut:
    """A virtual automorphism expressed over a cover's own presentation."""

    cover: Subgroup
    vaut: VirtualAutomorphism


# ---------------------------------------------------------------------------
# Mod-2 homology of a cover, used for the generation certificate.


def _f2_rank(vectors: Iterable[int]) -> int:
    pivots: dict[int, int] = {}
    rank = 0
    for v in vectors:
        while v:
            msb = v.bit_length() - 1
            if msb in pivots:
                v ^= pivots[msb]
            else:
                pivots[msb] = v
                rank += 1
                break
    return rank


def _pack(bits: Sequence[int]) -> int:
    out = 0
    for i, b in enumerate(bits):
        if b % 2:
            out |= 1 << i
    return out


def _exponent_row_mod2(m: int, w: Iterable[int]) -> int:
    bits = [0] * m
    for x in w:
        bits[abs(x) - 1] ^= 1
    return _pack(bits)


def _h1_mod2(sub: Subgroup) -> tuple[int, list[int]]:
    """(#Schreier generators, relator exponent rows mod 2) for a cover."""
    pres = reidemeister_schreier(sub)
    rows = [_exponent_row_mod2(pres.generator_count, r) for r in pres.relators]
    return pres.generator_count, rows


def generation_certified(target: Subgroup, images: Sequence[Word]) -> bool:
    """True iff the images provably generate ``target``.

    Every image must already be a member.  The certificate is the span
    condition described in the module docstring; it passes for any
    generating set and never passes for a non-generating image of an
    equal-genus surface group.
    """
    target = canonicalize(target)
    for w in images:
        if not contains(target, w):
            return False
    m, rel_rows = _h1_mod2(target)
    rel_rank = _f2_rank(rel_rows)
    h1_dim = m - rel_rank
    assert h1_dim % 2 == 0, "covers of surfaces have even first Betti number"
    genus = h1_dim // 2
    img_rows = [
        _exponent_row_mod2(m, rewrite_in_schreier_generators(target, w))
        for w in images
    ]
    span = _f2_rank(rel_rows + img_rows) - rel_rank
    return span >= genus + 1


# ---------------------------------------------------------------------------
# Evaluation and validation.


def _base_context(v: VirtualAutomorphism, cover: Optional[Subgroup]):
    """Return (surface presentation, eval-to-base function)."""
    if cover is None:
        pres = v.domain.pres
        if not isinstance(pres, SurfacePresentation):
            raise ValueError("cover-based vaut needs its cover for evaluation")
        return pres, lambda w: tuple(w)
    cover = canonicalize(cover)
    if not isinstance(cover.pres, SurfacePresentation):
        raise ValueError("cover must live over a surface presentation")
    system = schreier_system(cover)
    return cover.pres, lambda w: evaluate_schreier_word(system, w)


def _substitute(images: Sequence[Word], word_over_indices: Iterable[int]) -> Word:
    out: list[int] = []
    for x in word_over_indices:
        img = images[abs(x) - 1]
        out.extend(img if x > 0 else inverse_word(img))
    return free_reduce(out)


def apply_vaut(v: VirtualAutomorphism, w: Iterable[int]) -> Word:
    """Image of a domain element: rewrite in Schreier generators, substitute."""
    return _substitute(v.images, rewrite_in_schreier_generators(v.domain, w))


def apply_vaut_inverse(v: VirtualAutomorphism, w: Iterable[int]) -> Word:
    if v.inverse_images is None:
        raise NotInvertible("no inverse witnesses attached")
    return _substitute(
        v.inverse_images, rewrite_in_schreier_generators(v.codomain, w)
    )


def validate_vaut(
    v: VirtualAutomorphism,
    config: Optional[RunConfig] = None,
    cover: Optional[Subgroup] = None,
) -> None:
    """Raise IdentificationInvalid unless v is a certified isomorphism."""
    base, to_base = _base_context(v, cover)
    dom = canonicalize(v.domain)
    cod = canonicalize(v.codomain)
    if dom.pres != cod.pres:
        raise IdentificationInvalid("domain and codomain over different presentations")
    if dom.index != cod.index:
        raise IdentificationInvalid(
            f"index mismatch: {dom.index} vs {cod.index}"
        )
    gens = schreier_generators(dom)
    if len(v.images) != len(gens):
        raise IdentificationInvalid("one image per domain Schreier generator required")
    for w in v.images:
        if not contains(cod, w):
            raise IdentificationInvalid("an image leaves the codomain")
    rs = reidemeister_schreier(dom)
    for r in rs.relators:
        if not words_equal(base, to_base(_substitute(v.images, r)), ()):
            raise IdentificationInvalid("images violate a rewritten relator")
    if not generation_certified(cod, v.images):
        raise IdentificationInvalid("images are not certified to generate the codomain")
    if v.inverse_images is not None:
        cogens = schreier_generators(cod)
        if len(v.inverse_images) != len(cogens):
            raise IdentificationInvalid("one witness per codomain Schreier generator")
        for w in v.inverse_images:
            if not contains(dom, w):
                raise IdentificationInvalid("an inverse witness leaves the domain")
        for s in gens:
            back = _substitute(
                v.inverse_images, rewrite_in_schreier_generators(cod, _substitute(v.images, rewrite_in_schreier_generators(dom, s)))
            )
            if not words_equal(base, to_base(back), to_base(s)):
                raise IdentificationInvalid("inverse witnesses do not undo the map")
        for t in cogens:
            forth = _substitute(
                v.images, rewrite_in_schreier_generators(dom, _substitute(v.inverse_images, rewrite_in_schreier_generators(cod, t)))
            )
            if not words_equal(base, to_base(forth), to_base(t)):
                raise IdentificationInvalid("the map does not undo its inverse witnesses")


# ---------------------------------------------------------------------------
# Constructors.


def identity_vaut(sub: Subgroup) -> VirtualAutomorphism:
    sub = canonicalize(sub)
    gens = schreier_generators(sub)
    return VirtualAutomorphism(sub, sub, gens, gens)


@dataclass(frozen=True)
class TwoArrowCycle:
    """Two covering arrows out of a common cover, plus identification data.

    ``forward`` gives, for each Schreier generator of ``alpha``, its image
    in ``beta`` as an ambient word; ``backward`` goes the other way.  When
    alpha equals beta the identity identification may be left implicit.
    """

    alpha: Subgroup
    beta: Subgroup
    forward: Optional[tuple[Word, ...]] = None
    backward: Optional[tuple[Word, ...]] = None


def from_two_arrow(
    cycle: TwoArrowCycle, config: Optional[RunConfig] = None
) -> VirtualAutomorphism:
    cfg = config or DEFAULT_CONFIG
    alpha = canonicalize(cycle.alpha)
    beta = canonicalize(cycle.beta)
    if alpha.pres != beta.pres:
        raise IdentificationInvalid("arrows over different presentations")
    if alpha.index != beta.index:
        raise IdentificationInvalid(
            "covers of different degree admit no identification"
        )
    if cycle.forward is None:
        if alpha != beta:
            raise IdentificationInvalid(
                "identification must be supplied for distinct covers"
            )
        return identity_vaut(alpha)
    v = VirtualAutomorphism(alpha, beta, cycle.forward, cycle.backward)
    try:
        validate_vaut(v, cfg)
    except IdentificationInvalid:
        raise
    except (ValueError, KeyError) as exc:
        raise IdentificationInvalid(str(exc)) from exc
    return v


def vaut_from_automorphism(
    phi: Automorphism, domain: Subgroup, config: Optional[RunConfig] = None
) -> VirtualAutomorphism:
    """Restrict a verified ambient automorphism to a finite-index subgroup."""
    from .cosets import twisted_subgroup

    if not phi.verified:
        raise ValueError("automorphism must carry verified inverse images")
    domain = canonicalize(domain)
    codomain = twisted_subgroup(domain, tuple(phi.inverse_images))
    images = tuple(apply_automorphism(phi, s) for s in schreier_generators(domain))
    inverse_images = tuple(
        apply_automorphism(phi, t, inverse=True)
        for t in schreier_generators(codomain)
    )
    v = VirtualAutomorphism(domain, codomain, images, inverse_images)
    validate_vaut(v, config)
    return v


# ---------------------------------------------------------------------------
# Germ arithmetic.


def germ_equals(
    v: VirtualAutomorphism,
    w: VirtualAutomorphism,
    within: Optional[Subgroup] = None,
) -> bool:
    """Agreement on the Schreier generators of the common domain.

    ``within`` optionally deepens the comparison subgroup; by unique root
    extraction in the ambient surface group, generator-level agreement on
    any finite-index subgroup already decides the germ.
    """
    pres = v.domain.pres
    if not isinstance(pres, SurfacePresentation):
        raise ValueError("germ comparison works over the base surface group")
    if w.domain.pres != pres:
        return False
    common = intersect(v.domain, w.domain)
    if within is not None:
        common = intersect(common, within)
    for s in schreier_generators(common):
        if not words_equal(pres, apply_vaut(v, s), apply_vaut(w, s)):
            return False
    return True


def preimage_subgroup(v: VirtualAutomorphism, s: Subgroup) -> Subgroup:
    """{h in domain : v(h) in s}, as a subgroup of the ambient group."""
    dom = canonicalize(v.domain)
    s = canonicalize(s)
    if s.pres != dom.pres:
        raise ValueError("target subgroup over a different presentation")
    perms = [tuple(s.act_word(c, img) for c in range(s.index)) for img in v.images]
    inv_perms = []
    for p in perms:
        q = [0] * len(p)
        for i, x in enumerate(p):
            q[x] = i
        inv_perms.append(tuple(q))
    start = s.basepoint
    label = {start: 0}
    order = [start]
    queue = [start]
    while queue:
        c = queue.pop(0)
        for p in perms:
            for d in (p[c],):
                if d not in label:
                    label[d] = len(order)
                    order.append(d)
                    queue.append(d)
        for p in inv_perms:
            if p[c] not in label:
                label[p[c]] = len(order)
                order.append(p[c])
                queue.append(p[c])
    table = tuple(
        tuple(label[perms[i][c]] for i in range(len(perms))) for c in order
    )
    rel = canonicalize(Subgroup(reidemeister_schreier(dom), table, 0))
    return flatten_cover_subgroup(dom, rel)


def inverse(
    v: VirtualAutomorphism, config: Optional[RunConfig] = None
) -> VirtualAutomorphism:
    """Swap domain and codomain using the inverse witnesses.

    Without witnesses a bounded product search tries to express each
    codomain Schreier generator in the images; small cases (identities,
    restrictions of ambient automorphisms) resolve quickly, anything
    deeper raises NotInvertible.
    """
    cfg = config or DEFAULT_CONFIG
    if v.inverse_images is not None:
        return VirtualAutomorphism(
            canonicalize(v.codomain), canonicalize(v.domain), v.inverse_images, v.images
        )
    pres = v.domain.pres
    if not isinstance(pres, SurfacePresentation):
        raise NotInvertible("witness-free inversion needs the base surface group")
    dom = canonicalize(v.domain)
    cod = canonicalize(v.codomain)
    dom_gens = schreier_generators(dom)
    targets = schreier_generators(cod)
    m = len(v.images)
    budget = 200_000
    alphabet = [(i + 1, v.images[i]) for i in range(m)] + [
        (-(i + 1), inverse_word(v.images[i])) for i in range(m)
    ]
    solved: list[Optional[Word]] = [None] * len(targets)
    frontier: list[tuple[tuple[int, ...], Word]] = [((), ())]
    seen = 0
    for _ in range(cfg.max_solve_length):
        new_frontier = []
        for prefix, value in frontier:
            for sym, img in alphabet:
                seen += 1
                if seen > budget:
                    raise NotInvertible("bounded inverse search exhausted its budget")
                word = prefix + (sym,)
                val = free_reduce(value + img)
                for t_i, t in enumerate(targets):
                    if solved[t_i] is None and words_equal(pres, val, t):
                        witness = _substitute(
                            [dom_gens[i] for i in range(m)], word
                        )
                        solved[t_i] = witness
                new_frontier.append((word, val))
        frontier = new_frontier
        if all(s is not None for s in solved):
            break
    if any(s is None for s in solved):
        raise NotInvertible("no inverse witness found within the length bound")
    out = VirtualAutomorphism(cod, dom, tuple(solved), v.images)  # type: ignore[arg-type]
    validate_vaut(out, cfg)
    return out


def compose(
    v: VirtualAutomorphism,
    w: VirtualAutomorphism,
    config: Optional[RunConfig] = None,
) -> VirtualAutomorphism:
    """Apply v first, then w, on the largest domain where that makes sense."""
    cfg = config or DEFAULT_CONFIG
    overlap = intersect(v.codomain, w.domain)
    new_domain = preimage_subgroup(v, overlap)
    images = tuple(
        apply_vaut(w, apply_vaut(v, s)) for s in schreier_generators(new_domain)
    )
    w_inv = inverse(w, cfg)
    v_inv = inverse(v, cfg)
    new_codomain = preimage_subgroup(w_inv, overlap)
    inverse_images = tuple(
        apply_vaut(v_inv, apply_vaut(w_inv, t))
        for t in schreier_generators(new_codomain)
    )
    out = VirtualAutomorphism(new_domain, new_codomain, images, inverse_images)
    validate_vaut(out, cfg)
    return out


# ---------------------------------------------------------------------------
# Cycles of covering arrows.


@dataclass(frozen=True)
class CyclePath:
    """Alternating traversal of covering arrows, closing up at the root."""

    legs: tuple[tuple[CoveringArrow, str], ...]  # direction "down" | "up"

    def validate(self) -> None:
        if not self.legs:
            raise ValueError("empty cycle")
        pres = self.legs[0][0].sub.pres
        current = full_subgroup(pres)
        for arrow, direction in self.legs:
            if direction == "down":
                if canonicalize(arrow.super) != current:
                    raise ValueError("down-leg does not start at the current cover")
                current = canonicalize(arrow.sub)
            elif direction == "up":
                if canonicalize(arrow.sub) != current:
                    raise ValueError("up-leg does not start at the current cover")
                current = canonicalize(arrow.super)
            else:
                raise ValueError(f"bad direction {direction!r}")
        if current != full_subgroup(pres):
            raise ValueError("cycle does not close up at the root")


def cycle_from_subgroups(subgroups: Sequence[Subgroup]) -> CyclePath:
    """Down-up zigzag through a list of nested hops.

    ``subgroups`` lists the covers visited between root visits, e.g.
    [H1, C, H2] produces root -> H1 -> C -> H2 -> root with arrows
    (H1 <= root), (C <= H1), (C <= H2), (H2 <= root).
    """
    if len(subgroups) % 2 == 0:
        raise ValueError("need an odd number of intermediate covers")
    pres = subgroups[0].pres
    root = full_subgroup(pres)
    chain = [root] + [canonicalize(s) for s in subgroups] + [root]
    legs: list[tuple[CoveringArrow, str]] = []
    for a, b in zip(chain, chain[1:]):
        arrow_down = factor_through(b, a)
        if arrow_down is not None:
            legs.append((arrow_down, "down"))
            continue
        arrow_up = factor_through(a, b)
        if arrow_up is None:
            raise ValueError("consecutive covers are not nested")
        legs.append((arrow_up, "up"))
    path = CyclePath(tuple(legs))
    path.validate()
    return path


def reduce_cycle(
    path: CyclePath,
    order: str = "left",
    config: Optional[RunConfig] = None,
) -> TwoArrowCycle:
    """Collapse a cycle to a two-arrow cycle by iterated fiber products.

    Each leg contributes the germ of its covering arrow; the legs are
    composed left-to-right or right-to-left according to ``order``, and
    both orders produce germ-equal results.
    """
    cfg = config or DEFAULT_CONFIG
    path.validate()
    germs = [identity_vaut(arrow.sub) for arrow, _ in path.legs]
    if order == "left":
        acc = germs[0]
        for nxt in germs[1:]:
            acc = compose(acc, nxt, cfg)
    elif order == "right":
        acc = germs[-1]
        for prv in reversed(germs[:-1]):
            acc = compose(prv, acc, cfg)
    else:
        raise ValueError(f"unknown reduction order {order!r}")
    return TwoArrowCycle(acc.domain, acc.codomain, acc.images, acc.inverse_images)


# ---------------------------------------------------------------------------
# Mapping-class-like witnesses.


def is_mcl_witness(v: VirtualAutomorphism, candidate: Subgroup) -> bool:
    """True iff v maps ``candidate`` onto itself setwise.

    The candidate must be contained in the domain for the restriction to
    exist; otherwise this representative does not witness anything and the
    answer is False.
    """
    candidate = canonicalize(candidate)
    if candidate.pres != v.domain.pres:
        return False
    if not is_subgroup_of(candidate, v.domain):
        return False
    images = [apply_vaut(v, s) for s in schreier_generators(candidate)]
    for w in images:
        if not contains(candidate, w):
            return False
    return generation_certified(candidate, images)


def bounded_mcl_search(
    v: VirtualAutomorphism,
    depth: int,
    config: Optional[RunConfig] = None,
) -> Optional[Subgroup]:
    """Search iterated intersections of v-translates for a setwise-fixed
    subgroup; None means no witness found at this depth, not a refutation."""
    cfg = config or DEFAULT_CONFIG
    try:
        v_inv = inverse(v, cfg)
    except NotInvertible:
        v_inv = None
    candidate = canonicalize(v.domain)
    for _ in range(max(depth, 0) + 1):
        if is_mcl_witness(v, candidate):
            return candidate
        if v_inv is None:
            return None
        try:
            clipped = intersect(candidate, v.domain, cfg.max_result_index)
            image = preimage_subgroup(v_inv, clipped)
            candidate = intersect(candidate, image, cfg.max_result_index)
        except IndexOverflow as exc:
            raise BudgetExceeded(str(exc)) from exc
    return None


def caut_witness(v: VirtualAutomorphism, char: CharSubgroup) -> bool:
    """True iff v setwise fixes the given certified characteristic subgroup."""
    sub = canonicalize(char.subgroup)
    if not is_subgroup_of(sub, canonicalize(v.domain)):
        return False
    return is_mcl_witness(v, sub)


# ---------------------------------------------------------------------------
# Rebasing a germ over a chosen cover.


def rebase_vaut(
    v: VirtualAutomorphism,
    cover: Subgroup,
    restrict: bool = True,
    config: Optional[RunConfig] = None,
) -> RebasedVaut:
    """Express the germ of v over the presentation of ``cover``.

    With ``restrict`` the domain is first germ-restricted to the largest
    subgroup mapped into the cover from inside it; without it, domain and
    codomain must already be contained in the cover or NotRestrictable is
    raised.
    """
    cfg = config or DEFAULT_CONFIG
    cover = canonicalize(cover)
    dom = canonicalize(v.domain)
    cod = canonicalize(v.codomain)
    if not restrict:
        if not (is_subgroup_of(dom, cover) and is_subgroup_of(cod, cover)):
            raise NotRestrictable(
                "domain or codomain is not contained in the requested cover"
            )
        small = dom
    else:
        into = preimage_subgroup(v, cover)
        small = intersect(into, cover)
    v_inv = inverse(v, cfg)
    image = preimage_subgroup(v_inv, small)
    system = schreier_system(cover)
    rel_dom = restrict_to_cover(small, cover)
    rel_cod = restrict_to_cover(image, cover)
    images = []
    for gen in schreier_generators(rel_dom):
        base_word = evaluate_schreier_word(system, gen)
        img = apply_vaut(v, base_word)
        images.append(rewrite_in_schreier_generators(cover, img))
    inverse_images = []
    for gen in schreier_generators(rel_cod):
        base_word = evaluate_schreier_word(system, gen)
        img = apply_vaut(v_inv, base_word)
        inverse_images.append(rewrite_in_schreier_generators(cover, img))
    out = VirtualAutomorphism(
        rel_dom, rel_cod, tuple(images), tuple(inverse_images)
    )
    validate_vaut(out, cfg, cover=cover)
    return RebasedVaut(cover, out)


def apply_rebased(rb: RebasedVaut, w: Iterable[int]) -> Word:
    """Apply a rebased germ to an ambient word of its flattened domain."""
    over_cover = rewrite_in_schreier_generators(rb.cover, w)
    image = apply_vaut(rb.vaut, over_cover)
    return evaluate_schreier_word(schreier_system(rb.cover), image)


def rebase_back(
    rb: RebasedVaut, config: Optional[RunConfig] = None
) -> VirtualAutomorphism:
    """Forget the rebasing: a germ-equal virtual automorphism over the base."""
    cfg = config or DEFAULT_CONFIG
    domain = flatten_cover_subgroup(rb.cover, rb.vaut.domain)
    codomain = flatten_cover_subgroup(rb.cover, rb.vaut.codomain)
    rb_inv = RebasedVaut(rb.cover, inverse(rb.vaut, cfg))
    images = tuple(apply_rebased(rb, s) for s in schreier_generators(domain))
    inverse_images = tuple(
        apply_rebased(rb_inv, t) for t in schreier_generators(codomain)
    )
    out = VirtualAutomorphism(domain, codomain, images, inverse_images)
    validate_vaut(out, cfg)
    return out
