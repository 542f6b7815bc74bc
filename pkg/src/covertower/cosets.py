"""Finite-index subgroups as coset tables.

A subgroup H of the ambient group G is stored as the right-coset action of
G on H\\G: ``table[c][j]`` is the coset reached from coset ``c`` by the
(j+1)-th generator, and words act by tracing letters left to right.  The
basepoint coset is H itself, so ``w in H`` iff tracing ``w`` from the
basepoint returns to it.

The canonical form relabels cosets by breadth-first search from the
basepoint, scanning each coset's neighbours in the fixed alphabet order
x1, x1^-1, x2, x2^-1, ...  Two coset tables describe the same subgroup iff
their canonical forms are identical, which makes subgroup equality a tuple
comparison.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property, lru_cache
from math import lcm
from typing import Iterable, Optional, Sequence

from .errors import (
    IntersectionIndexOverflow,
    NotNormal,
    NotTransitive,
    RelatorViolated,
)
from .words import (
    GenericPresentation,
    Presentation,
    SurfacePresentation,
    Word,
    free_reduce,
    inverse_word,
    validate_word,
)


def _alphabet(generator_count: int) -> tuple[int, ...]:
    """Scan order for BFS: x1, x1^-1, x2, x2^-1, ..."""
    out: list[int] = []
    for j in range(1, generator_count + 1):
        out.extend((j, -j))
    return tuple(out)


@dataclass(frozen=True)
class Subgroup:
    pres: Presentation
    table: tuple[tuple[int, ...], ...]
    basepoint: int = 0
    canonical: bool = False

    def __post_init__(self) -> None:
        n = len(self.table)
        k = self.pres.generator_count
        if n == 0:
            raise ValueError("empty coset table")
        if not (0 <= self.basepoint < n):
            raise ValueError("basepoint out of range")
        for row in self.table:
            if len(row) != k:
                raise ValueError("ragged coset table")
        for j in range(k):
            col = [row[j] for row in self.table]
            if sorted(col) != list(range(n)):
                raise ValueError(f"column {j + 1} is not a permutation")
        # Transitivity from the basepoint.
        seen = {self.basepoint}
        queue = deque([self.basepoint])
        inv = self._build_inverse()
        while queue:
            c = queue.popleft()
            for j in range(k):
                for d in (self.table[c][j], inv[c][j]):
                    if d not in seen:
                        seen.add(d)
                        queue.append(d)
        if len(seen) != n:
            raise NotTransitive(
                f"only {len(seen)} of {n} cosets reachable from basepoint"
            )
        # Relators must act trivially from every coset.
        for r in self.pres.relators:
            for c in range(n):
                d = c
                for x in r:
                    d = self.table[d][x - 1] if x > 0 else inv[d][-x - 1]
                if d != c:
                    raise RelatorViolated(
                        f"relator moves coset {c} to {d}"
                    )

    def _build_inverse(self) -> tuple[tuple[int, ...], ...]:
        n = len(self.table)
        k = self.pres.generator_count
        inv = [[0] * k for _ in range(n)]
        for c in range(n):
            for j in range(k):
                inv[self.table[c][j]][j] = c
        return tuple(tuple(row) for row in inv)

    @cached_property
    def inverse_table(self) -> tuple[tuple[int, ...], ...]:
        return self._build_inverse()

    @property
    def index(self) -> int:
        return len(self.table)

    def act_letter(self, c: int, letter: int) -> int:
        if letter > 0:
            return self.table[c][letter - 1]
        return self.inverse_table[c][-letter - 1]

    def act_word(self, c: int, w: Iterable[int]) -> int:
        for x in w:
            c = self.act_letter(c, x)
        return c


def full_subgroup(pres: Presentation) -> Subgroup:
    k = pres.generator_count
    return Subgroup(pres, ((0,) * k,), 0, True)


def make_subgroup(
    pres: Presentation,
    perms: Sequence[Sequence[int]],
    basepoint: int = 0,
    restrict_to_orbit: bool = False,
) -> Subgroup:
    """Build a subgroup from one permutation per generator.

    Each entry of ``perms`` is the forward action of one generator on the
    points 0..n-1.  The stabilizer of ``basepoint`` is the subgroup being
    described.  With ``restrict_to_orbit`` the action is first cut down to
    the basepoint's orbit; otherwise a non-transitive action raises
    NotTransitive.  Relator violations raise RelatorViolated.
    """
    k = pres.generator_count
    if len(perms) != k:
        raise ValueError(f"need {k} permutations, got {len(perms)}")
    if not perms[0]:
        raise ValueError("empty permutation")
    n = len(perms[0])
    for p in perms:
        if sorted(p) != list(range(n)):
            raise ValueError("not a permutation of 0..n-1")
    if not (0 <= basepoint < n):
        raise ValueError("basepoint out of range")
    if restrict_to_orbit:
        inv = [[0] * n for _ in range(k)]
        for j in range(k):
            for c in range(n):
                inv[j][perms[j][c]] = c
        seen = {basepoint}
        queue = deque([basepoint])
        while queue:
            c = queue.popleft()
            for j in range(k):
                for d in (perms[j][c], inv[j][c]):
                    if d not in seen:
                        seen.add(d)
                        queue.append(d)
        points = sorted(seen)
        relabel = {p: i for i, p in enumerate(points)}
        table = tuple(
            tuple(relabel[perms[j][p]] for j in range(k)) for p in points
        )
        sub = Subgroup(pres, table, relabel[basepoint])
    else:
        table = tuple(tuple(perms[j][c] for j in range(k)) for c in range(n))
        sub = Subgroup(pres, table, basepoint)
    return canonicalize(sub)


def canonicalize(sub: Subgroup) -> Subgroup:
    """Relabel cosets by BFS from the basepoint; idempotent."""
    if sub.canonical and sub.basepoint == 0:
        return sub
    n = sub.index
    alphabet = _alphabet(sub.pres.generator_count)
    order: list[int] = [sub.basepoint]
    label = {sub.basepoint: 0}
    queue = deque([sub.basepoint])
    while queue:
        c = queue.popleft()
        for letter in alphabet:
            d = sub.act_letter(c, letter)
            if d not in label:
                label[d] = len(order)
                order.append(d)
                queue.append(d)
    k = sub.pres.generator_count
    table = tuple(
        tuple(label[sub.table[old][j]] for j in range(k)) for old in order
    )
    return Subgroup(sub.pres, table, 0, True)


def contains(sub: Subgroup, w: Iterable[int]) -> bool:
    w = validate_word(sub.pres, w)
    return sub.act_word(sub.basepoint, w) == sub.basepoint


def covering_genus(sub: Subgroup) -> int:
    """Genus of the covering surface: N(g-1)+1 for index N over genus g."""
    if not isinstance(sub.pres, SurfacePresentation):
        raise TypeError("covering genus needs a surface presentation")
    g = sub.pres.genus
    return sub.index * (g - 1) + 1


# ---------------------------------------------------------------------------
# Schreier transversal, generators, rewriting.


@dataclass(frozen=True)
class SchreierSystem:
    """BFS Schreier transversal plus the non-tree Schreier generators."""

    sub: Subgroup
    transversal: tuple[Word, ...]
    edges: tuple[tuple[int, int], ...]  # non-tree (coset, generator) pairs
    generators: tuple[Word, ...]  # one word per non-tree edge, in BFS order

    @property
    def edge_index(self) -> dict[tuple[int, int], int]:
        return self._edge_index

    @cached_property
    def _edge_index(self) -> dict[tuple[int, int], int]:
        return {e: i for i, e in enumerate(self.edges)}


@lru_cache(maxsize=4096)
def schreier_system(sub: Subgroup) -> SchreierSystem:
    if not (sub.canonical and sub.basepoint == 0):
        return schreier_system(canonicalize(sub))
    n = sub.index
    k = sub.pres.generator_count
    alphabet = _alphabet(k)
    transversal: list[Optional[Word]] = [None] * n
    transversal[0] = ()
    tree: set[tuple[int, int]] = set()
    queue = deque([0])
    while queue:
        c = queue.popleft()
        for letter in alphabet:
            d = sub.act_letter(c, letter)
            if transversal[d] is None:
                transversal[d] = free_reduce(transversal[c] + (letter,))
                # Record the tree edge in positive form.
                if letter > 0:
                    tree.add((c, letter))
                else:
                    tree.add((d, -letter))
                queue.append(d)
    edges: list[tuple[int, int]] = []
    gens: list[Word] = []
    for c in range(n):
        for j in range(1, k + 1):
            if (c, j) in tree:
                continue
            d = sub.table[c][j - 1]
            word = free_reduce(transversal[c] + (j,) + inverse_word(transversal[d]))
            edges.append((c, j))
            gens.append(word)
    return SchreierSystem(sub, tuple(transversal), tuple(edges), tuple(gens))


def schreier_generators(sub: Subgroup) -> tuple[Word, ...]:
    """Non-trivial Schreier generators; there are N*k - (N-1) of them."""
    return schreier_system(sub).generators


def rewrite_from(system: SchreierSystem, start: int, w: Iterable[int]) -> tuple[Word, int]:
    """Reidemeister rewriting of ``w`` traced from coset ``start``.

    Returns the word over Schreier generator indices (1-based, signed) and
    the final coset.  When ``w`` lies in the subgroup and ``start`` is the
    basepoint the result expresses ``w`` in the Schreier generators.
    """
    sub = system.sub
    idx = system.edge_index
    out: list[int] = []
    c = start
    for x in w:
        if x > 0:
            e = (c, x)
            if e in idx:
                out.append(idx[e] + 1)
            c = sub.act_letter(c, x)
        else:
            d = sub.act_letter(c, x)
            e = (d, -x)
            if e in idx:
                out.append(-(idx[e] + 1))
            c = d
    return free_reduce(out), c


def rewrite_in_schreier_generators(sub: Subgroup, w: Iterable[int]) -> Word:
    w = validate_word(sub.pres, w)
    system = schreier_system(canonicalize(sub))
    if not contains(system.sub, w):
        raise ValueError("word is not in the subgroup")
    rewritten, end = rewrite_from(system, 0, w)
    assert end == 0
    return rewritten


def reidemeister_schreier(sub: Subgroup) -> GenericPresentation:
    """Presentation of the subgroup on its Schreier generators."""
    sub = canonicalize(sub)
    system = schreier_system(sub)
    relators: list[Word] = []
    seen: set[Word] = set()
    for r in sub.pres.relators:
        for c in range(sub.index):
            word, end = rewrite_from(system, c, r)
            assert end == c
            if word and word not in seen:
                seen.add(word)
                relators.append(word)
    return GenericPresentation(len(system.generators), tuple(relators))


def evaluate_schreier_word(system: SchreierSystem, w: Iterable[int]) -> Word:
    """Expand a word over Schreier generator indices into ambient letters."""
    out: list[int] = []
    for x in w:
        g = system.generators[abs(x) - 1]
        out.extend(g if x > 0 else inverse_word(g))
    return free_reduce(out)


# ---------------------------------------------------------------------------
# Order structure: containment, intersection, conjugation, arrows.


def is_subgroup_of(a: Subgroup, b: Subgroup) -> bool:
    """True iff every Schreier generator of ``a`` lies in ``b``."""
    if a.pres != b.pres:
        raise ValueError("subgroups of different presentations")
    return all(contains(b, s) for s in schreier_generators(a))


def intersect(a: Subgroup, b: Subgroup, max_index: Optional[int] = None) -> Subgroup:
    """Intersection via the orbit of (basepoint, basepoint) in the product action."""
    if a.pres != b.pres:
        raise ValueError("subgroups of different presentations")
    k = a.pres.generator_count
    alphabet = _alphabet(k)
    start = (a.basepoint, b.basepoint)
    label = {start: 0}
    order = [start]
    queue = deque([start])
    while queue:
        ca, cb = queue.popleft()
        for letter in alphabet:
            pair = (a.act_letter(ca, letter), b.act_letter(cb, letter))
            if pair not in label:
                if max_index is not None and len(order) >= max_index:
                    raise IntersectionIndexOverflow(
                        f"intersection exceeds index cap {max_index}"
                    )
                label[pair] = len(order)
                order.append(pair)
                queue.append(pair)
    table = tuple(
        tuple(label[(a.table[ca][j], b.table[cb][j])] for j in range(k))
        for ca, cb in order
    )
    return canonicalize(Subgroup(a.pres, table, 0))


def conjugate_subgroup(sub: Subgroup, w: Iterable[int]) -> Subgroup:
    """The conjugate w H w^-1 (same table, basepoint moved along w^-1)."""
    w = validate_word(sub.pres, w)
    new_base = sub.act_word(sub.basepoint, inverse_word(w))
    return canonicalize(Subgroup(sub.pres, sub.table, new_base))


def is_normal(sub: Subgroup) -> bool:
    sub = canonicalize(sub)
    k = sub.pres.generator_count
    return all(conjugate_subgroup(sub, (j,)) == sub for j in range(1, k + 1))


@dataclass(frozen=True)
class CoveringArrow:
    """Factoring map between two covers: ``sub`` refines ``super``."""

    sub: Subgroup
    super: Subgroup
    relative_degree: int
    coset_map: tuple[int, ...]  # cosets of sub -> cosets of super


def factor_through(beta: Subgroup, alpha: Subgroup) -> Optional[CoveringArrow]:
    """Equivariant basepoint-preserving map of coset spaces, if beta <= alpha."""
    if beta.pres != alpha.pres:
        raise ValueError("subgroups of different presentations")
    k = beta.pres.generator_count
    f: list[Optional[int]] = [None] * beta.index
    f[beta.basepoint] = alpha.basepoint
    queue = deque([beta.basepoint])
    alphabet = _alphabet(k)
    while queue:
        c = queue.popleft()
        for letter in alphabet:
            d = beta.act_letter(c, letter)
            e = alpha.act_letter(f[c], letter)
            if f[d] is None:
                f[d] = e
                queue.append(d)
            elif f[d] != e:
                return None
    assert all(x is not None for x in f)
    if beta.index % alpha.index != 0:
        return None
    return CoveringArrow(
        beta, alpha, beta.index // alpha.index, tuple(f)  # type: ignore[arg-type]
    )


# ---------------------------------------------------------------------------
# Relative tables: a subgroup of a cover, and flattening back to the base.


def restrict_to_cover(inner: Subgroup, outer: Subgroup) -> Subgroup:
    """Coset table of ``inner`` inside ``outer``, over outer's Schreier generators.

    Requires inner <= outer.  The resulting Subgroup lives over the
    Reidemeister-Schreier presentation of ``outer``.
    """
    inner = canonicalize(inner)
    outer = canonicalize(outer)
    arrow = factor_through(inner, outer)
    if arrow is None:
        raise ValueError("inner is not contained in outer")
    system = schreier_system(outer)
    pres = reidemeister_schreier(outer)
    fiber = [c for c in range(inner.index) if arrow.coset_map[c] == 0]
    relabel = {c: i for i, c in enumerate(fiber)}
    table = tuple(
        tuple(relabel[inner.act_word(c, g)] for g in system.generators)
        for c in fiber
    )
    return canonicalize(Subgroup(pres, table, relabel[0]))


def flatten_cover_subgroup(outer: Subgroup, relative: Subgroup) -> Subgroup:
    """Subgroup of the base group described by a relative table over a cover.

    ``relative`` must be a coset table over the Reidemeister-Schreier
    presentation of ``outer``; the result is the corresponding subgroup of
    the ambient group, of index index(outer) * index(relative).
    """
    outer = canonicalize(outer)
    system = schreier_system(outer)
    if relative.pres.generator_count != len(system.generators):
        raise ValueError("relative table does not match the cover's generators")
    k = outer.pres.generator_count
    idx = system.edge_index
    start = (0, relative.basepoint)
    label = {start: 0}
    order = [start]
    queue = deque([start])

    def step(d: int, e: int, letter: int) -> tuple[int, int]:
        if letter > 0:
            edge = (d, letter)
            nd = outer.act_letter(d, letter)
            if edge in idx:
                e = relative.act_letter(e, idx[edge] + 1)
        else:
            nd = outer.act_letter(d, letter)
            edge = (nd, -letter)
            if edge in idx:
                e = relative.act_letter(e, -(idx[edge] + 1))
        return nd, e

    alphabet = _alphabet(k)
    while queue:
        d, e = queue.popleft()
        for letter in alphabet:
            pair = step(d, e, letter)
            if pair not in label:
                label[pair] = len(order)
                order.append(pair)
                queue.append(pair)
    table = tuple(
        tuple(label[step(d, e, j)] for j in range(1, k + 1)) for d, e in order
    )
    return canonicalize(Subgroup(outer.pres, table, 0))


def twisted_subgroup(sub: Subgroup, generator_words: Sequence[Word]) -> Subgroup:
    """Subgroup whose table lets generator j act as ``generator_words[j]`` on sub.

    With generator_words = images of the generators under the inverse of an
    automorphism phi, this is the image subgroup phi(sub).
    """
    k = sub.pres.generator_count
    if len(generator_words) != k:
        raise ValueError("need one word per generator")
    table = tuple(
        tuple(sub.act_word(c, generator_words[j]) for j in range(k))
        for c in range(sub.index)
    )
    return canonicalize(Subgroup(sub.pres, table, sub.basepoint))


# ---------------------------------------------------------------------------
# Deck transformations of a normal cover.


@dataclass(frozen=True)
class DeckGroup:
    order: int
    generators: tuple[tuple[int, ...], ...]
    abelian: bool
    exponent: int


def _perm_mul(p: tuple[int, ...], q: tuple[int, ...]) -> tuple[int, ...]:
    """Apply p, then q (matching left-to-right word tracing)."""
    return tuple(q[p[i]] for i in range(len(p)))


def _perm_order(p: tuple[int, ...]) -> int:
    n = len(p)
    seen = [False] * n
    out = 1
    for i in range(n):
        if not seen[i]:
            ln = 0
            j = i
            while not seen[j]:
                seen[j] = True
                j = p[j]
                ln += 1
            out = lcm(out, ln)
    return out


def deck_group(sub: Subgroup) -> DeckGroup:
    """Quotient action of a normal subgroup; order equals the index."""
    sub = canonicalize(sub)
    if not is_normal(sub):
        raise NotNormal("deck group computed only for normal subgroups")
    n = sub.index
    k = sub.pres.generator_count
    gens = tuple(tuple(sub.table[c][j] for c in range(n)) for j in range(k))
    identity = tuple(range(n))
    elements = {identity}
    queue = deque([identity])
    while queue:
        p = queue.popleft()
        for g in gens:
            q = _perm_mul(p, g)
            if q not in elements:
                elements.add(q)
                queue.append(q)
    abelian = all(
        _perm_mul(a, b) == _perm_mul(b, a) for a in gens for b in gens
    )
    exponent = 1
    for p in elements:
        exponent = lcm(exponent, _perm_order(p))
    assert len(elements) == n
    return DeckGroup(len(elements), gens, abelian, exponent)
