"""Words and presentations.

A word is a tuple of nonzero signed generator indices: ``k`` stands for the
k-th generator, ``-k`` for its inverse (1-based).  For a surface of genus g
the generators are a1, b1, ..., ag, bg in that order, so a1 = 1, b1 = 2,
a2 = 3, b2 = 4 and so on, and the single relator is the product of the
handle commutators [a1,b1]...[ag,bg].

Word equality in the surface group is decided by Dehn's algorithm.  The
standard one-relator presentation of a closed surface of genus >= 2
satisfies the C'(1/6) small-cancellation condition (every common subword of
two distinct symmetrized relators is a single letter), so a freely reduced
word represents the identity iff greedy replacement of any relator subword
longer than half the relator terminates at the empty word.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Tuple

Word = Tuple[int, ...]


def free_reduce(letters: Iterable[int]) -> Word:
    out: list[int] = []
    for x in letters:
        if x == 0:
            raise ValueError("0 is not a generator index")
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def inverse_word(w: Iterable[int]) -> Word:
    return tuple(-x for x in reversed(tuple(w)))


def concat(*ws: Iterable[int]) -> Word:
    joined: list[int] = []
    for w in ws:
        joined.extend(w)
    return free_reduce(joined)


def commutator_word(u: Iterable[int], v: Iterable[int]) -> Word:
    u = tuple(u)
    v = tuple(v)
    return concat(u, v, inverse_word(u), inverse_word(v))


def conjugate_word(w: Iterable[int], by: Iterable[int]) -> Word:
    """by * w * by^-1."""
    by = tuple(by)
    return concat(by, w, inverse_word(by))


@dataclass(frozen=True)
class SurfacePresentation:
    """Fundamental group of a closed orientable surface of genus >= 2."""

    genus: int

    def __post_init__(self) -> None:
        if self.genus < 2:
            raise ValueError("surface presentation needs genus >= 2")

    @property
    def generator_count(self) -> int:
        return 2 * self.genus

    @property
    def relator(self) -> Word:
        letters: list[int] = []
        for i in range(self.genus):
            a = 2 * i + 1
            b = 2 * i + 2
            letters.extend((a, b, -a, -b))
        return tuple(letters)

    @property
    def relators(self) -> tuple[Word, ...]:
        return (self.relator,)


@dataclass(frozen=True)
class GenericPresentation:
    """Finitely presented group on numbered generators.

    Used for the rewritten presentations of covers; no word-problem solver
    is attached (equality questions are pushed down to the ambient surface
    group by evaluating Schreier generator words).
    """

    generator_count: int
    relators: tuple[Word, ...]

    def __post_init__(self) -> None:
        if self.generator_count < 0:
            raise ValueError("negative generator count")
        for r in self.relators:
            if free_reduce(r) != tuple(r):
                raise ValueError("relators must be freely reduced")
            for x in r:
                if not (1 <= abs(x) <= self.generator_count):
                    raise ValueError(f"letter {x} out of range")


Presentation = SurfacePresentation | GenericPresentation


def validate_word(pres: Presentation, w: Iterable[int]) -> Word:
    w = tuple(w)
    k = pres.generator_count
    for x in w:
        if x == 0 or abs(x) > k:
            raise ValueError(f"letter {x} out of range for {k} generators")
    return w


@lru_cache(maxsize=None)
def _symmetrized_relators(genus: int) -> tuple[Word, ...]:
    r = SurfacePresentation(genus).relator
    out: list[Word] = []
    for base in (r, inverse_word(r)):
        for i in range(len(base)):
            out.append(base[i:] + base[:i])
    # The rotations are pairwise distinct for the surface relator; keep a
    # deterministic order anyway.
    return tuple(dict.fromkeys(out))


def dehn_reduce(pres: SurfacePresentation, w: Iterable[int]) -> Word:
    """Greedy Dehn reduction of ``w``; identity words reduce to ()."""
    if not isinstance(pres, SurfacePresentation):
        raise TypeError("Dehn reduction is defined for surface presentations")
    word = free_reduce(w)
    rels = _symmetrized_relators(pres.genus)
    length = 4 * pres.genus
    half = length // 2
    changed = True
    while changed and word:
        changed = False
        n = len(word)
        for i in range(n):
            if changed:
                break
            for s in rels:
                k = 0
                limit = min(length, n - i)
                while k < limit and word[i + k] == s[k]:
                    k += 1
                if k > half:
                    # word[i:i+k] equals the prefix of the relator s, so it
                    # can be traded for the inverse of the shorter suffix.
                    repl = inverse_word(s[k:])
                    word = free_reduce(word[:i] + repl + word[i + k:])
                    changed = True
                    break
    return word


def is_identity(pres: SurfacePresentation, w: Iterable[int]) -> bool:
    return dehn_reduce(pres, w) == ()


def words_equal(pres: SurfacePresentation, u: Iterable[int], v: Iterable[int]) -> bool:
    return is_identity(pres, concat(u, inverse_word(v)))
