"""The torus case, where everything is linear algebra over the rationals.

Finite-index subgroups of Z^2 are row lattices of integer 2x2 matrices,
canonicalized by Hermite normal form.  Identifications between sublattices
induce rational Mobius transformations of the upper half-plane acting on
the modulus of the quotient torus; composition is matrix multiplication
and the action has dense orbits, realized constructively through rational
approximation of the target coordinates.

Convention: lattice vectors are rows, and the Mobius matrix [[a, b], [c, d]]
sends tau to (a*tau + b)/(c*tau + d).  Only orientation-preserving maps
(positive determinant) are admitted.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Sequence, Union

from .errors import NotAnIsomorphism, SingularMatrix

IntMatrix = tuple[tuple[int, int], tuple[int, int]]
Scalar = Union[Fraction, float]


def _det(m: Sequence[Sequence[int]]) -> int:
    return m[0][0] * m[1][1] - m[0][1] * m[1][0]


def _mat_mul(m: Sequence[Sequence[int]], n: Sequence[Sequence[int]]) -> IntMatrix:
    return (
        (
            m[0][0] * n[0][0] + m[0][1] * n[1][0],
            m[0][0] * n[0][1] + m[0][1] * n[1][1],
        ),
        (
            m[1][0] * n[0][0] + m[1][1] * n[1][0],
            m[1][0] * n[0][1] + m[1][1] * n[1][1],
        ),
    )


@dataclass(frozen=True)
class SublatticeMatrix:
    """Finite-index sublattice of Z^2 in upper-triangular Hermite form."""

    entries: IntMatrix

    def __post_init__(self) -> None:
        (a, b), (c, d) = self.entries
        for x in (a, b, c, d):
            if not isinstance(x, int):
                raise ValueError("lattice entries must be integers")
        if c != 0 or a <= 0 or d <= 0 or not 0 <= b < d:
            raise ValueError("entries are not in Hermite normal form")

    @property
    def determinant(self) -> int:
        return self.entries[0][0] * self.entries[1][1]


def hnf(entries: Sequence[Sequence[int]]) -> SublatticeMatrix:
    """Hermite normal form of the row lattice spanned by an integer matrix."""
    (p, q), (r, s) = ((int(entries[0][0]), int(entries[0][1])),
                      (int(entries[1][0]), int(entries[1][1])))
    if p * s - q * r == 0:
        raise SingularMatrix("rows do not span a finite-index sublattice")
    while r != 0:
        k = p // r
        p, q = p - k * r, q - k * s
        p, q, r, s = r, s, p, q
    if p < 0:
        p, q = -p, -q
    if s < 0:
        s = -s
    q -= (q // s) * s
    return SublatticeMatrix(((p, q), (0, s)))


@dataclass(frozen=True)
class RationalMobius:
    """Element of the orientation-preserving rational Mobius group.

    Stored as the unique primitive integer matrix with positive
    determinant whose first nonzero entry (reading a, b, c, d) is
    positive.
    """

    entries: IntMatrix

    def __post_init__(self) -> None:
        (a, b), (c, d) = self.entries
        g = gcd(gcd(abs(a), abs(b)), gcd(abs(c), abs(d)))
        if g != 1:
            raise ValueError("matrix is not primitive")
        if _det(self.entries) <= 0:
            raise ValueError("determinant must be positive")
        lead = next(x for x in (a, b, c, d) if x != 0)
        if lead < 0:
            raise ValueError("leading nonzero entry must be positive")

    @property
    def determinant(self) -> int:
        return _det(self.entries)


def mobius_from_integer_matrix(entries: Sequence[Sequence[int]]) -> RationalMobius:
    """Normalize an integer matrix to its canonical Mobius representative."""
    (a, b), (c, d) = ((int(entries[0][0]), int(entries[0][1])),
                      (int(entries[1][0]), int(entries[1][1])))
    det = a * d - b * c
    if det == 0:
        raise SingularMatrix("matrix does not act on the upper half-plane")
    if det < 0:
        raise ValueError("orientation-reversing matrices are not admitted")
    g = gcd(gcd(abs(a), abs(b)), gcd(abs(c), abs(d)))
    a, b, c, d = a // g, b // g, c // g, d // g
    lead = next(x for x in (a, b, c, d) if x != 0)
    if lead < 0:
        a, b, c, d = -a, -b, -c, -d
    return RationalMobius(((a, b), (c, d)))


def mobius_from_rational_matrix(
    entries: Sequence[Sequence[Fraction]],
) -> RationalMobius:
    rows = [[Fraction(x) for x in row] for row in entries]
    scale = 1
    for row in rows:
        for x in row:
            scale = scale * x.denominator // gcd(scale, x.denominator)
    ints = [[int(x * scale) for x in row] for row in rows]
    return mobius_from_integer_matrix(ints)


def identity_mobius() -> RationalMobius:
    return RationalMobius(((1, 0), (0, 1)))


def compose_mobius(m: RationalMobius, n: RationalMobius) -> RationalMobius:
    """(m compose n)(tau) = m(n(tau)); exact matrix product, renormalized."""
    return mobius_from_integer_matrix(_mat_mul(m.entries, n.entries))


def covering_modulus_map(lattice: SublatticeMatrix) -> RationalMobius:
    """Mobius map from the base modulus to the sublattice torus modulus.

    The row basis (a, b), (0, d) spans the lattice Z(a*tau+b) + Z*d, whose
    modulus is (a*tau+b)/d; in general the map is the fractional linear
    transformation with the lattice matrix itself.
    """
    return mobius_from_integer_matrix(lattice.entries)


def vaut_as_matrix(
    src: SublatticeMatrix,
    dst: SublatticeMatrix,
    iso: Sequence[Sequence[int]],
) -> RationalMobius:
    """Rational matrix induced by identifying two sublattices.

    ``iso`` is an integer change of coordinates carrying src basis rows to
    dst basis rows; it must be a bijection (determinant +-1) and preserve
    orientation (determinant +1).  The induced map on Z^2 tensor Q is
    src^{-1} * iso * dst in the row convention.
    """
    iso_t = ((int(iso[0][0]), int(iso[0][1])), (int(iso[1][0]), int(iso[1][1])))
    d = _det(iso_t)
    if abs(d) != 1:
        raise NotAnIsomorphism("identification is not a lattice bijection")
    if d != 1:
        raise NotAnIsomorphism("identification reverses orientation")
    (a, b), (_, dd) = src.entries
    det_src = src.determinant
    src_inv = (
        (Fraction(dd, det_src), Fraction(-b, det_src)),
        (Fraction(0), Fraction(a, det_src)),
    )
    middle = _mat_mul(iso_t, dst.entries)
    rows = []
    for i in range(2):
        rows.append(
            [
                src_inv[i][0] * middle[0][j] + src_inv[i][1] * middle[1][j]
                for j in range(2)
            ]
        )
    return mobius_from_rational_matrix(rows)


@dataclass(frozen=True)
class UpperHalfPoint:
    """Point of the upper half-plane; exact when both parts are Fractions."""

    real: Scalar
    imag: Scalar

    def __post_init__(self) -> None:
        for field in ("real", "imag"):
            value = getattr(self, field)
            if isinstance(value, int):
                object.__setattr__(self, field, Fraction(value))
            elif not isinstance(value, (Fraction, float)):
                raise ValueError("coordinates must be rational or float")
        if not self.imag > 0:
            raise ValueError("imaginary part must be positive")

    @property
    def exact(self) -> bool:
        return isinstance(self.real, Fraction) and isinstance(self.imag, Fraction)

    def as_complex(self) -> complex:
        return complex(float(self.real), float(self.imag))


def i_point() -> UpperHalfPoint:
    return UpperHalfPoint(Fraction(0), Fraction(1))


def act(m: RationalMobius, tau: UpperHalfPoint) -> UpperHalfPoint:
    """(a*tau+b)/(c*tau+d); exact on exact points, float otherwise."""
    (a, b), (c, d) = m.entries
    if tau.exact:
        x, y = tau.real, tau.imag
        den = (c * x + d) ** 2 + (c * y) ** 2
        new_x = ((a * x + b) * (c * x + d) + a * c * y * y) / den
        new_y = y * m.determinant / den
        return UpperHalfPoint(new_x, new_y)
    z = tau.as_complex()
    w = (a * z + b) / (c * z + d)
    return UpperHalfPoint(w.real, w.imag)


def _distance_squared(p: UpperHalfPoint, q: UpperHalfPoint) -> Scalar:
    if p.exact and q.exact:
        return (p.real - q.real) ** 2 + (p.imag - q.imag) ** 2
    return abs(p.as_complex() - q.as_complex()) ** 2


def dense_orbit_approx(
    source: UpperHalfPoint,
    target: UpperHalfPoint,
    eps: Scalar,
) -> RationalMobius:
    """A rational Mobius map carrying source within eps of target.

    Constructed, never searched: an exact affine map normalizes the source
    to i, and an affine map with rationally approximated coefficients
    carries i to the target, with denominators grown until the verified
    error beats eps.  Exact rational targets are eventually hit exactly.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if (source.real, source.imag) == (target.real, target.imag):
        return identity_mobius()
    x0, y0 = Fraction(source.real), Fraction(source.imag)
    x1, y1 = Fraction(target.real), Fraction(target.imag)
    to_i = mobius_from_rational_matrix(
        ((Fraction(1), -x0), (Fraction(0), y0))
    )
    eps_sq = Fraction(eps) ** 2
    bound = 16
    while True:
        px = x1.limit_denominator(bound)
        py = y1.limit_denominator(bound)
        if py > 0:
            from_i = mobius_from_rational_matrix(
                ((py, px), (Fraction(0), Fraction(1)))
            )
            candidate = compose_mobius(from_i, to_i)
            image = act(candidate, source)
            err_sq = _distance_squared(image, target)
            if err_sq < eps_sq:
                return candidate
            if px == x1 and py == y1:
                # Exact coordinates were reached, so only float roundoff
                # remains; exact targets return above with error zero.
                raise ValueError(
                    "requested eps is below floating-point resolution"
                )
        bound *= 16
