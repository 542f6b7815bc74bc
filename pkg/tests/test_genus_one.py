import math
import random
from fractions import Fraction

import pytest

from covertower import (
    NotAnIsomorphism,
    SingularMatrix,
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


def _in_row_lattice(vec, rows):
    det = rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    s = Fraction(vec[0] * rows[1][1] - vec[1] * rows[1][0], det)
    t = Fraction(rows[0][0] * vec[1] - rows[0][1] * vec[0], det)
    return s.denominator == 1 and t.denominator == 1


def test_hnf_swapped_rows():
    lattice = hnf([[0, 1], [2, 0]])
    assert lattice.entries == ((2, 0), (0, 1))


def test_hnf_preserves_the_row_lattice():
    rng = random.Random(17)
    for _ in range(200):
        raw = [[rng.randint(-9, 9) for _ in range(2)] for _ in range(2)]
        if raw[0][0] * raw[1][1] - raw[0][1] * raw[1][0] == 0:
            continue
        lattice = hnf(raw)
        (a, b), (z, d) = lattice.entries
        assert z == 0 and a > 0 and d > 0 and 0 <= b < d
        for row in raw:
            assert _in_row_lattice(row, lattice.entries)
        for row in lattice.entries:
            assert _in_row_lattice(row, raw)
        assert hnf(lattice.entries).entries == lattice.entries


def test_hnf_rejects_singular():
    with pytest.raises(SingularMatrix):
        hnf([[2, 4], [1, 2]])


def test_sublattice_constructor_enforces_normal_form():
    with pytest.raises(ValueError):
        SublatticeMatrix(((2, 3), (0, 2)))
    with pytest.raises(ValueError):
        SublatticeMatrix(((0, 1), (2, 0)))


def test_mobius_normalization():
    assert mobius_from_integer_matrix([[2, 0], [0, 2]]) == identity_mobius()
    m = mobius_from_integer_matrix([[-1, 0], [0, -2]])
    assert m.entries == ((1, 0), (0, 2))
    with pytest.raises(ValueError):
        mobius_from_integer_matrix([[1, 0], [0, -1]])
    with pytest.raises(SingularMatrix):
        mobius_from_integer_matrix([[1, 2], [2, 4]])


def test_mobius_from_rational_matrix_clears_denominators():
    m = mobius_from_rational_matrix(((Fraction(1, 2), 0), (0, 1)))
    assert m.entries == ((1, 0), (0, 2))


def test_composition_matches_matrix_product():
    rng = random.Random(23)
    mats = []
    for _ in range(40):
        raw = [[rng.randint(-5, 5) for _ in range(2)] for _ in range(2)]
        if raw[0][0] * raw[1][1] - raw[0][1] * raw[1][0] > 0:
            mats.append(mobius_from_integer_matrix(raw))
    for _ in range(200):
        m, n = rng.choice(mats), rng.choice(mats)
        (a, b), (c, d) = m.entries
        (e, f), (g, h) = n.entries
        product = [[a * e + b * g, a * f + b * h], [c * e + d * g, c * f + d * h]]
        assert compose_mobius(m, n) == mobius_from_integer_matrix(product)


def test_modulus_map_of_index_two_lattice():
    m = covering_modulus_map(hnf([[0, 1], [2, 0]]))
    assert m.entries == ((2, 0), (0, 1))
    assert act(m, i_point()) == UpperHalfPoint(0, 2)


def test_scalar_lattice_has_identity_modulus():
    assert covering_modulus_map(hnf([[2, 0], [0, 2]])) == identity_mobius()


def test_modulus_maps_separate_determinant_four_lattices():
    lattices = [
        hnf(m)
        for m in (
            [[1, 0], [0, 4]],
            [[1, 1], [0, 4]],
            [[1, 2], [0, 4]],
            [[1, 3], [0, 4]],
            [[2, 0], [0, 2]],
            [[2, 1], [0, 2]],
            [[4, 0], [0, 1]],
        )
    ]
    assert len({lat.entries for lat in lattices}) == 7
    maps = {covering_modulus_map(lat) for lat in lattices}
    assert len(maps) == 7


def test_vaut_as_matrix_basic():
    src = hnf([[2, 0], [0, 1]])
    dst = hnf([[1, 0], [0, 1]])
    m = vaut_as_matrix(src, dst, [[1, 0], [0, 1]])
    assert m.entries == ((1, 0), (0, 2))


def test_vaut_as_matrix_rejects_bad_identifications():
    src = hnf([[1, 0], [0, 1]])
    with pytest.raises(NotAnIsomorphism):
        vaut_as_matrix(src, src, [[2, 0], [0, 1]])
    with pytest.raises(NotAnIsomorphism):
        vaut_as_matrix(src, src, [[0, 1], [1, 0]])


def test_vaut_as_matrix_composes():
    src = hnf([[2, 1], [0, 3]])
    mid = hnf([[1, 0], [0, 5]])
    dst = hnf([[4, 0], [0, 1]])
    i1 = [[1, 1], [0, 1]]
    i2 = [[1, 0], [1, 1]]
    i12 = [[2, 1], [1, 1]]
    left = compose_mobius(
        vaut_as_matrix(src, mid, i1), vaut_as_matrix(mid, dst, i2)
    )
    assert left == vaut_as_matrix(src, dst, i12)


def test_act_exact_example():
    p = act(mobius_from_integer_matrix([[2, 1], [0, 1]]), i_point())
    assert p.exact
    assert p.real == Fraction(1) and p.imag == Fraction(2)


def test_rotation_fixes_i():
    # tau -> -1/tau, the order-two rotation about i.
    m = mobius_from_rational_matrix(((0, -1), (1, 0)))
    assert m.entries == ((0, 1), (-1, 0))
    assert act(m, i_point()) == i_point()


def test_act_is_a_homomorphism_on_exact_points():
    rng = random.Random(41)
    mats = []
    for _ in range(30):
        raw = [[rng.randint(-4, 4) for _ in range(2)] for _ in range(2)]
        if raw[0][0] * raw[1][1] - raw[0][1] * raw[1][0] > 0:
            mats.append(mobius_from_integer_matrix(raw))
    for _ in range(300):
        m, n = rng.choice(mats), rng.choice(mats)
        tau = UpperHalfPoint(
            Fraction(rng.randint(-20, 20), rng.randint(1, 9)),
            Fraction(rng.randint(1, 30), rng.randint(1, 9)),
        )
        inner = act(n, tau)
        assert inner.exact and inner.imag > 0
        assert act(compose_mobius(m, n), tau) == act(m, inner)


def test_float_path_tracks_exact_path():
    rng = random.Random(43)
    for _ in range(200):
        raw = [[rng.randint(-4, 4) for _ in range(2)] for _ in range(2)]
        if raw[0][0] * raw[1][1] - raw[0][1] * raw[1][0] <= 0:
            continue
        m = mobius_from_integer_matrix(raw)
        x = Fraction(rng.randint(-10, 10), rng.randint(1, 7))
        y = Fraction(rng.randint(1, 10), rng.randint(1, 7))
        exact = act(m, UpperHalfPoint(x, y))
        loose = act(m, UpperHalfPoint(float(x), float(y)))
        assert abs(float(exact.real) - loose.real) < 1e-12
        assert abs(float(exact.imag) - loose.imag) < 1e-12


def test_point_validation():
    p = UpperHalfPoint(3, 2)
    assert p.exact and p.real == Fraction(3)
    assert p.as_complex() == complex(3.0, 2.0)
    with pytest.raises(ValueError):
        UpperHalfPoint(0, 0)
    with pytest.raises(ValueError):
        UpperHalfPoint(1.0, -2.0)
    with pytest.raises(ValueError):
        UpperHalfPoint("a", 1)


def test_dense_orbit_hits_exact_targets():
    target = UpperHalfPoint(Fraction(1), Fraction(2))
    m = dense_orbit_approx(i_point(), target, Fraction(1, 1000))
    assert m.entries == ((2, 1), (0, 1))
    assert act(m, i_point()) == target


def test_dense_orbit_meets_float_tolerance():
    target = UpperHalfPoint(math.sqrt(2), math.pi)
    m = dense_orbit_approx(i_point(), target, 1e-6)
    image = act(m, i_point())
    assert abs(image.as_complex() - target.as_complex()) < 1e-6


def test_dense_orbit_resolves_float_targets_exactly():
    # Every float is rational, so even an absurd eps is eventually met by
    # an exact hit rather than an approximation.
    target = UpperHalfPoint(math.sqrt(2), math.pi)
    m = dense_orbit_approx(i_point(), target, 1e-300)
    image = act(m, i_point())
    assert image.as_complex() == target.as_complex()


def test_dense_orbit_validates_eps():
    target = UpperHalfPoint(math.sqrt(2), math.pi)
    with pytest.raises(ValueError):
        dense_orbit_approx(i_point(), target, 0)
    with pytest.raises(ValueError):
        dense_orbit_approx(i_point(), target, -1)
