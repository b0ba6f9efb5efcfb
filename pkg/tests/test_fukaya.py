"""Lines, intersections, and the triangle products."""

from fractions import Fraction

import numpy as np
import pytest

from mirror_torus.nilpotent import LocalSystemData
from mirror_torus.fukaya import (
    CoverLine,
    FukayaMorphism,
    MaslovViolation,
    ParallelLines,
    SlopeLine,
    VerticalLine,
    associativity_residual,
    intersections,
    m2,
    m2_vertical,
    maslov_index,
    morphism_distance,
    pullback_fukaya_morphism,
    pullback_line,
    triangle_scan,
    weighted_point_count,
)

TRIV = LocalSystemData.trivial(1)
J2 = LocalSystemData.jordan(2)

THETA_2I_0 = 1.003734885487739
THETA_HALF_2I_0 = 0.415760602596027
THETA_I_0 = 1.086434811213308


def test_intersections_slope_pair():
    rho = 1j
    l0 = SlopeLine(0, 0, 0, TRIV, rho)
    l3 = SlopeLine(3, Fraction(1, 2), 0, TRIV, rho)
    pts = intersections(l0, l3)
    assert len(pts) == 3
    # x_k = alpha12 + k/n21 with alpha12 = (1/2)/3
    for k, pt in enumerate(pts):
        assert pt.index == k
        assert abs(pt.x - ((1 / 6 + k / 3) % 1.0)) < 1e-12
        # the point lies on both lines modulo 1
        assert abs((0 * pt.x - 0 - pt.y) % 1.0) % 1 < 1e-12
        assert min(abs(((3 * pt.x - 0.5) - pt.y) % 1.0), 1 - abs(((3 * pt.x - 0.5) - pt.y) % 1.0)) < 1e-12


def test_intersections_vertical():
    rho = 1j
    l2 = SlopeLine(2, Fraction(1, 4), 0, TRIV, rho)
    v = VerticalLine(Fraction(1, 3), 0, TRIV, rho)
    pts = intersections(l2, v)
    assert len(pts) == 1
    assert abs(pts[0].x - (-1 / 3) % 1.0) < 1e-12
    assert abs(pts[0].y - (2 * (-1 / 3) - 1 / 4) % 1.0) < 1e-12


def test_parallel_rejected():
    rho = 1j
    l1 = SlopeLine(2, 0, 0, TRIV, rho)
    l2 = SlopeLine(2, Fraction(1, 2), 0, TRIV, rho)
    with pytest.raises(ParallelLines):
        intersections(l1, l2)
    with pytest.raises(ParallelLines):
        weighted_point_count(l1, l2)


def test_cover_line_count():
    rho = 1j
    inner = SlopeLine(1, 0, 0, TRIV, 2j)  # over the doubled parameter
    c = CoverLine(2, inner)
    assert c.direction == (2, 1)
    l1 = SlopeLine(1, 0, 0, TRIV, rho)
    pts = intersections(c, l1)
    # |p s - q r| = |2*1 - 1*1| = 1
    assert len(pts) == 1
    v = VerticalLine(Fraction(1, 3), 0, TRIV, rho)
    assert len(intersections(c, v)) == 2
    assert weighted_point_count(c, v) == 2
    l3 = SlopeLine(3, 0, 0, TRIV, rho)
    assert len(intersections(c, l3)) == 5


def test_maslov():
    rho = 1j
    l0 = SlopeLine(0, 0, 0, TRIV, rho)
    l1 = SlopeLine(1, 0, 0, TRIV, rho)
    v = VerticalLine(0, 0, TRIV, rho)
    assert maslov_index(l0, l1) == 0
    assert maslov_index(l1, l0) == 1
    assert maslov_index(l0, v) == 0
    assert maslov_index(v, l0) == 1
    with pytest.raises(MaslovViolation):
        FukayaMorphism(l1, l0, {0: np.array([[1.0]])})


def test_m2_basic_values():
    rho = 1j
    l0 = SlopeLine(0, 0, 0, TRIV, rho)
    l1 = SlopeLine(1, 0, 0, TRIV, rho)
    l2 = SlopeLine(2, 0, 0, TRIV, rho)
    u01 = FukayaMorphism(l0, l1, {0: np.array([[1.0]])})
    u12 = FukayaMorphism(l1, l2, {0: np.array([[1.0]])})
    out = m2(u01, u12)
    assert abs(out.coeffs[0][0, 0] - THETA_2I_0) < 1e-13
    assert abs(out.coeffs[1][0, 0] - THETA_HALF_2I_0) < 1e-13


def test_triangle_scan_square_areas():
    # unshifted (0,1,2) chain: l2 = m and area = m^2 / 4
    rho = 1j
    chain = tuple(SlopeLine(n, 0, 0, TRIV, rho) for n in (0, 1, 2))
    tris = triangle_scan(chain, 0, 0, window=3)
    for tri in tris:
        assert tri.l2 == pytest.approx(tri.m)
        assert tri.area == pytest.approx(tri.m * tri.m / 4)
        assert tri.area_det == pytest.approx(abs(tri.area))
        assert tri.target_class == tri.m % 2
        # vertex identities: every corner sits on its two lines
        va, vb, vc = tri.vertices
        assert va[1] == pytest.approx(0 * va[0] - 0)
        assert vb[1] == pytest.approx(1 * vb[0] - 0, abs=1e-12)
        assert vc[1] == pytest.approx(0 * vc[0] - 0, abs=1e-12)
        ib = vb[1] - 2 * vb[0]
        ic = vc[1] - 2 * vc[0]
        assert ib == pytest.approx(ic, abs=1e-12)
        assert ib == pytest.approx(round(ib), abs=1e-12)


def test_m2_vertical_value():
    rho = 1j
    l0 = SlopeLine(0, 0, 0, TRIV, rho)
    l1 = SlopeLine(1, 0, 0, TRIV, rho)
    v = VerticalLine(0, 0, TRIV, rho)
    u01 = FukayaMorphism(l0, l1, {0: np.array([[1.0]])})
    u1v = FukayaMorphism(l1, v, {0: np.array([[1.0]])})
    out = m2_vertical(u01, u1v)
    assert abs(out.coeffs[0][0, 0] - THETA_I_0) < 1e-13


def test_associativity_with_nilpotents():
    rng = np.random.default_rng(3)
    rho = 0.15 + 0.9j
    a = SlopeLine(-1, Fraction(1, 3), Fraction(-1, 4), J2, rho)
    b = SlopeLine(1, Fraction(1, 2), 0, TRIV, rho)
    c = SlopeLine(2, 0, Fraction(1, 5), J2, rho)
    d = SlopeLine(4, Fraction(-1, 3), Fraction(1, 2), TRIV, rho)

    def rand_u(s, t, n):
        return FukayaMorphism(
            s, t,
            {k: rng.normal(size=(t.dim, s.dim)) + 1j * rng.normal(size=(t.dim, s.dim)) for k in range(n)},
        )

    res = associativity_residual(rand_u(a, b, 2), rand_u(b, c, 1), rand_u(c, d, 2))
    assert res < 1e-11


def test_morphism_validation():
    rho = 1j
    l0 = SlopeLine(0, 0, 0, TRIV, rho)
    l2 = SlopeLine(2, 0, 0, J2, rho)
    with pytest.raises(ValueError):
        FukayaMorphism(l0, l2, {3: np.zeros((2, 1))})  # only 2 intersection points
    with pytest.raises(ValueError):
        FukayaMorphism(l0, l2, {0: np.zeros((1, 2))})  # transposed
    assert FukayaMorphism.zero(l0, l2).max_abs() == 0.0


def test_pullback_replication():
    rho = 0.1 + 0.8j
    l0 = SlopeLine(0, Fraction(1, 4), 0, TRIV, rho)
    l2 = SlopeLine(2, 0, Fraction(1, 3), J2, rho)
    u = FukayaMorphism(l2, l2, {}) if False else FukayaMorphism(
        l0, l2, {0: np.array([[1.0], [2.0]]), 1: np.array([[3.0], [4.0]])}
    )
    for r in (2, 3):
        pulled = pullback_fukaya_morphism(r, u)
        assert pulled.source.n == 0 and pulled.target.n == 2 * r
        assert len(pulled.coeffs) == 2 * r
        for c, mat in pulled.coeffs.items():
            assert np.allclose(mat, u.coeffs[c % 2])
    lp = pullback_line(2, l2)
    assert lp.n == 4 and lp.beta == Fraction(2, 3)
    assert np.allclose(lp.local.matrix, 2 * J2.matrix)
    assert abs(lp.kahler.tau - 2 * rho) < 1e-14


def test_distance():
    rho = 1j
    l0 = SlopeLine(0, 0, 0, TRIV, rho)
    l1 = SlopeLine(1, 0, 0, TRIV, rho)
    u = FukayaMorphism(l0, l1, {0: np.array([[2.0]])})
    v = FukayaMorphism(l0, l1, {0: np.array([[2.5]])})
    assert morphism_distance(u, v) == pytest.approx(0.5)
    assert morphism_distance(u, FukayaMorphism.zero(l0, l1)) == pytest.approx(2.0)
