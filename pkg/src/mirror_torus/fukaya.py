"""Affine Lagrangian lines on the square torus and their triangle products.

Objects are lines with unitary-plus-nilpotent connections: graphs
y = n x - alpha with connection (-2 pi i beta + N) dx, vertical lines
x = -alpha with connection (2 pi i beta + N) dy, and (r, n)-direction images
of cover lines.  Morphism spaces sit at intersection points; the degree-two
product weighs immersed triangles by exp(2 pi i rho Area) and transports the
local systems along the boundary.

The m-th triangle over the class pair (a, b) of a slope chain n1 < n2 < n3
has horizontal side lengths

    l2 = alpha23 - alpha12 + b/(n3-n2) - a/(n2-n1) + m,
    l1 = l2 (n3-n2)/(n3-n1),    l3 = -l2 (n2-n1)/(n3-n1),

area [k_m + (alpha23-alpha12)(n3-n2)(n2-n1)]^2 / (2 (n3-n2)(n3-n1)(n2-n1)),
which agrees with half the absolute determinant of the side vectors
(l1, n1 l1), (l2, n2 l2); both forms are carried so they can be checked
against each other per triangle.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from .nilpotent import LocalSystemData, nilpotent_exp
from .sheaves import ChainMismatch, MixedModularParam
from .theta import (
    DEFAULT_TRUNCATION,
    ModularParam,
    TruncationCapExceeded,
    TruncationSpec,
    as_param,
    gaussian_window,
    same_param,
)

Shift = Union[int, float, Fraction]


class ParallelLines(ValueError):
    """The two lines have equal direction; no transverse intersection."""


class MaslovViolation(ValueError):
    """Morphism requested between lines of nonzero Maslov degree."""


@dataclass(frozen=True, eq=False)
class SlopeLine:
    """Graph y = n x - alpha with connection (-2 pi i beta + N) dx."""

    n: int
    alpha: Shift
    beta: Shift
    local: LocalSystemData
    kahler: ModularParam

    def __post_init__(self) -> None:
        object.__setattr__(self, "kahler", as_param(self.kahler, "kahler"))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SlopeLine):
            return NotImplemented
        return (
            self.n == other.n
            and self.alpha == other.alpha
            and self.beta == other.beta
            and self.local == other.local
            and same_param(self.kahler, other.kahler)
        )

    @property
    def dim(self) -> int:
        return self.local.dim

    @property
    def log_slope(self) -> float:
        return math.atan(self.n) / math.pi

    @property
    def direction(self) -> tuple[int, int]:
        return (1, self.n)


@dataclass(frozen=True, eq=False)
class VerticalLine:
    """Line x = -alpha with connection (2 pi i beta + N) dy."""

    alpha: Shift
    beta: Shift
    local: LocalSystemData
    kahler: ModularParam

    def __post_init__(self) -> None:
        object.__setattr__(self, "kahler", as_param(self.kahler, "kahler"))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VerticalLine):
            return NotImplemented
        return (
            self.alpha == other.alpha
            and self.beta == other.beta
            and self.local == other.local
            and same_param(self.kahler, other.kahler)
        )

    @property
    def dim(self) -> int:
        return self.local.dim

    @property
    def log_slope(self) -> float:
        return 0.5

    @property
    def direction(self) -> tuple[int, int]:
        return (0, 1)


@dataclass(frozen=True, eq=False)
class CoverLine:
    """Image of ``inner`` (over the r rho torus) under (x, y) -> (r x, y)."""

    r: int
    inner: SlopeLine

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CoverLine):
            return NotImplemented
        return self.r == other.r and self.inner == other.inner

    @property
    def kahler(self) -> ModularParam:
        return ModularParam(self.inner.kahler.tau / self.r, self.inner.kahler.side)

    @property
    def dim(self) -> int:
        return self.inner.dim

    @property
    def log_slope(self) -> float:
        return math.atan(self.inner.n / self.r) / math.pi

    @property
    def direction(self) -> tuple[int, int]:
        return (self.r, self.inner.n)


FukayaObj = Union[SlopeLine, VerticalLine, CoverLine]


@dataclass(frozen=True)
class IntersectionPoint:
    index: int
    x: float
    y: float


def maslov_index(l1: FukayaObj, l2: FukayaObj) -> int:
    """Degree of the morphism space: -floor(difference of logarithmic slopes)."""
    return -math.floor(l2.log_slope - l1.log_slope)


def _anchor(line: FukayaObj) -> tuple[float, float]:
    """A base point of the line's preferred lift."""
    if isinstance(line, SlopeLine):
        return (0.0, -float(line.alpha))
    if isinstance(line, VerticalLine):
        return (-float(line.alpha), 0.0)
    return (0.0, -float(line.inner.alpha))


def intersections(l1: FukayaObj, l2: FukayaObj) -> list[IntersectionPoint]:
    """Transverse intersection points per unit cell, indexed consistently with
    the theta bases on the holomorphic side."""
    if not same_param(l1.kahler, l2.kahler):
        raise MixedModularParam("lines live over different Kahler parameters")
    if isinstance(l1, SlopeLine) and isinstance(l2, SlopeLine):
        gap = l2.n - l1.n
        if gap == 0:
            raise ParallelLines("equal slopes")
        a12 = float(l2.alpha - l1.alpha) / gap
        pts = []
        for k in range(abs(gap)):
            x = a12 + k / gap
            y = (l1.n * float(l2.alpha) - l2.n * float(l1.alpha) + l1.n * k) / gap
            pts.append(IntersectionPoint(k, x % 1.0, y % 1.0))
        return pts
    if isinstance(l1, SlopeLine) and isinstance(l2, VerticalLine):
        x = -float(l2.alpha)
        return [IntersectionPoint(0, x % 1.0, (l1.n * x - float(l1.alpha)) % 1.0)]
    if isinstance(l1, VerticalLine) and isinstance(l2, SlopeLine):
        x = -float(l1.alpha)
        return [IntersectionPoint(0, x % 1.0, (l2.n * x - float(l2.alpha)) % 1.0)]
    return _lattice_intersections(l1, l2)


def _lattice_intersections(l1: FukayaObj, l2: FukayaObj) -> list[IntersectionPoint]:
    """General |p s - q r| count by enumerating lattice translates."""
    p, q = l1.direction
    r, s = l2.direction
    det = p * s - q * r
    if det == 0:
        raise ParallelLines(f"directions {(p, q)} and {(r, s)} are parallel")
    a1, a2 = _anchor(l1), _anchor(l2)
    count = abs(det)
    seen: dict[tuple[int, int], IntersectionPoint] = {}
    span = count + 2
    for mm in range(-span, span + 1):
        for nn in range(-span, span + 1):
            bx = a2[0] - a1[0] + mm
            by = a2[1] - a1[1] + nn
            # solve t (p,q) - t' (r,s) = (bx, by)
            t = (bx * s - by * r) / det
            x = (a1[0] + t * p) % 1.0
            y = (a1[1] + t * q) % 1.0
            key = (round(x * 1e9), round(y * 1e9))
            key = (key[0] % (10**9), key[1] % (10**9))
            if key not in seen:
                seen[key] = IntersectionPoint(len(seen), x, y)
            if len(seen) == count:
                return sorted(seen.values(), key=lambda pt: (pt.x, pt.y))
    return sorted(seen.values(), key=lambda pt: (pt.x, pt.y))


def _index_count(l1: FukayaObj, l2: FukayaObj) -> int:
    p, q = l1.direction
    r, s = l2.direction
    return abs(p * s - q * r)


def weighted_point_count(l1: FukayaObj, l2: FukayaObj) -> int:
    """|p s' - q r'| d1 d2: intersection number times local-system ranks."""
    count = _index_count(l1, l2)
    if count == 0:
        raise ParallelLines(f"directions {l1.direction} and {l2.direction} are parallel")
    return count * l1.dim * l2.dim


@dataclass(frozen=True, eq=False)
class FukayaMorphism:
    """Degree-zero morphism: one Hom(V1, V2) coefficient per intersection point."""

    source: FukayaObj
    target: FukayaObj
    coeffs: dict[int, np.ndarray]

    def __post_init__(self) -> None:
        if not same_param(self.source.kahler, self.target.kahler):
            raise MixedModularParam("morphism endpoints over different Kahler parameters")
        mu = maslov_index(self.source, self.target)
        if mu != 0:
            raise MaslovViolation(f"Maslov degree {mu} is not zero")
        count = _index_count(self.source, self.target)
        clean: dict[int, np.ndarray] = {}
        for k, mat in self.coeffs.items():
            if not 0 <= k < count:
                raise ValueError(f"intersection index {k} outside range({count})")
            arr = np.array(mat, dtype=complex)
            want = (self.target.dim, self.source.dim)
            if arr.shape != want:
                raise ValueError(f"coefficient {k} has shape {arr.shape}, expected {want}")
            arr.setflags(write=False)
            clean[int(k)] = arr
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def zero(cls, l1: FukayaObj, l2: FukayaObj) -> "FukayaMorphism":
        return cls(l1, l2, {})

    def max_abs(self) -> float:
        return max((float(np.abs(m).max()) for m in self.coeffs.values()), default=0.0)


@dataclass(frozen=True)
class TriangleDatum:
    """One immersed triangle of a slope chain: sides along the three lines."""

    m: int
    k_m: int
    l1: float
    l2: float
    l3: float
    area: float
    area_det: float
    target_class: int
    vertices: tuple[tuple[float, float], ...]


def _slope_chain(u12: FukayaMorphism, u23: FukayaMorphism):
    o1, o2, o3 = u12.source, u12.target, u23.target
    if not o2 == u23.source:
        raise ChainMismatch("target of the first morphism differs from source of the second")
    if not (isinstance(o1, SlopeLine) and isinstance(o2, SlopeLine) and isinstance(o3, SlopeLine)):
        raise ChainMismatch("triangle product needs a chain of slope lines")
    if not (o1.n < o2.n < o3.n):
        raise ChainMismatch(f"slopes {(o1.n, o2.n, o3.n)} are not strictly increasing")
    return o1, o2, o3


def _triangle(o1: SlopeLine, o2: SlopeLine, o3: SlopeLine, a: int, b: int, m: int) -> TriangleDatum:
    n21, n32, n31 = o2.n - o1.n, o3.n - o2.n, o3.n - o1.n
    a12 = float(o2.alpha - o1.alpha) / n21
    a23 = float(o3.alpha - o2.alpha) / n32
    k_m = n21 * b - n32 * a + n21 * n32 * m
    l2 = a23 - a12 + b / n32 - a / n21 + m
    l1 = l2 * n32 / n31
    l3 = -l2 * n21 / n31
    bracket = k_m + (a23 - a12) * n32 * n21
    area = bracket * bracket / (2.0 * n32 * n31 * n21)
    area_det = 0.5 * abs(l1 * (o2.n * l2) - l2 * (o1.n * l1))
    xa = a12 + a / n21
    va = (xa, o1.n * xa - float(o1.alpha))
    vb = (xa + l2, o2.n * (xa + l2) - float(o2.alpha) - a)
    vc = (xa + l1, o1.n * (xa + l1) - float(o1.alpha))
    return TriangleDatum(
        m=m,
        k_m=k_m,
        l1=l1,
        l2=l2,
        l3=l3,
        area=area,
        area_det=area_det,
        target_class=(a + b + n32 * m) % n31,
        vertices=(va, vb, vc),
    )


def triangle_scan(
    chain: tuple[SlopeLine, SlopeLine, SlopeLine], a: int, b: int, window: int
) -> list[TriangleDatum]:
    """Enumerate the triangles with |m| <= window for one class pair (a, b)."""
    o1, o2, o3 = chain
    if not (o1.n < o2.n < o3.n):
        raise ChainMismatch(f"slopes {(o1.n, o2.n, o3.n)} are not strictly increasing")
    return [_triangle(o1, o2, o3, a, b, m) for m in range(-window, window + 1)]


def m2(
    u12: FukayaMorphism,
    u23: FukayaMorphism,
    trunc: TruncationSpec = DEFAULT_TRUNCATION,
) -> FukayaMorphism:
    """Triangle product for a strict slope chain.

    Each triangle contributes exp(2 pi i rho Area) times the boundary
    transport exp(l3 N3) B exp(l2 N2) A exp(-l1 N1) and the unitary holonomy
    exp[2 pi i (l1 beta1 - l2 beta2 - l3 beta3)] at the class a + b + (n3-n2) m.
    """
    o1, o2, o3 = _slope_chain(u12, u23)
    if not u12.coeffs or not u23.coeffs:
        return FukayaMorphism.zero(o1, o3)
    rho = o1.kahler.tau
    n21, n32, n31 = o2.n - o1.n, o3.n - o2.n, o3.n - o1.n
    a12 = float(o2.alpha - o1.alpha) / n21
    a23 = float(o3.alpha - o2.alpha) / n32
    b1, b2, b3 = float(o1.beta), float(o2.beta), float(o3.beta)

    poly = sum(s.nil_index - 1 for s in (o1.local, o2.local, o3.local))
    t2 = rho.imag * n21 * n32 / n31
    coef_scale = max(u12.max_abs() * u23.max_abs(), 1.0)
    _, half = gaussian_window(t2, 0.0, poly, trunc.epsilon * 1e-2 / coef_scale)
    if 2 * half + 1 > trunc.max_terms:
        raise TruncationCapExceeded(
            f"triangle window needs {2 * half + 1} terms, cap is {trunc.max_terms}"
        )

    acc: dict[int, np.ndarray] = {}
    for a in sorted(u12.coeffs):
        mat_a = u12.coeffs[a]
        for b in sorted(u23.coeffs):
            mat_b = u23.coeffs[b]
            m0 = round(-(a23 - a12) - (b / n32 - a / n21))
            for m in range(m0 - half, m0 + half + 1):
                tri = _triangle(o1, o2, o3, a, b, m)
                weight = cmath.exp(2j * math.pi * rho * tri.area)
                holonomy = cmath.exp(
                    2j * math.pi * (tri.l1 * b1 - tri.l2 * b2 - tri.l3 * b3)
                )
                mat = (
                    nilpotent_exp(o3.local, tri.l3)
                    @ mat_b
                    @ nilpotent_exp(o2.local, tri.l2)
                    @ mat_a
                    @ nilpotent_exp(o1.local, -tri.l1)
                )
                cls = tri.target_class
                if cls in acc:
                    acc[cls] = acc[cls] + weight * holonomy * mat
                else:
                    acc[cls] = weight * holonomy * mat
    return FukayaMorphism(o1, o3, acc)


def m2_vertical(
    u12: FukayaMorphism,
    u2v: FukayaMorphism,
    trunc: TruncationSpec = DEFAULT_TRUNCATION,
) -> FukayaMorphism:
    """Triangle product of a slope pair against a vertical line.

    The m-th triangle over the class-a point has horizontal displacement
    l = m - alpha_v - alpha12 - a/(n2-n1), base (n2-n1)|l| on the vertical
    side and area (n2-n1) l^2 / 2.  Boundary transport: exp(-l N1) pulled to
    the source leg, exp(l N2) across the slope-2 side, exp(-(n2-n1) l N_v)
    down the vertical side, with matching unitary holonomies.
    """
    o1, o2 = u12.source, u12.target
    vert = u2v.target
    if not o2 == u2v.source:
        raise ChainMismatch("target of the first morphism differs from source of the second")
    if not (isinstance(o1, SlopeLine) and isinstance(o2, SlopeLine) and isinstance(vert, VerticalLine)):
        raise ChainMismatch("expected slope, slope, vertical")
    if not o1.n < o2.n:
        raise ChainMismatch(f"slopes {(o1.n, o2.n)} are not strictly increasing")
    if not u12.coeffs or not u2v.coeffs:
        return FukayaMorphism.zero(o1, vert)
    rho = o1.kahler.tau
    n21 = o2.n - o1.n
    a12 = float(o2.alpha - o1.alpha) / n21
    av, bv = float(vert.alpha), float(vert.beta)
    b1, b2 = float(o1.beta), float(o2.beta)

    poly = sum(s.nil_index - 1 for s in (o1.local, o2.local, vert.local))
    coef_scale = max(u12.max_abs() * u2v.max_abs(), 1.0)
    _, half = gaussian_window(rho.imag * n21, 0.0, poly, trunc.epsilon * 1e-2 / coef_scale)
    if 2 * half + 1 > trunc.max_terms:
        raise TruncationCapExceeded(
            f"triangle window needs {2 * half + 1} terms, cap is {trunc.max_terms}"
        )

    mat_b = u2v.coeffs[0]
    acc = np.zeros((vert.dim, o1.dim), dtype=complex)
    nonzero = False
    for a in sorted(u12.coeffs):
        mat_a = u12.coeffs[a]
        m0 = round(av + a12 + a / n21)
        for m in range(m0 - half, m0 + half + 1):
            el = m - av - a12 - a / n21
            area = 0.5 * n21 * el * el
            weight = cmath.exp(2j * math.pi * rho * area)
            holonomy = cmath.exp(2j * math.pi * el * (b1 - b2 - n21 * bv))
            mat = (
                nilpotent_exp(vert.local, -n21 * el)
                @ mat_b
                @ nilpotent_exp(o2.local, el)
                @ mat_a
                @ nilpotent_exp(o1.local, -el)
            )
            acc = acc + weight * holonomy * mat
            nonzero = True
    return FukayaMorphism(o1, vert, {0: acc} if nonzero else {})


def associativity_residual(
    u12: FukayaMorphism,
    u23: FukayaMorphism,
    u34: FukayaMorphism,
    trunc: TruncationSpec = DEFAULT_TRUNCATION,
) -> float:
    """Max coefficient difference between the two m2 bracketings of a 4-chain."""
    left = m2(m2(u12, u23, trunc), u34, trunc)
    right = m2(u12, m2(u23, u34, trunc), trunc)
    return morphism_distance(left, right)


def morphism_distance(u: FukayaMorphism, v: FukayaMorphism) -> float:
    keys = set(u.coeffs) | set(v.coeffs)
    dist = 0.0
    for k in keys:
        a = u.coeffs.get(k)
        b = v.coeffs.get(k)
        if a is None:
            dist = max(dist, float(np.abs(b).max()))
        elif b is None:
            dist = max(dist, float(np.abs(a).max()))
        else:
            dist = max(dist, float(np.abs(a - b).max()))
    return dist


def pullback_line(r: int, line: FukayaObj) -> FukayaObj:
    """Preimage under the r-fold horizontal cover (x, y) -> (r x, y).

    Slopes multiply by r, the y-intercept parameter is unchanged, and the
    connection form picks up the Jacobian factor r in both its unitary and
    nilpotent parts; the Kahler parameter of the cover is r rho.
    """
    if r < 1:
        raise ValueError("cover degree must be positive")
    if isinstance(line, SlopeLine):
        return SlopeLine(
            n=r * line.n,
            alpha=line.alpha,
            beta=r * line.beta,
            local=line.local.scaled(r),
            kahler=line.kahler.scaled(r),
        )
    raise ValueError(f"no horizontal-cover pullback for {type(line).__name__}")


def pullback_fukaya_morphism(r: int, u: FukayaMorphism) -> FukayaMorphism:
    """Transport coefficients to the r preimages of each intersection point."""
    l1p = pullback_line(r, u.source)
    l2p = pullback_line(r, u.target)
    n21 = u.target.n - u.source.n
    coeffs = {
        c: u.coeffs[c % n21] for c in range(r * n21) if c % n21 in u.coeffs
    }
    return FukayaMorphism(l1p, l2p, coeffs)
