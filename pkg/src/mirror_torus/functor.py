"""The mirror functor between the two section algebras.

Objects map by reading the same five-tuple on the other side: a degree-n
bundle shifted by alpha tau + beta with holonomy exp(N) becomes the line
y = n x - alpha with connection (-2 pi i beta + N) dx over the Kahler
parameter rho = tau; torsion sheaves at alpha tau + beta become vertical
lines x = -alpha; direct images become (r, n)-direction cover lines.

Morphisms map coefficient-by-coefficient with one prefactor per Hom space,

    u_k = exp(-pi i tau a12^2 n21 - 2 pi i a12 n21 b12)
          exp(a12 N2) T_k exp(-a12 N1),

which absorbs the translation normalizing the theta basis.  With this
prefactor the triangle product matches the composition sum term by term:
comparing the class-c coefficients is the whole functoriality check, and
``functoriality_residual`` measures exactly that.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .fukaya import (
    CoverLine,
    FukayaMorphism,
    FukayaObj,
    SlopeLine,
    VerticalLine,
    m2,
    m2_vertical,
    morphism_distance,
    pullback_fukaya_morphism,
    pullback_line,
)
from .nilpotent import nilpotent_exp
from .sheaves import (
    DerivedMorphism,
    DerivedObj,
    LineBundleObj,
    PushforwardObj,
    TorsionObj,
    compose,
    compose_with_torsion,
    evaluate_section,
    pullback_isogeny,
    pullback_morphism,
)
from .theta import DEFAULT_TRUNCATION, ModularParam, TruncationSpec


@dataclass(frozen=True)
class PhiPrefactor:
    """Scalar and sandwich matrices applied to every coefficient of one Hom."""

    scalar: complex
    left: np.ndarray
    right: np.ndarray

    def apply(self, mat: np.ndarray) -> np.ndarray:
        return self.scalar * (self.left @ mat @ self.right)

    def inverse(self) -> "PhiPrefactor":
        return PhiPrefactor(
            1.0 / self.scalar, np.linalg.inv(self.left), np.linalg.inv(self.right)
        )


def phi_object(obj: DerivedObj) -> FukayaObj:
    """Mirror of one object; the five parameters transport verbatim."""
    if isinstance(obj, LineBundleObj):
        return SlopeLine(
            n=obj.n,
            alpha=obj.alpha,
            beta=obj.beta,
            local=obj.local,
            kahler=ModularParam(obj.tau.tau, "kahler"),
        )
    if isinstance(obj, TorsionObj):
        return VerticalLine(
            alpha=obj.alpha,
            beta=obj.beta,
            local=obj.local,
            kahler=ModularParam(obj.tau.tau, "kahler"),
        )
    if isinstance(obj, PushforwardObj):
        inner = phi_object(obj.base)
        return CoverLine(obj.r, inner)
    raise ValueError(f"no mirror for {type(obj).__name__}")


def phi_inverse_object(line: FukayaObj) -> DerivedObj:
    """Inverse transport; ``phi_object`` after this is the identity."""
    if isinstance(line, SlopeLine):
        return LineBundleObj(
            n=line.n,
            alpha=line.alpha,
            beta=line.beta,
            local=line.local,
            tau=ModularParam(line.kahler.tau, "complex"),
        )
    if isinstance(line, VerticalLine):
        return TorsionObj(
            alpha=line.alpha,
            beta=line.beta,
            local=line.local,
            tau=ModularParam(line.kahler.tau, "complex"),
        )
    if isinstance(line, CoverLine):
        base = phi_inverse_object(line.inner)
        return PushforwardObj(line.r, base)
    raise ValueError(f"no inverse mirror for {type(line).__name__}")


def phi_prefactor(o1: LineBundleObj, o2: LineBundleObj) -> PhiPrefactor:
    """Prefactor of Hom(O1, O2) for a strict theta pair n1 < n2."""
    tau = o1.tau.tau
    n21 = o2.n - o1.n
    a12 = float(o2.alpha - o1.alpha) / n21
    b12 = float(o2.beta - o1.beta) / n21
    scalar = cmath.exp(
        -1j * math.pi * tau * a12 * a12 * n21 - 2j * math.pi * a12 * n21 * b12
    )
    return PhiPrefactor(
        scalar, nilpotent_exp(o2.local, a12), nilpotent_exp(o1.local, -a12)
    )


def phi_morphism(m: DerivedMorphism) -> FukayaMorphism:
    """Mirror of a theta-basis morphism onto intersection-point coefficients."""
    space = m.space
    l1 = phi_object(m.source)
    l2 = phi_object(m.target)
    if space.kind == "zero" or not m.coeffs:
        return FukayaMorphism.zero(l1, l2)
    if space.kind == "torsion":
        return phi_torsion_morphism(m)
    if space.kind != "theta":
        raise ValueError(f"no mirror transport for morphism kind {space.kind}")
    pref = phi_prefactor(m.source, m.target)
    return FukayaMorphism(l1, l2, {k: pref.apply(t) for k, t in m.coeffs.items()})


def phi_torsion_morphism(m: DerivedMorphism) -> FukayaMorphism:
    """Mirror of a bundle-to-torsion morphism onto the single slope-vertical point."""
    o = m.source
    t = m.target
    if not (isinstance(o, LineBundleObj) and isinstance(t, TorsionObj)):
        raise ValueError("expected a line-bundle source and torsion target")
    tau = o.tau.tau
    n, a1, b1 = o.n, float(o.alpha), float(o.beta)
    a2, b2 = float(t.alpha), float(t.beta)
    scalar = cmath.exp(
        -1j * math.pi * tau * n * a2 * a2
        - 2j * math.pi * tau * a1 * a2
        - 2j * math.pi * a2 * (b1 + n * b2)
        - 2j * math.pi * a1 * b2
    )
    left = nilpotent_exp(t.local, -(n * a2 + a1))
    right = nilpotent_exp(o.local, a2)
    pref = PhiPrefactor(scalar, left, right)
    l1 = phi_object(o)
    lv = phi_object(t)
    coeffs = {0: pref.apply(m.coeffs[0])} if 0 in m.coeffs else {}
    return FukayaMorphism(l1, lv, coeffs)


def functoriality_residual(
    m12: DerivedMorphism,
    m23: DerivedMorphism,
    trunc: TruncationSpec = DEFAULT_TRUNCATION,
) -> float:
    """Max coefficient gap between mirror-of-composition and triangle product."""
    lhs = phi_morphism(compose(m12, m23, trunc))
    rhs = m2(phi_morphism(m12), phi_morphism(m23), trunc)
    return morphism_distance(lhs, rhs)


def torsion_functoriality_residual(
    m12: DerivedMorphism,
    b_map: np.ndarray,
    torsion: TorsionObj,
    trunc: TruncationSpec = DEFAULT_TRUNCATION,
) -> float:
    """Same comparison with a torsion target and the vertical triangle product."""
    o1, o2 = m12.source, m12.target
    m2s = DerivedMorphism(o2, torsion, {0: np.asarray(b_map, dtype=complex)})
    composed = DerivedMorphism(
        o1, torsion, {0: compose_with_torsion(m12, b_map, torsion, trunc)}
    )
    lhs = phi_torsion_morphism(composed)
    rhs = m2_vertical(phi_morphism(m12), phi_torsion_morphism(m2s), trunc)
    return morphism_distance(lhs, rhs)


@dataclass(frozen=True)
class IsogenySquare:
    """Outcome of the pullback compatibility check for one morphism."""

    objects_match: bool
    coeff_residual: float
    section_residual: float

    @property
    def residual(self) -> float:
        return max(self.coeff_residual, self.section_residual)


def isogeny_square_residual(
    r: int,
    m: DerivedMorphism,
    trunc: TruncationSpec = DEFAULT_TRUNCATION,
    probes: tuple[complex, ...] = (0.13 + 0.08j, -0.27 + 0.19j),
) -> IsogenySquare:
    """Commutativity of mirror transport with the degree-r cover pullback.

    Checks three layers: the two object routes agree exactly, the two
    coefficient routes agree numerically, and the pulled-back morphism
    evaluates pointwise to the same section as the original (each side summing
    its own theta series).
    """
    pulled = pullback_morphism(r, m)
    lhs = phi_morphism(pulled)
    rhs = pullback_fukaya_morphism(r, phi_morphism(m))
    objects_match = lhs.source == rhs.source and lhs.target == rhs.target
    src_direct = pullback_line(r, phi_object(m.source))
    tgt_direct = pullback_line(r, phi_object(m.target))
    objects_match = objects_match and lhs.source == src_direct and lhs.target == tgt_direct
    coeff_residual = morphism_distance(lhs, rhs)
    section_residual = 0.0
    for z in probes:
        base_val = evaluate_section(m, z, trunc)
        cover_val = evaluate_section(pulled, z, trunc)
        section_residual = max(section_residual, float(np.abs(base_val - cover_val).max()))
    return IsogenySquare(objects_match, coeff_residual, section_residual)
