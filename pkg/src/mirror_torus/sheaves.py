"""Holomorphic-side objects and their section algebra.

Objects are line bundles twisted by nilpotent local systems over the quotient
torus with parameter tau, torsion sheaves supported at a point, and direct
images under the standard degree-r isogenies.  Morphism spaces carry the
theta basis

    f_k = (translate by alpha12 tau + beta12) theta[k/(n2-n1), 0]((n2-n1) tau, (n2-n1) z)

and coefficients are always stored in the normalized trivialization in which
the section of Hom reads

    w(z) = sum_k sum_j (1/j!) (-1/(2 pi i (n2-n1)))^j f_k^(j)(z) M^j(T_k),

with M(T) = N2 T - T N1.  Composition is the windowed quadratic-exponential
sum over triangle classes; ``evaluate_section`` provides the independent
pointwise oracle for it.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .nilpotent import LocalSystemData, nilpotent_exp
from .theta import (
    DEFAULT_TRUNCATION,
    ModularParam,
    ThetaChar,
    TruncationCapExceeded,
    TruncationSpec,
    as_param,
    gaussian_window,
    same_param,
    theta_eval,
)

Shift = Union[int, float, Fraction]


class MixedModularParam(ValueError):
    """Objects in one operation live over different modular parameters."""


class ChainMismatch(ValueError):
    """Middle objects of a composition do not agree."""


def _shift_integer_gap(a: Shift, b: Shift) -> bool:
    """True when a - b is an exact integer (Fraction-exact, else exact float)."""
    d = a - b
    if isinstance(d, Fraction):
        return d.denominator == 1
    return float(d) == round(float(d))


@dataclass(frozen=True, eq=False)
class LineBundleObj:
    """Degree-n line bundle shifted by alpha tau + beta, twisted by (V, exp N)."""

    n: int
    alpha: Shift
    beta: Shift
    local: LocalSystemData
    tau: ModularParam

    def __post_init__(self) -> None:
        object.__setattr__(self, "tau", as_param(self.tau))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LineBundleObj):
            return NotImplemented
        return (
            self.n == other.n
            and self.alpha == other.alpha
            and self.beta == other.beta
            and self.local == other.local
            and same_param(self.tau, other.tau)
        )

    @property
    def dim(self) -> int:
        return self.local.dim

    def shift_point(self) -> complex:
        return float(self.alpha) * self.tau.tau + float(self.beta)


@dataclass(frozen=True, eq=False)
class TorsionObj:
    """Torsion sheaf supported at alpha tau + beta with nilpotent thickening N."""

    alpha: Shift
    beta: Shift
    local: LocalSystemData
    tau: ModularParam

    def __post_init__(self) -> None:
        object.__setattr__(self, "tau", as_param(self.tau))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TorsionObj):
            return NotImplemented
        return (
            self.alpha == other.alpha
            and self.beta == other.beta
            and self.local == other.local
            and same_param(self.tau, other.tau)
        )

    @property
    def dim(self) -> int:
        return self.local.dim

    def support_point(self) -> complex:
        return float(self.alpha) * self.tau.tau + float(self.beta)


@dataclass(frozen=True, eq=False)
class PushforwardObj:
    """Direct image of ``base`` (an object over the r-fold cover curve)."""

    r: int
    base: LineBundleObj

    def __post_init__(self) -> None:
        if self.r < 1:
            raise ValueError("cover degree must be positive")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PushforwardObj):
            return NotImplemented
        return self.r == other.r and self.base == other.base

    @property
    def tau(self) -> ModularParam:
        # the direct image lives on the bottom curve
        return ModularParam(self.base.tau.tau / self.r, self.base.tau.side)

    @property
    def rank(self) -> int:
        return self.r * self.base.dim

    @property
    def degree(self) -> int:
        return self.base.n


DerivedObj = Union[LineBundleObj, TorsionObj, PushforwardObj]


@dataclass(frozen=True)
class HomSpace:
    """Descriptor of a degree-zero morphism space."""

    kind: str  # "theta" | "intertwiner" | "torsion" | "zero"
    dimension: int
    index_set: tuple[int, ...]
    alpha12: Optional[Shift] = None
    beta12: Optional[Shift] = None


def hom_space(o1: DerivedObj, o2: DerivedObj) -> HomSpace:
    """Classify Hom(o1, o2) and return its basis bookkeeping.

    Line-bundle pairs with n1 < n2 give the theta-basis space of dimension
    (n2 - n1) d1 d2; equal degrees with shifts agreeing mod 1 give local-system
    intertwiners; a torsion target gives Hom(V1, V_tor); everything else in
    degree zero vanishes.
    """
    if not same_param(o1.tau, o2.tau):
        raise MixedModularParam(
            f"objects live over different parameters {o1.tau.tau} and {o2.tau.tau}"
        )
    if isinstance(o1, LineBundleObj) and isinstance(o2, LineBundleObj):
        gap = o2.n - o1.n
        if gap > 0:
            a12 = Fraction(o2.alpha - o1.alpha, gap) if _both_rational(o1.alpha, o2.alpha) else (o2.alpha - o1.alpha) / gap
            b12 = Fraction(o2.beta - o1.beta, gap) if _both_rational(o1.beta, o2.beta) else (o2.beta - o1.beta) / gap
            return HomSpace(
                "theta", gap * o1.dim * o2.dim, tuple(range(gap)), a12, b12
            )
        if gap == 0 and _shift_integer_gap(o2.alpha, o1.alpha) and _shift_integer_gap(o2.beta, o1.beta):
            from .nilpotent import intertwiners

            dim = len(intertwiners(o1.local.matrix, o2.local.matrix))
            return HomSpace("intertwiner", dim, (0,))
        return HomSpace("zero", 0, ())
    if isinstance(o2, TorsionObj) and isinstance(o1, LineBundleObj):
        return HomSpace("torsion", o1.dim * o2.dim, (0,))
    if isinstance(o1, TorsionObj) and isinstance(o2, TorsionObj):
        if _shift_integer_gap(o2.alpha, o1.alpha) and _shift_integer_gap(o2.beta, o1.beta):
            from .nilpotent import intertwiners

            dim = len(intertwiners(o1.local.matrix, o2.local.matrix))
            return HomSpace("intertwiner", dim, (0,))
        return HomSpace("zero", 0, ())
    if isinstance(o1, PushforwardObj) or isinstance(o2, PushforwardObj):
        problems = hom_pushforward_reduce(_as_pushforward(o1), _as_pushforward(o2))
        dim = sum(p.hom.dimension for p in problems)
        return HomSpace("pushforward", dim, tuple(range(len(problems))))
    return HomSpace("zero", 0, ())


def _both_rational(a: Shift, b: Shift) -> bool:
    return isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction))


def hom_total_dimension(o1: DerivedObj, o2: DerivedObj) -> int:
    """Dimension of the morphism space in its concentrated degree.

    Degree gaps of either sign contribute |n2 - n1| d1 d2 (negative gaps sit
    in degree one); torsion pairings contribute d1 d2 in either direction;
    direct images sum their cover components.  This is the quantity matched
    by the weighted intersection count of the mirror lines.
    """
    if not same_param(o1.tau, o2.tau):
        raise MixedModularParam(
            f"objects live over different parameters {o1.tau.tau} and {o2.tau.tau}"
        )
    if isinstance(o1, LineBundleObj) and isinstance(o2, LineBundleObj):
        gap = o2.n - o1.n
        if gap != 0:
            return abs(gap) * o1.dim * o2.dim
        if _shift_integer_gap(o2.alpha, o1.alpha) and _shift_integer_gap(o2.beta, o1.beta):
            from .nilpotent import intertwiners

            return len(intertwiners(o1.local.matrix, o2.local.matrix))
        return 0
    if isinstance(o1, TorsionObj) != isinstance(o2, TorsionObj):
        tor = o1 if isinstance(o1, TorsionObj) else o2
        other = o2 if isinstance(o1, TorsionObj) else o1
        if isinstance(other, PushforwardObj):
            return other.rank * tor.dim
        return other.dim * tor.dim
    if isinstance(o1, TorsionObj) and isinstance(o2, TorsionObj):
        if _shift_integer_gap(o2.alpha, o1.alpha) and _shift_integer_gap(o2.beta, o1.beta):
            from .nilpotent import intertwiners

            return len(intertwiners(o1.local.matrix, o2.local.matrix))
        return 0
    p1, p2 = _as_pushforward(o1), _as_pushforward(o2)
    total = 0
    for prob in hom_pushforward_reduce(p1, p2):
        total += hom_total_dimension(prob.obj1, prob.obj2)
    return total


@dataclass(frozen=True, eq=False)
class DerivedMorphism:
    """Morphism with coefficients in the normalized theta basis.

    ``coeffs`` maps the basis index k to a (d2 x d1) matrix; absent keys are
    zero, an empty map is the zero morphism.  Intertwiner and torsion-target
    morphisms use the single index 0.
    """

    source: DerivedObj
    target: DerivedObj
    coeffs: dict[int, np.ndarray]

    def __post_init__(self) -> None:
        space = hom_space(self.source, self.target)
        clean: dict[int, np.ndarray] = {}
        for k, mat in self.coeffs.items():
            if k not in space.index_set:
                raise ValueError(f"basis index {k} outside {space.index_set} ({space.kind})")
            arr = np.array(mat, dtype=complex)
            want = (self.target.dim, self.source.dim)
            if arr.shape != want:
                raise ValueError(f"coefficient {k} has shape {arr.shape}, expected {want}")
            arr.setflags(write=False)
            clean[int(k)] = arr
        object.__setattr__(self, "coeffs", clean)

    @property
    def space(self) -> HomSpace:
        return hom_space(self.source, self.target)

    @classmethod
    def zero(cls, o1: DerivedObj, o2: DerivedObj) -> "DerivedMorphism":
        return cls(o1, o2, {})

    def max_abs(self) -> float:
        return max((float(np.abs(m).max()) for m in self.coeffs.values()), default=0.0)


def _require_chain(m12: DerivedMorphism, m23: DerivedMorphism) -> None:
    if not m12.target == m23.source:
        raise ChainMismatch("target of the first morphism differs from source of the second")
    t0 = m12.source.tau
    if not (same_param(t0, m12.target.tau) and same_param(t0, m23.target.tau)):
        raise MixedModularParam("composition mixes modular parameters")


def _nilpotent_poly_order(*systems: LocalSystemData) -> int:
    return sum(s.nil_index - 1 for s in systems)


def compose(
    m12: DerivedMorphism,
    m23: DerivedMorphism,
    trunc: TruncationSpec = DEFAULT_TRUNCATION,
) -> DerivedMorphism:
    """Composition Hom(O1,O2) x Hom(O2,O3) -> Hom(O1,O3).

    For a strict theta chain n1 < n2 < n3 the class-c coefficient accumulates,
    over pairs (a, b) and window integers m with a + b + (n3-n2) m = c mod n3-n1,

        exp[ pi i tau k_m^2 / ((n2-n1)(n3-n2)(n3-n1))
             + 2 pi i k_m ((a23-a12) tau + b23-b12) / (n3-n1) ]
        * exp(c3 N3) B_b exp(c2 N2) A_a exp(c1 N1),

    k_m = (n2-n1) b - (n3-n2) a + (n2-n1)(n3-n2) m, g = k_m/((n2-n1)(n3-n2)),
    (c1, c2, c3) = (-g (n3-n2)/(n3-n1), g, -g (n2-n1)/(n3-n1)).

    Equal-degree factors delegate to plain contraction with the intertwiner.
    """
    _require_chain(m12, m23)
    k12, k23 = m12.space.kind, m23.space.kind
    if k12 == "zero" or k23 == "zero" or not m12.coeffs or not m23.coeffs:
        return DerivedMorphism.zero(m12.source, m23.target)
    if k12 == "intertwiner" and k23 == "intertwiner":
        return DerivedMorphism(
            m12.source, m23.target, {0: m23.coeffs[0] @ m12.coeffs[0]}
        )
    if k12 == "intertwiner":
        t = m12.coeffs[0]
        return DerivedMorphism(
            m12.source, m23.target, {k: b @ t for k, b in m23.coeffs.items()}
        )
    if k23 == "intertwiner":
        t = m23.coeffs[0]
        return DerivedMorphism(
            m12.source, m23.target, {k: t @ a for k, a in m12.coeffs.items()}
        )
    if k12 != "theta" or k23 != "theta":
        raise ChainMismatch(f"unsupported composition kinds ({k12}, {k23})")

    o1, o2, o3 = m12.source, m12.target, m23.target
    tau = o1.tau.tau
    n21, n32, n31 = o2.n - o1.n, o3.n - o2.n, o3.n - o1.n
    dd = n21 * n32 * n31
    step = n21 * n32
    s12, s23 = m12.space, m23.space
    w_scalar = (
        float(s23.alpha12 - s12.alpha12) * tau + float(s23.beta12 - s12.beta12)
    )

    poly = _nilpotent_poly_order(o1.local, o2.local, o3.local)
    t2 = tau.imag * step / n31
    y_lin = (step / n31) * w_scalar.imag
    coef_scale = max(m12.max_abs() * m23.max_abs(), 1.0)
    # extra decades of slop absorb the bounded constants of the nilpotent factors
    center, half = gaussian_window(t2, y_lin, poly, trunc.epsilon * 1e-2 / coef_scale)
    if 2 * half + 1 > trunc.max_terms:
        raise TruncationCapExceeded(
            f"composition window needs {2 * half + 1} terms, cap is {trunc.max_terms}"
        )

    acc: dict[int, np.ndarray] = {}
    for a in sorted(m12.coeffs):
        mat_a = m12.coeffs[a]
        for b in sorted(m23.coeffs):
            mat_b = m23.coeffs[b]
            m0 = round(center - (b / n32 - a / n21))
            for m in range(m0 - half, m0 + half + 1):
                k_m = n21 * b - n32 * a + step * m
                g = k_m / step
                scalar = cmath.exp(
                    1j * math.pi * tau * k_m * k_m / dd
                    + 2j * math.pi * k_m * w_scalar / n31
                )
                mat = (
                    nilpotent_exp(o3.local, -g * n21 / n31)
                    @ mat_b
                    @ nilpotent_exp(o2.local, g)
                    @ mat_a
                    @ nilpotent_exp(o1.local, -g * n32 / n31)
                )
                cls = (a + b + n32 * m) % n31
                if cls in acc:
                    acc[cls] = acc[cls] + scalar * mat
                else:
                    acc[cls] = scalar * mat
    return DerivedMorphism(o1, o3, acc)


def evaluate_section(
    morphism: DerivedMorphism,
    z: complex,
    trunc: TruncationSpec = DEFAULT_TRUNCATION,
) -> np.ndarray:
    """Pointwise value of the Hom-bundle section at z (the composition oracle).

    Satisfies w(z + 1) = w(z) and the multiplier equation
    w(z + tau) = phi12(z) exp(N2) w(z) exp(-N1) with
    phi12(z) = exp(-pi i (n2-n1) tau - 2 pi i ((n2-n1) z + x2 - x1)).
    """
    space = morphism.space
    o1, o2 = morphism.source, morphism.target
    if space.kind == "zero" or not morphism.coeffs:
        return np.zeros((o2.dim, o1.dim), dtype=complex)
    if space.kind == "intertwiner":
        return morphism.coeffs[0].copy()
    if space.kind != "theta":
        raise ValueError(f"cannot evaluate morphisms of kind {space.kind}")
    n21 = o2.n - o1.n
    tau = o1.tau.tau
    zs = complex(z) + float(space.alpha12) * tau + float(space.beta12)
    n1m, n2m = o1.local.matrix, o2.local.matrix
    depth = o1.local.nil_index + o2.local.nil_index - 1
    out = np.zeros((o2.dim, o1.dim), dtype=complex)
    for k, coeff in sorted(morphism.coeffs.items()):
        power = coeff
        for j in range(depth):
            f_j = (n21**j) * theta_eval(
                ThetaChar(k / n21), n21 * tau, n21 * zs, j, trunc
            )
            out = out + (
                (-1.0 / (2j * math.pi * n21)) ** j / math.factorial(j)
            ) * f_j * power
            power = n2m @ power - power @ n1m
    return out


def pullback_isogeny(
    r: int, obj: LineBundleObj, probe_z: complex = 0.17 + 0.09j
) -> tuple[LineBundleObj, complex]:
    """Pull back along the degree-r isogeny from the cover curve (tau' = r tau).

    The r-fold cocycle product of the standard multiplier is again standard:
    degree r n, shift x' = r x (so alpha' = alpha, beta' = r beta over tau'),
    holonomy exp(N)^r = exp(r N).  The scalar normalization factor is computed
    from the multiplier ratio at ``probe_z`` rather than assumed; it is 1 up to
    roundoff.
    """
    if r < 1:
        raise ValueError("cover degree must be positive")
    tau = obj.tau.tau
    pulled = LineBundleObj(
        n=r * obj.n,
        alpha=obj.alpha,
        beta=r * obj.beta,
        local=obj.local.scaled(r),
        tau=obj.tau.scaled(r),
    )
    # cocycle product of phi(z) = exp(-pi i n tau - 2 pi i (n z + x)) over z + i tau
    x = obj.shift_point()
    log_prod = sum(
        -1j * math.pi * obj.n * tau - 2j * math.pi * (obj.n * (probe_z + i * tau) + x)
        for i in range(r)
    )
    log_std = -1j * math.pi * pulled.n * pulled.tau.tau - 2j * math.pi * (
        pulled.n * probe_z + pulled.shift_point()
    )
    factor = cmath.exp(log_prod - log_std)
    return pulled, factor


def pullback_morphism(r: int, morphism: DerivedMorphism) -> DerivedMorphism:
    """Pull a theta-basis morphism back to the r-fold cover curve.

    The basis splits as f_a = sum_{j mod r} f'_{a + (n2-n1) j}; the normalized
    coefficients transport verbatim to every index with the same residue.
    """
    o1p, _ = pullback_isogeny(r, morphism.source)
    o2p, _ = pullback_isogeny(r, morphism.target)
    n21 = morphism.target.n - morphism.source.n
    coeffs = {
        c: morphism.coeffs[c % n21]
        for c in range(r * n21)
        if c % n21 in morphism.coeffs
    }
    return DerivedMorphism(o1p, o2p, coeffs)


@dataclass(frozen=True)
class PushforwardRealization:
    """Block-cyclic multiplier of a direct image on the bottom curve."""

    r: int
    block_dim: int
    rank: int
    degree: int
    base: LineBundleObj

    def matrix(self, z: complex) -> np.ndarray:
        """Multiplier at z: shift blocks e_i -> e_{i+1}, corner block A(z) e_r -> e_1."""
        d, r = self.block_dim, self.r
        base = self.base
        phi = cmath.exp(
            -1j * math.pi * base.n * base.tau.tau
            - 2j * math.pi * (base.n * complex(z) + base.shift_point())
        )
        corner = phi * nilpotent_exp(base.local)
        out = np.zeros((r * d, r * d), dtype=complex)
        for i in range(r - 1):
            out[(i + 1) * d : (i + 2) * d, i * d : (i + 1) * d] = np.eye(d)
        out[0:d, (r - 1) * d : r * d] = corner
        return out


def pushforward_object(
    r: int, base: LineBundleObj
) -> tuple[Union[PushforwardObj, LineBundleObj], PushforwardRealization]:
    """Direct image of ``base`` along the degree-r isogeny, with its multiplier.

    r = 1 degenerates to the base object itself.  Rank multiplies by r, degree
    is preserved.
    """
    realization = PushforwardRealization(
        r=r, block_dim=base.dim, rank=r * base.dim, degree=base.n, base=base
    )
    if r == 1:
        return base, realization
    return PushforwardObj(r, base), realization


def _as_pushforward(obj: DerivedObj) -> PushforwardObj:
    if isinstance(obj, PushforwardObj):
        return obj
    if isinstance(obj, LineBundleObj):
        return PushforwardObj(1, obj)
    raise ValueError(f"no cover presentation for {type(obj).__name__}")


@dataclass(frozen=True)
class HomProblem:
    """One component of a Hom space between direct images, over the common cover."""

    component: int
    obj1: LineBundleObj
    obj2: LineBundleObj
    hom: HomSpace


def hom_pushforward_reduce(o1: PushforwardObj, o2: PushforwardObj) -> list[HomProblem]:
    """Reduce Hom(push_{r1} G1, push_{r2} G2) to gcd(r1, r2) plain problems.

    Base change on the fibered product of the two covers gives, per component
    k = 0..d-1 (d = gcd), the space Hom(pull_{r2/d} G1, pull_{r1/d} t_k G2) over
    the lcm(r1, r2)-cover curve, where t_k translates by k tau (tau the bottom
    parameter), shifting alpha of G2 by n2 k / r2.
    """
    if not same_param(o1.tau, o2.tau):
        raise MixedModularParam(
            f"objects live over different parameters {o1.tau.tau} and {o2.tau.tau}"
        )
    r1, r2 = o1.r, o2.r
    d = math.gcd(r1, r2)
    r1p, r2p = r1 // d, r2 // d
    problems = []
    for k in range(d):
        left, _ = pullback_isogeny(r2p, o1.base)
        g2 = o2.base
        twisted = replace(
            g2, alpha=g2.alpha + (Fraction(g2.n * k, r2) if isinstance(g2.alpha, (int, Fraction)) else g2.n * k / r2)
        )
        right, _ = pullback_isogeny(r1p, twisted)
        problems.append(HomProblem(k, left, right, hom_space(left, right)))
    return problems


def compose_with_torsion(
    m12: DerivedMorphism,
    b_map: np.ndarray,
    torsion: TorsionObj,
    trunc: TruncationSpec = DEFAULT_TRUNCATION,
) -> np.ndarray:
    """Compose O1 -> O2 with the torsion-target morphism B in Hom(V2, V_tor).

    Expanding the section at the thickened support point x gives

        result = sum_k sum_{j,l} (1/j!) (1/l!) (N_tor / 2 pi i)^j
                 (-1/(2 pi i (n2-n1)))^l  f_k^(j+l)(x)  B  M12^l(A_k),

    i.e. the basis function evaluated at x + N_tor/(2 pi i) - M12/(2 pi i (n2-n1)).
    """
    o1, o2 = m12.source, m12.target
    if not (same_param(o2.tau, torsion.tau) and same_param(o1.tau, o2.tau)):
        raise MixedModularParam("torsion composition mixes modular parameters")
    b_map = np.asarray(b_map, dtype=complex)
    if b_map.shape != (torsion.dim, o2.dim):
        raise ValueError(f"B has shape {b_map.shape}, expected {(torsion.dim, o2.dim)}")
    space = m12.space
    if space.kind == "intertwiner":
        return b_map @ m12.coeffs.get(0, np.zeros((o2.dim, o1.dim)))
    if space.kind != "theta":
        return np.zeros((torsion.dim, o1.dim), dtype=complex)

    n21 = o2.n - o1.n
    tau = o1.tau.tau
    x = torsion.support_point() + float(space.alpha12) * tau + float(space.beta12)
    n1m, n2m = o1.local.matrix, o2.local.matrix
    depth12 = o1.local.nil_index + o2.local.nil_index - 1
    nu_t = torsion.local.nil_index
    out = np.zeros((torsion.dim, o1.dim), dtype=complex)
    for k, coeff in sorted(m12.coeffs.items()):
        power = coeff
        for el in range(depth12):
            left = b_map @ power
            for j in range(nu_t):
                f_jl = (n21 ** (j + el)) * theta_eval(
                    ThetaChar(k / n21), n21 * tau, n21 * x, j + el, trunc
                )
                w_j = (1.0 / (2j * math.pi)) ** j / math.factorial(j)
                w_l = (-1.0 / (2j * math.pi * n21)) ** el / math.factorial(el)
                out = out + w_j * w_l * f_jl * left
                left = torsion.local.matrix @ left
            power = n2m @ power - power @ n1m
    return out
