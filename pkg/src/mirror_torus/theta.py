"""Jacobi theta functions with rational characteristics.

Everything downstream is built on the series

    theta[c', c''](tau, z) = sum_{m in Z} exp{2 pi i [ tau (m+c')^2 / 2
                                                       + (m+c') (z+c'') ]},

absolutely convergent for Im tau > 0.  Derivatives in z are taken term by
term, each term picking up a factor (2 pi i (m+c'))^order.  Truncation is
by an explicit Gaussian tail bound so that every evaluation carries a
certified absolute error target.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Union

Real = Union[int, float]  # fractions.Fraction also works: it coerces via float()

TWO_PI_I = 2j * math.pi

#: largest supported z-derivative order (term-wise differentiation stays
#: numerically benign well past this; composition needs at most a handful)
MAX_DERIV_ORDER = 16


class NonConvergent(ValueError):
    """The series does not converge (Im tau <= 0)."""


class TruncationCapExceeded(RuntimeError):
    """The certified window needs more terms than the configured cap."""


@dataclass(frozen=True)
class ModularParam:
    """Point of the upper half plane.

    ``side`` records the intended reading: "complex" for the complex-structure
    parameter tau of the quotient torus, "kahler" for the complexified Kahler
    parameter rho = b + iA of the symplectic torus.  The mirror map identifies
    the two values verbatim, so arithmetic never branches on the flag.
    """

    tau: complex
    side: str = "complex"

    def __post_init__(self) -> None:
        object.__setattr__(self, "tau", complex(self.tau))
        if not self.tau.imag > 0.0:
            raise NonConvergent(f"Im(tau) must be positive, got {self.tau}")
        if self.side not in ("complex", "kahler"):
            raise ValueError(f"unknown side {self.side!r}")

    @property
    def q(self) -> complex:
        return cmath.exp(TWO_PI_I * self.tau)

    def scaled(self, r: int) -> "ModularParam":
        """Parameter of the degree-r cover (tau -> r tau)."""
        return ModularParam(r * self.tau, self.side)


def as_param(tau: "ModularParam | complex", side: str = "complex") -> ModularParam:
    """Coerce a raw upper-half-plane number to a ModularParam."""
    if isinstance(tau, ModularParam):
        return tau
    return ModularParam(complex(tau), side)


def same_param(t1: "ModularParam | complex", t2: "ModularParam | complex") -> bool:
    """Equality of modular parameters up to arithmetic roundoff.

    Scaling tau up to a cover curve and back is not exact in floats, so every
    structural comparison goes through this 1e-12 relative tolerance.
    """
    a = t1.tau if isinstance(t1, ModularParam) else complex(t1)
    b = t2.tau if isinstance(t2, ModularParam) else complex(t2)
    return cmath.isclose(a, b, rel_tol=1e-12, abs_tol=1e-12)


@dataclass(frozen=True)
class ThetaChar:
    """Characteristic pair (c', c'').

    Values are stored exactly as given; comparison across mod-1 reduction goes
    through :meth:`reduced`, which also returns the unit-modulus factor picked
    up by the reduction:

        theta[c'+p, c''+s] = exp(2 pi i (c' mod 1) s) * theta[c' mod 1, c'' mod 1]

    for integers p, s (the c' shift alone is free of any factor).
    """

    c1: Real  # c'
    c2: Real = 0  # c''

    def reduced(self) -> tuple["ThetaChar", complex]:
        c1r = self.c1 - math.floor(self.c1)
        c2r = self.c2 - math.floor(self.c2)
        factor = cmath.exp(TWO_PI_I * c1r * (self.c2 - c2r))
        return ThetaChar(c1r, c2r), factor


@dataclass(frozen=True)
class TruncationSpec:
    """Absolute tail target and a hard cap on the number of terms."""

    epsilon: float = 1e-12
    max_terms: int = 100_000

    def __post_init__(self) -> None:
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be at least 1")


DEFAULT_TRUNCATION = TruncationSpec()


def gaussian_window(t2: float, y: float, poly_order: int, epsilon: float) -> tuple[float, int]:
    """Certified half-width for sums  sum_m p(m+c) exp(-pi t2 (m+c)^2 - 2 pi y (m+c)).

    Returns ``(center, M)`` with center = -y/t2 such that the tail with
    |m + c - center| > M is below ``epsilon``, where |p(x)| <= (2 pi |x|)^j,
    j = ``poly_order``.

    Bound: with u = x + y/t2 the term modulus is (2 pi |x|)^j exp(K - pi t2 u^2),
    K = pi y^2 / t2, and |x| <= |u| + c0 with c0 = |y|/t2.  For |u| >= U >= 1 the
    ratio of consecutive terms is at most rho = 2^j exp(-pi t2 (2U+1)); requiring
    rho <= 1/2 makes each one-sided tail a geometric series dominated by twice its
    first term, so

        tail <= 4 (2 pi (U + c0))^j exp(K - pi t2 U^2) <= epsilon

    is solved for U by a monotone fixed-point iteration.
    """
    if not t2 > 0.0:
        raise NonConvergent("Gaussian decay rate must be positive")
    j = poly_order
    c0 = abs(y) / t2
    big_k = math.pi * y * y / t2
    log_target = big_k + math.log(4.0 / epsilon)
    u = math.sqrt(max(log_target + j, 1.0) / (math.pi * t2)) + 1.0
    for _ in range(6):
        poly = j * math.log(2.0 * math.pi * (u + c0) + math.e)
        u = math.sqrt(max(log_target + poly, 1.0) / (math.pi * t2))
    # ratio condition 2^j exp(-pi t2 (2U+1)) <= 1/2
    u_ratio = ((j + 1) * math.log(2.0) / (math.pi * t2) - 1.0) / 2.0
    u = max(u, u_ratio, 1.0)
    return -y / t2, math.ceil(u) + 1


def truncation_window(
    char: ThetaChar,
    tau: ModularParam | complex,
    deriv_order: int = 0,
    epsilon: float = DEFAULT_TRUNCATION.epsilon,
    z_imag: float = 0.0,
) -> int:
    """Half-width M of the certified summation window for ``theta_eval``.

    The window is centered at the Gaussian peak m = -c' - Im(z)/Im(tau) (which
    is -c' for real z); the omitted tail, including the polynomial factor from
    ``deriv_order``, is below ``epsilon``.
    """
    tau_c = tau.tau if isinstance(tau, ModularParam) else complex(tau)
    if not tau_c.imag > 0.0:
        raise NonConvergent(f"Im(tau) must be positive, got {tau_c}")
    _, m = gaussian_window(tau_c.imag, z_imag, deriv_order, epsilon)
    return m


def theta_eval(
    char: ThetaChar,
    tau: ModularParam | complex,
    z: complex = 0.0,
    deriv_order: int = 0,
    trunc: TruncationSpec = DEFAULT_TRUNCATION,
) -> complex:
    """Evaluate (d/dz)^order theta[c', c''](tau, z).

    Raises ``NonConvergent`` for Im tau <= 0 and ``TruncationCapExceeded`` when
    the certified window does not fit in ``trunc.max_terms``.
    """
    if deriv_order < 0 or deriv_order > MAX_DERIV_ORDER:
        raise ValueError(f"deriv_order must be in [0, {MAX_DERIV_ORDER}]")
    tau_c = tau.tau if isinstance(tau, ModularParam) else complex(tau)
    if not tau_c.imag > 0.0:
        raise NonConvergent(f"Im(tau) must be positive, got {tau_c}")
    z = complex(z)
    c1 = float(char.c1)
    c2 = float(char.c2)

    half = truncation_window(char, tau_c, deriv_order, trunc.epsilon, z.imag)
    if 2 * half + 1 > trunc.max_terms:
        raise TruncationCapExceeded(
            f"window needs {2 * half + 1} terms, cap is {trunc.max_terms}"
        )
    center = round(-c1 - z.imag / tau_c.imag)

    total = 0.0 + 0.0j
    for m in range(center - half, center + half + 1):
        x = m + c1
        w = TWO_PI_I * x
        term = cmath.exp(TWO_PI_I * (tau_c * x * x / 2.0 + x * (z + c2)))
        if deriv_order:
            term *= w**deriv_order
        total += term
    return total


def theta_abs_bound(
    char: ThetaChar,
    tau: ModularParam | complex,
    z: complex = 0.0,
    trunc: TruncationSpec = DEFAULT_TRUNCATION,
) -> float:
    """Upper bound sum_m |term| for theta[c](tau, z) (used to size outer windows)."""
    tau_c = tau.tau if isinstance(tau, ModularParam) else complex(tau)
    z = complex(z)
    c1 = float(char.c1)
    half = truncation_window(char, tau_c, 0, trunc.epsilon, z.imag)
    center = round(-c1 - z.imag / tau_c.imag)
    total = 0.0
    for m in range(center - half, center + half + 1):
        x = m + c1
        total += math.exp(-2.0 * math.pi * (tau_c.imag * x * x / 2.0 + x * z.imag))
    return total + trunc.epsilon


def addition_identity_residual(
    n1: int,
    n2: int,
    n3: int,
    a: int,
    b: int,
    tau: ModularParam | complex,
    z1: complex = 0.0,
    z2: complex = 0.0,
    trunc: TruncationSpec = DEFAULT_TRUNCATION,
) -> float:
    """|LHS - RHS| of the two-factor product identity.

    LHS = theta[a/(n2-n1), 0]((n2-n1) tau, (n2-n1) z1)
          * theta[b/(n3-n2), 0]((n3-n2) tau, (n3-n2) z2)

    RHS = sum_m exp{ pi i tau k_m^2 / ((n2-n1)(n3-n2)(n3-n1))
                     + 2 pi i k_m (z2-z1) / (n3-n1) }
          * theta[(a+b+(n3-n2) m)/(n3-n1), 0]((n3-n1) tau, (n2-n1) z1 + (n3-n2) z2)

    with k_m = (n2-n1) b - (n3-n2) a + (n2-n1)(n3-n2) m.
    """
    if not (n1 < n2 < n3):
        raise ValueError("degrees must be strictly increasing")
    tau_c = tau.tau if isinstance(tau, ModularParam) else complex(tau)
    if not tau_c.imag > 0.0:
        raise NonConvergent(f"Im(tau) must be positive, got {tau_c}")
    z1 = complex(z1)
    z2 = complex(z2)
    p, s, n31 = n2 - n1, n3 - n2, n3 - n1
    dd = p * s * n31

    lhs = theta_eval(ThetaChar(a / p), p * tau_c, p * z1, 0, trunc) * theta_eval(
        ThetaChar(b / s), s * tau_c, s * z2, 0, trunc
    )

    z_in = p * z1 + s * z2
    # the theta factor is bounded uniformly over the n31 residue classes
    bound = max(
        theta_abs_bound(ThetaChar(c / n31), n31 * tau_c, z_in, trunc)
        for c in range(n31)
    )
    step = p * s
    t2 = tau_c.imag * step / n31
    y_lin = step * (z2 - z1).imag / n31
    center, half = gaussian_window(t2, y_lin, 0, trunc.epsilon / bound)
    c_m = (p * b - s * a) / step
    m0 = round(center - c_m)

    rhs = 0.0 + 0.0j
    for m in range(m0 - half, m0 + half + 1):
        k_m = p * b - s * a + step * m
        pref = cmath.exp(
            1j * math.pi * tau_c * k_m * k_m / dd + TWO_PI_I * k_m * (z2 - z1) / n31
        )
        rhs += pref * theta_eval(
            ThetaChar((a + b + s * m) / n31), n31 * tau_c, z_in, 0, trunc
        )
    return abs(lhs - rhs)


def isogeny_split_residual(
    a: int,
    n: int,
    r: int,
    tau: ModularParam | complex,
    z: complex = 0.0,
    trunc: TruncationSpec = DEFAULT_TRUNCATION,
) -> float:
    """| theta[a/n,0](n tau, n z) - sum_{k mod r} theta[(a+nk)/(nr),0](n r^2 tau, n r z) |.

    Splitting the summation index by residue mod r turns the left series into
    exactly r series over the r-fold cover; the residual is numerical noise.
    """
    if n < 1 or r < 1:
        raise ValueError("n and r must be positive")
    tau_c = tau.tau if isinstance(tau, ModularParam) else complex(tau)
    z = complex(z)
    lhs = theta_eval(ThetaChar(a / n), n * tau_c, n * z, 0, trunc)
    rhs = sum(
        theta_eval(ThetaChar((a + n * k) / (n * r)), n * r * r * tau_c, n * r * z, 0, trunc)
        for k in range(r)
    )
    return abs(lhs - rhs)
