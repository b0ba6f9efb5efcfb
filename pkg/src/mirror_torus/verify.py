"""Randomized verification suites shared by the CLI and the acceptance tests.

Every suite is a pure function of (seed, count, epsilon, trunc_epsilon):
the same seed regenerates the same cases, so a rerun at a tighter truncation
target can be compared case by case against the original residuals.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Union

import numpy as np

from . import fukaya as fk
from . import functor as ft
from . import sheaves as sh
from . import theta as th
from .nilpotent import LocalSystemData

Shift = Union[int, float, Fraction]

RATIONAL_SHIFTS = (
    Fraction(0),
    Fraction(1, 4),
    Fraction(-1, 4),
    Fraction(1, 3),
    Fraction(-1, 3),
    Fraction(1, 2),
)


@dataclass(frozen=True)
class CaseRecord:
    """One randomized case: its parameters, residual, and verdict."""

    case: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance


@dataclass
class SuiteResult:
    suite: str
    seed: int
    count: int
    epsilon: float
    trunc_epsilon: float
    cases: list[CaseRecord] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    @property
    def worst(self) -> float:
        return max((c.residual for c in self.cases), default=0.0)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _rand_tau(rng: np.random.Generator) -> complex:
    return complex(rng.uniform(-0.5, 0.5), rng.uniform(0.5, 2.0))


def _rand_shift(rng: np.random.Generator) -> Shift:
    if rng.uniform() < 0.5:
        return RATIONAL_SHIFTS[rng.integers(0, len(RATIONAL_SHIFTS))]
    return float(rng.uniform(-0.5, 0.5))


def _rand_local(rng: np.random.Generator) -> LocalSystemData:
    k = int(rng.integers(1, 4))
    return LocalSystemData.trivial(1) if k == 1 else LocalSystemData.jordan(k)


def _rand_coeffs(
    rng: np.random.Generator, d2: int, d1: int, indices: int
) -> dict[int, np.ndarray]:
    return {
        k: rng.normal(size=(d2, d1)) + 1j * rng.normal(size=(d2, d1))
        for k in range(indices)
    }


def _rand_chain(
    rng: np.random.Generator, length: int, tau: complex
) -> list[sh.LineBundleObj]:
    degrees = [int(rng.integers(-3, 4))]
    for _ in range(length - 1):
        degrees.append(degrees[-1] + int(rng.integers(1, 3)))
    return [
        sh.LineBundleObj(n, _rand_shift(rng), _rand_shift(rng), _rand_local(rng), tau)
        for n in degrees
    ]


def _rand_morphism(
    rng: np.random.Generator, o1: sh.LineBundleObj, o2: sh.LineBundleObj
) -> sh.DerivedMorphism:
    return sh.DerivedMorphism(
        o1, o2, _rand_coeffs(rng, o2.dim, o1.dim, o2.n - o1.n)
    )


def addition_suite(
    seed: int, count: int, epsilon: float, trunc_epsilon: float = 1e-12
) -> SuiteResult:
    """Theta addition identity at random gaps, classes, tau, and arguments."""
    rng = _rng(seed)
    trunc = th.TruncationSpec(trunc_epsilon)
    start = time.perf_counter()
    result = SuiteResult("addition", seed, count, epsilon, trunc_epsilon)
    for i in range(count):
        n21 = int(rng.integers(1, 4))
        n32 = int(rng.integers(1, 4))
        n1 = int(rng.integers(-3, 4))
        n2, n3 = n1 + n21, n1 + n21 + n32
        a = int(rng.integers(0, n21))
        b = int(rng.integers(0, n32))
        tau = _rand_tau(rng)
        z1 = complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.3, 0.3))
        z2 = complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.3, 0.3))
        res = th.addition_identity_residual(n1, n2, n3, a, b, tau, z1, z2, trunc)
        result.cases.append(
            CaseRecord(
                f"n=({n1},{n2},{n3}) a={a} b={b} tau={tau:.3f} z1={z1:.3f} z2={z2:.3f}",
                res,
                epsilon,
            )
        )
    result.wall_time = time.perf_counter() - start
    return result


def functoriality_suite(
    seed: int, count: int, epsilon: float, trunc_epsilon: float = 1e-12
) -> SuiteResult:
    """Mirror transport of random two-step compositions."""
    rng = _rng(seed)
    trunc = th.TruncationSpec(trunc_epsilon)
    start = time.perf_counter()
    result = SuiteResult("functoriality", seed, count, epsilon, trunc_epsilon)
    for i in range(count):
        tau = _rand_tau(rng)
        o1, o2, o3 = _rand_chain(rng, 3, tau)
        m12 = _rand_morphism(rng, o1, o2)
        m23 = _rand_morphism(rng, o2, o3)
        res = ft.functoriality_residual(m12, m23, trunc)
        result.cases.append(
            CaseRecord(
                f"n=({o1.n},{o2.n},{o3.n}) dims=({o1.dim},{o2.dim},{o3.dim}) tau={tau:.3f}",
                res,
                epsilon,
            )
        )
    result.wall_time = time.perf_counter() - start
    return result


def associativity_suite(
    seed: int,
    count: int,
    epsilon: float,
    trunc_epsilon: float = 1e-12,
    side: str = "derived",
) -> SuiteResult:
    """Two bracketings of random three-step compositions, either side."""
    rng = _rng(seed)
    trunc = th.TruncationSpec(trunc_epsilon)
    start = time.perf_counter()
    result = SuiteResult(f"associativity-{side}", seed, count, epsilon, trunc_epsilon)
    for i in range(count):
        tau = _rand_tau(rng)
        chain = _rand_chain(rng, 4, tau)
        ms = [_rand_morphism(rng, chain[j], chain[j + 1]) for j in range(3)]
        if side == "derived":
            left = sh.compose(sh.compose(ms[0], ms[1], trunc), ms[2], trunc)
            right = sh.compose(ms[0], sh.compose(ms[1], ms[2], trunc), trunc)
            res = _derived_distance(left, right)
        elif side == "fukaya":
            us = [ft.phi_morphism(m) for m in ms]
            res = fk.associativity_residual(us[0], us[1], us[2], trunc)
        else:
            raise ValueError(f"unknown side {side!r}")
        result.cases.append(
            CaseRecord(
                f"n={tuple(o.n for o in chain)} dims={tuple(o.dim for o in chain)} tau={tau:.3f}",
                res,
                epsilon,
            )
        )
    result.wall_time = time.perf_counter() - start
    return result


def _derived_distance(a: sh.DerivedMorphism, b: sh.DerivedMorphism) -> float:
    keys = set(a.coeffs) | set(b.coeffs)
    dist = 0.0
    for k in keys:
        ma = a.coeffs.get(k)
        mb = b.coeffs.get(k)
        if ma is None:
            dist = max(dist, float(np.abs(mb).max()))
        elif mb is None:
            dist = max(dist, float(np.abs(ma).max()))
        else:
            dist = max(dist, float(np.abs(ma - mb).max()))
    return dist


def isogeny_suite(
    seed: int, count: int, epsilon: float, trunc_epsilon: float = 1e-12
) -> SuiteResult:
    """Pullback squares for covers of degree two and three.

    A case fails outright (residual inf) if the two object routes disagree;
    otherwise the residual combines the coefficient and pointwise-section
    comparisons.
    """
    rng = _rng(seed)
    trunc = th.TruncationSpec(trunc_epsilon)
    start = time.perf_counter()
    result = SuiteResult("isogeny", seed, count, epsilon, trunc_epsilon)
    for i in range(count):
        r = int(rng.integers(2, 4))
        tau = _rand_tau(rng)
        o1, o2 = _rand_chain(rng, 2, tau)
        m = _rand_morphism(rng, o1, o2)
        sq = ft.isogeny_square_residual(r, m, trunc)
        res = sq.residual if sq.objects_match else float("inf")
        result.cases.append(
            CaseRecord(
                f"r={r} n=({o1.n},{o2.n}) dims=({o1.dim},{o2.dim}) tau={tau:.3f}",
                res,
                epsilon,
            )
        )
    result.wall_time = time.perf_counter() - start
    return result


def torsion_suite(
    seed: int, count: int, epsilon: float, trunc_epsilon: float = 1e-12
) -> SuiteResult:
    """Mirror transport of compositions into torsion targets."""
    rng = _rng(seed)
    trunc = th.TruncationSpec(trunc_epsilon)
    start = time.perf_counter()
    result = SuiteResult("torsion", seed, count, epsilon, trunc_epsilon)
    for i in range(count):
        tau = _rand_tau(rng)
        o1, o2 = _rand_chain(rng, 2, tau)
        tor = sh.TorsionObj(_rand_shift(rng), _rand_shift(rng), _rand_local(rng), tau)
        m12 = _rand_morphism(rng, o1, o2)
        b_map = rng.normal(size=(tor.dim, o2.dim)) + 1j * rng.normal(
            size=(tor.dim, o2.dim)
        )
        res = ft.torsion_functoriality_residual(m12, b_map, tor, trunc)
        result.cases.append(
            CaseRecord(
                f"n=({o1.n},{o2.n}) dims=({o1.dim},{o2.dim},{tor.dim}) tau={tau:.3f}",
                res,
                epsilon,
            )
        )
    result.wall_time = time.perf_counter() - start
    return result


def dimension_suite(
    seed: int, count: int, epsilon: float = 0.0, trunc_epsilon: float = 1e-12
) -> SuiteResult:
    """Hom dimension against the weighted intersection count of the mirrors.

    Mixes plain bundle pairs of both gap signs, torsion pairings, and direct
    images of cover degree up to three; the residual is the integer gap
    between the two counts, so the tolerance is zero.
    """
    rng = _rng(seed)
    start = time.perf_counter()
    result = SuiteResult("dimensions", seed, count, epsilon, trunc_epsilon)
    for i in range(count):
        tau = _rand_tau(rng)
        kind = rng.uniform()
        if kind < 0.5:
            n1 = int(rng.integers(-4, 5))
            n2 = n1 + int(rng.integers(1, 5)) * (1 if rng.uniform() < 0.5 else -1)
            o1 = sh.LineBundleObj(n1, _rand_shift(rng), _rand_shift(rng), _rand_local(rng), tau)
            o2 = sh.LineBundleObj(n2, _rand_shift(rng), _rand_shift(rng), _rand_local(rng), tau)
        elif kind < 0.7:
            o1 = sh.LineBundleObj(
                int(rng.integers(-3, 4)), _rand_shift(rng), _rand_shift(rng), _rand_local(rng), tau
            )
            o2 = sh.TorsionObj(_rand_shift(rng), _rand_shift(rng), _rand_local(rng), tau)
            if rng.uniform() < 0.5:
                o1, o2 = o2, o1
        else:
            r1 = int(rng.integers(1, 4))
            r2 = int(rng.integers(1, 4))
            g1 = sh.LineBundleObj(
                int(rng.integers(-2, 3)), _rand_shift(rng), _rand_shift(rng), _rand_local(rng), r1 * tau
            )
            g2 = sh.LineBundleObj(
                int(rng.integers(-2, 3)), _rand_shift(rng), _rand_shift(rng), _rand_local(rng), r2 * tau
            )
            if r1 * g2.n == r2 * g1.n:
                g2 = sh.LineBundleObj(g2.n + 1, g2.alpha, g2.beta, g2.local, g2.tau)
            o1, o2 = sh.PushforwardObj(r1, g1), sh.PushforwardObj(r2, g2)
        d_der = sh.hom_total_dimension(o1, o2)
        d_fuk = fk.weighted_point_count(ft.phi_object(o1), ft.phi_object(o2))
        result.cases.append(
            CaseRecord(
                f"{type(o1).__name__}/{type(o2).__name__} dims ({d_der},{d_fuk}) tau={tau:.3f}",
                float(abs(d_der - d_fuk)),
                epsilon,
            )
        )
    result.wall_time = time.perf_counter() - start
    return result


def triangle_suite(
    seed: int, count: int, epsilon: float = 1e-12, trunc_epsilon: float = 1e-12
) -> SuiteResult:
    """Internal consistency of the triangle enumerations.

    Per chain the residual is the worst disagreement between the two area
    formulas and the worst failure of the vertices to sit on (translates of)
    their three lines with matching third-side intercepts.
    """
    rng = _rng(seed)
    start = time.perf_counter()
    result = SuiteResult("triangles", seed, count, epsilon, trunc_epsilon)
    for i in range(count):
        tau = _rand_tau(rng)
        chain = tuple(ft.phi_object(o) for o in _rand_chain(rng, 3, tau))
        l1, l2, l3 = chain
        n21, n32 = l2.n - l1.n, l3.n - l2.n
        a = int(rng.integers(0, n21))
        b = int(rng.integers(0, n32))
        worst = 0.0
        for tri in fk.triangle_scan(chain, a, b, window=2):
            worst = max(worst, abs(tri.area - tri.area_det))
            va, vb, vc = tri.vertices
            # vertex A on line 1 and the a-translate of line 2
            worst = max(worst, abs(va[1] - (l1.n * va[0] - float(l1.alpha))))
            worst = max(worst, abs(va[1] - (l2.n * va[0] - float(l2.alpha) - a)))
            # vertex B on the same translate of line 2, C on line 1
            worst = max(worst, abs(vb[1] - (l2.n * vb[0] - float(l2.alpha) - a)))
            worst = max(worst, abs(vc[1] - (l1.n * vc[0] - float(l1.alpha))))
            # B and C on one common translate of line 3
            ib = vb[1] - l3.n * vb[0] + float(l3.alpha)
            ic = vc[1] - l3.n * vc[0] + float(l3.alpha)
            worst = max(worst, abs(ib - ic))
            worst = max(worst, abs(ib - round(ib)))
        result.cases.append(
            CaseRecord(
                f"n=({l1.n},{l2.n},{l3.n}) a={a} b={b} tau={tau:.3f}", worst, epsilon
            )
        )
    result.wall_time = time.perf_counter() - start
    return result


Suite = Callable[..., SuiteResult]

SUITES: dict[str, Suite] = {
    "addition": addition_suite,
    "functoriality": functoriality_suite,
    "associativity-derived": lambda seed, count, epsilon, trunc_epsilon=1e-12: associativity_suite(
        seed, count, epsilon, trunc_epsilon, side="derived"
    ),
    "associativity-fukaya": lambda seed, count, epsilon, trunc_epsilon=1e-12: associativity_suite(
        seed, count, epsilon, trunc_epsilon, side="fukaya"
    ),
    "isogeny": isogeny_suite,
    "torsion": torsion_suite,
    "dimensions": dimension_suite,
    "triangles": triangle_suite,
}

DEFAULTS: dict[str, tuple[int, float]] = {
    # suite -> (count, tolerance)
    "addition": (50, 1e-9),
    "functoriality": (100, 1e-8),
    "associativity-derived": (50, 1e-9),
    "associativity-fukaya": (50, 1e-8),
    "isogeny": (20, 1e-9),
    "torsion": (50, 1e-8),
    "dimensions": (200, 0.0),
    "triangles": (500, 1e-12),
}


def run_suite(
    name: str,
    seed: int = 0,
    count: Optional[int] = None,
    epsilon: Optional[float] = None,
    trunc_epsilon: float = 1e-12,
) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    default_count, default_eps = DEFAULTS[name]
    return SUITES[name](
        seed,
        count if count is not None else default_count,
        epsilon if epsilon is not None else default_eps,
        trunc_epsilon,
    )
