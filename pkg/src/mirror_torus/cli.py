"""Command-line front end.

Subcommands:
  theta    evaluate one theta value (optionally a z-derivative)
  compose  compose a two-step chain from a case file, on either side
  verify   run a randomized verification suite
  report   run every suite and write JSON, CSV, and figures

Exit codes: 0 success (verify/report: all cases passed), 1 verification
failure, 2 invalid input, 3 truncation cap exceeded.  Complex numbers are
printed as {"re": ..., "im": ...} and matrices row-major.  The default
truncation target is 1e-12, overridable by the MIRROR_TORUS_EPS environment
variable and per-invocation by --eps.  Randomness comes from numpy's PCG64
stream seeded by --seed, so any run is reproducible from its parameters.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import fukaya as fk
from . import functor as ft
from . import sheaves as sh
from . import verify as vf
from .nilpotent import LocalSystemData, NotNilpotent
from .theta import (
    NonConvergent,
    ThetaChar,
    TruncationCapExceeded,
    TruncationSpec,
    theta_eval,
)

SCHEMA_VERSION = 1


class InputError(ValueError):
    """Bad user input: malformed numbers, case files, or chains."""


def _parse_complex(text: str) -> complex:
    """Parse '0.3+1.1i' or '2j' or '1.5'; both i and j denote the unit."""
    cleaned = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(cleaned)
    except ValueError as exc:
        raise InputError(f"cannot parse complex number {text!r}") from exc


def _parse_shift(value: Any) -> "int | float | Fraction":
    """Shifts arrive as numbers or exact fraction strings like '1/3'."""
    if isinstance(value, bool):
        raise InputError(f"cannot use boolean {value!r} as a shift")
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"cannot parse shift {value!r}") from exc
    raise InputError(f"cannot parse shift {value!r}")


def _encode_complex(value: complex) -> dict[str, float]:
    return {"re": float(value.real), "im": float(value.imag)}


def _decode_complex(value: Any, where: str) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, dict) and set(value) <= {"re", "im"}:
        return complex(float(value.get("re", 0.0)), float(value.get("im", 0.0)))
    if isinstance(value, str):
        return _parse_complex(value)
    raise InputError(f"{where}: expected a number, 're'/'im' object, or string")


def _encode_matrix(mat: np.ndarray) -> list[list[dict[str, float]]]:
    return [[_encode_complex(v) for v in row] for row in np.asarray(mat)]


def _decode_matrix(value: Any, where: str) -> np.ndarray:
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise InputError(f"{where}: expected a row-major nested list")
    return np.array(
        [[_decode_complex(v, where) for v in row] for row in value], dtype=complex
    )


def _decode_local(value: Any, where: str) -> LocalSystemData:
    if value is None:
        return LocalSystemData.trivial(1)
    if not isinstance(value, dict) or "kind" not in value:
        raise InputError(f"{where}: local system needs a 'kind' field")
    kind = value["kind"]
    if kind == "trivial":
        return LocalSystemData.trivial(int(value.get("dim", 1)))
    if kind == "jordan":
        return LocalSystemData.jordan(int(value.get("dim", 2)))
    if kind == "matrix":
        if "data" not in value:
            raise InputError(f"{where}: matrix local system needs 'data'")
        try:
            return LocalSystemData(_decode_matrix(value["data"], where))
        except NotNilpotent as exc:
            raise InputError(f"{where}: {exc}") from exc
    raise InputError(f"{where}: unknown local system kind {kind!r}")


def _decode_object(value: Any, tau: complex, where: str) -> sh.DerivedObj:
    if not isinstance(value, dict) or "type" not in value:
        raise InputError(f"{where}: object needs a 'type' field")
    kind = value["type"]
    local = _decode_local(value.get("local"), where)
    alpha = _parse_shift(value.get("alpha", 0))
    beta = _parse_shift(value.get("beta", 0))
    if kind == "line_bundle":
        if "n" not in value:
            raise InputError(f"{where}: line bundle needs a degree 'n'")
        return sh.LineBundleObj(int(value["n"]), alpha, beta, local, tau)
    if kind == "torsion":
        return sh.TorsionObj(alpha, beta, local, tau)
    raise InputError(f"{where}: unknown object type {kind!r}")


def load_case(path: str) -> tuple[list[sh.DerivedObj], list[dict[int, np.ndarray]]]:
    """Read and validate a composition case file.

    The file must carry schemaVersion 1, an upper-half-plane 'tau', a chain
    'objects' of three entries (line bundles, optionally a torsion last), and
    two 'morphisms' whose source/target indices step along the chain.
    """
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise InputError(f"case file {path!r} not found") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"case file {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise InputError("case file must be a JSON object")
    version = raw.get("schemaVersion")
    if version != SCHEMA_VERSION:
        raise InputError(
            f"unsupported schemaVersion {version!r}; this build reads version {SCHEMA_VERSION}"
        )
    if "tau" not in raw:
        raise InputError("case file needs a 'tau' field")
    tau = _decode_complex(raw["tau"], "tau")
    if not tau.imag > 0:
        raise InputError(f"Im(tau) must be positive, got {tau}")
    objects_raw = raw.get("objects")
    if not isinstance(objects_raw, list) or len(objects_raw) != 3:
        raise InputError("case file needs exactly three 'objects'")
    objects = [
        _decode_object(o, tau, f"objects[{i}]") for i, o in enumerate(objects_raw)
    ]
    if not all(isinstance(o, sh.LineBundleObj) for o in objects[:2]):
        raise InputError("the first two objects must be line bundles")
    morphs_raw = raw.get("morphisms")
    if not isinstance(morphs_raw, list) or len(morphs_raw) != 2:
        raise InputError("case file needs exactly two 'morphisms'")
    coeff_maps = []
    for i, mo in enumerate(morphs_raw):
        where = f"morphisms[{i}]"
        if not isinstance(mo, dict):
            raise InputError(f"{where}: expected an object")
        if mo.get("source") != i or mo.get("target") != i + 1:
            raise InputError(
                f"{where}: must map objects[{i}] -> objects[{i + 1}] "
                f"(got source={mo.get('source')!r}, target={mo.get('target')!r})"
            )
        coeffs_raw = mo.get("coeffs")
        if not isinstance(coeffs_raw, dict) or not coeffs_raw:
            raise InputError(f"{where}: needs a nonempty 'coeffs' object")
        coeffs = {}
        for key, matval in coeffs_raw.items():
            try:
                k = int(key)
            except ValueError as exc:
                raise InputError(f"{where}: coefficient key {key!r} is not an integer") from exc
            coeffs[k] = _decode_matrix(matval, f"{where}.coeffs[{key}]")
        coeff_maps.append(coeffs)
    return objects, coeff_maps


def _default_eps(flag: Optional[float]) -> float:
    if flag is not None:
        return flag
    env = os.environ.get("MIRROR_TORUS_EPS")
    if env is not None:
        try:
            value = float(env)
        except ValueError as exc:
            raise InputError(f"MIRROR_TORUS_EPS={env!r} is not a number") from exc
        if not value > 0:
            raise InputError(f"MIRROR_TORUS_EPS must be positive, got {env!r}")
        return value
    return 1e-12


def cmd_theta(args: argparse.Namespace) -> int:
    tau = _parse_complex(args.tau)
    if not tau.imag > 0:
        print(f"error: Im(tau) must be positive, got {tau}", file=sys.stderr)
        return 2
    z = _parse_complex(args.z)
    eps = _default_eps(args.eps)
    char = ThetaChar(_parse_shift(args.cprime), _parse_shift(args.cdprime))
    value = theta_eval(
        char, tau, z, args.order, TruncationSpec(eps, args.max_terms)
    )
    print(json.dumps({"value": _encode_complex(value)}, sort_keys=True))
    return 0


def cmd_compose(args: argparse.Namespace) -> int:
    objects, coeff_maps = load_case(args.case)
    eps = _default_eps(args.eps)
    trunc = TruncationSpec(eps, args.max_terms)
    o1, o2, o3 = objects
    m12 = sh.DerivedMorphism(o1, o2, coeff_maps[0])
    if args.side == "derived":
        if isinstance(o3, sh.TorsionObj):
            out = sh.compose_with_torsion(m12, coeff_maps[1][0], o3, trunc)
            payload = {"side": "derived", "kind": "torsion", "coeffs": {"0": _encode_matrix(out)}}
        else:
            m23 = sh.DerivedMorphism(o2, o3, coeff_maps[1])
            out = sh.compose(m12, m23, trunc)
            payload = {
                "side": "derived",
                "kind": "theta",
                "coeffs": {str(k): _encode_matrix(v) for k, v in sorted(out.coeffs.items())},
            }
    else:
        u12 = ft.phi_morphism(m12)
        if isinstance(o3, sh.TorsionObj):
            m2s = sh.DerivedMorphism(o2, o3, {0: coeff_maps[1][0]})
            u2v = ft.phi_torsion_morphism(m2s)
            out = fk.m2_vertical(u12, u2v, trunc)
        else:
            m23 = sh.DerivedMorphism(o2, o3, coeff_maps[1])
            u23 = ft.phi_morphism(m23)
            out = fk.m2(u12, u23, trunc)
        payload = {
            "side": "fukaya",
            "kind": "vertical" if isinstance(o3, sh.TorsionObj) else "triangle",
            "coeffs": {str(k): _encode_matrix(v) for k, v in sorted(out.coeffs.items())},
        }
    print(json.dumps(payload, sort_keys=True))
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    names = sorted(vf.SUITES) if args.suite == "all" else [args.suite]
    eps_override = args.eps
    trunc_eps = _default_eps(None)
    all_passed = True
    for name in names:
        result = vf.run_suite(
            name, seed=args.seed, count=args.count, epsilon=eps_override,
            trunc_epsilon=trunc_eps,
        )
        status = "pass" if result.passed else "FAIL"
        print(
            f"{result.suite}: {status} cases={len(result.cases)} "
            f"worst={result.worst:.3e} tol={result.epsilon:.1e} "
            f"wall={result.wall_time:.2f}s"
        )
        if args.verbose:
            for c in result.cases:
                mark = "ok " if c.passed else "BAD"
                print(f"  {mark} {c.residual:.3e}  {c.case}")
        all_passed = all_passed and result.passed
    return 0 if all_passed else 1


def _write_report(results: list[vf.SuiteResult], out_dir: Path, seed: int) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir.mkdir(parents=True, exist_ok=True)
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat()
    # wall times stay on stdout: everything in the report must be
    # reproducible byte for byte from the seed, except the timestamp line
    payload = {
        "schemaVersion": SCHEMA_VERSION,
        "seed": seed,
        "timestamp": stamp,
        "suites": [
            {
                "suite": r.suite,
                "count": len(r.cases),
                "epsilon": r.epsilon,
                "truncEpsilon": r.trunc_epsilon,
                "passed": r.passed,
                "worst": r.worst,
                "cases": [
                    {
                        "case": c.case,
                        "residual": c.residual,
                        "tolerance": c.tolerance,
                        "passed": c.passed,
                    }
                    for c in r.cases
                ],
            }
            for r in results
        ],
    }
    (out_dir / "report.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")

    with (out_dir / "report.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["suite", "case", "residual", "tolerance", "passed"])
        for r in results:
            for c in r.cases:
                writer.writerow([r.suite, c.case, repr(c.residual), repr(c.tolerance), c.passed])

    # residual scatter, one column per suite, log scale with tolerance bars
    fig, ax = plt.subplots(figsize=(9, 5))
    floor = 1e-17
    for i, r in enumerate(results):
        xs = np.full(len(r.cases), i) + np.linspace(-0.25, 0.25, max(len(r.cases), 2))[: len(r.cases)]
        ys = np.maximum([c.residual for c in r.cases], floor)
        ax.scatter(xs, ys, s=8, alpha=0.6)
        if r.epsilon > 0:
            ax.hlines(r.epsilon, i - 0.35, i + 0.35, colors="red", linewidth=1.2)
    ax.set_yscale("log")
    ax.set_xticks(range(len(results)))
    ax.set_xticklabels([r.suite for r in results], rotation=30, ha="right")
    ax.set_ylabel("residual (abs)")
    ax.set_title("verification residuals vs tolerance")
    fig.tight_layout()
    fig.savefig(out_dir / "residuals.png", dpi=120)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(7, 4))
    idx = np.arange(len(results))
    worsts = np.maximum([r.worst for r in results], floor)
    tols = [max(r.epsilon, floor) for r in results]
    ax.bar(idx - 0.2, worsts, width=0.4, color="steelblue", label="worst residual")
    ax.bar(idx + 0.2, tols, width=0.4, color="indianred", label="tolerance")
    ax.set_yscale("log")
    ax.set_xticks(idx)
    ax.set_xticklabels([r.suite for r in results], rotation=30, ha="right")
    ax.set_ylabel("abs value")
    ax.set_title("worst residual vs tolerance")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_dir / "margins.png", dpi=120)
    plt.close(fig)


def cmd_report(args: argparse.Namespace) -> int:
    trunc_eps = _default_eps(args.eps)
    results = [
        vf.run_suite(name, seed=args.seed, trunc_epsilon=trunc_eps)
        for name in sorted(vf.SUITES)
    ]
    out_dir = Path(args.out)
    _write_report(results, out_dir, args.seed)
    for r in results:
        status = "pass" if r.passed else "FAIL"
        print(f"{r.suite}: {status} cases={len(r.cases)} worst={r.worst:.3e}")
    print(f"report written to {out_dir}/report.json, report.csv, residuals.png, margins.png")
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mirror-torus",
        description="theta section algebras, triangle products, and their mirror match",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_theta = sub.add_parser("theta", help="evaluate a theta value")
    p_theta.add_argument("--cprime", default="0", help="first characteristic (number or p/q)")
    p_theta.add_argument("--cdprime", default="0", help="second characteristic (number or p/q)")
    p_theta.add_argument("--tau", required=True, help="modular parameter, e.g. '0.3+1.1i'")
    p_theta.add_argument("--z", default="0", help="argument, e.g. '0.2-0.05i'")
    p_theta.add_argument("--order", type=int, default=0, help="z-derivative order")
    p_theta.add_argument("--eps", type=float, default=None, help="truncation target")
    p_theta.add_argument("--max-terms", type=int, default=100_000, help="series term cap")
    p_theta.set_defaults(func=cmd_theta)

    p_comp = sub.add_parser("compose", help="compose a two-step chain from a case file")
    p_comp.add_argument("case", help="path to a JSON case file (schemaVersion 1)")
    p_comp.add_argument(
        "--side", choices=("derived", "fukaya"), default="derived",
        help="compute the composition sum or the mirror triangle product",
    )
    p_comp.add_argument("--eps", type=float, default=None, help="truncation target")
    p_comp.add_argument("--max-terms", type=int, default=100_000, help="series term cap")
    p_comp.set_defaults(func=cmd_compose)

    p_ver = sub.add_parser("verify", help="run a randomized verification suite")
    p_ver.add_argument(
        "suite", choices=["all", *sorted(vf.SUITES)], help="suite name or 'all'"
    )
    p_ver.add_argument("--seed", type=int, default=0, help="PCG64 seed")
    p_ver.add_argument("--count", type=int, default=None, help="number of cases")
    p_ver.add_argument("--eps", type=float, default=None, help="tolerance override")
    p_ver.add_argument("--verbose", action="store_true", help="print every case")
    p_ver.set_defaults(func=cmd_verify)

    p_rep = sub.add_parser("report", help="run all suites and write JSON/CSV/figures")
    p_rep.add_argument("--out", default="report", help="output directory")
    p_rep.add_argument("--seed", type=int, default=0, help="PCG64 seed")
    p_rep.add_argument("--eps", type=float, default=None, help="truncation target")
    p_rep.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TruncationCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (InputError, NonConvergent, sh.ChainMismatch, sh.MixedModularParam) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
