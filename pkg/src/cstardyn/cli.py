"""Command line surface: deciders, certificate verification, generators.

Exit code contract: 0 means decided-yes or verified, 1 means decided-no or
failed verification, 2 means error or numerically indeterminate, 64 means
a usage error.  All outputs are canonical JSON, so identical inputs and
seeds produce byte-identical artifacts.
"""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor

from . import generators, iojson
from .algebra import AlgebraError, BlockAlgebra
from .config import DEFAULT, Tolerances
from .deciders import (
    CERT_TOL,
    NotConjugate,
    NotEquivalent,
    certify_unitary_equivalence,
    conjugated_maps,
    decide_outer_conjugacy,
    decide_unitary_equivalence_commutative,
    verify_outer_conjugacy,
)
from .elimination import (
    DimensionContradiction,
    NumericallyIndeterminateError,
    gaussian_eliminate,
    right_invertible_test,
    verify_elimination_certificate,
)
from .fock import (
    build_fock,
    creation_norm_margin,
    expectation_defects,
    extract_associated_matrix,
    induced_iso_images,
)
from .intertwiners import from_element_matrix, verify_intertwining
from .iojson import SchemaError
from .spectrum import (
    NotPiecewiseConjugate,
    decide_piecewise_conjugacy,
    verify_piecewise_certificate,
)

EXIT_YES = 0
EXIT_NO = 1
EXIT_ERROR = 2
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: D102 - argparse hook
        raise UsageError(message)


def _emit(args, obj) -> None:
    if getattr(args, "out", None):
        iojson.write_json(args.out, obj)
    else:
        print(iojson.canonical_dumps(obj))


def _tolerances(args) -> Tolerances:
    if getattr(args, "tol", None) is not None:
        return DEFAULT.with_zero(args.tol)
    return DEFAULT


def _parse_blocks(text: str) -> BlockAlgebra:
    try:
        return BlockAlgebra(tuple(int(p) for p in text.split(",")))
    except (ValueError, AlgebraError) as exc:
        raise UsageError(f"--blocks: {exc}") from exc


# ---------------------------------------------------------------------------
# gen


def _gen_one(args, index: int):
    rng = generators.make_rng([args.seed, index] if args.count > 1 else args.seed)
    if args.kind == "system":
        algebra = _parse_blocks(args.blocks)
        return [iojson.encode_system(generators.random_system(rng, algebra, args.arity))]
    if args.kind == "commutative":
        return [iojson.encode_system(generators.random_commutative_system(rng, args.points, args.arity))]
    if args.kind == "pair":
        algebra = _parse_blocks(args.blocks)
        first = generators.random_system(rng, algebra, args.arity)
        second = generators.inner_twist(rng, first)
        return [iojson.encode_system(first), iojson.encode_system(second)]
    if args.kind == "elimination":
        mat, rows, cols = generators.random_elimination_problem(rng, args.dim, args.size, args.size)
        return [iojson.encode_intertwiner_problem(mat, rows, cols)]
    raise UsageError(f"unknown kind {args.kind!r}")


def cmd_gen(args, tol: Tolerances) -> int:
    del tol
    instances = range(args.count)
    if args.jobs > 1 and args.count > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            produced = list(pool.map(lambda i: _gen_one(args, i), instances))
    else:
        produced = [_gen_one(args, i) for i in instances]

    if args.out is None:
        for batch in produced:
            for obj in batch:
                print(iojson.canonical_dumps(obj))
        return EXIT_YES
    stem = str(args.out)
    if stem.endswith(".json"):
        stem = stem[: -len(".json")]
    suffixes = ["a", "b"]
    for index, batch in enumerate(produced):
        for which, obj in enumerate(batch):
            name = stem
            if args.count > 1:
                name = f"{name}-{index:03d}"
            if len(batch) > 1:
                name = f"{name}-{suffixes[which]}"
            iojson.write_json(name + ".json", obj)
    return EXIT_YES


# ---------------------------------------------------------------------------
# eliminate


def cmd_eliminate(args, tol: Tolerances) -> int:
    matrix = iojson.parse_intertwiner_problem(args.problem)
    try:
        result = gaussian_eliminate(matrix, tol)
    except NumericallyIndeterminateError as exc:
        _emit(args, iojson.report("eliminate", "indeterminate", reason=str(exc)))
        return EXIT_ERROR
    if isinstance(result, DimensionContradiction):
        _emit(args, iojson.report(
            "eliminate", "no", reason="DimensionContradiction",
            zero_row_index=result.zero_row_index,
        ))
        return EXIT_NO
    inputs = {"problem": iojson.problem_hash_from_file(args.problem)}
    _emit(args, iojson.encode_elimination_certificate(result, inputs))
    return EXIT_YES


# ---------------------------------------------------------------------------
# deciders


def cmd_decide_outer(args, tol: Tolerances) -> int:
    sys_a = iojson.parse_system(args.system_a)
    sys_b = iojson.parse_system(args.system_b)
    result = decide_outer_conjugacy(sys_a, sys_b, tol)
    if isinstance(result, NotConjugate):
        witness = None if result.witness is None else [i + 1 for i in result.witness]
        _emit(args, iojson.report("decide-outer", "no", reason=result.reason, witness=witness))
        return EXIT_NO
    inputs = {"system_a": iojson.system_hash(sys_a), "system_b": iojson.system_hash(sys_b)}
    _emit(args, iojson.encode_outer_certificate(result, inputs))
    return EXIT_YES


def cmd_decide_ue_commutative(args, tol: Tolerances) -> int:
    sys_a = iojson.parse_system(args.system_a)
    sys_b = iojson.parse_system(args.system_b)
    result = decide_unitary_equivalence_commutative(sys_a, sys_b, args.max_points, tol)
    if isinstance(result, NotEquivalent):
        _emit(args, iojson.report("decide-ue-commutative", "no", reason=result.reason))
        return EXIT_NO
    inputs = {"system_a": iojson.system_hash(sys_a), "system_b": iojson.system_hash(sys_b)}
    _emit(args, iojson.encode_unitary_equivalence_certificate(result, inputs))
    return EXIT_YES


def cmd_decide_piecewise(args, tol: Tolerances) -> int:
    del tol
    spec_a = iojson.parse_spectrum_input(args.system_a)
    spec_b = iojson.parse_spectrum_input(args.system_b)
    result = decide_piecewise_conjugacy(spec_a, spec_b, args.max_points)
    if isinstance(result, NotPiecewiseConjugate):
        _emit(args, iojson.report("decide-piecewise", "no", reason=result.reason))
        return EXIT_NO
    inputs = {"system_a": iojson.spectrum_hash(spec_a), "system_b": iojson.spectrum_hash(spec_b)}
    _emit(args, iojson.encode_piecewise_certificate(result, inputs))
    return EXIT_YES


# ---------------------------------------------------------------------------
# verification


def _check_input_hashes(cert_obj: dict, actual: dict) -> list[str]:
    stored = cert_obj.get("inputs") or {}
    return [name for name, value in actual.items() if stored.get(name) not in (None, value)]


def _verify_decider_certificate(args, command: str, cert_obj: dict, tol: Tolerances) -> int:
    kind = iojson.certificate_kind(cert_obj, str(args.certificate))
    if kind == "piecewise":
        spec_a = iojson.parse_spectrum_input(args.inputs[0])
        spec_b = iojson.parse_spectrum_input(args.inputs[1])
        cert = iojson.decode_piecewise_certificate(cert_obj, str(args.certificate))
        stale = _check_input_hashes(cert_obj, {
            "system_a": iojson.spectrum_hash(spec_a),
            "system_b": iojson.spectrum_hash(spec_b),
        })
        ok = not stale and verify_piecewise_certificate(cert, spec_a, spec_b)
        _emit(args, iojson.report(
            command, "yes" if ok else "no",
            reason=("StaleInputHash" if stale else None) if not ok else None,
        ))
        return EXIT_YES if ok else EXIT_NO

    sys_a = iojson.parse_system(args.inputs[0])
    sys_b = iojson.parse_system(args.inputs[1])
    stale = _check_input_hashes(cert_obj, {
        "system_a": iojson.system_hash(sys_a),
        "system_b": iojson.system_hash(sys_b),
    })
    if kind == "outer":
        cert = iojson.decode_outer_certificate(cert_obj, str(args.certificate))
        residuals = verify_outer_conjugacy(cert, sys_a, sys_b)
    elif kind == "unitary-equivalence":
        cert = iojson.decode_unitary_equivalence_certificate(cert_obj, str(args.certificate))
        residuals = certify_unitary_equivalence(cert, sys_a, sys_b)
    else:
        raise SchemaError(f"{args.certificate}: cannot verify kind {kind!r} against system files")
    ok = not stale and residuals["max"] <= CERT_TOL
    reason = "StaleInputHash" if stale else (None if ok else "ResidualTooLarge")
    _emit(args, iojson.report(command, "yes" if ok else "no", reason=reason, residuals=residuals))
    return EXIT_YES if ok else EXIT_NO


def cmd_verify(args, tol: Tolerances) -> int:
    cert_obj = iojson.read_json(args.certificate)
    kind = iojson.certificate_kind(cert_obj, str(args.certificate))
    if kind == "elimination":
        if len(args.inputs) != 1:
            raise UsageError("verify needs exactly one problem file for elimination certificates")
        matrix = iojson.parse_intertwiner_problem(args.inputs[0])
        cert = iojson.decode_elimination_certificate(cert_obj, str(args.certificate))
        stale = _check_input_hashes(cert_obj, {
            "problem": iojson.problem_hash_from_file(args.inputs[0]),
        })
        result = verify_elimination_certificate(matrix, cert, tol)
        ok = result.pop("ok") and not stale
        _emit(args, iojson.report(
            "verify", "yes" if ok else "no",
            reason="StaleInputHash" if stale else None,
            checks=result,
        ))
        return EXIT_YES if ok else EXIT_NO
    if len(args.inputs) != 2:
        raise UsageError("verify needs the two input files the certificate refers to")
    return _verify_decider_certificate(args, "verify", cert_obj, tol)


def cmd_certify(args, tol: Tolerances) -> int:
    cert_obj = iojson.read_json(args.certificate)
    return _verify_decider_certificate(args, "certify", cert_obj, tol)


# ---------------------------------------------------------------------------
# fock-validate


def cmd_fock_validate(args, tol: Tolerances) -> int:
    system = iojson.parse_system(args.system)
    fock = build_fock(system, args.max_level, args.max_dim)
    checks: dict = {
        "dimension": fock.dim,
        "covariance": fock.covariance_defect(),
        "expectations": expectation_defects(fock),
        "creation_norm_margin": creation_norm_margin(fock),
    }
    ok = (
        checks["covariance"] <= 1e-12
        and checks["expectations"]["max"] <= 1e-12
        and checks["creation_norm_margin"] >= -1e-9
    )
    if args.certificate is not None:
        cert_obj = iojson.read_json(args.certificate)
        cert = iojson.decode_unitary_equivalence_certificate(cert_obj, str(args.certificate))
        other = iojson.parse_system(args.other) if args.other else system
        fock_src = build_fock(other, args.max_level, args.max_dim)
        images = induced_iso_images(cert, fock_src, fock, tol)
        associated = extract_associated_matrix(images, fock)
        recovered = associated.entries
        planted_defect = max(
            (recovered.entry(i, j) - cert.matrix.entry(i, j)).norm()
            for i in range(recovered.shape[0])
            for j in range(recovered.shape[1])
        )
        bridged = from_element_matrix(recovered, system.maps, conjugated_maps(cert.iso, other))
        intertwining = verify_intertwining(bridged)
        invertible, _ = right_invertible_test(recovered, tol)
        degree_zero_mass = max(b.norm() for b in associated.degree_zero)
        checks["associated"] = {
            "recovery_defect": planted_defect,
            "intertwining": intertwining,
            "right_invertible": invertible,
            "remainder_norm": associated.remainder_norm,
            "degree_zero_mass": degree_zero_mass,
        }
        if degree_zero_mass > tol.zero:
            checks["warnings"] = ["nonzero degree-0 coefficient in generator images"]
        ok = ok and planted_defect <= 1e-10 and intertwining <= 1e-9 and invertible
    _emit(args, iojson.report("fock-validate", "yes" if ok else "no", checks=checks))
    return EXIT_YES if ok else EXIT_NO


# ---------------------------------------------------------------------------
# parser


def build_parser() -> _Parser:
    parser = _Parser(prog="cstardyn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="write the result to this file instead of stdout")
        p.add_argument("--tol", type=float, help="override the relative zero threshold")
        p.add_argument("--jobs", type=int, default=1, help="instance-level parallelism")

    p = sub.add_parser("gen", help="generate seeded instances")
    common(p)
    p.add_argument("--kind", choices=["system", "pair", "commutative", "elimination"], default="system")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--blocks", default="2", help="comma separated block sizes")
    p.add_argument("--arity", type=int, default=2)
    p.add_argument("--points", type=int, default=3, help="points for commutative systems")
    p.add_argument("--dim", type=int, default=2, help="matrix size for elimination problems")
    p.add_argument("--size", type=int, default=3, help="rows and columns for elimination problems")
    p.add_argument("--count", type=int, default=1)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("eliminate", help="run the certified elimination on a problem file")
    common(p)
    p.add_argument("problem")
    p.set_defaults(func=cmd_eliminate)

    p = sub.add_parser("decide-outer", help="decide outer conjugacy of two systems")
    common(p)
    p.add_argument("system_a")
    p.add_argument("system_b")
    p.set_defaults(func=cmd_decide_outer)

    p = sub.add_parser("decide-ue-commutative", help="decide unitary equivalence over commutative algebras")
    common(p)
    p.add_argument("system_a")
    p.add_argument("system_b")
    p.add_argument("--max-points", type=int, default=8)
    p.set_defaults(func=cmd_decide_ue_commutative)

    p = sub.add_parser("decide-piecewise", help="decide piecewise conjugacy of induced spectrum systems")
    common(p)
    p.add_argument("system_a")
    p.add_argument("system_b")
    p.add_argument("--max-points", type=int, default=8)
    p.set_defaults(func=cmd_decide_piecewise)

    p = sub.add_parser("verify", help="replay and recheck any certificate against its inputs")
    common(p)
    p.add_argument("certificate")
    p.add_argument("inputs", nargs="+")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("certify", help="recompute the residuals of a decider certificate")
    common(p)
    p.add_argument("certificate")
    p.add_argument("inputs", nargs=2, metavar=("system_a", "system_b"))
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("fock-validate", help="check the truncated Fock invariants of a system")
    common(p)
    p.add_argument("system")
    p.add_argument("certificate", nargs="?")
    p.add_argument("--other", help="source system when the certificate connects two systems")
    p.add_argument("--max-level", type=int, default=2)
    p.add_argument("--max-points", type=int, default=8)
    p.add_argument("--max-dim", type=int, default=20_000)
    p.set_defaults(func=cmd_fock_validate)

    return parser


def run_command(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args, _tolerances(args))
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SchemaError, AlgebraError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main(argv=None) -> int:
    return run_command(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
