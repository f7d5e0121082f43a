"""Canonical JSON encodings for systems, problems, certificates, and reports.

Complex numbers are [re, im] pairs, permutations and row indices are
1-based on disk, and every emitter goes through one canonical serializer
(sorted keys, compact separators, shortest round-trip floats, negative
zeros normalized) so identical inputs produce byte-identical files.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .algebra import (
    AlgebraElement,
    AlgebraError,
    BlockAlgebra,
    ElementMatrix,
    MultivariableSystem,
    StarIsomorphism,
)
from .deciders import OuterConjugacyCertificate, UnitaryEquivalenceCertificate
from .elimination import EliminationCertificate, RowOperation
from .intertwiners import IntertwinerMatrix, from_element_matrix
from .spectrum import PiecewiseCertificate, SpectrumDynamicalSystem

TOOL_NAME = "cstardyn"
TOOL_VERSION = "0.1.0"

SYSTEM_SCHEMA = "system/1"
SPECTRUM_SCHEMA = "spectrum/1"
PROBLEM_SCHEMA = "intertwiner-problem/1"
CERTIFICATE_SCHEMA = "certificate/1"
REPORT_SCHEMA = "report/1"


class SchemaError(ValueError):
    """A file does not match the expected schema; the message names the field."""


def canonical_dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False)


def write_json(path, obj: Any) -> None:
    Path(path).write_text(canonical_dumps(obj) + "\n", encoding="utf-8")


def read_json(path) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}") from exc


def content_hash(obj: Any) -> str:
    return hashlib.sha256(canonical_dumps(obj).encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# scalars and matrices


def _pair(z: complex) -> list[float]:
    # adding 0.0 normalizes negative zero for byte-stable output
    return [float(z.real) + 0.0, float(z.imag) + 0.0]


def encode_matrix(mat: np.ndarray) -> list:
    mat = np.asarray(mat, dtype=complex)
    return [[_pair(z) for z in row] for row in mat]


def decode_matrix(obj: Any, context: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise SchemaError(f"{context}: expected a list of rows")
    width = len(obj[0])
    rows = []
    for i, row in enumerate(obj):
        if len(row) != width:
            raise SchemaError(f"{context}[{i}]: ragged row (got {len(row)}, expected {width})")
        vals = []
        for j, cell in enumerate(row):
            if not (isinstance(cell, list) and len(cell) == 2):
                raise SchemaError(f"{context}[{i}][{j}]: complex numbers are [re, im] pairs")
            vals.append(complex(float(cell[0]), float(cell[1])))
        rows.append(vals)
    return np.array(rows, dtype=complex)


def encode_element(a: AlgebraElement) -> list:
    return [encode_matrix(blk) for blk in a.blocks]


def decode_element(obj: Any, algebra: BlockAlgebra, context: str) -> AlgebraElement:
    if not isinstance(obj, list) or len(obj) != algebra.num_blocks:
        raise SchemaError(f"{context}: expected {algebra.num_blocks} blocks")
    blocks = [decode_matrix(b, f"{context}[{k}]") for k, b in enumerate(obj)]
    try:
        return algebra.element(blocks)
    except AlgebraError as exc:
        raise SchemaError(f"{context}: {exc}") from exc


# ---------------------------------------------------------------------------
# algebras, morphisms, systems


def encode_algebra(algebra: BlockAlgebra) -> dict:
    return {"blocks": list(algebra.block_sizes)}


def decode_algebra(obj: Any, context: str) -> BlockAlgebra:
    if not isinstance(obj, dict) or "blocks" not in obj:
        raise SchemaError(f"{context}: expected an object with a 'blocks' field")
    try:
        return BlockAlgebra(tuple(int(s) for s in obj["blocks"]))
    except (TypeError, ValueError, AlgebraError) as exc:
        raise SchemaError(f"{context}.blocks: {exc}") from exc


def _one_based(seq: Sequence[int]) -> list[int]:
    return [int(x) + 1 for x in seq]


def _zero_based(obj: Any, size: int, context: str) -> tuple[int, ...]:
    if not isinstance(obj, list) or len(obj) != size:
        raise SchemaError(f"{context}: expected a list of {size} indices")
    out = []
    for i, x in enumerate(obj):
        if not isinstance(x, int) or not 1 <= x <= size:
            raise SchemaError(f"{context}[{i}]: indices are 1-based integers up to {size}")
        out.append(x - 1)
    return tuple(out)


def encode_morphism(iso: StarIsomorphism) -> dict:
    return {
        "perm": _one_based(iso.perm),
        "unitaries": [encode_matrix(u) for u in iso.unitaries],
    }


def decode_morphism(
    obj: Any, source: BlockAlgebra, target: BlockAlgebra, context: str
) -> StarIsomorphism:
    if not isinstance(obj, dict):
        raise SchemaError(f"{context}: expected an object")
    perm = _zero_based(obj.get("perm"), source.num_blocks, f"{context}.perm")
    raw = obj.get("unitaries")
    if not isinstance(raw, list) or len(raw) != target.num_blocks:
        raise SchemaError(f"{context}.unitaries: expected {target.num_blocks} matrices")
    unis = [decode_matrix(u, f"{context}.unitaries[{k}]") for k, u in enumerate(raw)]
    try:
        return StarIsomorphism(source, target, perm, tuple(unis))
    except AlgebraError as exc:
        raise SchemaError(f"{context}: {exc}") from exc


def encode_system(system: MultivariableSystem) -> dict:
    return {
        "schema": SYSTEM_SCHEMA,
        "blocks": list(system.algebra.block_sizes),
        "maps": [encode_morphism(a) for a in system.maps],
    }


def decode_system(obj: Any, context: str = "system") -> MultivariableSystem:
    if not isinstance(obj, dict):
        raise SchemaError(f"{context}: expected an object")
    schema = obj.get("schema", SYSTEM_SCHEMA)
    if schema != SYSTEM_SCHEMA:
        raise SchemaError(f"{context}.schema: unsupported schema {schema!r}")
    algebra = decode_algebra(obj, context)
    raw = obj.get("maps")
    if not isinstance(raw, list) or not raw:
        raise SchemaError(f"{context}.maps: expected a nonempty list of automorphisms")
    maps = [
        decode_morphism(m, algebra, algebra, f"{context}.maps[{i}]") for i, m in enumerate(raw)
    ]
    return MultivariableSystem(algebra, tuple(maps))


def parse_system(path) -> MultivariableSystem:
    return decode_system(read_json(path), context=str(path))


def emit_system(path, system: MultivariableSystem) -> None:
    write_json(path, encode_system(system))


def system_hash(system: MultivariableSystem) -> str:
    return content_hash(encode_system(system))


# ---------------------------------------------------------------------------
# spectrum systems


def encode_spectrum(system: SpectrumDynamicalSystem) -> dict:
    return {
        "schema": SPECTRUM_SCHEMA,
        "points": list(system.sizes),
        "maps": [_one_based(p) for p in system.maps],
    }


def decode_spectrum(obj: Any, context: str = "spectrum") -> SpectrumDynamicalSystem:
    if not isinstance(obj, dict) or "points" not in obj:
        raise SchemaError(f"{context}: expected an object with a 'points' field")
    sizes = tuple(int(s) for s in obj["points"])
    raw = obj.get("maps")
    if not isinstance(raw, list) or not raw:
        raise SchemaError(f"{context}.maps: expected a nonempty list of permutations")
    maps = tuple(_zero_based(p, len(sizes), f"{context}.maps[{i}]") for i, p in enumerate(raw))
    try:
        return SpectrumDynamicalSystem(sizes, maps)
    except AlgebraError as exc:
        raise SchemaError(f"{context}: {exc}") from exc


def parse_spectrum_input(path) -> SpectrumDynamicalSystem:
    """Load a spectrum system from a spectrum file or induce it from a system file."""
    obj = read_json(path)
    if isinstance(obj, dict) and "points" in obj:
        return decode_spectrum(obj, context=str(path))
    system = decode_system(obj, context=str(path))
    return SpectrumDynamicalSystem.from_system(system)


def spectrum_hash(system: SpectrumDynamicalSystem) -> str:
    return content_hash(encode_spectrum(system))


# ---------------------------------------------------------------------------
# intertwiner problems (elimination inputs)


def encode_intertwiner_problem(
    mat: ElementMatrix,
    row_maps: Sequence[StarIsomorphism],
    col_maps: Sequence[StarIsomorphism],
) -> dict:
    return {
        "schema": PROBLEM_SCHEMA,
        "blocks": list(mat.algebra.block_sizes),
        "row_maps": [encode_morphism(b) for b in row_maps],
        "col_maps": [encode_morphism(b) for b in col_maps],
        "entries": [[encode_element(e) for e in row] for row in mat.entries],
    }


def decode_intertwiner_problem(obj: Any, context: str = "problem") -> IntertwinerMatrix:
    if not isinstance(obj, dict) or obj.get("schema") != PROBLEM_SCHEMA:
        raise SchemaError(f"{context}: expected schema {PROBLEM_SCHEMA!r}")
    algebra = decode_algebra(obj, context)
    row_maps = [
        decode_morphism(b, algebra, algebra, f"{context}.row_maps[{i}]")
        for i, b in enumerate(obj.get("row_maps") or [])
    ]
    col_maps = [
        decode_morphism(b, algebra, algebra, f"{context}.col_maps[{j}]")
        for j, b in enumerate(obj.get("col_maps") or [])
    ]
    raw = obj.get("entries")
    if not isinstance(raw, list) or not raw:
        raise SchemaError(f"{context}.entries: expected a nonempty grid of elements")
    rows = []
    for i, row in enumerate(raw):
        rows.append(tuple(
            decode_element(cell, algebra, f"{context}.entries[{i}][{j}]")
            for j, cell in enumerate(row)
        ))
    mat = ElementMatrix(algebra, tuple(rows))
    if len(row_maps) != mat.shape[0] or len(col_maps) != mat.shape[1]:
        raise SchemaError(f"{context}: map families do not match the entry grid {mat.shape}")
    return from_element_matrix(mat, row_maps, col_maps)


def parse_intertwiner_problem(path) -> IntertwinerMatrix:
    return decode_intertwiner_problem(read_json(path), context=str(path))


def problem_hash_from_file(path) -> str:
    return content_hash(read_json(path))


# ---------------------------------------------------------------------------
# certificates


def _envelope(kind: str, inputs: dict, payload: dict, residuals: dict) -> dict:
    return {
        "schema": CERTIFICATE_SCHEMA,
        "kind": kind,
        "tool": {"name": TOOL_NAME, "version": TOOL_VERSION},
        "inputs": inputs,
        "payload": payload,
        "residuals": {k: float(v) for k, v in residuals.items()},
    }


def encode_elimination_certificate(cert: EliminationCertificate, inputs: dict) -> dict:
    payload = {
        "col_perm": _one_based(cert.col_perm),
        "row_ops": [
            {
                "row": op.target_row + 1,
                "pivot": op.pivot_row + 1,
                "multiplier": encode_matrix(op.multiplier),
            }
            for op in cert.row_ops
        ],
        "diagonal": [encode_matrix(d) for d in cert.diagonal],
        "step_residuals": [float(r) for r in cert.step_residuals],
        "input_hash": cert.input_hash,
    }
    residuals = {"max_step": max(cert.step_residuals, default=0.0)}
    return _envelope("elimination", inputs, payload, residuals)


def decode_elimination_certificate(obj: Any, context: str = "certificate") -> EliminationCertificate:
    payload = _payload(obj, "elimination", context)
    perm_raw = payload.get("col_perm")
    if not isinstance(perm_raw, list):
        raise SchemaError(f"{context}.payload.col_perm: expected a list")
    n = len(perm_raw)
    col_perm = _zero_based(perm_raw, n, f"{context}.payload.col_perm")
    ops = []
    for t, op in enumerate(payload.get("row_ops") or []):
        mult = decode_matrix(op.get("multiplier"), f"{context}.payload.row_ops[{t}].multiplier")
        ops.append(RowOperation(int(op["row"]) - 1, int(op["pivot"]) - 1, mult))
    diagonal = tuple(
        decode_matrix(d, f"{context}.payload.diagonal[{i}]")
        for i, d in enumerate(payload.get("diagonal") or [])
    )
    return EliminationCertificate(
        input_hash=str(payload.get("input_hash", "")),
        col_perm=col_perm,
        row_ops=tuple(ops),
        diagonal=diagonal,
        step_residuals=tuple(float(r) for r in payload.get("step_residuals") or []),
    )


def encode_outer_certificate(
    cert: OuterConjugacyCertificate, inputs: dict
) -> dict:
    payload = {
        "source_blocks": list(cert.iso.source.block_sizes),
        "target_blocks": list(cert.iso.target.block_sizes),
        "iso": encode_morphism(cert.iso),
        "index_map": _one_based(cert.index_map),
        "twists": [encode_element(w) for w in cert.twists],
    }
    return _envelope("outer", inputs, payload, dict(cert.residuals))


def decode_outer_certificate(obj: Any, context: str = "certificate") -> OuterConjugacyCertificate:
    payload = _payload(obj, "outer", context)
    source = decode_algebra({"blocks": payload.get("source_blocks")}, f"{context}.payload.source")
    target = decode_algebra({"blocks": payload.get("target_blocks")}, f"{context}.payload.target")
    iso = decode_morphism(payload.get("iso"), source, target, f"{context}.payload.iso")
    index_raw = payload.get("index_map")
    if not isinstance(index_raw, list):
        raise SchemaError(f"{context}.payload.index_map: expected a list")
    index_map = _zero_based(index_raw, len(index_raw), f"{context}.payload.index_map")
    twists = tuple(
        decode_element(w, target, f"{context}.payload.twists[{i}]")
        for i, w in enumerate(payload.get("twists") or [])
    )
    residuals = {k: float(v) for k, v in (obj.get("residuals") or {}).items()}
    return OuterConjugacyCertificate(iso, index_map, twists, residuals)


def encode_unitary_equivalence_certificate(
    cert: UnitaryEquivalenceCertificate, inputs: dict
) -> dict:
    payload = {
        "source_blocks": list(cert.iso.source.block_sizes),
        "target_blocks": list(cert.iso.target.block_sizes),
        "iso": encode_morphism(cert.iso),
        "matrix": [[encode_element(e) for e in row] for row in cert.matrix.entries],
    }
    return _envelope("unitary-equivalence", inputs, payload, dict(cert.residuals))


def decode_unitary_equivalence_certificate(
    obj: Any, context: str = "certificate"
) -> UnitaryEquivalenceCertificate:
    payload = _payload(obj, "unitary-equivalence", context)
    source = decode_algebra({"blocks": payload.get("source_blocks")}, f"{context}.payload.source")
    target = decode_algebra({"blocks": payload.get("target_blocks")}, f"{context}.payload.target")
    iso = decode_morphism(payload.get("iso"), source, target, f"{context}.payload.iso")
    raw = payload.get("matrix")
    if not isinstance(raw, list) or not raw:
        raise SchemaError(f"{context}.payload.matrix: expected a nonempty grid")
    rows = []
    for i, row in enumerate(raw):
        rows.append(tuple(
            decode_element(cell, target, f"{context}.payload.matrix[{i}][{j}]")
            for j, cell in enumerate(row)
        ))
    matrix = ElementMatrix(target, tuple(rows))
    residuals = {k: float(v) for k, v in (obj.get("residuals") or {}).items()}
    return UnitaryEquivalenceCertificate(iso, matrix, residuals)


def encode_piecewise_certificate(cert: PiecewiseCertificate, inputs: dict) -> dict:
    payload = {
        "point_map": _one_based(cert.point_map),
        "assignments": [_one_based(g) for g in cert.assignments],
    }
    return _envelope("piecewise", inputs, payload, {})


def decode_piecewise_certificate(obj: Any, context: str = "certificate") -> PiecewiseCertificate:
    payload = _payload(obj, "piecewise", context)
    raw = payload.get("point_map")
    if not isinstance(raw, list):
        raise SchemaError(f"{context}.payload.point_map: expected a list")
    m = len(raw)
    point_map = _zero_based(raw, m, f"{context}.payload.point_map")
    assignments = []
    for x, g in enumerate(payload.get("assignments") or []):
        assignments.append(_zero_based(g, len(g), f"{context}.payload.assignments[{x}]"))
    return PiecewiseCertificate(point_map, tuple(assignments))


def _payload(obj: Any, kind: str, context: str) -> dict:
    if not isinstance(obj, dict) or obj.get("schema") != CERTIFICATE_SCHEMA:
        raise SchemaError(f"{context}: expected schema {CERTIFICATE_SCHEMA!r}")
    if obj.get("kind") != kind:
        raise SchemaError(f"{context}.kind: expected {kind!r}, got {obj.get('kind')!r}")
    payload = obj.get("payload")
    if not isinstance(payload, dict):
        raise SchemaError(f"{context}.payload: expected an object")
    return payload


def certificate_kind(obj: Any, context: str = "certificate") -> str:
    if not isinstance(obj, dict) or obj.get("schema") != CERTIFICATE_SCHEMA:
        raise SchemaError(f"{context}: expected schema {CERTIFICATE_SCHEMA!r}")
    kind = obj.get("kind")
    if kind not in {"elimination", "outer", "unitary-equivalence", "piecewise"}:
        raise SchemaError(f"{context}.kind: unknown certificate kind {kind!r}")
    return kind


# ---------------------------------------------------------------------------
# reports


def report(command: str, decision: str, reason: str | None = None, **extra) -> dict:
    out = {
        "schema": REPORT_SCHEMA,
        "command": command,
        "decision": decision,
        "reason": reason,
    }
    out.update(extra)
    return out
