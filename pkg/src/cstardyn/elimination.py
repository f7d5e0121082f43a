"""Intertwining-preserving Gaussian elimination with replayable certificates.

Column permutations and row operations of the recorded form preserve the
intertwining relations, so a successful elimination of a right-invertible
square matrix over a full matrix algebra ends in an invertible diagonal
whose entries intertwine the row family with the permuted column family.
Hitting an all-zero row along the way is not an error: it is a verifiable
witness that the input could not have been right invertible, which is
exactly what happens for strictly tall matrices.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from . import nla
from .algebra import AlgebraError, ElementMatrix
from .config import DEFAULT, Tolerances
from .intertwiners import (
    BORDERLINE,
    INVERTIBLE,
    NOT_INTERTWINER,
    ZERO,
    IntertwinerMatrix,
    classify_intertwiner,
    verify_intertwining,
)

# entries this small (relative to the working scale) are numerical dust and
# are skipped instead of being eliminated
_DUST = 1e-14

REPLAY_RTOL = 1e-9
WITNESS_TOL = 1e-8


class NonInvertiblePivotError(AlgebraError):
    """Requested pivot failed the dichotomy (zero or borderline)."""


class NumericallyIndeterminateError(AlgebraError):
    """Every pivot candidate sits in the borderline band; refusing to guess."""


class NotSquareError(AlgebraError):
    pass


class NotRightInvertibleError(AlgebraError):
    pass


@dataclass(frozen=True)
class RowOperation:
    """Add ``multiplier`` times the pivot row to the target row."""

    target_row: int
    pivot_row: int
    multiplier: np.ndarray

    def __post_init__(self):
        mult = np.asarray(self.multiplier, dtype=complex)
        mult.setflags(write=False)
        object.__setattr__(self, "multiplier", mult)


@dataclass(frozen=True)
class EliminationCertificate:
    """Everything needed to replay an elimination independently.

    Replaying ``col_perm`` and then ``row_ops`` in order on the original
    matrix must reproduce ``diagonal``; the stored ``step_residuals`` track
    the intertwining residual after each recorded operation.
    """

    input_hash: str
    col_perm: tuple[int, ...]
    row_ops: tuple[RowOperation, ...]
    diagonal: tuple[np.ndarray, ...]
    step_residuals: tuple[float, ...]


@dataclass(frozen=True)
class DimensionContradiction:
    """A row became numerically zero: the input was not right invertible.

    ``zero_row_index`` is 1-based, matching report output; ``matrix`` holds
    the partially eliminated state at detection time.
    """

    zero_row_index: int
    col_perm: tuple[int, ...]
    matrix: IntertwinerMatrix


def matrix_hash(matrix: IntertwinerMatrix) -> str:
    """Content hash of the entries and the defining representation data."""
    payload = {
        "entries": _float_list(matrix.entries),
        "rows": [_float_list(r.images) for r in matrix.row_reps],
        "cols": [_float_list(r.images) for r in matrix.col_reps],
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _float_list(arr: np.ndarray):
    stacked = np.stack([np.asarray(arr).real, np.asarray(arr).imag], axis=-1)
    return (stacked + 0.0).tolist()


def column_permute(matrix: IntertwinerMatrix, perm) -> IntertwinerMatrix:
    """Right-multiply by the permutation matrix: new column j is old column perm[j]."""
    perm = tuple(int(p) for p in perm)
    n = matrix.shape[1]
    if sorted(perm) != list(range(n)):
        raise AlgebraError(f"{perm} is not a permutation of {n} columns")
    entries = matrix.entries[:, list(perm)]
    return IntertwinerMatrix(
        entries,
        matrix.row_reps,
        tuple(matrix.col_reps[p] for p in perm),
        matrix.entry_algebra,
    )


def row_eliminate(
    matrix: IntertwinerMatrix, h: int, k: int, tol: Tolerances = DEFAULT
) -> tuple[IntertwinerMatrix, RowOperation]:
    """Clear entry (h, k) using the invertible diagonal pivot (k, k)."""
    m, n = matrix.shape
    if h == k:
        raise AlgebraError("target and pivot rows must differ")
    scale = max(matrix.max_entry_norm, 1e-300)
    pivot = classify_intertwiner(
        matrix.entries[k, k], matrix.row_reps[k], matrix.col_reps[k], scale=scale, tol=tol
    )
    if not pivot.is_invertible:
        raise NonInvertiblePivotError(f"pivot ({k},{k}) classified as {pivot.kind}")
    if nla.spectral_norm(matrix.entries[h, k]) <= _DUST * scale:
        mult = np.zeros_like(matrix.entries[h, k])
        return matrix, RowOperation(h, k, mult)
    mult = -matrix.entries[h, k] @ pivot.inverse
    entries = np.array(matrix.entries)
    entries[h] = entries[h] + np.einsum("ab,jbc->jac", mult, entries[k])
    return matrix.with_entries(entries), RowOperation(h, k, mult)


def gaussian_eliminate(
    matrix: IntertwinerMatrix, tol: Tolerances = DEFAULT
) -> EliminationCertificate | DimensionContradiction:
    """Eliminate to a diagonal with an invertible pivot in every column.

    Requires at least as many rows as columns and a valid intertwiner matrix
    over a full matrix algebra.  Among the invertible candidates in the
    working row the best conditioned one (largest smallest singular value)
    is selected as pivot and the induced column permutation is recorded.
    """
    m, n = matrix.shape
    if m < n:
        raise AlgebraError(f"elimination needs m >= n rows, got shape {matrix.shape}")
    for rep in (*matrix.row_reps, *matrix.col_reps):
        if not rep.is_surjective(tol.zero):
            raise AlgebraError("elimination requires representations onto the full matrix algebra")
    base_scale = max(matrix.max_entry_norm, 1e-300)
    if matrix.residual > tol.hom * base_scale:
        raise AlgebraError(
            f"input does not intertwine its representation families "
            f"(residual {matrix.residual:.3e} at scale {base_scale:.3e})"
        )

    work = np.array(matrix.entries)
    col_reps = list(matrix.col_reps)
    perm = list(range(n))
    ops: list[RowOperation] = []
    residuals: list[float] = []
    input_hash = matrix_hash(matrix)

    def current() -> IntertwinerMatrix:
        return IntertwinerMatrix(work, matrix.row_reps, col_reps, matrix.entry_algebra)

    def record_residual() -> None:
        residuals.append(verify_intertwining(current()))

    def eliminate_into(h: int, k: int, scale: float, inverse: np.ndarray) -> None:
        if nla.spectral_norm(work[h, k]) <= _DUST * scale:
            return
        mult = -work[h, k] @ inverse
        work[h] = work[h] + np.einsum("ab,jbc->jac", mult, work[k])
        ops.append(RowOperation(h, k, mult))
        record_residual()

    pivot_inverses: list[np.ndarray] = []
    for r in range(n):
        norms = np.linalg.svd(work, compute_uv=False)[:, :, 0]
        scale = max(base_scale, float(norms.max()))
        best_j, best_score, best = None, -1.0, None
        saw_borderline = False
        for j in range(r, n):
            cls = classify_intertwiner(
                work[r, j], matrix.row_reps[r], col_reps[j], scale=scale, tol=tol
            )
            if cls.kind == INVERTIBLE:
                smin = float(np.sqrt(cls.scalar))
                if smin > best_score:
                    best_j, best_score, best = j, smin, cls
            elif cls.kind == BORDERLINE:
                saw_borderline = True
            elif cls.kind == NOT_INTERTWINER:
                raise AlgebraError(
                    f"entry ({r},{j}) violates the intertwining relation mid-run"
                )
        if best is None:
            if saw_borderline:
                raise NumericallyIndeterminateError(
                    f"no invertible pivot in row {r}; borderline entries present"
                )
            return DimensionContradiction(r + 1, tuple(perm), current())
        if best_j != r:
            work[:, [r, best_j]] = work[:, [best_j, r]]
            col_reps[r], col_reps[best_j] = col_reps[best_j], col_reps[r]
            perm[r], perm[best_j] = perm[best_j], perm[r]
            record_residual()
        pivot_inverses.append(best.inverse)
        for h in range(r + 1, m):
            eliminate_into(h, r, scale, best.inverse)

    if m > n:
        return DimensionContradiction(n + 1, tuple(perm), current())

    # clear above the diagonal, rightmost column first, so each pivot row is
    # already reduced to its diagonal entry when it is used
    for k in range(n - 1, 0, -1):
        norms = np.linalg.svd(work, compute_uv=False)[:, :, 0]
        scale = max(base_scale, float(norms.max()))
        for h in range(k):
            eliminate_into(h, k, scale, pivot_inverses[k])

    diagonal = tuple(np.array(work[i, i]) for i in range(n))
    return EliminationCertificate(
        input_hash=input_hash,
        col_perm=tuple(perm),
        row_ops=tuple(ops),
        diagonal=diagonal,
        step_residuals=tuple(residuals),
    )


def replay_elimination(matrix: IntertwinerMatrix, cert: EliminationCertificate) -> IntertwinerMatrix:
    """Re-apply the recorded column permutation and row operations."""
    out = column_permute(matrix, cert.col_perm)
    entries = np.array(out.entries)
    for op in cert.row_ops:
        entries[op.target_row] = entries[op.target_row] + np.einsum(
            "ab,jbc->jac", op.multiplier, entries[op.pivot_row]
        )
    return out.with_entries(entries)


def verify_elimination_certificate(
    matrix: IntertwinerMatrix, cert: EliminationCertificate, tol: Tolerances = DEFAULT
) -> dict:
    """Independently replay a certificate and recheck all of its claims."""
    m, n = matrix.shape
    report: dict = {"ok": False}
    report["hash_matches"] = matrix_hash(matrix) == cert.input_hash
    replayed = replay_elimination(matrix, cert)
    diag_scale = max(max(nla.spectral_norm(d) for d in cert.diagonal), 1e-300)
    diag_defect = max(
        nla.spectral_norm(replayed.entries[i, i] - cert.diagonal[i]) for i in range(n)
    )
    off = 0.0
    for i in range(m):
        for j in range(n):
            if i != j:
                off = max(off, nla.spectral_norm(replayed.entries[i, j]))
    report["replay_defect"] = diag_defect / diag_scale
    report["offdiagonal_defect"] = off / diag_scale
    invertible = True
    intertwining = 0.0
    for i in range(n):
        cls = classify_intertwiner(
            cert.diagonal[i],
            matrix.row_reps[i],
            matrix.col_reps[cert.col_perm[i]],
            scale=diag_scale,
            tol=tol,
        )
        invertible = invertible and cls.is_invertible
        intertwining = max(intertwining, cls.residual)
    report["diagonal_invertible"] = invertible
    report["diagonal_intertwining"] = intertwining
    report["ok"] = (
        report["hash_matches"]
        and invertible
        and report["replay_defect"] <= REPLAY_RTOL
        and report["offdiagonal_defect"] <= REPLAY_RTOL
        and intertwining <= REPLAY_RTOL * diag_scale
    )
    return report


def right_invertible_test(
    mat: ElementMatrix, tol: Tolerances = DEFAULT
) -> tuple[bool, ElementMatrix | None]:
    """Decide right invertibility over the algebra, with a witness.

    Per canonical block the assembled complex matrix must have full row
    rank; the witness right inverse is assembled from per-block
    pseudo-inverses and rechecked against the identity.
    """
    m, n = mat.shape
    algebra = mat.algebra
    pinvs = []
    for k in range(algebra.num_blocks):
        assembled = mat.assemble_block(k)
        s = nla.singular_values(assembled)
        if assembled.shape[0] > assembled.shape[1] or s[-1] <= tol.zero * s[0]:
            return False, None
        pinvs.append(np.linalg.pinv(assembled))
    rows = []
    for j in range(n):
        row = []
        for i in range(m):
            blocks = []
            for k, size in enumerate(algebra.block_sizes):
                blocks.append(pinvs[k][j * size : (j + 1) * size, i * size : (i + 1) * size])
            row.append(algebra.element(blocks))
        rows.append(tuple(row))
    witness = ElementMatrix(algebra, tuple(rows))
    defect = (mat @ witness - ElementMatrix.identity(algebra, m)).norm()
    if defect > WITNESS_TOL:
        raise NumericallyIndeterminateError(
            f"rank test passed but the witness residual is {defect:.3e}"
        )
    return True, witness


def two_sided_inverse(mat: ElementMatrix, tol: Tolerances = DEFAULT) -> ElementMatrix:
    """Invert a square right-invertible matrix over the algebra.

    Finite-dimensional algebras are stably finite, so a right inverse of a
    square matrix is automatically two sided; both products are rechecked.
    """
    m, n = mat.shape
    if m != n:
        raise NotSquareError(f"matrix of shape {mat.shape} is not square")
    ok, witness = right_invertible_test(mat, tol)
    if not ok or witness is None:
        raise NotRightInvertibleError("matrix is not right invertible over the algebra")
    eye = ElementMatrix.identity(mat.algebra, n)
    left = (witness @ mat - eye).norm()
    right = (mat @ witness - eye).norm()
    if max(left, right) > WITNESS_TOL:
        raise NumericallyIndeterminateError(
            f"inverse residuals too large: left {left:.3e}, right {right:.3e}"
        )
    return witness
