"""Intertwiner spaces between representations and the zero-or-invertible dichotomy.

Over a full matrix algebra, any matrix intertwining two surjective
representations is either zero or a scalar multiple of a unitary; the
classification below decides which, refuses numerically ambiguous inputs,
and hands back the inverse and unitary part in the invertible case.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from . import nla
from .algebra import (
    AlgebraError,
    BlockAlgebra,
    ElementMatrix,
    Representation,
    StarIsomorphism,
)
from .config import DEFAULT, Tolerances

ZERO = "zero"
INVERTIBLE = "invertible"
BORDERLINE = "borderline"
NOT_INTERTWINER = "not-intertwiner"


@dataclass(frozen=True)
class Classification:
    """Outcome of classifying a single candidate intertwiner."""

    kind: str
    norm: float
    residual: float
    scalar: float | None = None          # lambda with c c* = lambda I
    scalar_defect: float | None = None   # worst deviation of cc*, c*c from lambda I
    inverse: np.ndarray | None = None
    unitary: np.ndarray | None = None

    @property
    def is_zero(self) -> bool:
        return self.kind == ZERO

    @property
    def is_invertible(self) -> bool:
        return self.kind == INVERTIBLE


def _check_rep_pair(phi: Representation, psi: Representation) -> None:
    if phi.algebra != psi.algebra:
        raise AlgebraError("representations must share their source algebra")
    if phi.dim != psi.dim:
        raise AlgebraError(f"representation dimensions differ: {phi.dim} vs {psi.dim}")


def _pair_residuals(c: np.ndarray, phi: Representation, psi: Representation) -> np.ndarray:
    diff = np.einsum("gab,bc->gac", phi.images, c) - np.einsum("ab,gbc->gac", c, psi.images)
    return np.linalg.svd(diff, compute_uv=False)[:, 0]


def intertwining_residual(c: np.ndarray, phi: Representation, psi: Representation) -> float:
    """max over matrix-unit generators g of ``|phi(g) c - c psi(g)|``."""
    _check_rep_pair(phi, psi)
    return float(_pair_residuals(np.asarray(c, dtype=complex), phi, psi).max())


def intertwiner_space(
    phi: Representation, psi: Representation, tol: Tolerances = DEFAULT
) -> np.ndarray:
    """Orthonormal (Hilbert-Schmidt) basis of ``{c : phi(b) c = c psi(b)}``.

    The space is the null space of ``c -> (phi(g) c - c psi(g))_g`` stacked
    over the matrix-unit generators ``g``, computed by singular value
    decomposition with the relative zero threshold.
    """
    _check_rep_pair(phi, psi)
    d = phi.dim
    eye = np.eye(d)
    ops = [np.kron(a, eye) - np.kron(eye, b.T) for a, b in zip(phi.images, psi.images)]
    stacked = np.concatenate(ops, axis=0)
    # the generators are matrix units, so the stacked operator has natural
    # scale one; the floor keeps numerically-zero relations full rank free
    basis = nla.null_space(stacked, tol.zero, floor=1.0)
    return basis.reshape(-1, d, d)


def classify_intertwiner(
    c: np.ndarray,
    phi: Representation,
    psi: Representation,
    *,
    scale: float = 1.0,
    tol: Tolerances = DEFAULT,
) -> Classification:
    """Decide whether an intertwiner is zero or invertible.

    Requires both representations to be onto the full matrix algebra (the
    dichotomy can fail otherwise).  ``scale`` fixes the reference magnitude
    for the zero decision; inputs in the band just above the zero threshold
    are reported as borderline rather than silently classified.
    """
    _check_rep_pair(phi, psi)
    c = np.asarray(c, dtype=complex)
    d = phi.dim
    if c.shape != (d, d):
        raise AlgebraError(f"candidate has shape {c.shape}, expected {(d, d)}")
    if not phi.is_surjective(tol.zero) or not psi.is_surjective(tol.zero):
        raise AlgebraError("classification requires representations onto the full matrix algebra")

    norm_c = nla.spectral_norm(c)
    residual = intertwining_residual(c, phi, psi)
    if residual > tol.hom * norm_c:
        return Classification(NOT_INTERTWINER, norm_c, residual)
    if norm_c <= tol.zero * scale:
        return Classification(ZERO, norm_c, residual)
    if norm_c < tol.borderline_factor * tol.zero * scale:
        return Classification(BORDERLINE, norm_c, residual)

    gram = c @ c.conj().T
    lam = float(np.trace(gram).real) / d
    defect = max(
        nla.spectral_norm(gram - lam * np.eye(d)),
        nla.spectral_norm(c.conj().T @ c - lam * np.eye(d)),
    )
    if defect > tol.zero * norm_c**2:
        return Classification(NOT_INTERTWINER, norm_c, residual, scalar=lam, scalar_defect=defect)
    inverse = c.conj().T / lam
    unitary = c / np.sqrt(lam)
    return Classification(
        INVERTIBLE, norm_c, residual, scalar=lam, scalar_defect=defect,
        inverse=inverse, unitary=unitary,
    )


class IntertwinerMatrix:
    """Rectangular array of intertwiners between two representation families.

    ``entries[i, j]`` intertwines ``row_reps[i]`` and ``col_reps[j]``; when
    the entries are assembled elements of a block algebra, ``entry_algebra``
    records that structure so blockwise operations (polar parts, element
    extraction) stay inside the algebra.
    """

    def __init__(
        self,
        entries: np.ndarray,
        row_reps: Sequence[Representation],
        col_reps: Sequence[Representation],
        entry_algebra: BlockAlgebra | None = None,
    ):
        entries = np.asarray(entries, dtype=complex)
        if entries.ndim != 4 or entries.shape[2] != entries.shape[3]:
            raise AlgebraError(f"entries must have shape (m, n, d, d), got {entries.shape}")
        m, n, d, _ = entries.shape
        row_reps = tuple(row_reps)
        col_reps = tuple(col_reps)
        if len(row_reps) != m or len(col_reps) != n:
            raise AlgebraError("representation families do not match the entry grid")
        algebra = row_reps[0].algebra
        for rep in (*row_reps, *col_reps):
            if rep.algebra != algebra:
                raise AlgebraError("all representations must share their source algebra")
            if rep.dim != d:
                raise AlgebraError("all representations must share the entry dimension")
        if entry_algebra is not None and entry_algebra.dim != d:
            raise AlgebraError("entry_algebra dimension does not match the entries")
        self.entries = entries.copy()
        self.entries.setflags(write=False)
        self.row_reps = row_reps
        self.col_reps = col_reps
        self.entry_algebra = entry_algebra

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape[:2]

    @property
    def dim(self) -> int:
        return self.entries.shape[2]

    def entry(self, i: int, j: int) -> np.ndarray:
        return self.entries[i, j]

    @cached_property
    def entry_norms(self) -> np.ndarray:
        return np.linalg.svd(self.entries, compute_uv=False)[:, :, 0]

    @cached_property
    def max_entry_norm(self) -> float:
        return float(self.entry_norms.max())

    @cached_property
    def residual(self) -> float:
        """Worst intertwining residual over all entries and generators."""
        worst = 0.0
        for i, phi in enumerate(self.row_reps):
            for j, psi in enumerate(self.col_reps):
                worst = max(worst, float(_pair_residuals(self.entries[i, j], phi, psi).max()))
        return worst

    def is_valid(self, tol: Tolerances = DEFAULT) -> bool:
        return self.residual <= tol.hom * max(self.max_entry_norm, 1e-300)

    def with_entries(self, entries: np.ndarray) -> "IntertwinerMatrix":
        return IntertwinerMatrix(entries, self.row_reps, self.col_reps, self.entry_algebra)


def verify_intertwining(matrix: IntertwinerMatrix) -> float:
    """Recompute the worst intertwining residual of a matrix (pure check)."""
    worst = 0.0
    for i, phi in enumerate(matrix.row_reps):
        for j, psi in enumerate(matrix.col_reps):
            worst = max(worst, float(_pair_residuals(matrix.entries[i, j], phi, psi).max()))
    return worst


def from_element_matrix(
    mat: ElementMatrix,
    row_maps: Sequence[StarIsomorphism],
    col_maps: Sequence[StarIsomorphism],
) -> IntertwinerMatrix:
    """View a matrix over an algebra as a concrete intertwiner matrix.

    The entries are assembled into block-diagonal matrices and the morphism
    families become representations through the faithful block-diagonal
    representation, so the element-level intertwining relations and the
    matrix-level ones coincide.
    """
    algebra = mat.algebra
    iota = Representation.assembled(algebra)
    m, n = mat.shape
    if len(row_maps) != m or len(col_maps) != n:
        raise AlgebraError("morphism families do not match the matrix shape")
    entries = np.stack([
        np.stack([mat.entry(i, j).assemble() for j in range(n)]) for i in range(m)
    ])
    row_reps = [iota.compose(b) for b in row_maps]
    col_reps = [iota.compose(b) for b in col_maps]
    return IntertwinerMatrix(entries, row_reps, col_reps, entry_algebra=algebra)


def element_entries(matrix: IntertwinerMatrix, rtol: float = DEFAULT.zero) -> ElementMatrix:
    """Disassemble the entries back into algebra elements.

    Requires ``entry_algebra``; entries with off-block mass are rejected
    since they do not lie in the algebra.
    """
    if matrix.entry_algebra is None:
        raise AlgebraError("matrix carries no entry algebra")
    m, n = matrix.shape
    rows = [
        tuple(matrix.entry_algebra.from_assembled(matrix.entries[i, j], rtol) for j in range(n))
        for i in range(m)
    ]
    return ElementMatrix(matrix.entry_algebra, tuple(rows))
