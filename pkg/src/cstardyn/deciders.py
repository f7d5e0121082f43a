"""Decision procedures for outer conjugacy and unitary equivalence.

Both deciders return verifiable certificates on success and structured
negative results (never bare booleans) on failure, so callers and the
command line can distinguish "decided no" from "could not decide".
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Mapping, Sequence

import numpy as np

from . import matching, nla
from .algebra import (
    AlgebraElement,
    AlgebraError,
    BlockAlgebra,
    ElementMatrix,
    MultivariableSystem,
    Representation,
    StarIsomorphism,
)
from .config import DEFAULT, Tolerances
from .intertwiners import (
    IntertwinerMatrix,
    classify_intertwiner,
    from_element_matrix,
    intertwiner_space,
    verify_intertwining,
)

CERT_TOL = 1e-8


class TrivialCenterRequiredError(AlgebraError):
    """The decision procedure only covers single-block algebras."""


class SearchBudgetExceededError(AlgebraError):
    """The bijection search space exceeds the configured point bound."""


class NotInvertibleError(AlgebraError):
    pass


@dataclass(frozen=True)
class OuterConjugacyCertificate:
    """Witnesses ``beta_i = Ad(w_i) . gamma . alpha_{index_map[i]} . gamma^-1``."""

    iso: StarIsomorphism
    index_map: tuple[int, ...]
    twists: tuple[AlgebraElement, ...]
    residuals: Mapping[str, float]


@dataclass(frozen=True)
class UnitaryEquivalenceCertificate:
    """A unitary matrix over the target algebra intertwining the two systems."""

    iso: StarIsomorphism
    matrix: ElementMatrix
    residuals: Mapping[str, float]


@dataclass(frozen=True)
class NotConjugate:
    reason: str
    witness: tuple[int, ...] | None = None


@dataclass(frozen=True)
class NotEquivalent:
    reason: str


def conjugated_maps(
    iso: StarIsomorphism, system: MultivariableSystem
) -> list[StarIsomorphism]:
    """The family ``iso . alpha_j . iso^-1`` on the target algebra."""
    inv = iso.inverse()
    return [iso.compose(a).compose(inv) for a in system.maps]


def polar_unitary(matrix: IntertwinerMatrix, tol: Tolerances = DEFAULT) -> IntertwinerMatrix:
    """Unitary polar factor of an invertible square intertwiner matrix.

    Computed blockwise per canonical block of the entry algebra, so the
    result stays inside the algebra; the output intertwines the same
    representation families as the input.
    """
    m, n = matrix.shape
    if m != n:
        raise AlgebraError(f"polar part needs a square matrix, got shape {matrix.shape}")
    algebra = matrix.entry_algebra or BlockAlgebra((matrix.dim,))
    out = np.zeros_like(matrix.entries)
    scale = max(matrix.max_entry_norm, 1e-300)
    off_mass = 0.0
    for off, size in zip(algebra.offsets, algebra.block_sizes):
        big = np.zeros((n * size, n * size), dtype=complex)
        for i in range(n):
            for j in range(n):
                big[i * size : (i + 1) * size, j * size : (j + 1) * size] = matrix.entries[
                    i, j, off : off + size, off : off + size
                ]
        factor, svals = nla.polar_factor(big)
        if svals[0] == 0.0 or svals[-1] <= tol.zero * svals[0]:
            ratio = svals[-1] / svals[0] if svals[0] else 0.0
            raise NotInvertibleError(
                f"assembled block at offset {off} is singular "
                f"(sigma_min/sigma_max = {ratio:.3e})"
            )
        for i in range(n):
            for j in range(n):
                out[i, j, off : off + size, off : off + size] = factor[
                    i * size : (i + 1) * size, j * size : (j + 1) * size
                ]
    for i in range(n):
        for j in range(n):
            kept = np.zeros((matrix.dim, matrix.dim), dtype=complex)
            for off, size in zip(algebra.offsets, algebra.block_sizes):
                kept[off : off + size, off : off + size] = matrix.entries[
                    i, j, off : off + size, off : off + size
                ]
            off_mass = max(off_mass, nla.spectral_norm(matrix.entries[i, j] - kept))
    if off_mass > tol.zero * scale:
        raise AlgebraError(
            f"entries leave the entry algebra (off-block mass {off_mass:.3e})"
        )
    return matrix.with_entries(out)


def decide_outer_conjugacy(
    sys_a: MultivariableSystem,
    sys_b: MultivariableSystem,
    tol: Tolerances = DEFAULT,
) -> OuterConjugacyCertificate | NotConjugate:
    """Decide outer conjugacy of two systems over single-block algebras.

    The isomorphism is fixed to the canonical identification (any other
    choice differs by an inner automorphism, which the twist unitaries
    absorb); the pairing between the two map families is a perfect matching
    in the graph whose edges are nonzero intertwiner spaces.
    """
    if not sys_a.algebra.center_is_trivial() or not sys_b.algebra.center_is_trivial():
        raise TrivialCenterRequiredError(
            "outer conjugacy decision requires algebras with trivial center"
        )
    if sys_a.algebra.dim != sys_b.algebra.dim:
        return NotConjugate(reason="AlgebraMismatch")
    if sys_a.arity != sys_b.arity:
        return NotConjugate(reason="ArityMismatch")
    n = sys_a.arity
    gamma = StarIsomorphism.identity(sys_a.algebra, sys_b.algebra)
    rho = Representation.assembled(sys_b.algebra)
    row_reps = [rho.compose(b) for b in sys_b.maps]
    col_maps = conjugated_maps(gamma, sys_a)
    col_reps = [rho.compose(c) for c in col_maps]

    spaces = [[intertwiner_space(row_reps[i], col_reps[j], tol) for j in range(n)] for i in range(n)]
    adjacency = [[j for j in range(n) if len(spaces[i][j]) > 0] for i in range(n)]
    assignment = matching.perfect_matching(adjacency, n)
    if assignment is None:
        return NotConjugate(
            reason="NoPerfectMatching", witness=matching.hall_violator(adjacency, n)
        )

    twists = []
    for i, j in enumerate(assignment):
        basis = spaces[i][j][0]
        cls = classify_intertwiner(
            basis, row_reps[i], col_reps[j], scale=nla.spectral_norm(basis), tol=tol
        )
        if not cls.is_invertible:
            return NotConjugate(reason="NoInvertibleIntertwiner", witness=(i,))
        twists.append(sys_b.algebra.element([cls.unitary]))

    cert = OuterConjugacyCertificate(
        iso=gamma,
        index_map=assignment,
        twists=tuple(twists),
        residuals={},
    )
    residuals = verify_outer_conjugacy(cert, sys_a, sys_b)
    return OuterConjugacyCertificate(gamma, assignment, tuple(twists), residuals)


def verify_outer_conjugacy(
    cert: OuterConjugacyCertificate,
    sys_a: MultivariableSystem,
    sys_b: MultivariableSystem,
) -> dict[str, float]:
    """Recompute the residuals behind an outer conjugacy certificate."""
    if cert.iso.source != sys_a.algebra or cert.iso.target != sys_b.algebra:
        raise AlgebraError("certificate isomorphism does not connect the two systems")
    n = sys_b.arity
    if sorted(cert.index_map) != list(range(sys_a.arity)) or len(cert.twists) != n:
        raise AlgebraError("certificate index map or twist list is malformed")
    units = sys_b.algebra.matrix_units()
    conj = conjugated_maps(cert.iso, sys_a)
    unitarity = 0.0
    relation = 0.0
    for i, (j, w) in enumerate(zip(cert.index_map, cert.twists)):
        wu = w * w.adjoint() - sys_b.algebra.identity()
        unitarity = max(unitarity, wu.norm())
        inner = conj[j]
        for e in units:
            lhs = sys_b.maps[i].apply(e)
            rhs = w * inner.apply(e) * w.adjoint()
            relation = max(relation, lhs.distance(rhs))
    return {"twist_unitarity": unitarity, "relation": relation, "max": max(unitarity, relation)}


def outer_to_unitary_equivalence(
    cert: OuterConjugacyCertificate,
    sys_a: MultivariableSystem,
    sys_b: MultivariableSystem,
) -> UnitaryEquivalenceCertificate:
    """Embed an outer conjugacy witness as a diagonal-up-to-permutation unitary."""
    n = sys_b.arity
    algebra = sys_b.algebra
    zero = algebra.zero()
    rows = [
        tuple(cert.twists[i] if j == cert.index_map[i] else zero for j in range(n))
        for i in range(n)
    ]
    ue = UnitaryEquivalenceCertificate(cert.iso, ElementMatrix(algebra, tuple(rows)), {})
    residuals = certify_unitary_equivalence(ue, sys_a, sys_b)
    return UnitaryEquivalenceCertificate(ue.iso, ue.matrix, residuals)


def certify_unitary_equivalence(
    cert: UnitaryEquivalenceCertificate,
    sys_a: MultivariableSystem,
    sys_b: MultivariableSystem,
) -> dict[str, float]:
    """Recompute both certificate invariants (pure verification).

    Works over any finite-dimensional algebras, including multi-block ones
    where no decision procedure is offered.
    """
    if cert.iso.source != sys_a.algebra or cert.iso.target != sys_b.algebra:
        raise AlgebraError("certificate isomorphism does not connect the two systems")
    u = cert.matrix
    if u.shape != (sys_b.arity, sys_a.arity):
        raise AlgebraError(
            f"unitary matrix has shape {u.shape}, expected {(sys_b.arity, sys_a.arity)}"
        )
    if u.algebra != sys_b.algebra:
        raise AlgebraError("unitary matrix entries must live in the target algebra")
    m, n = u.shape
    unitarity = 0.0
    for k in range(u.algebra.num_blocks):
        big = u.assemble_block(k)
        unitarity = max(
            unitarity,
            nla.spectral_norm(big @ big.conj().T - np.eye(big.shape[0])),
            nla.spectral_norm(big.conj().T @ big - np.eye(big.shape[1])),
        )
    bridged = from_element_matrix(u, sys_b.maps, conjugated_maps(cert.iso, sys_a))
    intertwining = verify_intertwining(bridged)
    return {"unitarity": unitarity, "intertwining": intertwining, "max": max(unitarity, intertwining)}


def _point_maps(system: MultivariableSystem) -> list[tuple[int, ...]]:
    return [a.perm for a in system.maps]


def decide_unitary_equivalence_commutative(
    sys_a: MultivariableSystem,
    sys_b: MultivariableSystem,
    max_points: int = 8,
    tol: Tolerances = DEFAULT,
) -> UnitaryEquivalenceCertificate | NotEquivalent:
    """Decide unitary equivalence when both algebras are commutative.

    A unitary matrix over functions on finitely many points exists for a
    given identification exactly when, at every point, the compatibility
    relation between the two map families admits a perfect matching: the
    squared moduli of a unitary matrix form a doubly stochastic matrix, so
    its support contains a permutation, and conversely a permutation matrix
    supported on the relation is itself unitary.  The certificate assembles
    those per-point permutation matrices.
    """
    for sys in (sys_a, sys_b):
        if any(s != 1 for s in sys.algebra.block_sizes):
            raise AlgebraError("commutative decision requires all block sizes equal to 1")
    m = sys_a.algebra.num_blocks
    if m != sys_b.algebra.num_blocks:
        return NotEquivalent(reason="SpectrumSizeMismatch")
    if sys_a.arity != sys_b.arity:
        return NotEquivalent(reason="ArityMismatch")
    if m > max_points:
        raise SearchBudgetExceededError(f"{m} points exceeds the bound of {max_points}")
    n = sys_a.arity
    sigma = _point_maps(sys_a)
    tau = _point_maps(sys_b)

    for phi in permutations(range(m)):
        phi_inv = [0] * m
        for a, b in enumerate(phi):
            phi_inv[b] = a
        point_matchings = []
        for x in range(m):
            allowed = [
                [j for j in range(n) if tau[i][x] == phi[sigma[j][phi_inv[x]]]]
                for i in range(n)
            ]
            assignment = matching.perfect_matching(allowed, n)
            if assignment is None:
                break
            point_matchings.append(assignment)
        else:
            gamma = StarIsomorphism(
                sys_a.algebra,
                sys_b.algebra,
                tuple(phi_inv),
                tuple(np.eye(1) for _ in range(m)),
            )
            rows = []
            for i in range(n):
                row = []
                for j in range(n):
                    values = [
                        np.array([[1.0 if point_matchings[x][i] == j else 0.0]])
                        for x in range(m)
                    ]
                    row.append(sys_b.algebra.element(values))
                rows.append(tuple(row))
            cert = UnitaryEquivalenceCertificate(gamma, ElementMatrix(sys_b.algebra, tuple(rows)), {})
            residuals = certify_unitary_equivalence(cert, sys_a, sys_b)
            return UnitaryEquivalenceCertificate(cert.iso, cert.matrix, residuals)
    return NotEquivalent(reason="Exhausted")
