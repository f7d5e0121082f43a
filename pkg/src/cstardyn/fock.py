"""Truncated Fock realization of the tensor algebra of a multivariable system.

The space is one copy of the coefficient algebra (with Hilbert-Schmidt inner
product) per word of length at most L over the map indices.  The algebra
acts by twisted left multiplication, the generators prepend a letter and
annihilate the top level, and the degree expectations are realized as
finite Fourier averages over the gauge rotation, which are exact because
all occurring degrees lie between -L and L.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from . import nla
from .algebra import (
    AlgebraElement,
    AlgebraError,
    ElementMatrix,
    MultivariableSystem,
    StarIsomorphism,
)
from .config import DEFAULT, Tolerances
from .deciders import CERT_TOL, UnitaryEquivalenceCertificate, certify_unitary_equivalence

DEFAULT_MAX_DIM = 20_000


class FockDimensionError(AlgebraError):
    """Requested truncation level exceeds the dimension budget."""


class UnverifiedCertificateError(AlgebraError):
    """The supplied certificate does not verify, refusing to transport it."""


def _left_multiplication(a: AlgebraElement) -> sp.csr_matrix:
    blocks = [sp.kron(blk, sp.identity(s), format="csr") for blk, s in zip(a.blocks, a.algebra.block_sizes)]
    return sp.block_diag(blocks, format="csr")


class FockRepresentation:
    """Truncated Fock space of a system, with generators and gauge data."""

    def __init__(self, system: MultivariableSystem, level: int, max_dim: int = DEFAULT_MAX_DIM):
        if level < 1:
            raise AlgebraError("the truncation level must be at least 1")
        self.system = system
        self.level = level
        n = system.arity
        words: list[tuple[int, ...]] = [()]
        frontier: list[tuple[int, ...]] = [()]
        for _ in range(level):
            frontier = [(i,) + w for w in frontier for i in range(n)]
            frontier.sort()
            words.extend(frontier)
        # regenerate in canonical order: by length, then lexicographically
        words = sorted({w for w in words}, key=lambda w: (len(w), w))
        self.words = tuple(words)
        self.block_dim = system.algebra.coord_dim
        self.dim = len(self.words) * self.block_dim
        if self.dim > max_dim:
            raise FockDimensionError(
                f"total dimension {self.dim} exceeds the budget of {max_dim}"
            )
        self.word_index = {w: i for i, w in enumerate(self.words)}
        self.degrees = np.repeat([len(w) for w in self.words], self.block_dim)

        # word w acts through alpha_w, built so that prepending letter i
        # composes as alpha_{iw} = alpha_w . alpha_i
        isos: dict[tuple[int, ...], StarIsomorphism] = {(): StarIsomorphism.identity(system.algebra)}
        for w in self.words[1:]:
            isos[w] = isos[w[1:]].compose(system.maps[w[0]])
        self.word_isos = isos
        self._generators: list[sp.csr_matrix] | None = None

    def rep(self, a: AlgebraElement) -> sp.csr_matrix:
        """The algebra action: left multiplication by alpha_w(a) on each word."""
        if a.algebra != self.system.algebra:
            raise AlgebraError("element does not belong to the system algebra")
        blocks = [_left_multiplication(self.word_isos[w].apply(a)) for w in self.words]
        return sp.block_diag(blocks, format="csr")

    def generator(self, i: int) -> sp.csr_matrix:
        """The i-th creation operator: word w goes identically to word (i, w)."""
        if self._generators is None:
            n = self.system.arity
            gens = []
            for g in range(n):
                rows, cols = [], []
                for w in self.words:
                    if len(w) >= self.level:
                        continue
                    src = self.word_index[w] * self.block_dim
                    dst = self.word_index[(g,) + w] * self.block_dim
                    for t in range(self.block_dim):
                        rows.append(dst + t)
                        cols.append(src + t)
                data = np.ones(len(rows))
                gens.append(sp.csr_matrix((data, (rows, cols)), shape=(self.dim, self.dim)))
            self._generators = gens
        return self._generators[i]

    def level_projection(self, max_len: int) -> sp.csr_matrix:
        mask = (self.degrees <= max_len).astype(float)
        return sp.diags(mask).tocsr()

    def vacuum_identity(self) -> np.ndarray:
        """The identity element of the algebra, embedded at the empty word."""
        v = np.zeros(self.dim, dtype=complex)
        v[: self.block_dim] = self.system.algebra.identity().coords()
        return v

    def covariance_defect(self) -> float:
        """Worst violation of ``rep(a) s_i = s_i rep(alpha_i(a))`` on matrix units."""
        worst = 0.0
        for i, alpha in enumerate(self.system.maps):
            s = self.generator(i)
            for e in self.system.algebra.matrix_units():
                diff = self.rep(e) @ s - s @ self.rep(alpha.apply(e))
                worst = max(worst, nla.frobenius(diff))
        return worst


def build_fock(system: MultivariableSystem, level: int, max_dim: int = DEFAULT_MAX_DIM) -> FockRepresentation:
    return FockRepresentation(system, level, max_dim)


def gauge_expectation(fock: FockRepresentation, op, degree: int) -> sp.csr_matrix:
    """Degree-``degree`` Fourier component of an operator under the gauge action.

    Averages the 2L+1 rotations of the diagonal unitary scaling a word of
    length l by a (2L+1)-st root of unity to the l-th power; degree 0 is
    the expectation onto degree-preserving operators.
    """
    if abs(degree) > fock.level:
        raise AlgebraError(f"|degree| must be at most the level {fock.level}")
    op = sp.csr_matrix(op)
    if op.shape != (fock.dim, fock.dim):
        raise AlgebraError(f"operator has shape {op.shape}, expected {(fock.dim, fock.dim)}")
    points = 2 * fock.level + 1
    acc = sp.csr_matrix(op.shape, dtype=complex)
    for k in range(points):
        phases = np.exp(2j * np.pi * k * fock.degrees / points)
        rotated = sp.diags(phases).tocsr() @ op @ sp.diags(phases.conj()).tocsr()
        weight = np.exp(-2j * np.pi * degree * k / points)
        acc = acc + weight * rotated
    return acc / points


def generator_coefficient(fock: FockRepresentation, op, i: int) -> sp.csr_matrix:
    """The coefficient map picking out the ``s_i a`` component of an operator."""
    s = fock.generator(i)
    return s @ (s.conj().T @ gauge_expectation(fock, op, 1))


def expectation_defects(fock: FockRepresentation) -> dict[str, float]:
    """Idempotence and annihilation defects of the degree maps.

    Evaluated on a deterministic operator mixing degrees -1 through 2, plus
    the pure monomial cases; all values are Frobenius norms and should sit
    at rounding level.
    """
    algebra = fock.system.algebra
    units = algebra.matrix_units()
    n = fock.system.arity
    coeffs = [1.0 + g / len(units) for g in range(len(units))]
    a0 = algebra.from_coords(np.array(coeffs, dtype=complex))
    ra = fock.rep(a0)
    mixed = sp.csr_matrix((fock.dim, fock.dim), dtype=complex)
    mixed = mixed + ra
    for i in range(n):
        mixed = mixed + (2.0 + i) * (fock.generator(i) @ ra)
    mixed = mixed + ra @ fock.generator(0).conj().T
    mixed = mixed + fock.generator(0) @ fock.generator(n - 1) @ ra

    e0 = lambda t: gauge_expectation(fock, t, 0)
    fi = lambda t, i: generator_coefficient(fock, t, i)
    out = {
        "expectation_on_algebra": nla.frobenius(e0(ra) - ra),
        "expectation_idempotent": nla.frobenius(e0(e0(mixed)) - e0(mixed)),
    }
    worst_monomial = 0.0
    worst_idem = 0.0
    worst_mutual = 0.0
    worst_e0f = 0.0
    for i in range(n):
        fim = fi(mixed, i)
        worst_idem = max(worst_idem, nla.frobenius(fi(fim, i) - fim))
        worst_e0f = max(worst_e0f, nla.frobenius(e0(fim)))
        for j in range(n):
            mono = fock.generator(j) @ ra
            expect = mono if i == j else sp.csr_matrix((fock.dim, fock.dim), dtype=complex)
            worst_monomial = max(worst_monomial, nla.frobenius(fi(mono, i) - expect))
            if i != j:
                worst_mutual = max(worst_mutual, nla.frobenius(fi(fi(mixed, j), i)))
    out["coefficient_on_monomials"] = worst_monomial
    out["coefficient_idempotent"] = worst_idem
    out["coefficient_mutual_annihilation"] = worst_mutual
    out["expectation_of_coefficient"] = worst_e0f
    out["max"] = max(out.values())
    return out


def creation_norm_margin(fock: FockRepresentation) -> float:
    """min over generators and test elements of ``|s_i rep(a)| - |a|``.

    Nonnegative up to rounding: the empty-word summand realizes plain left
    multiplication, so composing with a creation operator cannot shrink
    norms below the element norm.
    """
    algebra = fock.system.algebra
    tests = [algebra.identity(), algebra.matrix_units()[0]]
    coeffs = np.linspace(1.0, 2.0, algebra.coord_dim).astype(complex)
    tests.append(algebra.from_coords(coeffs))
    margin = np.inf
    for i in range(fock.system.arity):
        s = fock.generator(i)
        for a in tests:
            margin = min(margin, nla.spectral_norm(s @ fock.rep(a)) - a.norm())
    return float(margin)


@dataclass(frozen=True)
class AssociatedMatrix:
    """Degree-one coefficients of generator images, with remainder accounting.

    ``degree_zero`` holds the degree-0 coefficients, which vanish for the
    certificate-induced images handled here; a nonzero value is surfaced by
    the callers as a warning, not an error.
    """

    entries: ElementMatrix
    degree_zero: tuple[AlgebraElement, ...]
    remainder_norm: float


def induced_iso_images(
    cert: UnitaryEquivalenceCertificate,
    fock_src: FockRepresentation,
    fock_tgt: FockRepresentation,
    tol: Tolerances = DEFAULT,
    covariance_tol: float = 1e-9,
) -> list[sp.csr_matrix]:
    """Images of the source generators on the target Fock space.

    Builds ``sum_i t_i rep(u_ij)`` from a verified certificate and rechecks
    the transported covariance relation below the top level.
    """
    residuals = certify_unitary_equivalence(cert, fock_src.system, fock_tgt.system)
    if residuals["max"] > CERT_TOL:
        raise UnverifiedCertificateError(
            f"certificate residual {residuals['max']:.3e} exceeds {CERT_TOL:g}"
        )
    sys_a, sys_b = fock_src.system, fock_tgt.system
    n_rows, n_cols = cert.matrix.shape
    images = []
    for j in range(n_cols):
        g = sp.csr_matrix((fock_tgt.dim, fock_tgt.dim), dtype=complex)
        for i in range(n_rows):
            g = g + fock_tgt.generator(i) @ fock_tgt.rep(cert.matrix.entry(i, j))
        images.append(g)

    compress = fock_tgt.level_projection(fock_tgt.level - 1)
    worst = 0.0
    for j, g in enumerate(images):
        alpha_j = sys_a.maps[j]
        for e in sys_a.algebra.matrix_units():
            lhs = fock_tgt.rep(cert.iso.apply(e)) @ g
            rhs = g @ fock_tgt.rep(cert.iso.apply(alpha_j.apply(e)))
            worst = max(worst, nla.frobenius((lhs - rhs) @ compress))
    if worst > covariance_tol:
        raise UnverifiedCertificateError(
            f"transported covariance residual {worst:.3e} exceeds {covariance_tol:g}"
        )
    return images


def extract_associated_matrix(
    images: Sequence[sp.spmatrix], fock: FockRepresentation
) -> AssociatedMatrix:
    """Recover the coefficient matrix from generator images.

    Entry (i, j) is read off by applying the i-th coefficient map to image
    j, compressing by the i-th creation operator, and evaluating on the
    identity at the empty word (where the algebra action is faithful).
    """
    algebra = fock.system.algebra
    n_rows = fock.system.arity
    vac = fock.vacuum_identity()
    rows: list[list[AlgebraElement]] = [[] for _ in range(n_rows)]
    degree_zero = []
    remainder = 0.0
    for op in images:
        op = sp.csr_matrix(op)
        e1 = gauge_expectation(fock, op, 1)
        e0 = gauge_expectation(fock, op, 0)
        rest = op - e0
        for i in range(n_rows):
            s = fock.generator(i)
            coords = (s.conj().T @ (e1 @ vac))[: fock.block_dim]
            rows[i].append(algebra.from_coords(coords))
            rest = rest - s @ (s.conj().T @ e1)
        degree_zero.append(algebra.from_coords((e0 @ vac)[: fock.block_dim]))
        low = np.asarray(rest.tocsc()[:, : fock.block_dim].todense())
        remainder = max(remainder, nla.spectral_norm(low))
    entries = ElementMatrix(algebra, tuple(tuple(r) for r in rows))
    return AssociatedMatrix(entries, tuple(degree_zero), remainder)
