"""Finite direct sums of full matrix algebras and their *-morphisms.

An algebra is a direct sum of complex matrix blocks; elements are stored per
block and only assembled into one block-diagonal matrix inside oracles and
bridging representations.  Morphisms are block permutations composed with
per-block unitary conjugations, which covers every unital *-isomorphism
between such algebras.  All values are immutable after construction.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import accumulate
from numbers import Number
from typing import Iterable, Sequence

import numpy as np

from . import nla
from .config import DEFAULT, Tolerances


class AlgebraError(ValueError):
    """Malformed element, algebra mismatch, or invalid morphism data."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class BlockAlgebra:
    """Direct sum of full matrix algebras, determined by its block sizes."""

    block_sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.block_sizes)
        if len(sizes) < 1:
            raise AlgebraError("an algebra needs at least one block")
        if any(s < 1 for s in sizes):
            raise AlgebraError(f"block sizes must be positive, got {sizes}")
        object.__setattr__(self, "block_sizes", sizes)

    @property
    def num_blocks(self) -> int:
        return len(self.block_sizes)

    @property
    def dim(self) -> int:
        """Size of the assembled block-diagonal matrix."""
        return sum(self.block_sizes)

    @property
    def coord_dim(self) -> int:
        """Complex dimension of the algebra as a vector space."""
        return sum(s * s for s in self.block_sizes)

    @property
    def offsets(self) -> tuple[int, ...]:
        return tuple(accumulate((0,) + self.block_sizes[:-1]))

    def center_is_trivial(self) -> bool:
        return self.num_blocks == 1

    def element(self, blocks: Iterable[np.ndarray]) -> "AlgebraElement":
        return AlgebraElement(self, tuple(np.asarray(b, dtype=complex) for b in blocks))

    def zero(self) -> "AlgebraElement":
        return self.element([np.zeros((s, s)) for s in self.block_sizes])

    def identity(self) -> "AlgebraElement":
        return self.element([np.eye(s) for s in self.block_sizes])

    def from_coords(self, coords: np.ndarray) -> "AlgebraElement":
        coords = np.asarray(coords, dtype=complex).reshape(-1)
        if coords.size != self.coord_dim:
            raise AlgebraError(
                f"coordinate vector has length {coords.size}, expected {self.coord_dim}"
            )
        blocks, pos = [], 0
        for s in self.block_sizes:
            blocks.append(coords[pos : pos + s * s].reshape(s, s))
            pos += s * s
        return self.element(blocks)

    def from_assembled(self, mat: np.ndarray, rtol: float = DEFAULT.zero) -> "AlgebraElement":
        """Split a block-diagonal matrix back into an element.

        Rejects inputs whose off-block mass exceeds ``rtol`` relative to the
        matrix norm, since those do not represent elements of the algebra.
        """
        mat = np.asarray(mat, dtype=complex)
        if mat.shape != (self.dim, self.dim):
            raise AlgebraError(f"assembled matrix has shape {mat.shape}, expected {(self.dim, self.dim)}")
        blocks = []
        for off, s in zip(self.offsets, self.block_sizes):
            blocks.append(mat[off : off + s, off : off + s])
        elem = self.element(blocks)
        defect = nla.frobenius(mat - elem.assemble())
        if defect > rtol * max(1.0, nla.frobenius(mat)):
            raise AlgebraError(f"matrix is not block diagonal (off-block mass {defect:.3e})")
        return elem

    def matrix_units(self) -> list["AlgebraElement"]:
        """The canonical linear basis e^k_{pq}, one element per coordinate."""
        units = []
        for k, s in enumerate(self.block_sizes):
            for p in range(s):
                for q in range(s):
                    blocks = [np.zeros((t, t)) for t in self.block_sizes]
                    blocks[k][p, q] = 1.0
                    units.append(self.element(blocks))
        return units

    def unit_labels(self) -> list[tuple[int, int, int]]:
        return [
            (k, p, q)
            for k, s in enumerate(self.block_sizes)
            for p in range(s)
            for q in range(s)
        ]


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    """Element of a :class:`BlockAlgebra`, stored as one matrix per block."""

    algebra: BlockAlgebra
    blocks: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.blocks) != self.algebra.num_blocks:
            raise AlgebraError(
                f"element has {len(self.blocks)} blocks, algebra has {self.algebra.num_blocks}"
            )
        frozen = []
        for k, (blk, s) in enumerate(zip(self.blocks, self.algebra.block_sizes)):
            blk = np.asarray(blk, dtype=complex)
            if blk.shape != (s, s):
                raise AlgebraError(f"block {k} has shape {blk.shape}, expected {(s, s)}")
            frozen.append(_frozen(blk))
        object.__setattr__(self, "blocks", tuple(frozen))

    def _check_same(self, other: "AlgebraElement") -> None:
        if self.algebra != other.algebra:
            raise AlgebraError("elements live in different algebras")

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check_same(other)
        return self.algebra.element([a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check_same(other)
        return self.algebra.element([a - b for a, b in zip(self.blocks, other.blocks)])

    def __neg__(self) -> "AlgebraElement":
        return self.algebra.element([-a for a in self.blocks])

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            self._check_same(other)
            return self.algebra.element([a @ b for a, b in zip(self.blocks, other.blocks)])
        if isinstance(other, Number):
            return self.algebra.element([complex(other) * a for a in self.blocks])
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self.algebra.element([complex(other) * a for a in self.blocks])
        return NotImplemented

    def adjoint(self) -> "AlgebraElement":
        return self.algebra.element([a.conj().T for a in self.blocks])

    def norm(self) -> float:
        """C*-norm: the largest singular value over all blocks."""
        return max(nla.spectral_norm(a) for a in self.blocks)

    def coords(self) -> np.ndarray:
        return np.concatenate([a.reshape(-1) for a in self.blocks])

    def assemble(self) -> np.ndarray:
        out = np.zeros((self.algebra.dim, self.algebra.dim), dtype=complex)
        for off, s, blk in zip(self.algebra.offsets, self.algebra.block_sizes, self.blocks):
            out[off : off + s, off : off + s] = blk
        return out

    def is_zero(self, atol: float = 1e-12) -> bool:
        return self.norm() <= atol

    def is_unitary(self, tol: Tolerances = DEFAULT) -> bool:
        return all(
            nla.spectral_norm(a @ a.conj().T - np.eye(s)) <= tol.unit * max(1.0, nla.spectral_norm(a) ** 2)
            for a, s in zip(self.blocks, self.algebra.block_sizes)
        )

    def distance(self, other: "AlgebraElement") -> float:
        return (self - other).norm()


def op_norm(a: AlgebraElement) -> float:
    """Operator norm of an element (maximum block singular value)."""
    return a.norm()


def matrix_units(algebra: BlockAlgebra) -> list[AlgebraElement]:
    return algebra.matrix_units()


def _unitarity_defect(u: np.ndarray) -> float:
    return nla.spectral_norm(u @ u.conj().T - np.eye(u.shape[0]))


@dataclass(frozen=True, eq=False)
class StarIsomorphism:
    """Unital *-isomorphism between block algebras.

    Target block ``k`` is produced from source block ``perm[k]`` conjugated
    by the unitary ``unitaries[k]``; for an automorphism with block
    permutation sigma this is the convention ``phi(b)_k = u_k b_{sigma(k)} u_k*``.
    """

    source: BlockAlgebra
    target: BlockAlgebra
    perm: tuple[int, ...]
    unitaries: tuple[np.ndarray, ...]

    def __post_init__(self):
        perm = tuple(int(p) for p in self.perm)
        if sorted(perm) != list(range(self.source.num_blocks)) or len(perm) != self.target.num_blocks:
            raise AlgebraError(f"perm {perm} is not a bijection between the block sets")
        unis = []
        for k, (p, u) in enumerate(zip(perm, self.unitaries)):
            size = self.target.block_sizes[k]
            if self.source.block_sizes[p] != size:
                raise AlgebraError(
                    f"perm maps source block {p} (size {self.source.block_sizes[p]}) "
                    f"to target block {k} (size {size}); sizes must match"
                )
            u = np.asarray(u, dtype=complex)
            if u.shape != (size, size):
                raise AlgebraError(f"unitaries[{k}] has shape {u.shape}, expected {(size, size)}")
            defect = _unitarity_defect(u)
            if defect > DEFAULT.unit:
                raise AlgebraError(
                    f"unitaries[{k}] fails the unitarity check: defect {defect:.3e} "
                    f"exceeds tau_unit={DEFAULT.unit:g}"
                )
            unis.append(_frozen(u))
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "unitaries", tuple(unis))

    @classmethod
    def identity(cls, source: BlockAlgebra, target: BlockAlgebra | None = None) -> "StarIsomorphism":
        target = source if target is None else target
        if source.block_sizes != target.block_sizes:
            raise AlgebraError("identity morphism needs equal block size lists")
        return cls(
            source,
            target,
            tuple(range(source.num_blocks)),
            tuple(np.eye(s) for s in source.block_sizes),
        )

    @classmethod
    def inner(cls, algebra: BlockAlgebra, unitaries: Sequence[np.ndarray]) -> "StarIsomorphism":
        """Conjugation by a unitary element (block permutation fixed)."""
        return cls(algebra, algebra, tuple(range(algebra.num_blocks)), tuple(unitaries))

    @property
    def is_automorphism(self) -> bool:
        return self.source == self.target

    def apply(self, a: AlgebraElement) -> AlgebraElement:
        if a.algebra != self.source:
            raise AlgebraError("element does not belong to the source algebra")
        return self.target.element(
            [u @ a.blocks[p] @ u.conj().T for p, u in zip(self.perm, self.unitaries)]
        )

    def compose(self, other: "StarIsomorphism") -> "StarIsomorphism":
        """The morphism ``a -> self(other(a))``."""
        if other.target != self.source:
            raise AlgebraError("morphisms do not compose: target/source mismatch")
        perm = tuple(other.perm[p] for p in self.perm)
        unis = tuple(u @ other.unitaries[p] for p, u in zip(self.perm, self.unitaries))
        return StarIsomorphism(other.source, self.target, perm, unis)

    def inverse(self) -> "StarIsomorphism":
        inv = [0] * len(self.perm)
        for k, p in enumerate(self.perm):
            inv[p] = k
        unis = tuple(self.unitaries[inv[j]].conj().T for j in range(len(inv)))
        return StarIsomorphism(self.target, self.source, tuple(inv), unis)

    def is_inner(self) -> bool:
        """True iff the morphism is an automorphism fixing every block."""
        if not self.is_automorphism:
            raise AlgebraError("is_inner is only defined for automorphisms")
        return self.perm == tuple(range(self.source.num_blocks))

    def homomorphism_defect(self) -> float:
        """Worst violation of multiplicativity/adjoints on the matrix units."""
        units = self.source.matrix_units()
        images = [self.apply(e) for e in units]
        worst = 0.0
        for e, fe in zip(units, images):
            worst = max(worst, fe.adjoint().distance(self.apply(e.adjoint())))
            for f, ff in zip(units, images):
                worst = max(worst, self.apply(e * f).distance(fe * ff))
        return worst


def apply(phi: StarIsomorphism, a: AlgebraElement) -> AlgebraElement:
    return phi.apply(a)


def compose(phi: StarIsomorphism, psi: StarIsomorphism) -> StarIsomorphism:
    return phi.compose(psi)


def invert_morphism(phi: StarIsomorphism) -> StarIsomorphism:
    return phi.inverse()


def is_inner(alpha: StarIsomorphism) -> bool:
    return alpha.is_inner()


@dataclass(frozen=True, eq=False)
class MultivariableSystem:
    """A block algebra together with a tuple of automorphisms."""

    algebra: BlockAlgebra
    maps: tuple[StarIsomorphism, ...]

    def __post_init__(self):
        maps = tuple(self.maps)
        if not maps:
            raise AlgebraError("a multivariable system needs at least one map")
        for i, m in enumerate(maps):
            if m.source != self.algebra or m.target != self.algebra:
                raise AlgebraError(f"maps[{i}] is not an automorphism of the system algebra")
        object.__setattr__(self, "maps", maps)

    @property
    def arity(self) -> int:
        return len(self.maps)


class Representation:
    """Unital *-representation of a block algebra on C^dim.

    Stored as the stack of matrix-unit images, so applying the
    representation is one tensor contraction with the element coordinates.
    """

    def __init__(self, algebra: BlockAlgebra, images: np.ndarray):
        images = np.asarray(images, dtype=complex)
        if images.ndim != 3 or images.shape[0] != algebra.coord_dim or images.shape[1] != images.shape[2]:
            raise AlgebraError(
                f"images must have shape (coord_dim, d, d), got {images.shape}"
            )
        self.algebra = algebra
        self.images = _frozen(images)
        self.dim = images.shape[1]
        self._surjective: bool | None = None
        defect = nla.spectral_norm(self.apply(algebra.identity()) - np.eye(self.dim))
        if defect > 1e-8:
            raise AlgebraError(f"representation is not unital (defect {defect:.3e})")

    def apply(self, a: AlgebraElement) -> np.ndarray:
        if a.algebra != self.algebra:
            raise AlgebraError("element does not belong to the represented algebra")
        return np.tensordot(a.coords(), self.images, axes=1)

    def compose(self, iso: StarIsomorphism) -> "Representation":
        """The representation ``a -> self(iso(a))`` of ``iso.source``."""
        if iso.target != self.algebra:
            raise AlgebraError("morphism target does not match the represented algebra")
        units = iso.source.matrix_units()
        images = np.stack([self.apply(iso.apply(e)) for e in units])
        return Representation(iso.source, images)

    def is_surjective(self, rtol: float = DEFAULT.zero) -> bool:
        """True iff the matrix-unit images span all of M_dim."""
        if self._surjective is None:
            flat = self.images.reshape(self.algebra.coord_dim, self.dim * self.dim)
            self._surjective = nla.matrix_rank(flat, rtol) == self.dim * self.dim
        return self._surjective

    def homomorphism_defect(self) -> float:
        units = self.algebra.matrix_units()
        imgs = [self.apply(e) for e in units]
        worst = 0.0
        for e, fe in zip(units, imgs):
            worst = max(worst, nla.spectral_norm(self.apply(e.adjoint()) - fe.conj().T))
            for f, ff in zip(units, imgs):
                worst = max(worst, nla.spectral_norm(self.apply(e * f) - fe @ ff))
        return worst

    @classmethod
    def block_projection(cls, algebra: BlockAlgebra, k: int) -> "Representation":
        """The canonical irreducible picking out block ``k``."""
        if not 0 <= k < algebra.num_blocks:
            raise AlgebraError(f"block index {k} out of range")
        d = algebra.block_sizes[k]
        images = np.zeros((algebra.coord_dim, d, d), dtype=complex)
        for g, (kk, p, q) in enumerate(algebra.unit_labels()):
            if kk == k:
                images[g, p, q] = 1.0
        return cls(algebra, images)

    @classmethod
    def assembled(cls, algebra: BlockAlgebra) -> "Representation":
        """The faithful block-diagonal representation on C^dim."""
        d = algebra.dim
        images = np.zeros((algebra.coord_dim, d, d), dtype=complex)
        offsets = algebra.offsets
        for g, (k, p, q) in enumerate(algebra.unit_labels()):
            images[g, offsets[k] + p, offsets[k] + q] = 1.0
        return cls(algebra, images)


@dataclass(frozen=True, eq=False)
class ElementMatrix:
    """Rectangular matrix with entries in a block algebra."""

    algebra: BlockAlgebra
    entries: tuple[tuple[AlgebraElement, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(row) for row in self.entries)
        if not rows or not rows[0]:
            raise AlgebraError("an element matrix needs at least one entry")
        width = len(rows[0])
        for i, row in enumerate(rows):
            if len(row) != width:
                raise AlgebraError(f"row {i} has {len(row)} entries, expected {width}")
            for j, e in enumerate(row):
                if e.algebra != self.algebra:
                    raise AlgebraError(f"entry ({i},{j}) lives in a different algebra")
        object.__setattr__(self, "entries", rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.entries), len(self.entries[0]))

    def entry(self, i: int, j: int) -> AlgebraElement:
        return self.entries[i][j]

    @classmethod
    def identity(cls, algebra: BlockAlgebra, n: int) -> "ElementMatrix":
        one, zero = algebra.identity(), algebra.zero()
        return cls(algebra, tuple(
            tuple(one if i == j else zero for j in range(n)) for i in range(n)
        ))

    @classmethod
    def from_rows(cls, algebra: BlockAlgebra, rows: Sequence[Sequence[AlgebraElement]]) -> "ElementMatrix":
        return cls(algebra, tuple(tuple(r) for r in rows))

    def __matmul__(self, other: "ElementMatrix") -> "ElementMatrix":
        if other.algebra != self.algebra:
            raise AlgebraError("matrices over different algebras")
        m, n = self.shape
        n2, r = other.shape
        if n != n2:
            raise AlgebraError(f"shape mismatch: {self.shape} @ {other.shape}")
        rows = []
        for i in range(m):
            row = []
            for j in range(r):
                acc = self.algebra.zero()
                for k in range(n):
                    acc = acc + self.entries[i][k] * other.entries[k][j]
                row.append(acc)
            rows.append(tuple(row))
        return ElementMatrix(self.algebra, tuple(rows))

    def __sub__(self, other: "ElementMatrix") -> "ElementMatrix":
        if other.shape != self.shape or other.algebra != self.algebra:
            raise AlgebraError("matrix shapes or algebras do not match")
        return ElementMatrix(self.algebra, tuple(
            tuple(a - b for a, b in zip(ra, rb)) for ra, rb in zip(self.entries, other.entries)
        ))

    def adjoint(self) -> "ElementMatrix":
        m, n = self.shape
        return ElementMatrix(self.algebra, tuple(
            tuple(self.entries[i][j].adjoint() for i in range(m)) for j in range(n)
        ))

    def assemble_block(self, k: int) -> np.ndarray:
        """Dense complex matrix of all block-``k`` components."""
        m, n = self.shape
        s = self.algebra.block_sizes[k]
        out = np.zeros((m * s, n * s), dtype=complex)
        for i in range(m):
            for j in range(n):
                out[i * s : (i + 1) * s, j * s : (j + 1) * s] = self.entries[i][j].blocks[k]
        return out

    def norm(self) -> float:
        """Norm in the matrix algebra over the coefficients (max over blocks)."""
        return max(nla.spectral_norm(self.assemble_block(k)) for k in range(self.algebra.num_blocks))
