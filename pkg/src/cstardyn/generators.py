"""Deterministic random instances: algebras, systems, intertwiner problems.

Everything is driven by a seeded numpy generator so repeated runs emit
byte-identical artifacts.  Haar unitaries come from QR of complex Gaussian
matrices with the phase convention fixed by the R diagonal.
"""
from __future__ import annotations

import numpy as np

from .algebra import (
    AlgebraElement,
    BlockAlgebra,
    ElementMatrix,
    MultivariableSystem,
    Representation,
    StarIsomorphism,
)
from .intertwiners import IntertwinerMatrix, from_element_matrix


def make_rng(seed) -> np.random.Generator:
    """Seeded generator; accepts an int or a sequence of ints."""
    return np.random.default_rng(seed)


def ginibre(rng: np.random.Generator, rows: int, cols: int | None = None) -> np.ndarray:
    cols = rows if cols is None else cols
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def haar_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    q, r = np.linalg.qr(ginibre(rng, d))
    phases = np.diagonal(r).copy()
    phases /= np.abs(phases)
    return q * phases


def random_element(rng: np.random.Generator, algebra: BlockAlgebra, scale: float = 1.0) -> AlgebraElement:
    return algebra.element([scale * ginibre(rng, s) for s in algebra.block_sizes])


def random_unitary_element(rng: np.random.Generator, algebra: BlockAlgebra) -> AlgebraElement:
    return algebra.element([haar_unitary(rng, s) for s in algebra.block_sizes])


def random_size_preserving_permutation(rng: np.random.Generator, sizes: tuple[int, ...]) -> tuple[int, ...]:
    """Uniform permutation of the blocks among those preserving sizes."""
    perm = [0] * len(sizes)
    for size in sorted(set(sizes)):
        idx = [k for k, s in enumerate(sizes) if s == size]
        shuffled = list(idx)
        rng.shuffle(shuffled)
        for a, b in zip(idx, shuffled):
            perm[a] = b
    return tuple(perm)


def random_automorphism(rng: np.random.Generator, algebra: BlockAlgebra) -> StarIsomorphism:
    perm = random_size_preserving_permutation(rng, algebra.block_sizes)
    unis = tuple(haar_unitary(rng, algebra.block_sizes[k]) for k in range(algebra.num_blocks))
    return StarIsomorphism(algebra, algebra, perm, unis)


def random_system(rng: np.random.Generator, algebra: BlockAlgebra, arity: int) -> MultivariableSystem:
    return MultivariableSystem(algebra, tuple(random_automorphism(rng, algebra) for _ in range(arity)))


def inner_twist(rng: np.random.Generator, system: MultivariableSystem, permute: bool = True) -> MultivariableSystem:
    """A system outer conjugate to the input by construction.

    New map i is conjugation by a fresh unitary composed with map pi(i) of
    the original system, for a random index permutation pi.
    """
    n = system.arity
    pi = list(range(n))
    if permute:
        rng.shuffle(pi)
    maps = []
    for i in range(n):
        w = random_unitary_element(rng, system.algebra)
        twist = StarIsomorphism.inner(system.algebra, tuple(w.blocks))
        maps.append(twist.compose(system.maps[pi[i]]))
    return MultivariableSystem(system.algebra, tuple(maps))


def random_commutative_system(rng: np.random.Generator, points: int, arity: int) -> MultivariableSystem:
    algebra = BlockAlgebra((1,) * points)
    maps = []
    for _ in range(arity):
        perm = tuple(int(p) for p in rng.permutation(points))
        phases = tuple(np.array([[np.exp(2j * np.pi * rng.random())]]) for _ in range(points))
        maps.append(StarIsomorphism(algebra, algebra, perm, phases))
    return MultivariableSystem(algebra, tuple(maps))


def _well_conditioned(rng: np.random.Generator, rows: int, cols: int, max_cond: float) -> np.ndarray:
    while True:
        z = ginibre(rng, rows, cols)
        s = np.linalg.svd(z, compute_uv=False)
        if s[-1] > 0 and s[0] / s[-1] <= max_cond:
            return z


def random_elimination_problem(
    rng: np.random.Generator,
    d: int,
    m: int,
    n: int,
    max_cond: float = 1e4,
) -> tuple[ElementMatrix, list[StarIsomorphism], list[StarIsomorphism]]:
    """Entries drawn from the intertwiner spaces of unitary conjugations.

    The one-dimensional intertwiner space of pair (i, j) is spanned by
    ``u_i v_j*``, so the entries are those products scaled by a complex
    coefficient matrix; square instances use a well conditioned coefficient
    matrix and are right invertible by construction, strictly tall ones
    cannot be.
    """
    algebra = BlockAlgebra((d,))
    row_maps = [random_automorphism(rng, algebra) for _ in range(m)]
    col_maps = [random_automorphism(rng, algebra) for _ in range(n)]
    coeff = _well_conditioned(rng, m, n, max_cond) if m == n else ginibre(rng, m, n)
    us = [iso.unitaries[0] for iso in row_maps]
    vs = [iso.unitaries[0] for iso in col_maps]
    rows = tuple(
        tuple(algebra.element([coeff[i, j] * (us[i] @ vs[j].conj().T)]) for j in range(n))
        for i in range(m)
    )
    return ElementMatrix(algebra, rows), row_maps, col_maps


def random_intertwiner_problem(
    rng: np.random.Generator,
    d: int,
    m: int,
    n: int,
    max_cond: float = 1e4,
) -> IntertwinerMatrix:
    """Same instances as :func:`random_elimination_problem`, bridged to matrices."""
    mat, row_maps, col_maps = random_elimination_problem(rng, d, m, n, max_cond)
    return from_element_matrix(mat, row_maps, col_maps)


def random_invertible_element_matrix(
    rng: np.random.Generator, algebra: BlockAlgebra, n: int, max_cond: float = 1e4
) -> ElementMatrix:
    """Invertible n by n matrix over the algebra (well conditioned per block)."""
    rows = [[None] * n for _ in range(n)]
    per_block = []
    for size in algebra.block_sizes:
        per_block.append(_well_conditioned(rng, n * size, n * size, max_cond))
    for i in range(n):
        for j in range(n):
            blocks = []
            for k, size in enumerate(algebra.block_sizes):
                blocks.append(per_block[k][i * size : (i + 1) * size, j * size : (j + 1) * size])
            rows[i][j] = algebra.element(blocks)
    return ElementMatrix(algebra, tuple(tuple(r) for r in rows))
