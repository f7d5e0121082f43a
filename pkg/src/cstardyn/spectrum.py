"""Induced dynamics on the finite discrete spectrum and piecewise conjugacy.

The spectrum of a finite direct sum of matrix blocks is one labeled point
per block; an automorphism induces the permutation of points given by its
block permutation.  Piecewise conjugacy on a discrete space degenerates to
one permutation of the map indices per point, which makes the decision a
finite search: label-preserving point bijections outside, one bipartite
matching per point inside.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

from . import matching
from .algebra import AlgebraError, MultivariableSystem, StarIsomorphism
from .deciders import SearchBudgetExceededError


@dataclass(frozen=True)
class SpectrumDynamicalSystem:
    """Finitely many labeled points with a tuple of label-preserving permutations."""

    sizes: tuple[int, ...]
    maps: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        maps = tuple(tuple(int(x) for x in p) for p in self.maps)
        if not sizes:
            raise AlgebraError("a spectrum system needs at least one point")
        if not maps:
            raise AlgebraError("a spectrum system needs at least one map")
        m = len(sizes)
        for i, p in enumerate(maps):
            if sorted(p) != list(range(m)):
                raise AlgebraError(f"maps[{i}] = {p} is not a permutation of {m} points")
            if any(sizes[p[x]] != sizes[x] for x in range(m)):
                raise AlgebraError(f"maps[{i}] does not preserve the point labels")
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "maps", maps)

    @property
    def num_points(self) -> int:
        return len(self.sizes)

    @property
    def arity(self) -> int:
        return len(self.maps)

    @classmethod
    def from_system(cls, system: MultivariableSystem) -> "SpectrumDynamicalSystem":
        return cls(
            system.algebra.block_sizes,
            tuple(induced_spectrum_map(a) for a in system.maps),
        )


def induced_spectrum_map(alpha: StarIsomorphism) -> tuple[int, ...]:
    """Permutation of spectrum points induced by an automorphism.

    With the action convention ``alpha(b)_k = u_k b_{perm[k]} u_k*`` the
    canonical irreducible at point k pulled back along alpha is unitarily
    equivalent to the one at ``perm[k]``.
    """
    if not alpha.is_automorphism:
        raise AlgebraError("spectrum maps are induced by automorphisms only")
    return alpha.perm


@dataclass(frozen=True)
class PiecewiseCertificate:
    """A point bijection plus one index permutation per target point.

    Validity means ``target.maps[i][x] == phi[source.maps[g_x[i]][phi_inv[x]]]``
    for every target point x and every index i.
    """

    point_map: tuple[int, ...]
    assignments: tuple[tuple[int, ...], ...]

    def inverse(self) -> "PiecewiseCertificate":
        phi = self.point_map
        phi_inv = [0] * len(phi)
        for a, b in enumerate(phi):
            phi_inv[b] = a
        assignments = []
        for y in range(len(phi)):
            g = self.assignments[phi[y]]
            g_inv = [0] * len(g)
            for i, j in enumerate(g):
                g_inv[j] = i
            assignments.append(tuple(g_inv))
        return PiecewiseCertificate(tuple(phi_inv), tuple(assignments))

    def compose(self, second: "PiecewiseCertificate") -> "PiecewiseCertificate":
        """Certificate for S -> U given self: S -> T and second: T -> U."""
        phi1, phi2 = self.point_map, second.point_map
        phi = tuple(phi2[p] for p in phi1)
        phi2_inv = [0] * len(phi2)
        for a, b in enumerate(phi2):
            phi2_inv[b] = a
        assignments = []
        for x in range(len(phi)):
            g2 = second.assignments[x]
            g1 = self.assignments[phi2_inv[x]]
            assignments.append(tuple(g1[j] for j in g2))
        return PiecewiseCertificate(phi, tuple(assignments))


@dataclass(frozen=True)
class NotPiecewiseConjugate:
    reason: str


def decide_piecewise_conjugacy(
    source: SpectrumDynamicalSystem,
    target: SpectrumDynamicalSystem,
    max_points: int = 8,
) -> PiecewiseCertificate | NotPiecewiseConjugate:
    """Search for a piecewise conjugacy between two discrete systems.

    Point bijections are enumerated in lexicographic order with label
    pruning; the first certificate found wins, so results are reproducible.
    """
    if source.arity != target.arity:
        return NotPiecewiseConjugate(reason="ArityMismatch")
    if sorted(source.sizes) != sorted(target.sizes):
        return NotPiecewiseConjugate(reason="SpectrumSizeMismatch")
    m = source.num_points
    if m != target.num_points:
        return NotPiecewiseConjugate(reason="SpectrumSizeMismatch")
    if m > max_points:
        raise SearchBudgetExceededError(f"{m} points exceeds the bound of {max_points}")
    n = source.arity

    for phi in permutations(range(m)):
        if any(source.sizes[x] != target.sizes[phi[x]] for x in range(m)):
            continue
        phi_inv = [0] * m
        for a, b in enumerate(phi):
            phi_inv[b] = a
        assignments = []
        for x in range(m):
            allowed = [
                [j for j in range(n) if target.maps[i][x] == phi[source.maps[j][phi_inv[x]]]]
                for i in range(n)
            ]
            assignment = matching.perfect_matching(allowed, n)
            if assignment is None:
                break
            assignments.append(assignment)
        else:
            return PiecewiseCertificate(tuple(phi), tuple(assignments))
    return NotPiecewiseConjugate(reason="Exhausted")


def verify_piecewise_certificate(
    cert: PiecewiseCertificate,
    source: SpectrumDynamicalSystem,
    target: SpectrumDynamicalSystem,
) -> bool:
    """Pointwise recheck of the conjugacy equation (pure, no search)."""
    m, n = source.num_points, source.arity
    if target.num_points != m or target.arity != n:
        return False
    phi = cert.point_map
    if sorted(phi) != list(range(m)) or len(cert.assignments) != m:
        return False
    if any(source.sizes[x] != target.sizes[phi[x]] for x in range(m)):
        return False
    phi_inv = [0] * m
    for a, b in enumerate(phi):
        phi_inv[b] = a
    for x in range(m):
        g = cert.assignments[x]
        if sorted(g) != list(range(n)):
            return False
        for i in range(n):
            if target.maps[i][x] != phi[source.maps[g[i]][phi_inv[x]]]:
                return False
    return True
