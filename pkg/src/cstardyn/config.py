"""Shared numerical tolerances.

All modules agree on a single hierarchy: structural tolerances ``hom`` and
``unit`` (relative to operand norms) for homomorphism and unitarity checks,
and one relative zero threshold ``zero`` used in every rank decision and in
the zero-versus-invertible dichotomy.
"""
from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    hom: float = 1e-10
    unit: float = 1e-10
    zero: float = 1e-8
    # entries with norm in (zero, borderline_factor * zero) * scale are
    # refused by the dichotomy instead of being guessed at
    borderline_factor: float = 10.0

    def with_zero(self, zero: float) -> "Tolerances":
        return replace(self, zero=float(zero))


DEFAULT = Tolerances()
