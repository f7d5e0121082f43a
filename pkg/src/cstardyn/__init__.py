"""Isomorphism invariants for multivariable dynamical systems over
finite-dimensional C*-algebras, with verifiable certificates."""

from .algebra import (
    AlgebraElement,
    AlgebraError,
    BlockAlgebra,
    ElementMatrix,
    MultivariableSystem,
    Representation,
    StarIsomorphism,
    apply,
    compose,
    invert_morphism,
    is_inner,
    matrix_units,
    op_norm,
)
from .config import DEFAULT, Tolerances
from .deciders import (
    NotConjugate,
    NotEquivalent,
    NotInvertibleError,
    OuterConjugacyCertificate,
    SearchBudgetExceededError,
    TrivialCenterRequiredError,
    UnitaryEquivalenceCertificate,
    certify_unitary_equivalence,
    conjugated_maps,
    decide_outer_conjugacy,
    decide_unitary_equivalence_commutative,
    outer_to_unitary_equivalence,
    polar_unitary,
    verify_outer_conjugacy,
)
from .elimination import (
    DimensionContradiction,
    EliminationCertificate,
    NonInvertiblePivotError,
    NotRightInvertibleError,
    NotSquareError,
    NumericallyIndeterminateError,
    RowOperation,
    column_permute,
    gaussian_eliminate,
    replay_elimination,
    right_invertible_test,
    row_eliminate,
    two_sided_inverse,
    verify_elimination_certificate,
)
from .fock import (
    AssociatedMatrix,
    FockDimensionError,
    FockRepresentation,
    UnverifiedCertificateError,
    build_fock,
    extract_associated_matrix,
    gauge_expectation,
    generator_coefficient,
    induced_iso_images,
)
from .intertwiners import (
    BORDERLINE,
    INVERTIBLE,
    NOT_INTERTWINER,
    ZERO,
    Classification,
    IntertwinerMatrix,
    classify_intertwiner,
    element_entries,
    from_element_matrix,
    intertwiner_space,
    intertwining_residual,
    verify_intertwining,
)
from .spectrum import (
    NotPiecewiseConjugate,
    PiecewiseCertificate,
    SpectrumDynamicalSystem,
    decide_piecewise_conjugacy,
    induced_spectrum_map,
    verify_piecewise_certificate,
)

__version__ = "0.1.0"
