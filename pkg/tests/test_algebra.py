import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import cstardyn as cd
from cstardyn import generators as gen


def test_block_algebra_invariants():
    A = cd.BlockAlgebra((2, 3, 1))
    assert A.dim == 6
    assert A.coord_dim == 14
    assert not A.center_is_trivial()
    assert cd.BlockAlgebra((4,)).center_is_trivial()
    with pytest.raises(cd.AlgebraError):
        cd.BlockAlgebra(())
    with pytest.raises(cd.AlgebraError):
        cd.BlockAlgebra((2, 0))


def test_op_norm_identity_is_one():
    for sizes in [(1,), (3,), (2, 3), (1, 1, 4)]:
        assert cd.op_norm(cd.BlockAlgebra(sizes).identity()) == pytest.approx(1.0)


def test_op_norm_nilpotent():
    A = cd.BlockAlgebra((2,))
    a = A.element([np.array([[0.0, 2.0], [0.0, 0.0]])])
    assert cd.op_norm(a) == pytest.approx(2.0)


def test_op_norm_matches_full_svd_oracle():
    # oracle: largest singular value of the assembled block-diagonal matrix
    rng = gen.make_rng(11)
    A = cd.BlockAlgebra((2, 3, 1))
    for _ in range(25):
        a = gen.random_element(rng, A)
        oracle = np.linalg.svd(a.assemble(), compute_uv=False)[0]
        assert abs(cd.op_norm(a) - oracle) <= 1e-12


def test_malformed_element_rejected():
    A = cd.BlockAlgebra((2, 1))
    with pytest.raises(cd.AlgebraError):
        A.element([np.eye(2)])
    with pytest.raises(cd.AlgebraError):
        A.element([np.eye(3), np.eye(1)])


def test_adjoint_is_involution():
    rng = gen.make_rng(3)
    A = cd.BlockAlgebra((2, 2))
    a = gen.random_element(rng, A)
    assert a.adjoint().adjoint().distance(a) <= 1e-15


def test_matrix_units_counts():
    assert len(cd.matrix_units(cd.BlockAlgebra((1,)))) == 1
    assert len(cd.matrix_units(cd.BlockAlgebra((2,)))) == 4
    units = cd.matrix_units(cd.BlockAlgebra((2,)))
    names = [tuple(np.argwhere(u.blocks[0]).ravel()) for u in units]
    assert names == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_matrix_units_span():
    # oracle: rank of the stacked coordinate vectors
    A = cd.BlockAlgebra((2, 1))
    units = cd.matrix_units(A)
    assert len(units) == 5
    stacked = np.stack([u.coords() for u in units])
    s = np.linalg.svd(stacked, compute_uv=False)
    assert int((s > 1e-10 * s[0]).sum()) == 5


def test_apply_identity_morphism():
    rng = gen.make_rng(5)
    A = cd.BlockAlgebra((2, 3))
    a = gen.random_element(rng, A)
    assert cd.StarIsomorphism.identity(A).apply(a).distance(a) == 0.0


def test_apply_permutation_conjugation():
    A = cd.BlockAlgebra((2,))
    u = np.array([[0.0, 1.0], [1.0, 0.0]])
    phi = cd.StarIsomorphism.inner(A, (u,))
    e11 = cd.matrix_units(A)[0]
    e22 = cd.matrix_units(A)[3]
    assert phi.apply(e11).distance(e22) <= 1e-15


def test_compose_matches_sequential_application():
    rng = gen.make_rng(7)
    A = cd.BlockAlgebra((2, 2, 1))
    for _ in range(10):
        phi = gen.random_automorphism(rng, A)
        psi = gen.random_automorphism(rng, A)
        a = gen.random_element(rng, A)
        assert phi.compose(psi).apply(a).distance(phi.apply(psi.apply(a))) <= 1e-12


def test_inverse_composes_to_identity_on_units():
    rng = gen.make_rng(9)
    A = cd.BlockAlgebra((3, 2))
    phi = gen.random_automorphism(rng, A)
    inv = cd.invert_morphism(phi)
    for e in cd.matrix_units(A):
        assert inv.apply(phi.apply(e)).distance(e) <= 1e-10
        assert phi.apply(inv.apply(e)).distance(e) <= 1e-10


def test_morphism_preserves_products_and_adjoints():
    rng = gen.make_rng(13)
    A = cd.BlockAlgebra((2, 1, 2))
    phi = gen.random_automorphism(rng, A)
    assert phi.homomorphism_defect() <= 1e-10


def test_non_unitary_morphism_rejected():
    A = cd.BlockAlgebra((2,))
    with pytest.raises(cd.AlgebraError, match="tau_unit"):
        cd.StarIsomorphism.inner(A, (np.array([[1.0, 0.1], [0.0, 1.0]]),))


def test_is_inner_basic_cases():
    rng = gen.make_rng(15)
    M3 = cd.BlockAlgebra((3,))
    assert cd.is_inner(cd.StarIsomorphism.inner(M3, (gen.haar_unitary(rng, 3),)))
    A = cd.BlockAlgebra((2, 2))
    swap = cd.StarIsomorphism(A, A, (1, 0), (np.eye(2), np.eye(2)))
    assert not cd.is_inner(swap)


def test_is_inner_against_intertwiner_oracle_single_block():
    # over one full matrix block every automorphism is inner and the
    # intertwiner space of (iota, iota . alpha) always holds an invertible
    rng = gen.make_rng(17)
    A = cd.BlockAlgebra((3,))
    iota = cd.Representation.assembled(A)
    for _ in range(5):
        alpha = gen.random_automorphism(rng, A)
        basis = cd.intertwiner_space(iota, iota.compose(alpha))
        has_invertible = any(
            np.linalg.matrix_rank(b, tol=1e-8) == A.dim for b in basis
        )
        assert cd.is_inner(alpha) == has_invertible == True  # noqa: E712


def test_is_inner_against_blockwise_intertwiner_oracle():
    # inner automorphisms are exactly those fixing every canonical
    # irreducible up to equivalence, i.e. every (rho_k, rho_k . alpha)
    # intertwiner space is nonzero
    rng = gen.make_rng(19)
    A = cd.BlockAlgebra((2, 2, 1))
    for _ in range(10):
        alpha = gen.random_automorphism(rng, A)
        oracle = all(
            len(cd.intertwiner_space(
                cd.Representation.block_projection(A, k),
                cd.Representation.block_projection(A, k).compose(alpha),
            )) > 0
            for k in range(A.num_blocks)
        )
        assert cd.is_inner(alpha) == oracle


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_cstar_identity_and_submultiplicativity(seed):
    rng = gen.make_rng(seed)
    A = cd.BlockAlgebra((2, 3))
    a = gen.random_element(rng, A)
    b = gen.random_element(rng, A)
    na, nb = cd.op_norm(a), cd.op_norm(b)
    assert abs(cd.op_norm(a.adjoint() * a) - na**2) <= 1e-10 * max(1.0, na**2)
    assert cd.op_norm(a * b) <= na * nb + 1e-10 * max(1.0, na * nb)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_spectrum_permutation_composes_contravariantly(seed):
    rng = gen.make_rng(seed)
    A = cd.BlockAlgebra((2, 2, 2))
    phi = gen.random_automorphism(rng, A)
    psi = gen.random_automorphism(rng, A)
    comp = phi.compose(psi)
    assert comp.perm == tuple(psi.perm[p] for p in phi.perm)


def test_element_matrix_matmul_matches_assembled_blocks():
    rng = gen.make_rng(21)
    A = cd.BlockAlgebra((2, 1))
    left = gen.random_invertible_element_matrix(rng, A, 3)
    right = gen.random_invertible_element_matrix(rng, A, 3)
    product = left @ right
    for k in range(A.num_blocks):
        oracle = left.assemble_block(k) @ right.assemble_block(k)
        assert np.linalg.norm(product.assemble_block(k) - oracle) <= 1e-10


def test_element_matrix_identity_and_norm():
    A = cd.BlockAlgebra((2, 3))
    eye = cd.ElementMatrix.identity(A, 4)
    assert eye.shape == (4, 4)
    assert eye.norm() == pytest.approx(1.0)


def test_representation_block_projection_and_assembled():
    A = cd.BlockAlgebra((2, 1))
    rho0 = cd.Representation.block_projection(A, 0)
    iota = cd.Representation.assembled(A)
    a = A.element([np.array([[1.0, 2.0], [3.0, 4.0]]), np.array([[5.0]])])
    assert np.allclose(rho0.apply(a), a.blocks[0])
    assert np.allclose(iota.apply(a), a.assemble())
    assert rho0.homomorphism_defect() <= 1e-12
    assert rho0.is_surjective()
    assert not iota.is_surjective()  # image is the block-diagonal subalgebra


def test_from_assembled_rejects_off_block_mass():
    A = cd.BlockAlgebra((1, 1))
    with pytest.raises(cd.AlgebraError, match="block diagonal"):
        A.from_assembled(np.array([[0.0, 1.0], [1.0, 0.0]]))
