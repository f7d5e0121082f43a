import numpy as np
import pytest

import cstardyn as cd
from cstardyn import generators as gen


def scalar_problem(z: np.ndarray) -> cd.IntertwinerMatrix:
    """Matrix over the scalars; the unique representation intertwines everything."""
    algebra = cd.BlockAlgebra((1,))
    ident = cd.StarIsomorphism.identity(algebra)
    m, n = z.shape
    rows = tuple(tuple(algebra.element([[[z[i, j]]]]) for j in range(n)) for i in range(m))
    mat = cd.ElementMatrix(algebra, rows)
    return cd.from_element_matrix(mat, [ident] * m, [ident] * n)


def column_pivoted_lu_oracle(z: np.ndarray):
    """Plain complex elimination choosing the largest entry in the working row."""
    z = np.array(z, dtype=complex)
    n = z.shape[0]
    perm = list(range(n))
    for r in range(n):
        j = r + int(np.argmax(np.abs(z[r, r:])))
        z[:, [r, j]] = z[:, [j, r]]
        perm[r], perm[j] = perm[j], perm[r]
        for h in range(r + 1, n):
            z[h] -= (z[h, r] / z[r, r]) * z[r]
    return np.diagonal(z).copy(), tuple(perm)


def test_column_permute_identity_and_swap():
    rng = gen.make_rng(61)
    matrix = gen.random_intertwiner_problem(rng, 2, 1, 2)
    same = cd.column_permute(matrix, (0, 1))
    assert np.allclose(same.entries, matrix.entries)
    swapped = cd.column_permute(matrix, (1, 0))
    assert np.allclose(swapped.entries[0, 0], matrix.entries[0, 1])
    assert np.allclose(swapped.entries[0, 1], matrix.entries[0, 0])
    assert swapped.col_reps == (matrix.col_reps[1], matrix.col_reps[0])
    with pytest.raises(cd.AlgebraError):
        cd.column_permute(matrix, (0, 0))


def test_column_permute_preserves_residual():
    rng = gen.make_rng(67)
    matrix = gen.random_intertwiner_problem(rng, 3, 3, 3)
    permuted = cd.column_permute(matrix, (2, 0, 1))
    assert cd.verify_intertwining(permuted) <= cd.verify_intertwining(matrix) + 1e-12


def test_row_eliminate_scalar_example():
    matrix = scalar_problem(np.array([[2.0], [3.0]]))
    out, op = cd.row_eliminate(matrix, 1, 0)
    assert abs(out.entries[1, 0, 0, 0]) == 0.0
    assert op.multiplier[0, 0] == pytest.approx(-1.5)


def test_row_eliminate_zero_entry_is_noop():
    matrix = scalar_problem(np.array([[2.0, 1.0], [0.0, 1.0]]))
    out, op = cd.row_eliminate(matrix, 1, 0)
    assert np.allclose(out.entries, matrix.entries)
    assert np.allclose(op.multiplier, 0.0)


def test_row_eliminate_requires_invertible_pivot():
    matrix = scalar_problem(np.array([[0.0, 1.0], [1.0, 1.0]]))
    with pytest.raises(cd.NonInvertiblePivotError):
        cd.row_eliminate(matrix, 1, 0)


def test_row_eliminate_keeps_intertwining():
    rng = gen.make_rng(71)
    for _ in range(10):
        matrix = gen.random_intertwiner_problem(rng, 2, 3, 3)
        before = cd.verify_intertwining(matrix)
        out, _ = cd.row_eliminate(matrix, 2, 0)
        after = cd.verify_intertwining(out)
        scale = out.max_entry_norm
        assert after <= before + 1e-11 * max(scale, 1.0)
        assert np.linalg.norm(out.entries[2, 0], 2) <= 1e-10 * max(scale, 1.0)


def test_gaussian_eliminate_scalar_matches_lu_oracle():
    rng = gen.make_rng(73)
    for _ in range(10):
        z = gen.ginibre(rng, 4)
        matrix = scalar_problem(z)
        cert = cd.gaussian_eliminate(matrix)
        assert isinstance(cert, cd.EliminationCertificate)
        diag_oracle, perm_oracle = column_pivoted_lu_oracle(z)
        assert cert.col_perm == perm_oracle
        mine = np.array([d[0, 0] for d in cert.diagonal])
        assert np.allclose(mine, diag_oracle, atol=1e-9 * max(1.0, abs(diag_oracle).max()))


def test_gaussian_eliminate_identity_over_blocks():
    algebra = cd.BlockAlgebra((2,))
    ident = cd.StarIsomorphism.identity(algebra)
    mat = cd.ElementMatrix.identity(algebra, 3)
    matrix = cd.from_element_matrix(mat, [ident] * 3, [ident] * 3)
    cert = cd.gaussian_eliminate(matrix)
    assert isinstance(cert, cd.EliminationCertificate)
    assert cert.col_perm == (0, 1, 2)
    assert len(cert.row_ops) == 0
    for d in cert.diagonal:
        assert np.allclose(d, np.eye(2))


def test_gaussian_eliminate_tall_instance_contradicts():
    rng = gen.make_rng(79)
    matrix = gen.random_intertwiner_problem(rng, 2, 3, 2)
    result = cd.gaussian_eliminate(matrix)
    assert isinstance(result, cd.DimensionContradiction)
    assert result.zero_row_index == 3
    # the flagged row is numerically zero in every column
    row = result.matrix.entries[result.zero_row_index - 1]
    scale = max(result.matrix.max_entry_norm, 1.0)
    assert max(np.linalg.norm(c, 2) for c in row) <= 1e-8 * scale


def test_certificate_replay_and_verification():
    rng = gen.make_rng(83)
    for d in (1, 2, 3):
        matrix = gen.random_intertwiner_problem(rng, d, 3, 3)
        cert = cd.gaussian_eliminate(matrix)
        assert isinstance(cert, cd.EliminationCertificate)
        report = cd.verify_elimination_certificate(matrix, cert)
        assert report["ok"], report
        replayed = cd.replay_elimination(matrix, cert)
        for i in range(3):
            assert np.linalg.norm(replayed.entries[i, i] - cert.diagonal[i]) <= 1e-9


def test_certificate_rejects_wrong_input():
    rng = gen.make_rng(89)
    matrix = gen.random_intertwiner_problem(rng, 2, 2, 2)
    other = gen.random_intertwiner_problem(rng, 2, 2, 2)
    cert = cd.gaussian_eliminate(matrix)
    report = cd.verify_elimination_certificate(other, cert)
    assert not report["ok"]


def test_step_residuals_stay_small():
    rng = gen.make_rng(97)
    matrix = gen.random_intertwiner_problem(rng, 2, 4, 4)
    cert = cd.gaussian_eliminate(matrix)
    scale = matrix.max_entry_norm
    for r in cert.step_residuals:
        assert r <= 1e-10 * max(scale, 1.0)


def test_right_invertible_identity():
    algebra = cd.BlockAlgebra((2, 1))
    eye = cd.ElementMatrix.identity(algebra, 3)
    ok, witness = cd.right_invertible_test(eye)
    assert ok
    assert (witness - eye).norm() <= 1e-12


def test_right_invertible_scalar_row():
    algebra = cd.BlockAlgebra((1,))
    one, zero = algebra.identity(), algebra.zero()
    row = cd.ElementMatrix(algebra, ((one, zero),))
    ok, witness = cd.right_invertible_test(row)
    assert ok
    assert witness.shape == (2, 1)
    assert witness.entry(0, 0).distance(one) <= 1e-12
    assert witness.entry(1, 0).norm() <= 1e-12


def test_right_invertible_random_wide_with_witness():
    rng = gen.make_rng(101)
    algebra = cd.BlockAlgebra((2, 1))
    for _ in range(10):
        rows = tuple(
            tuple(gen.random_element(rng, algebra) for _ in range(3)) for _ in range(2)
        )
        mat = cd.ElementMatrix(algebra, rows)
        ok, witness = cd.right_invertible_test(mat)
        assert ok
        defect = (mat @ witness - cd.ElementMatrix.identity(algebra, 2)).norm()
        assert defect <= 1e-8


def test_tall_matrices_never_right_invertible():
    rng = gen.make_rng(103)
    for _ in range(100):
        n = int(rng.integers(1, 4))
        m = n + 1
        d = int(rng.integers(1, 4))
        mat, _, _ = gen.random_elimination_problem(rng, d, m, n)
        ok, witness = cd.right_invertible_test(mat)
        assert not ok and witness is None


def test_two_sided_inverse_identity_and_unipotent():
    algebra = cd.BlockAlgebra((1,))
    eye = cd.ElementMatrix.identity(algebra, 2)
    inv = cd.two_sided_inverse(eye)
    assert (inv - eye).norm() <= 1e-12

    one, zero = algebra.identity(), algebra.zero()
    mat = cd.ElementMatrix(algebra, ((one, one), (zero, one)))
    inv = cd.two_sided_inverse(mat)
    assert inv.entry(0, 1).distance(-1.0 * one) <= 1e-12
    assert inv.entry(0, 0).distance(one) <= 1e-12


def test_two_sided_inverse_random_against_dense_blocks():
    rng = gen.make_rng(107)
    algebra = cd.BlockAlgebra((2, 2))
    mat = gen.random_invertible_element_matrix(rng, algebra, 3)
    inv = cd.two_sided_inverse(mat)
    eye = cd.ElementMatrix.identity(algebra, 3)
    assert (mat @ inv - eye).norm() <= 1e-8
    assert (inv @ mat - eye).norm() <= 1e-8
    for k in range(algebra.num_blocks):
        oracle = np.linalg.inv(mat.assemble_block(k))
        assert np.linalg.norm(inv.assemble_block(k) - oracle) <= 1e-8


def test_two_sided_inverse_requires_square():
    algebra = cd.BlockAlgebra((1,))
    one = algebra.identity()
    row = cd.ElementMatrix(algebra, ((one, one),))
    with pytest.raises(cd.NotSquareError):
        cd.two_sided_inverse(row)


def test_two_sided_inverse_rejects_singular():
    algebra = cd.BlockAlgebra((1,))
    zero = algebra.zero()
    mat = cd.ElementMatrix(algebra, ((zero, zero), (zero, zero)))
    with pytest.raises(cd.NotRightInvertibleError):
        cd.two_sided_inverse(mat)


def test_right_invertible_square_implies_two_sided():
    rng = gen.make_rng(109)
    for _ in range(100):
        n = int(rng.integers(1, 4))
        sizes = tuple(int(s) for s in rng.integers(1, 3, size=rng.integers(1, 3)))
        algebra = cd.BlockAlgebra(sizes)
        mat = gen.random_invertible_element_matrix(rng, algebra, n)
        ok, _ = cd.right_invertible_test(mat)
        assert ok
        inv = cd.two_sided_inverse(mat)
        eye = cd.ElementMatrix.identity(algebra, n)
        assert (mat @ inv - eye).norm() <= 1e-8
        assert (inv @ mat - eye).norm() <= 1e-8
