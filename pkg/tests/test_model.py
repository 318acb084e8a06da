import numpy as np
import pytest

from faultsbl.errors import BlockIndexError, DimensionError
from faultsbl.model import (
    BlockLayout,
    BlockSparseProblem,
    PriorKnowledgeSet,
    apply_design,
    apply_design_transpose,
    design_gram,
    extract_block,
    mutual_coherence,
    row_means,
    stack_measurements,
    unstack,
)


def rel_err(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


def test_layout_slices_are_one_based_and_contiguous():
    layout = BlockLayout(num_blocks=4, block_len=3)
    assert layout.size == 12
    assert layout.block_slice(1) == slice(0, 3)
    assert layout.block_slice(4) == slice(9, 12)


@pytest.mark.parametrize("i", [0, 5, -1])
def test_layout_rejects_out_of_range_block(i):
    with pytest.raises(BlockIndexError):
        BlockLayout(4, 3).block_slice(i)


def test_layout_rejects_empty_sizes():
    with pytest.raises(DimensionError):
        BlockLayout(0, 3)


def test_apply_design_matches_dense_kronecker(rng):
    for _ in range(50):
        m, n, l = rng.integers(1, 11), rng.integers(1, 21), rng.integers(1, 6)
        layout = BlockLayout(int(n), int(l))
        phi = rng.standard_normal((m, n))
        dense = np.kron(phi, np.eye(l))
        x = rng.standard_normal(n * l)
        r = rng.standard_normal(m * l)

        assert rel_err(apply_design(phi, x, layout), dense @ x) <= 1e-12
        assert rel_err(apply_design_transpose(phi, r, layout), dense.T @ r) <= 1e-12


def test_design_operators_are_adjoint(rng):
    layout = BlockLayout(12, 3)
    phi = rng.standard_normal((5, 12))
    x = rng.standard_normal(layout.size)
    r = rng.standard_normal(5 * 3)
    lhs = apply_design(phi, x, layout) @ r
    rhs = x @ apply_design_transpose(phi, r, layout)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_design_gram_is_kronecker_of_phi_gram(rng):
    layout = BlockLayout(6, 2)
    phi = rng.standard_normal((4, 6))
    dense = np.kron(phi, np.eye(2))
    np.testing.assert_allclose(design_gram(phi, layout), dense.T @ dense, atol=1e-12)


def test_apply_design_rejects_wrong_lengths(rng):
    layout = BlockLayout(4, 2)
    phi = rng.standard_normal((3, 4))
    with pytest.raises(DimensionError):
        apply_design(phi, np.zeros(7), layout)
    with pytest.raises(DimensionError):
        apply_design_transpose(phi, np.zeros(7), layout)
    with pytest.raises(DimensionError):
        apply_design(rng.standard_normal((3, 5)), np.zeros(8), layout)


def test_stack_places_sensor_rows_in_blocks():
    Y = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
    y = stack_measurements(Y)
    np.testing.assert_array_equal(y, [1, 2, 3, 4, 5, 6])
    np.testing.assert_array_equal(unstack(y, BlockLayout(2, 3)), Y)


def test_stack_checks_layout():
    with pytest.raises(DimensionError):
        stack_measurements(np.zeros((2, 3)), BlockLayout(3, 2))


def test_extract_block_and_row_means():
    layout = BlockLayout(3, 2)
    v = np.array([1.0, 3.0, -2.0, -4.0, 0.0, 0.0])
    np.testing.assert_array_equal(extract_block(v, 2, layout), [-2.0, -4.0])
    np.testing.assert_array_equal(row_means(v, layout), [2.0, -3.0, 0.0])


def test_row_means_of_a_stacked_matrix_are_its_row_means(rng):
    X = rng.standard_normal((7, 4))
    np.testing.assert_allclose(row_means(stack_measurements(X), BlockLayout(7, 4)), X.mean(axis=1))


def test_mutual_coherence():
    assert mutual_coherence(np.eye(3)) == 0.0
    phi = np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 1.0]])
    assert mutual_coherence(phi) == pytest.approx(np.sqrt(0.5), rel=1e-12)
    # same pattern up to sign
    assert mutual_coherence(np.array([[1.0, -2.0], [2.0, -4.0]])) == pytest.approx(1.0)
    assert mutual_coherence(np.ones((3, 1))) == 0.0
    with pytest.raises(DimensionError):
        mutual_coherence(np.array([[1.0, 0.0], [1.0, 0.0]]))


def test_problem_from_measurements(rng):
    phi = rng.standard_normal((4, 6))
    Y = rng.standard_normal((4, 3))
    problem = BlockSparseProblem.from_measurements(phi, Y)
    assert (problem.num_sensors, problem.num_errors, problem.num_samples) == (4, 6, 3)
    assert problem.layout == BlockLayout(6, 3)
    assert problem.measurement_layout == BlockLayout(4, 3)
    np.testing.assert_array_equal(problem.y_stacked, Y.reshape(-1))
    dense = np.kron(phi, np.eye(3))
    np.testing.assert_allclose(problem.gram, dense.T @ dense, atol=1e-12)
    np.testing.assert_allclose(problem.dty, dense.T @ problem.y_stacked, atol=1e-12)


def test_problem_arrays_are_read_only(rng):
    problem = BlockSparseProblem.from_measurements(rng.standard_normal((2, 3)), np.ones((2, 2)))
    with pytest.raises(ValueError):
        problem.y_stacked[0] = 1.0
    with pytest.raises(ValueError):
        problem.phi[0, 0] = 1.0


def test_problem_validation(rng):
    with pytest.raises(DimensionError):
        BlockSparseProblem(rng.standard_normal((3, 4)), np.zeros(6), 3, 5, 2)
    with pytest.raises(DimensionError):
        BlockSparseProblem(rng.standard_normal((3, 4)), np.zeros(5), 3, 4, 2)
    with pytest.raises(DimensionError, match=r"\[2\]"):
        phi = np.ones((2, 3))
        phi[:, 1] = 0
        BlockSparseProblem(phi, np.zeros(2), 2, 3, 1)
    with pytest.raises(DimensionError):
        BlockSparseProblem.from_measurements(np.ones((3, 2)), np.ones((2, 2)))


def test_prior_knowledge_set():
    prior = PriorKnowledgeSet.of([4, 1], num_blocks=5)
    assert len(prior) == 2
    assert list(prior) == [1, 4]
    assert 4 in prior and 2 not in prior
    np.testing.assert_array_equal(prior.mask(5), [True, False, False, True, False])
    assert len(PriorKnowledgeSet()) == 0
    assert not PriorKnowledgeSet().mask(3).any()


def test_prior_knowledge_set_validation():
    with pytest.raises(BlockIndexError):
        PriorKnowledgeSet.of([1, 1])
    with pytest.raises(BlockIndexError):
        PriorKnowledgeSet.of([0, 2], num_blocks=3)
    with pytest.raises(BlockIndexError):
        PriorKnowledgeSet.of([4]).mask(3)
