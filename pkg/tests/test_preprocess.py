"""Normalization and PCA tests, including the covariance-eigendecomposition oracle."""

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from featknn import (
    FeatureSet,
    NormalizationStats,
    apply_minmax,
    apply_pca,
    fit_minmax,
    fit_pca,
)
from featknn.errors import (
    DegenerateData,
    DimensionError,
    InsufficientData,
    InvalidData,
    ParameterError,
)


def oracle_pca(matrix, threshold):
    """Brute-force reference: explicit covariance matrix + symmetric eigensolve.

    Independent of the SVD route under test; mirrors only the documented
    selection rule (smallest m whose cumulative variance ratio reaches the
    threshold) and the positive-anchor sign convention.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    n, d = matrix.shape
    mean = matrix.mean(axis=0)
    centered = matrix - mean
    cov = (centered.T @ centered) / (n - 1)
    eigvals, eigvecs = scipy.linalg.eigh(cov)
    order = np.argsort(eigvals, kind="stable")[::-1]
    eigvals = np.clip(eigvals[order], 0.0, None)
    axes = eigvecs[:, order].T
    ratios = eigvals / eigvals.sum()
    cumulative = np.cumsum(ratios)
    rank_cap = min(n - 1, d)
    m = rank_cap
    for i in range(rank_cap):
        if cumulative[i] >= threshold:
            m = i + 1
            break
    axes = axes[:m].copy()
    for i in range(m):
        anchor = int(np.argmax(np.abs(axes[i])))
        if axes[i, anchor] < 0.0:
            axes[i] = -axes[i]
    return mean, axes, ratios[:m]


class TestMinMax:
    def test_column_min_max(self):
        matrix = np.array([[2.0, 5.0], [4.0, 5.0], [6.0, 5.0]])
        stats = fit_minmax(matrix)
        np.testing.assert_array_equal(stats.min_vals, [2.0, 5.0])
        np.testing.assert_array_equal(stats.max_vals, [6.0, 5.0])

    def test_single_vector_database(self):
        stats = fit_minmax(np.array([[1.5, -2.0, 0.0]]))
        np.testing.assert_array_equal(stats.min_vals, stats.max_vals)

    def test_accepts_feature_set(self):
        fset = FeatureSet(np.array([[1, 2], [3, 4]], np.float32), [0, 0], ("a",))
        stats = fit_minmax(fset)
        np.testing.assert_array_equal(stats.min_vals, [1.0, 2.0])

    def test_non_finite_rejected(self):
        with pytest.raises(InvalidData):
            fit_minmax(np.array([[np.inf, 1.0]]))

    def test_midpoint_maps_to_half(self):
        stats = NormalizationStats(min_vals=[2.0], max_vals=[6.0])
        assert apply_minmax(stats, [4.0])[0] == 0.5

    def test_no_clamping_outside_database_range(self):
        stats = NormalizationStats(min_vals=[2.0], max_vals=[6.0])
        assert apply_minmax(stats, [8.0])[0] == 1.5
        assert apply_minmax(stats, [0.0])[0] == -0.5

    def test_degenerate_column_maps_to_zero(self):
        stats = NormalizationStats(min_vals=[5.0, 0.0], max_vals=[5.0, 1.0])
        out = apply_minmax(stats, [123.0, 0.5])
        assert out[0] == 0.0
        assert out[1] == 0.5

    def test_dimension_mismatch(self):
        stats = NormalizationStats(min_vals=[0.0, 0.0], max_vals=[1.0, 1.0])
        with pytest.raises(DimensionError):
            apply_minmax(stats, [1.0, 2.0, 3.0])

    @given(st.integers(2, 20), st.integers(1, 8), st.integers(0, 2**32 - 1))
    @settings(max_examples=40)
    def test_database_maps_into_unit_cube(self, n, dim, seed):
        rng = np.random.default_rng(seed)
        matrix = rng.normal(size=(n, dim)) * 100.0
        stats = fit_minmax(matrix)
        normalized = apply_minmax(stats, matrix)
        assert normalized.min() >= 0.0
        assert normalized.max() <= 1.0


class TestFitPca:
    def test_collinear_points_single_axis(self):
        matrix = np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
        transform = fit_pca(matrix, 0.99)
        assert transform.n_components == 1
        np.testing.assert_allclose(
            np.abs(transform.components[0]), [1 / np.sqrt(2)] * 2, atol=1e-12
        )
        np.testing.assert_allclose(transform.explained_variance_ratio, [1.0], atol=1e-12)

    def test_symmetric_square_needs_both_axes(self):
        matrix = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
        transform = fit_pca(matrix, 0.99)
        assert transform.n_components == 2
        np.testing.assert_allclose(transform.explained_variance_ratio, [0.5, 0.5], atol=1e-12)

    def test_matches_oracle_on_random_matrix(self):
        rng = np.random.default_rng(42)
        matrix = rng.normal(size=(20, 8))
        transform = fit_pca(matrix, 0.99)
        mean, axes, ratios = oracle_pca(matrix, 0.99)
        np.testing.assert_allclose(transform.mean, mean, atol=1e-12)
        assert transform.components.shape == axes.shape
        np.testing.assert_allclose(transform.components, axes, atol=1e-6)
        np.testing.assert_allclose(transform.explained_variance_ratio, ratios, atol=1e-6)

    def test_projected_database_variance_equals_eigenvalues(self):
        rng = np.random.default_rng(1)
        matrix = rng.normal(size=(20, 8))
        transform = fit_pca(matrix, 1.0)
        projected = apply_pca(transform, matrix)
        per_axis_var = projected.var(axis=0, ddof=1)
        total_var = np.trace(np.cov(matrix, rowvar=False, ddof=1))
        eigenvalues = transform.explained_variance_ratio * total_var
        np.testing.assert_allclose(per_axis_var, eigenvalues, rtol=1e-5)

    def test_minimality_of_component_count(self):
        rng = np.random.default_rng(2)
        matrix = rng.normal(size=(30, 10)) @ np.diag(np.linspace(3.0, 0.2, 10))
        for threshold in (0.5, 0.9, 0.99):
            transform = fit_pca(matrix, threshold)
            cumulative = np.cumsum(transform.explained_variance_ratio)
            assert cumulative[-1] >= threshold
            if transform.n_components > 1:
                assert cumulative[-2] < threshold

    def test_sign_determinism(self):
        rng = np.random.default_rng(3)
        matrix = rng.normal(size=(15, 6))
        first = fit_pca(matrix, 0.99)
        second = fit_pca(matrix, 0.99)
        assert first == second
        anchors = np.abs(first.components).argmax(axis=1)
        picked = first.components[np.arange(first.n_components), anchors]
        assert np.all(picked > 0.0)

    def test_orthonormal_components(self):
        rng = np.random.default_rng(4)
        matrix = rng.normal(size=(40, 12))
        transform = fit_pca(matrix, 0.99)
        gram = transform.components @ transform.components.T
        np.testing.assert_allclose(gram, np.eye(transform.n_components), atol=1e-5)

    def test_too_few_rows(self):
        with pytest.raises(InsufficientData):
            fit_pca(np.ones((1, 4)), 0.99)

    def test_identical_rows_degenerate(self):
        with pytest.raises(DegenerateData):
            fit_pca(np.tile([0.1, 0.2, 0.3], (5, 1)), 0.99)

    def test_threshold_out_of_range(self):
        rng = np.random.default_rng(5)
        matrix = rng.normal(size=(5, 3))
        with pytest.raises(ParameterError):
            fit_pca(matrix, 1.5)
        with pytest.raises(ParameterError):
            fit_pca(matrix, 0.0)

    def test_component_cap_when_rows_are_scarce(self):
        rng = np.random.default_rng(6)
        matrix = rng.normal(size=(4, 10))
        transform = fit_pca(matrix, 1.0)
        assert transform.n_components <= 3  # min(n - 1, dim)


class TestApplyPca:
    @pytest.fixture
    def transform(self):
        rng = np.random.default_rng(7)
        return fit_pca(rng.normal(size=(25, 6)), 0.99)

    def test_mean_projects_to_zero(self, transform):
        np.testing.assert_array_equal(
            apply_pca(transform, transform.mean), np.zeros(transform.n_components)
        )

    def test_component_projects_to_unit_basis_vector(self, transform):
        for i in range(transform.n_components):
            out = apply_pca(transform, transform.mean + transform.components[i])
            expected = np.zeros(transform.n_components)
            expected[i] = 1.0
            np.testing.assert_allclose(out, expected, atol=1e-10)

    def test_dimension_mismatch(self, transform):
        with pytest.raises(DimensionError):
            apply_pca(transform, np.zeros(transform.dim + 1))

    def test_batch_matches_per_row(self, transform):
        # matrix and vector BLAS products may differ in the last bits; the
        # bit-exact guarantee lives in the knn pipeline, not here
        rng = np.random.default_rng(8)
        rows = rng.normal(size=(5, transform.dim))
        batch = apply_pca(transform, rows)
        for i in range(5):
            np.testing.assert_allclose(
                batch[i], apply_pca(transform, rows[i]), rtol=1e-10, atol=1e-14
            )


class TestOracleEquivalenceSweep:
    @given(
        st.integers(3, 50),
        st.integers(2, 16),
        st.integers(0, 2**32 - 1),
        st.sampled_from([0.5, 0.9, 0.99]),
    )
    @settings(max_examples=60, deadline=None)
    def test_components_and_ratios_match_oracle(self, n, dim, seed, threshold):
        rng = np.random.default_rng(seed)
        matrix = rng.normal(size=(n, dim))
        transform = fit_pca(matrix, threshold)
        mean, axes, ratios = oracle_pca(matrix, threshold)
        assert transform.components.shape == axes.shape
        np.testing.assert_allclose(transform.components, axes, atol=1e-6)
        np.testing.assert_allclose(transform.explained_variance_ratio, ratios, atol=1e-6)
