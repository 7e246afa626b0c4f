import numpy as np
import pytest

from aerofactor.contrastive import (
    ALPHA_GRID,
    ClusterCharacteristic,
    characterize,
    characterize_all,
)
from aerofactor.errors import ClusterTooSmall, SingleCluster


def two_clusters(rng, n_each=10, p=4, shift=None, scale_a=None, scale_b=None):
    shift = np.zeros(p) if shift is None else np.asarray(shift, float)
    scale_a = np.ones(p) if scale_a is None else np.asarray(scale_a, float)
    scale_b = np.ones(p) if scale_b is None else np.asarray(scale_b, float)
    A = rng.normal(size=(n_each, p)) * scale_a + shift
    B = rng.normal(size=(n_each, p)) * scale_b
    Y = np.vstack([A, B])
    labels = [0] * n_each + [1] * n_each
    return Y, labels


class TestCharacterize:
    def test_alpha_zero_is_target_pca(self, rng):
        Y, labels = two_clusters(rng)
        ch = characterize(Y, labels, 0, alpha_mode=0.0)
        target = Y[np.array(labels) == 0]
        cov = np.cov(target, rowvar=False, ddof=1)
        vals, vecs = np.linalg.eigh(cov)
        pc = vecs[:, -1]
        if abs(float(pc @ ch.loadings)) < 0:  # pragma: no cover
            pytest.fail("unreachable")
        aligned = pc if float(pc @ ch.loadings) >= 0 else -pc
        np.testing.assert_allclose(ch.loadings, aligned, atol=1e-8)
        assert ch.alpha == 0.0

    def test_inflated_variance_dimension_wins(self, rng):
        # cluster A has 2x the std (4x variance) in source 1; the 2x2
        # contrastive covariance is ~diag(1 - a, 4 - a), whose top
        # eigenvector is e1 for every alpha
        Y, labels = two_clusters(rng, n_each=200, p=2, scale_a=[1.0, 2.0])
        ch = characterize(Y, labels, 0, alpha_mode="auto")
        assert np.argmax(np.abs(ch.loadings)) == 1

    def test_sign_convention_points_toward_target(self, rng):
        # members exceed background in source 2, equal spread elsewhere
        Y, labels = two_clusters(
            rng, n_each=100, p=3, shift=[0.0, 0.0, 3.0], scale_a=[1.0, 1.0, 2.0]
        )
        ch = characterize(Y, labels, 0, alpha_mode="auto")
        assert np.argmax(np.abs(ch.loadings)) == 2
        assert ch.loadings[2] > 0
        mean_diff = Y[np.array(labels) == 0].mean(0) - Y[np.array(labels) == 1].mean(0)
        assert float(ch.loadings @ mean_diff) >= 0

    def test_unit_norm_and_eigen_residual(self, rng):
        Y, labels = two_clusters(rng, scale_a=[2.0, 1.0, 0.5, 1.5])
        ch = characterize(Y, labels, 0, alpha_mode="auto")
        assert np.linalg.norm(ch.loadings) == pytest.approx(1.0, abs=1e-9)
        tg = Y[np.array(labels) == 0]
        bg = Y[np.array(labels) == 1]
        S = np.cov(tg, rowvar=False, ddof=1) - ch.alpha * np.cov(bg, rowvar=False, ddof=1)
        lam1 = float(np.linalg.eigvalsh(S)[-1])
        assert np.linalg.norm(S @ ch.loadings - lam1 * ch.loadings) < 1e-8

    def test_rayleigh_quotient_is_maximal(self, rng):
        Y, labels = two_clusters(rng, scale_a=[2.0, 1.0, 0.5, 1.5])
        ch = characterize(Y, labels, 0, alpha_mode=1.0)
        tg = Y[np.array(labels) == 0]
        bg = Y[np.array(labels) == 1]
        S = np.cov(tg, rowvar=False, ddof=1) - 1.0 * np.cov(bg, rowvar=False, ddof=1)
        lam1 = float(ch.loadings @ S @ ch.loadings)
        directions = rng.normal(size=(1000, 4))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        quotients = np.einsum("ij,jk,ik->i", directions, S, directions)
        assert quotients.max() <= lam1 + 1e-8

    def test_cluster_too_small(self, rng):
        Y = rng.normal(size=(4, 2))
        with pytest.raises(ClusterTooSmall):
            characterize(Y, [0, 1, 1, 1], 0)

    def test_alpha_grid_shape(self):
        assert ALPHA_GRID[0] == 0.0
        assert len(ALPHA_GRID) == 38  # {0} plus 37 log-spaced points
        assert ALPHA_GRID[1] == pytest.approx(1e-2)
        assert ALPHA_GRID[-1] == pytest.approx(1e2)


class TestCharacterizeAll:
    def test_mirrored_clusters_oppose(self, rng):
        A = rng.normal(size=(20, 3)) + np.array([5.0, 0.0, 0.0])
        Y = np.vstack([A, -A])
        labels = [0] * 20 + [1] * 20
        out = characterize_all(Y, labels, alpha_mode=0.0)
        # covariances match, mean differences mirror: sign rule flips one
        np.testing.assert_allclose(out[0].loadings, -out[1].loadings, atol=1e-9)

    def test_one_record_per_cluster(self, rng):
        Y = rng.normal(size=(12, 3))
        labels = [0, 1, 2] * 4
        out = characterize_all(Y, labels)
        assert [ch.cluster_id for ch in out] == [0, 1, 2]

    def test_gap_in_cluster_ids(self, rng):
        Y = rng.normal(size=(8, 2))
        labels = [0, 0, 0, 0, 5, 5, 5, 5]
        out = characterize_all(Y, labels)
        assert [ch.cluster_id for ch in out] == [0, 5]

    def test_singleton_yields_unreliable_record(self, rng):
        Y = rng.normal(size=(6, 2))
        labels = [0, 0, 0, 0, 0, 1]
        out = characterize_all(Y, labels)
        singleton = next(ch for ch in out if ch.cluster_id == 1)
        assert not singleton.reliable
        assert singleton.eigengap == 0.0
        assert np.linalg.norm(singleton.loadings) == pytest.approx(1.0)

    def test_single_cluster_rejected(self, rng):
        with pytest.raises(SingleCluster):
            characterize_all(rng.normal(size=(5, 2)), [0] * 5)

    def test_permutation_invariance(self, rng):
        Y, labels = two_clusters(rng, n_each=8, p=3, scale_a=[2.0, 1.0, 1.0])
        base = characterize_all(Y, labels, alpha_mode="auto")
        perm = rng.permutation(len(labels))
        shuffled = characterize_all(Y[perm], [labels[i] for i in perm], alpha_mode="auto")
        for a, b in zip(base, shuffled):
            assert a.cluster_id == b.cluster_id
            assert a.alpha == b.alpha
            np.testing.assert_allclose(a.loadings, b.loadings, atol=1e-9)
