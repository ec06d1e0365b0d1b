import numpy as np
import pytest

from platekit.acquisition import AcquisitionConfig, random_pair, thompson_pair
from platekit.prefgp import (
    ComparisonDataset,
    GaussianApprox,
    GpHyperparams,
    PrefRecord,
    fit_posterior,
)
from platekit.scene import WeightGrid, w_distance


def degenerate_posterior(grid, mean):
    """Posterior with negligible variance and a hand-set mean."""
    hp = GpHyperparams(signal_var=1e-16, noise=0.5)
    q = fit_posterior(ComparisonDataset(), hp, grid)
    q.mean = np.asarray(mean, dtype=float)
    return q


class TestRandomPair:
    def test_two_point_grid_returns_both_points(self):
        grid = WeightGrid(n_dims=1, points_per_dim=2)
        rng = np.random.default_rng(0)
        for _ in range(20):
            pair = random_pair(grid, rng)
            assert sorted(pair) == [0, 1]

    def test_always_distinct(self):
        grid = WeightGrid(n_dims=1, points_per_dim=5)
        rng = np.random.default_rng(1)
        for _ in range(10_000):
            i0, i1 = random_pair(grid, rng)
            assert i0 != i1

    def test_reproducible_with_seed(self):
        grid = WeightGrid(n_dims=2, points_per_dim=5)
        p1 = random_pair(grid, np.random.default_rng(7))
        p2 = random_pair(grid, np.random.default_rng(7))
        assert p1 == p2

    def test_tiny_grid_rejected(self):
        class OnePoint:
            def __len__(self):
                return 1

        with pytest.raises(ValueError):
            random_pair(OnePoint(), np.random.default_rng(0))


class TestThompsonPair:
    def test_degenerate_posterior_returns_argmax_twice(self):
        grid = WeightGrid(n_dims=1, points_per_dim=5)
        mean = np.array([0.0, 0.0, 3.0, 0.0, 0.0])
        q = degenerate_posterior(grid, mean)
        cfg = AcquisitionConfig(min_separation=0.1, max_reselect=5)
        pair = thompson_pair(q, grid, cfg, np.random.default_rng(0))
        assert pair == (2, 2)  # reselect budget exhausted, pair returned anyway

    def test_bimodal_posterior_selects_the_two_modes(self):
        grid = WeightGrid(n_dims=1, points_per_dim=21)
        mean = np.zeros(21)
        mean[2] = 5.0
        mean[18] = 5.0 - 1e-9
        hp = GpHyperparams(signal_var=1e-8, noise=0.5)
        q = fit_posterior(ComparisonDataset(), hp, grid)
        q.mean = mean
        cfg = AcquisitionConfig(min_separation=0.1, max_reselect=10)
        rng = np.random.default_rng(3)
        hits = 0
        for _ in range(1000):
            pair = thompson_pair(q, grid, cfg, rng)
            if sorted(pair) == [2, 18]:
                hits += 1
        assert hits >= 990

    def test_pairs_are_grid_members_and_separated_or_exhausted(self):
        grid = WeightGrid(n_dims=2, points_per_dim=5)
        data = ComparisonDataset((PrefRecord(0, 12, 1), PrefRecord(3, 12, 1)))
        q = fit_posterior(data, GpHyperparams(noise=0.3), grid)
        cfg = AcquisitionConfig(min_separation=0.3, max_reselect=10)
        rng = np.random.default_rng(5)
        separated = 0
        for _ in range(300):
            i0, i1 = thompson_pair(q, grid, cfg, rng)
            assert 0 <= i0 < len(grid) and 0 <= i1 < len(grid)
            if w_distance(grid.point(i0), grid.point(i1)) >= cfg.min_separation:
                separated += 1
        assert separated > 200  # exhaustion is the rare path

    def test_ties_resolve_to_lowest_index(self):
        grid = WeightGrid(n_dims=1, points_per_dim=5)

        class TiedPosterior:
            def sample(self, rng):
                return np.array([1.0, 7.0, 7.0, 7.0, 0.0])  # exact ties

        cfg = AcquisitionConfig(min_separation=0.1, max_reselect=2)
        pair = thompson_pair(TiedPosterior(), grid, cfg, np.random.default_rng(0))
        assert pair == (1, 1)  # lowest tied index on both draws


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            AcquisitionConfig(min_separation=0.0)
        with pytest.raises(ValueError):
            AcquisitionConfig(max_reselect=0)
        with pytest.raises(ValueError):
            AcquisitionConfig(n_init=-1)
