import numpy as np
import pytest

from abcboost import (Dataset, GradientPairs, SplitCriterion, best_split,
                      fit_tree, gain_at_split, presort, tree_predict,
                      tree_predict_batch)


def weighted_mse_reduction(g, h, left_mask):
    """Unsimplified oracle: MSE_T - (MSE_L + MSE_R) with z = g/h, w = h."""
    z = g / h
    w = h

    def sse(mask):
        if not np.any(mask):
            return 0.0
        zb = np.sum(z[mask] * w[mask]) / np.sum(w[mask])
        return float(np.sum((z[mask] - zb) ** 2 * w[mask]))

    total = np.ones_like(left_mask, dtype=bool)
    return sse(total) - sse(left_mask) - sse(~left_mask)


def simple_instance():
    ds = Dataset(np.array([[1.0], [2.0], [3.0], [4.0]]), np.array([0, 0, 1, 1]), 2)
    pairs = GradientPairs(np.array([0.0, 0.0, 3.0, 3.0]), np.ones(4))
    return ds, presort(ds), pairs


class TestGainAtSplit:
    def test_hand_value(self):
        assert gain_at_split(0.0, 2.0, 6.0, 2.0, SplitCriterion.SECOND_ORDER) == 9.0

    def test_equal_means_zero(self):
        assert gain_at_split(1.0, 1.0, 1.0, 1.0, SplitCriterion.SECOND_ORDER) == 0.0
        assert gain_at_split(1.0, 1.0, 1.0, 1.0, SplitCriterion.FIRST_ORDER) == 0.0

    def test_matches_mse_oracle(self, rng):
        for _ in range(300):
            n = int(rng.integers(2, 50))
            g = rng.normal(size=n)
            h = rng.uniform(0.05, 1.0, size=n)
            s = int(rng.integers(1, n))
            mask = np.zeros(n, bool)
            mask[:s] = True
            gain = gain_at_split(g[:s].sum(), h[:s].sum(), g[s:].sum(),
                                 h[s:].sum(), SplitCriterion.SECOND_ORDER)
            oracle = weighted_mse_reduction(g, h, mask)
            assert gain == pytest.approx(oracle, rel=1e-9, abs=1e-9)
            assert gain >= -1e-9

    def test_first_order_is_unit_weight_case(self, rng):
        # first-order gain (count denominators) == second-order gain at h_i = 1
        for _ in range(100):
            n = int(rng.integers(2, 30))
            g = rng.normal(size=n)
            s = int(rng.integers(1, n))
            first = gain_at_split(g[:s].sum(), float(s), g[s:].sum(),
                                  float(n - s), SplitCriterion.FIRST_ORDER)
            second = gain_at_split(g[:s].sum(), float(s), g[s:].sum(),
                                   float(n - s), SplitCriterion.SECOND_ORDER)
            assert first == second
            assert first >= -1e-9

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError):
            gain_at_split(1.0, -0.5, 1.0, 1.0, SplitCriterion.SECOND_ORDER)


class TestBestSplit:
    def test_hand_instance(self):
        _, order, pairs = simple_instance()
        feat, thr, gain = best_split([0, 1, 2, 3], pairs, order,
                                     SplitCriterion.SECOND_ORDER)
        assert feat == 0 and thr == 2.5 and gain == 9.0

    def test_exhaustive_enumeration(self, rng):
        # the returned gain equals the max over all admissible thresholds
        for trial in range(30):
            n = int(rng.integers(4, 24))
            X = rng.integers(0, 6, size=(n, 3)).astype(float)
            ds = Dataset(X, rng.integers(0, 2, size=n), 2)
            order = presort(ds)
            g = rng.normal(size=n)
            h = rng.uniform(0.1, 1.0, size=n)
            got = best_split(np.arange(n), GradientPairs(g, h), order,
                             SplitCriterion.SECOND_ORDER)
            best = 0.0
            for d in range(3):
                for t in np.unique(X[:, d])[:-1]:
                    mask = X[:, d] <= t
                    best = max(best, weighted_mse_reduction(g, h, mask))
            if got is None:
                assert best <= 1e-12
            else:
                assert got[2] == pytest.approx(best, rel=1e-9, abs=1e-12)

    def test_constant_features_give_none(self):
        ds = Dataset(np.full((4, 2), 3.0), np.array([0, 1, 0, 1]), 2)
        pairs = GradientPairs(np.array([1.0, -1.0, 1.0, -1.0]), np.ones(4))
        assert best_split([0, 1, 2, 3], pairs, presort(ds),
                          SplitCriterion.SECOND_ORDER) is None

    def test_tie_breaks_to_lower_feature(self):
        # two identical features yield the same best gain; feature 0 wins
        col = np.array([1.0, 2.0, 3.0, 4.0])
        ds = Dataset(np.column_stack([col, col]), np.array([0, 0, 1, 1]), 2)
        pairs = GradientPairs(np.array([0.0, 0.0, 3.0, 3.0]), np.ones(4))
        feat, thr, _ = best_split([0, 1, 2, 3], pairs, presort(ds),
                                  SplitCriterion.SECOND_ORDER)
        assert feat == 0

    def test_subset_restriction(self):
        ds = Dataset(np.array([[1.0], [2.0], [3.0], [4.0], [50.0]]),
                     np.array([0, 0, 1, 1, 1]), 2)
        pairs = GradientPairs(np.array([0.0, 0.0, 3.0, 3.0, 99.0]), np.ones(5))
        feat, thr, gain = best_split([0, 1, 2, 3], pairs, presort(ds),
                                     SplitCriterion.SECOND_ORDER)
        assert thr == 2.5 and gain == 9.0

    def test_min_leaf(self):
        _, order, pairs = simple_instance()
        res = best_split([0, 1, 2, 3], pairs, order,
                         SplitCriterion.SECOND_ORDER, min_leaf=2)
        assert res is not None and res[1] == 2.5
        assert best_split([0, 1, 2], pairs, order,
                          SplitCriterion.SECOND_ORDER, min_leaf=2) is None


def leaf_sse(tree, X, g, h):
    pred = tree_predict_batch(tree, X)
    z = g / h
    return float(np.sum((z - pred) ** 2 * h))


class TestFitTree:
    def test_hand_instance(self):
        _, order, pairs = simple_instance()
        tree = fit_tree(pairs, order, J=2, criterion=SplitCriterion.SECOND_ORDER)
        assert tree.leaf_count == 2
        assert tree.feature[0] == 0 and tree.threshold[0] == 2.5
        assert tree_predict(tree, [2.0]) == 0.0
        assert tree_predict(tree, [3.0]) == 3.0

    def test_zero_residuals_single_leaf(self):
        ds, order, _ = simple_instance()
        pairs = GradientPairs(np.zeros(4), np.ones(4))
        tree = fit_tree(pairs, order, J=4, criterion=SplitCriterion.SECOND_ORDER)
        assert tree.leaf_count == 1 and tree.value[0] == 0.0

    def test_more_leaves_never_worse(self, rng):
        for trial in range(20):
            n = 40
            X = rng.normal(size=(n, 3))
            ds = Dataset(X, rng.integers(0, 2, size=n), 2)
            order = presort(ds)
            pairs = GradientPairs(rng.normal(size=n), rng.uniform(0.1, 1, size=n))
            t2 = fit_tree(pairs, order, J=2, criterion=SplitCriterion.SECOND_ORDER)
            t4 = fit_tree(pairs, order, J=4, criterion=SplitCriterion.SECOND_ORDER)
            assert (leaf_sse(t4, X, *pairs)
                    <= leaf_sse(t2, X, *pairs) + 1e-9)

    def test_leaf_count_bound(self, rng):
        X = rng.normal(size=(100, 4))
        ds = Dataset(X, rng.integers(0, 2, size=100), 2)
        pairs = GradientPairs(rng.normal(size=100), np.ones(100))
        for J in (2, 5, 9):
            tree = fit_tree(pairs, presort(ds), J=J,
                            criterion=SplitCriterion.SECOND_ORDER)
            assert tree.leaf_count == J  # plenty of positive-gain splits here

    def test_separable_plateaus_zero_sse(self):
        # 4 distinct plateaus on one feature, J=4 -> exact fit
        X = np.repeat(np.arange(4.0), 5)[:, None]
        g = np.repeat([1.0, -2.0, 3.0, 0.5], 5)
        ds = Dataset(X, np.zeros(20, int), 2)
        tree = fit_tree(GradientPairs(g, np.ones(20)), presort(ds), J=4,
                        criterion=SplitCriterion.SECOND_ORDER)
        assert tree.leaf_count == 4
        assert leaf_sse(tree, X, g, np.ones(20)) == pytest.approx(0.0, abs=1e-18)

    def test_j_below_two_rejected(self):
        _, order, pairs = simple_instance()
        with pytest.raises(ValueError):
            fit_tree(pairs, order, J=1, criterion=SplitCriterion.SECOND_ORDER)

    def test_first_order_equals_second_with_unit_weights(self, rng):
        X = rng.integers(0, 10, size=(60, 3)).astype(float)
        ds = Dataset(X, rng.integers(0, 2, size=60), 2)
        order = presort(ds)
        pairs = GradientPairs(rng.normal(size=60), np.ones(60))
        t1 = fit_tree(pairs, order, J=6, criterion=SplitCriterion.FIRST_ORDER)
        t2 = fit_tree(pairs, order, J=6, criterion=SplitCriterion.SECOND_ORDER)
        np.testing.assert_array_equal(t1.feature, t2.feature)
        np.testing.assert_array_equal(t1.threshold, t2.threshold)
        np.testing.assert_array_equal(t1.value, t2.value)

    def test_min_leaf_respected(self, rng):
        n = 50
        X = rng.normal(size=(n, 2))
        ds = Dataset(X, rng.integers(0, 2, size=n), 2)
        pairs = GradientPairs(rng.normal(size=n), np.ones(n))
        tree, leaf_of = fit_tree(pairs, presort(ds), J=8,
                                 criterion=SplitCriterion.SECOND_ORDER,
                                 min_leaf=5, return_leaf_of=True)
        counts = np.bincount(leaf_of, minlength=tree.num_nodes)
        for v in range(tree.num_nodes):
            if tree.feature[v] < 0:
                assert counts[v] >= 5


class TestTreePredict:
    def test_constant_tree(self):
        ds, order, _ = simple_instance()
        tree = fit_tree(GradientPairs(np.full(4, 0.7), np.ones(4) * 0.25),
                        order, J=2, criterion=SplitCriterion.SECOND_ORDER)
        # all g equal, h equal: no gain, single leaf 0.7*4 / 1.0 = 2.8
        assert tree.leaf_count == 1
        for x in ([0.0], [100.0], [-3.0]):
            assert tree_predict(tree, x) == tree.value[0]

    def test_path_oracle(self, rng):
        X = rng.normal(size=(80, 5))
        ds = Dataset(X, rng.integers(0, 2, size=80), 2)
        pairs = GradientPairs(rng.normal(size=80), rng.uniform(0.1, 1, size=80))
        tree = fit_tree(pairs, presort(ds), J=10,
                        criterion=SplitCriterion.SECOND_ORDER)

        def path_sim(x):
            v = 0
            while tree.feature[v] >= 0:
                v = tree.left[v] if x[tree.feature[v]] <= tree.threshold[v] else tree.right[v]
            return tree.value[v]

        queries = rng.normal(size=(1000, 5))
        batch = tree_predict_batch(tree, queries)
        for i in range(1000):
            expected = path_sim(queries[i])
            assert tree_predict(tree, queries[i]) == expected
            assert batch[i] == expected

    def test_dimension_mismatch(self):
        _, order, pairs = simple_instance()
        tree = fit_tree(pairs, order, J=2, criterion=SplitCriterion.SECOND_ORDER)
        with pytest.raises(ValueError):
            tree_predict(tree, [])

    def test_leaf_assignment_consistent_with_routing(self, rng):
        X = rng.integers(0, 5, size=(60, 3)).astype(float)
        ds = Dataset(X, rng.integers(0, 2, size=60), 2)
        pairs = GradientPairs(rng.normal(size=60), np.ones(60))
        tree, leaf_of = fit_tree(pairs, presort(ds), J=6,
                                 criterion=SplitCriterion.SECOND_ORDER,
                                 return_leaf_of=True)
        np.testing.assert_array_equal(tree_predict_batch(tree, X),
                                      tree.value[leaf_of])
