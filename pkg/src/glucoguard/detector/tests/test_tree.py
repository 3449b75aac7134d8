import unittest

import numpy as np

from glucoguard.datagen.generator import GeneratorConfig, generate_dataset
from glucoguard.detector.data import EmptyNode, ForestConfig, Split
from glucoguard.detector.forest import tree_rng
from glucoguard.detector.tree import LEAF, NoSplit, best_split, fit_tree, gini


def _oracle_split(X, y):
    """ Brute force over every (feature, midpoint) pair, first strictly better wins """
    n = y.size
    parent = gini(y)
    best = None
    for feature in range(X.shape[1]):
        values = sorted(set(X[:, feature].tolist()))
        for a, b in zip(values, values[1:]):
            threshold = (a + b) / 2
            mask = X[:, feature] <= threshold
            left, right = y[mask], y[~mask]
            decrease = parent - (left.size * gini(left) + right.size * gini(right)) / n
            if best is None or decrease > best[2] + 1e-12:
                best = (feature, threshold, decrease)
    if best is None or best[2] <= 1e-12:
        return NoSplit
    return best


class Test_Gini(unittest.TestCase):
    def test_examples(self):
        self.assertEqual(gini([0, 0, 1, 1]), 0.5)
        self.assertEqual(gini([1, 1, 1]), 0.0)
        self.assertEqual(gini([0, 0, 0, 1]), 0.375)

    def test_empty(self):
        with self.assertRaises(EmptyNode):
            gini([])


class Test_BestSplit(unittest.TestCase):
    def test_glucose_separates(self):
        X = np.zeros((4, 5))
        X[:, 0] = [60, 65, 90, 110]
        X[:, 1] = 120
        y = np.array([1, 1, 0, 0])
        self.assertEqual(best_split(X, y), Split(feature=0, threshold=77.5, decrease=0.5))

    def test_constant_labels(self):
        rng = np.random.default_rng(0)
        X = rng.uniform(0, 100, size=(20, 5))
        self.assertIs(best_split(X, np.ones(20, dtype=int)), NoSplit)

    def test_no_distinct_values(self):
        X = np.ones((6, 5))
        self.assertIs(best_split(X, np.array([0, 1, 0, 1, 0, 1])), NoSplit)

    def test_tie_lower_feature(self):
        X = np.zeros((4, 5))
        X[:, 2] = [1, 2, 3, 4]
        X[:, 4] = [1, 2, 3, 4]
        y = np.array([0, 0, 1, 1])
        split = best_split(X, y)
        self.assertEqual((split.feature, split.threshold), (2, 2.5))
        # only the candidates are considered
        self.assertEqual(best_split(X, y, candidates=[4, 0]).feature, 4)

    def test_tie_lower_threshold(self):
        X = np.zeros((4, 5))
        X[:, 0] = [1, 2, 3, 4]
        y = np.array([0, 1, 1, 0])
        # 1.5 and 3.5 decrease equally
        self.assertEqual(best_split(X, y).threshold, 1.5)

    def test_min_samples_leaf(self):
        X = np.zeros((5, 5))
        X[:, 0] = [1, 2, 3, 4, 5]
        y = np.array([1, 0, 0, 0, 0])
        self.assertEqual(best_split(X, y).threshold, 1.5)
        self.assertEqual(best_split(X, y, min_samples_leaf=2).threshold, 2.5)

    def test_matches_oracle(self):
        """ Exhaustive enumeration agrees on 200 small random datasets """
        rng = np.random.default_rng(2024)
        for trial in range(200):
            n = int(rng.integers(2, 31))
            if trial % 2:
                X = rng.integers(0, 6, size=(n, 5)).astype(float)
            else:
                X = np.round(rng.uniform(0, 100, size=(n, 5)), 1)
            y = rng.integers(0, 2, size=n)
            expected = _oracle_split(X, y)
            got = best_split(X, y)
            if expected is NoSplit:
                self.assertIs(got, NoSplit, trial)
                continue
            self.assertIsInstance(got, Split, trial)
            self.assertEqual((got.feature, got.threshold), expected[:2], trial)
            self.assertAlmostEqual(got.decrease, expected[2], places=12)


class Test_FitTree(unittest.TestCase):
    def test_noiseless_stump(self):
        dataset = generate_dataset(GeneratorConfig(n_samples=3000, seed=5, label_noise=0.0))
        config = ForestConfig(max_depth=1, features_per_split=5)
        tree = fit_tree(dataset.X, dataset.y, config, tree_rng(42, 0))
        self.assertEqual(len(tree), 3)
        self.assertEqual(tree.feature[0], 0)
        self.assertGreater(tree.threshold[0], 68)
        self.assertLess(tree.threshold[0], 72)
        self.assertEqual(tree.value[tree.left[0]], 1.0)
        self.assertEqual(tree.value[tree.right[0]], 0.0)
        np.testing.assert_array_equal(tree.predict(dataset.X), dataset.y)

    def test_depth_limit_leaves_fractions(self):
        dataset = generate_dataset(GeneratorConfig(n_samples=2000, seed=6))
        tree = fit_tree(dataset.X, dataset.y, ForestConfig(max_depth=1, features_per_split=5), tree_rng(1, 0))
        leaves = tree.value[tree.feature == LEAF]
        self.assertTrue(((leaves > 0) & (leaves < 1)).any())

    def test_single_sample(self):
        X = np.array([[80.0, 120.0, 650.0, 0.0, 1.0]])
        tree = fit_tree(X, np.array([1]), ForestConfig(), tree_rng(0, 0))
        self.assertEqual(len(tree), 1)
        self.assertEqual(tree.value[0], 1.0)
        self.assertEqual(tree.depth(), 0)

    def test_empty(self):
        with self.assertRaises(EmptyNode):
            fit_tree(np.zeros((0, 5)), np.zeros(0, dtype=int), ForestConfig(), tree_rng(0, 0))

    def test_depth_bound(self):
        dataset = generate_dataset(GeneratorConfig(n_samples=2000, seed=7))
        for max_depth in [1, 2, 4, 6, 10]:
            for i in range(5):
                config = ForestConfig(max_depth=max_depth)
                tree = fit_tree(dataset.X, dataset.y, config, tree_rng(3, i))
                self.assertLessEqual(tree.depth(), max_depth)
                # children exist for every inner node
                inner = tree.feature != LEAF
                self.assertTrue((tree.left[inner] > 0).all() and (tree.right[inner] > 0).all())
                self.assertTrue(((tree.value >= 0) & (tree.value <= 1)).all())

    def test_min_samples_split(self):
        dataset = generate_dataset(GeneratorConfig(n_samples=200, seed=8))
        config = ForestConfig(max_depth=10, min_samples_split=50, features_per_split=5)
        tree = fit_tree(dataset.X, dataset.y, config, tree_rng(0, 0))
        # training samples through every node
        counts = np.zeros(len(tree), dtype=int)
        node = np.zeros(len(dataset), dtype=int)
        active = np.arange(len(dataset))
        while active.size:
            np.add.at(counts, node[active], 1)
            active = active[tree.feature[node[active]] != LEAF]
            at = node[active]
            go_left = dataset.X[active, tree.feature[at]] <= tree.threshold[at]
            node[active] = np.where(go_left, tree.left[at], tree.right[at])
        self.assertEqual(counts[0], 200)
        inner = tree.feature != LEAF
        self.assertTrue(inner.any())
        self.assertTrue((counts[inner] >= 50).all())


if __name__ == "__main__":
    unittest.main()
