import unittest

import numpy as np

from glucoguard.datagen.dataset import Dataset
from glucoguard.datagen.generator import GeneratorConfig, generate_dataset
from glucoguard.detector.data import EvenK, KExceedsN, NonFiniteFeature
from glucoguard.detector.knn import fit_knn, predict_knn


class Test_Knn(unittest.TestCase):
    def setUp(self):
        self.dataset = generate_dataset(GeneratorConfig(n_samples=300, seed=21))

    def test_k1_recalls_training_points(self):
        model = fit_knn(self.dataset, 1)
        for i in range(0, 300, 7):
            self.assertEqual(predict_knn(model, self.dataset.X[i]), self.dataset.y[i])

    def test_k_equals_n_is_majority(self):
        X = np.column_stack([np.arange(5.0), np.zeros(5), np.zeros(5), np.zeros(5), np.zeros(5)])
        dataset = Dataset(X=X, y=np.array([1, 1, 1, 0, 0]))
        model = fit_knn(dataset, 5)
        rng = np.random.default_rng(0)
        for query in rng.uniform(-100, 100, size=(50, 5)):
            self.assertEqual(predict_knn(model, query), 1)

    def test_distance_tie_lower_index(self):
        X = np.zeros((2, 5))
        X[0, 0], X[1, 0] = 1.0, -1.0
        model = fit_knn(Dataset(X=X, y=np.array([0, 1])), 1)
        self.assertEqual(predict_knn(model, np.zeros(5)), 0)
        model = fit_knn(Dataset(X=X[::-1].copy(), y=np.array([1, 0])), 1)
        self.assertEqual(predict_knn(model, np.zeros(5)), 1)

    def test_standardized(self):
        model = fit_knn(self.dataset, 3)
        np.testing.assert_allclose(model.X.mean(axis=0), 0.0, atol=1e-9)
        self.assertTrue((model.std > 0).all())

    def test_probabilities_are_vote_fractions(self):
        model = fit_knn(self.dataset, 5)
        proba = model.predict_proba(self.dataset.X[:40])
        self.assertTrue(np.isin(proba, [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]).all())

    def test_errors(self):
        with self.assertRaises(EvenK):
            fit_knn(self.dataset, 4)
        with self.assertRaises(EvenK):
            fit_knn(self.dataset, 0)
        with self.assertRaises(KExceedsN):
            fit_knn(self.dataset, 301)
        with self.assertRaises(NonFiniteFeature):
            predict_knn(fit_knn(self.dataset, 3), np.array([np.nan, 120, 650, 0, 0]))


if __name__ == "__main__":
    unittest.main()
