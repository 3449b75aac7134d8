from functools import lru_cache

from glucoguard.datagen.generator import GeneratorConfig, generate_dataset
from glucoguard.detector.data import ForestConfig
from glucoguard.detector.forest import RandomForest, fit_forest


@lru_cache(maxsize=None)
def noiseless_model() -> RandomForest:
    """A small forest trained without label noise. Every tree may split on glucose at the root."""
    dataset = generate_dataset(GeneratorConfig(n_samples=4000, seed=5, label_noise=0.0))
    return fit_forest(dataset, ForestConfig(n_trees=10, max_depth=3, features_per_split=5, seed=5), trained_at=0)
