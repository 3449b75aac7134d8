"""Sub-package with the hypoglycemia classifiers and their evaluation."""
from glucoguard.detector.data import Classifier, ForestConfig, Metrics  # noqa
from glucoguard.detector.forest import RandomForest, fit_forest, predict, predict_proba  # noqa
from glucoguard.detector.knn import fit_knn, predict_knn  # noqa
from glucoguard.detector.metrics import evaluate, roc_curve  # noqa
from glucoguard.detector.model_io import load_model, save_model  # noqa
from glucoguard.detector.result import DetectionResult, detect  # noqa

__author__ = "glucoguard"
