"""Dataset handling, random forest, KNN/PCA baselines and evaluation."""
from .dataset import DatasetError, LabeledDataset, from_spectra, max_pool, pool_dataset, train_test_split
from .evaluate import EvalReport, confusion_report, evaluate
from .forest import DecisionTree, ForestModel, ForestParams, rf_predict, rf_train
from .knn import KNNClassifier, knn_predict
from .pca import PCAModel, pca_fit, pca_transform
from .persist import load_model, model_from_dict

__all__ = [
    "DatasetError", "DecisionTree", "EvalReport", "ForestModel", "ForestParams", "KNNClassifier",
    "LabeledDataset", "PCAModel", "confusion_report", "evaluate", "from_spectra",
    "knn_predict", "load_model", "max_pool", "model_from_dict", "pca_fit", "pca_transform", "pool_dataset", "rf_predict",
    "rf_train", "train_test_split",
]
