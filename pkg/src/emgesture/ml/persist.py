"""Model files: dispatch on the ``model`` tag written by each classifier."""
from __future__ import annotations

import json

from .dataset import DatasetError
from .forest import ForestModel
from .knn import KNNClassifier


def model_from_dict(d: dict):
    kind = d.get("model")
    if kind == "rf":
        return ForestModel.from_dict(d)
    if kind == "knn":
        return KNNClassifier.from_dict(d)
    raise DatasetError(f"unknown model type {kind!r}")


def load_model(path):
    with open(path) as fh:
        return model_from_dict(json.load(fh))
