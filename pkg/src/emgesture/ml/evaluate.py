from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .dataset import DatasetError, LabeledDataset


@dataclass(eq=False)
class EvalReport:
    accuracy: float
    confusion: np.ndarray          # confusion[true, predicted]
    per_class_recall: np.ndarray   # nan for classes absent from the test set
    class_names: tuple[str, ...]
    model_name: str = "rf"

    @property
    def n_test(self) -> int:
        return int(self.confusion.sum())

    def to_dict(self) -> dict:
        return {
            "model": self.model_name,
            "accuracy": self.accuracy,
            "n_test": self.n_test,
            "class_names": list(self.class_names),
            "confusion": self.confusion.astype(int).tolist(),
            "per_class_recall": [None if np.isnan(r) else float(r) for r in self.per_class_recall],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        recall = np.array([np.nan if r is None else r for r in d["per_class_recall"]], dtype=float)
        return cls(float(d["accuracy"]), np.array(d["confusion"], dtype=np.int64), recall,
                   tuple(d["class_names"]), d.get("model", "rf"))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def write_confusion_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["true\\predicted"] + list(self.class_names))
            for name, row in zip(self.class_names, self.confusion):
                w.writerow([name] + [int(v) for v in row])


def confusion_report(y_true, y_pred, class_names, model_name: str = "rf") -> EvalReport:
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.size == 0:
        raise DatasetError("empty test set")
    c = len(class_names)
    confusion = np.zeros((c, c), dtype=np.int64)
    np.add.at(confusion, (y_true, y_pred), 1)
    support = confusion.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        recall = np.where(support > 0, np.diag(confusion) / support, np.nan)
    accuracy = float(np.trace(confusion) / confusion.sum())
    return EvalReport(accuracy, confusion, recall, tuple(class_names), model_name)


def evaluate(model, test: LabeledDataset) -> EvalReport:
    """Score any classifier exposing ``predict(X)`` on ``test``."""
    if test.n_samples == 0:
        raise DatasetError("empty test set")
    y_pred = model.predict(test.features)
    return confusion_report(test.labels, y_pred, test.class_names, getattr(model, "name", "model"))
