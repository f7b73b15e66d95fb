"""Attribute classifiers: the visual hidden vector in, two 9-simplexes out.

The two heads are pluggable serialized scikit-learn classifiers (joblib
files), conventionally an ensemble voter and a stacking model. Nothing
here trains: artifacts are produced elsewhere and loaded by path. A
missing file is fatal immediately at load, naming the artifact, because a
batch without attribute scores cannot produce valid records.

Probabilities from `predict_proba` are renormalized before emission so
the outputs are simplexes to full float precision regardless of how the
ensemble averaged its members.
"""

from __future__ import annotations

import os

import joblib
import numpy as np

from .rawposts import ExtractError

HA_CLASSES = 9


def _load_classifier(path: str, name: str):
    if not os.path.isfile(path):
        raise FileNotFoundError(f"missing classifier artifact {name}: {path}")
    try:
        clf = joblib.load(path)
    except Exception as exc:
        raise ExtractError(f"classifier artifact {name}: cannot load {path}: {exc}") from None
    classes = getattr(clf, "classes_", None)
    if classes is None or list(classes) != list(range(HA_CLASSES)):
        raise ExtractError(
            f"classifier artifact {name} must cover classes 0..{HA_CLASSES - 1}: {path}"
        )
    return clf


class AttributeHeads:
    """The two loaded classifier artifacts, applied per post."""

    def __init__(self, vote_path: str, stack_path: str):
        self._vote = _load_classifier(vote_path, "vote")
        self._stack = _load_classifier(stack_path, "stack")
        self._vote_path = vote_path
        self._stack_path = stack_path

    def _proba(self, clf, name: str, path: str, hidden: np.ndarray) -> np.ndarray:
        try:
            p = np.asarray(clf.predict_proba(hidden[None, :])[0], dtype=np.float64)
        except Exception as exc:
            raise ExtractError(
                f"classifier artifact {name} rejected the hidden vector ({path}): {exc}"
            ) from None
        return p / p.sum()

    def predict(self, hidden: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return (
            self._proba(self._vote, "vote", self._vote_path, hidden),
            self._proba(self._stack, "stack", self._stack_path, hidden),
        )
