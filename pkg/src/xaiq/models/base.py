"""Shared model-facing contracts."""

from __future__ import annotations

from enum import Enum
from typing import Protocol

import numpy as np


class OutputKind(str, Enum):
    """What a predict function's outputs mean.

    Probability outputs are thresholded, margins are argmaxed (or sign
    thresholded when one-dimensional), class labels pass through.
    """

    PROBABILITY = "probability"
    MARGIN = "margin"
    CLASS_LABEL = "class_label"


class PredictFunction(Protocol):
    """Batch evaluation over feature rows; deterministic per input."""

    def __call__(self, rows: np.ndarray) -> np.ndarray: ...
