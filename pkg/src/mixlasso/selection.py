"""Posterior summaries, variable-selection criteria, selection scoring and LOO-CV."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .model import DesignMatrix, TermLabel


@dataclass(frozen=True, eq=False)
class PosteriorSummary:
    """Per-coefficient posterior mean, variance, 95% central interval and SN probability.

    ``sn_probability[j]`` is P(|beta_j| <= sd(beta_j) | data).
    """

    labels: tuple[TermLabel, ...]
    mean: np.ndarray
    variance: np.ndarray
    interval_low: np.ndarray
    interval_high: np.ndarray
    sn_probability: np.ndarray
    backend: str
    sigma2_mean: float = float("nan")

    def __post_init__(self):
        for name in ("mean", "variance", "interval_low", "interval_high", "sn_probability"):
            arr = np.asarray(getattr(self, name), dtype=float).reshape(-1)
            if arr.size != len(self.labels):
                raise ValueError(f"{name} has {arr.size} entries for {len(self.labels)} labels")
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "labels", tuple(self.labels))
        if np.any(self.interval_low > self.interval_high):
            raise ValueError("interval_low exceeds interval_high")
        if np.any((self.sn_probability < 0) | (self.sn_probability > 1)):
            raise ValueError("sn_probability outside [0, 1]")

    @property
    def sd(self) -> np.ndarray:
        return np.sqrt(self.variance)


@dataclass(frozen=True, eq=False)
class SelectionReport:
    labels: tuple[TermLabel, ...]
    included: np.ndarray
    criterion: str
    threshold: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "included", np.asarray(self.included, dtype=bool).reshape(-1))
        object.__setattr__(self, "labels", tuple(self.labels))
        if self.included.size != len(self.labels):
            raise ValueError("inclusion mask does not match the term registry")

    def apply(self, beta) -> np.ndarray:
        """Zero the excluded coefficients; retained ones are kept as estimated."""
        return np.where(self.included, np.asarray(beta, dtype=float), 0.0)


def select_ci(summary: PosteriorSummary) -> SelectionReport:
    """Keep a coefficient iff its 95% interval excludes zero (closed interval)."""
    contains_zero = (summary.interval_low <= 0.0) & (summary.interval_high >= 0.0)
    return SelectionReport(summary.labels, ~contains_zero, "CI", 0.95)


def select_sn(summary: PosteriorSummary, threshold: float = 0.5) -> SelectionReport:
    """Drop a coefficient iff its scaled-neighborhood probability exceeds ``threshold``."""
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0, 1)")
    return SelectionReport(summary.labels, ~(summary.sn_probability > threshold), "SN", threshold)


def select_nonzero(labels: Sequence[TermLabel], beta) -> SelectionReport:
    return SelectionReport(tuple(labels), np.asarray(beta) != 0.0, "lasso-nonzero", 0.0)


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn)

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def to_dict(self) -> dict:
        return {"TP": self.tp, "FP": self.fp, "FN": self.fn, "TN": self.tn}


def confusion(selected: SelectionReport, truth, truth_labels: Sequence[TermLabel] | None = None) -> ConfusionCounts:
    truth = np.asarray(truth, dtype=bool).reshape(-1)
    if truth.size != selected.included.size:
        raise ValueError("selection and truth masks have different lengths")
    if truth_labels is not None and tuple(truth_labels) != selected.labels:
        raise ValueError("selection and truth refer to different term registries")
    sel = selected.included
    return ConfusionCounts(
        int(np.sum(sel & truth)), int(np.sum(sel & ~truth)), int(np.sum(~sel & truth)), int(np.sum(~sel & ~truth))
    )


def bai(counts: ConfusionCounts) -> float:
    """Balanced accuracy: mean of the true-positive and true-negative rates."""
    if counts.tp + counts.fn == 0:
        raise ValueError("no truly non-zero terms: true-positive rate undefined")
    if counts.tn + counts.fp == 0:
        raise ValueError("no truly zero terms: true-negative rate undefined")
    return 0.5 * (counts.tp / (counts.tp + counts.fn) + counts.tn / (counts.tn + counts.fp))


Fitter = Callable[[DesignMatrix], np.ndarray]


class LooError(RuntimeError):
    def __init__(self, row: int, cause: Exception):
        super().__init__(f"fit without row {row} failed: {cause}")
        self.row = row


def loo_predictions(fitter: Fitter, design: DesignMatrix) -> np.ndarray:
    """Prediction for each row from a fit on the other n - 1 rows."""
    n = design.n
    if n < 2:
        raise ValueError("leave-one-out needs at least two rows")
    preds = np.empty(n)
    everything = np.arange(n)
    for i in range(n):
        try:
            beta = np.asarray(fitter(design.subset(everything != i)), dtype=float)
        except Exception as exc:  # noqa: BLE001 - re-raised with the row attached
            raise LooError(i, exc) from exc
        preds[i] = design.X[i] @ beta
    return preds


def loo_cv(fitter: Fitter, design: DesignMatrix) -> float:
    """Root-mean-squared leave-one-out prediction error."""
    err = design.y - loo_predictions(fitter, design)
    return float(np.sqrt(np.mean(err**2)))
