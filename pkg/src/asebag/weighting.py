"""Member weighting from the detector's training confusion matrix.

A member's weight is the product of two terms derived from how its anomaly
detector behaved on the training set:

* a recall term C = ln(|P| / FN) = ln(1 / (1 - recall)): how much of the
  minority class the detector caught (0 at zero recall; FN is floored at
  0.5 so perfect recall stays finite),
* an entropy term E = -t*ln(t) - (1-t)*ln(1-t) with t = TP/(TP+FP): how
  balanced the flagged set is between the classes. E peaks at ln 2 when
  TP = FP, i.e. when the flags land on the class-overlap region, and is 0
  when the flagged set is pure (or empty).

Natural logarithms throughout; any other base rescales all weights equally
and leaves the normalized ensemble combination unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import ConfusionMatrix

FN_FLOOR = 0.5


@dataclass(frozen=True)
class CewBreakdown:
    """Weight C*E with its factors and source, kept for run reports."""

    c_value: float
    e_value: float
    cew: float
    recall: float
    source_cm: ConfusionMatrix


def contamination_c(cm: ConfusionMatrix, positive_total: int) -> float:
    """Recall term ln(|P| / max(FN, 0.5)); 0 at zero recall."""
    if positive_total < 1:
        raise ValueError("positive_total must be at least 1")
    return math.log(positive_total / max(cm.fn, FN_FLOOR))


def entropy_e(cm: ConfusionMatrix) -> float:
    """Two-class entropy of the flagged set's TP/FP proportions, in [0, ln 2].

    Uses the 0*ln(0) = 0 convention; an empty flagged set carries no
    information and returns 0.
    """
    flagged = cm.tp + cm.fp
    if flagged == 0:
        return 0.0
    t = cm.tp / flagged
    if t == 0.0 or t == 1.0:
        return 0.0
    return -t * math.log(t) - (1.0 - t) * math.log(1.0 - t)


def cew(cm: ConfusionMatrix, positive_total: int) -> CewBreakdown:
    """Full weight C*E with the retained breakdown."""
    c_value = contamination_c(cm, positive_total)
    e_value = entropy_e(cm)
    return CewBreakdown(
        c_value=c_value,
        e_value=e_value,
        cew=c_value * e_value,
        recall=cm.recall,
        source_cm=cm,
    )
