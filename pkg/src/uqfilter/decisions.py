"""Ternary class verdicts and the keep/ignore filtering rules.

Per class, an interval is compared against the decision threshold:

     1  interval entirely above the threshold (class present)
     0  interval entirely below the threshold (class absent)
    -1  threshold inside or touching the interval (uncertain)

A whole prediction is then kept or ignored from the verdict vector:

    any 1 present                  -> keep; -1s are demoted to 0
    exactly one -1, all others 0   -> keep; the lone -1 is promoted to 1
                                      ("benefit of the doubt")
    -1s but no 1s (two or more)    -> ignore, reason "uncertain_only"
    all 0s                         -> ignore, reason "all_absent"

A threshold exactly on an endpoint counts as touching, hence -1: the
interval is then not *entirely* on one side. Vectors mixing 1s and -1s
are kept on the strength of the confident classes; the -1s are dropped
and the outcome is flagged so the ambiguity stays auditable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .uncertainty import ClassInterval

KEEP = "keep"
IGNORE = "ignore"
REASON_UNCERTAIN_ONLY = "uncertain_only"
REASON_ALL_ABSENT = "all_absent"


def ternary_assign(interval: ClassInterval, threshold: float) -> int:
    if interval.lo > threshold:
        return 1
    if interval.hi < threshold:
        return 0
    return -1


@dataclass(frozen=True)
class FilterOutcome:
    kind: str  # KEEP or IGNORE
    final: np.ndarray | None  # binary vector, present only for KEEP
    reason: str | None  # present only for IGNORE
    benefit_of_doubt: bool = False

    def __post_init__(self):
        if self.kind == KEEP:
            if self.final is None or self.reason is not None:
                raise ValidationError("keep outcomes carry a final vector and no reason")
            if not np.any(self.final == 1):
                raise ValidationError("keep outcomes must assert at least one class")
        elif self.kind == IGNORE:
            if self.final is not None or self.reason not in (REASON_UNCERTAIN_ONLY, REASON_ALL_ABSENT):
                raise ValidationError("ignore outcomes carry exactly one reason and no vector")
        else:
            raise ValidationError(f"unknown outcome kind {self.kind!r}")


def filter_prediction(verdict: np.ndarray) -> FilterOutcome:
    """Apply the keep/ignore rules to one ternary verdict vector."""
    v = np.asarray(verdict)
    if v.ndim != 1 or v.size == 0 or not np.all(np.isin(v, (-1, 0, 1))):
        raise ValidationError("verdict must be a non-empty vector over {-1, 0, 1}")
    v = v.astype(np.int8)
    n_pos = int(np.count_nonzero(v == 1))
    n_unc = int(np.count_nonzero(v == -1))
    if n_unc == 1 and n_pos == 0:
        return FilterOutcome(kind=KEEP, final=(v == -1).astype(np.int8), reason=None,
                             benefit_of_doubt=True)
    if n_pos > 0:
        return FilterOutcome(kind=KEEP, final=(v == 1).astype(np.int8), reason=None)
    if n_unc > 0:
        return FilterOutcome(kind=IGNORE, final=None, reason=REASON_UNCERTAIN_ONLY)
    return FilterOutcome(kind=IGNORE, final=None, reason=REASON_ALL_ABSENT)
