"""Shannon, joint, and conditional entropies of outcome and work distributions.

Natural logarithm by default; every macrorealism verdict downstream is sign-based
and therefore base-independent, but reported magnitudes fix base e unless a caller
asks for base 2.  Zero-probability entries are skipped exactly (0 log 0 := 0).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .protocol import JointDistribution, WorkDistribution

SUM_TOL = 1e-8
_SILENT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class EntropyReport:
    value: float
    base: float
    support_size: int

    def __post_init__(self):
        bound = math.log(max(self.support_size, 1)) / math.log(self.base)
        if not (-1e-9 <= self.value <= bound + 1e-9):
            raise InvalidParameterError(
                f"entropy {self.value} outside [0, log {self.support_size}]"
            )


def _checked_probs(probs) -> np.ndarray:
    probs = np.asarray(probs, dtype=float)
    if np.any(probs < 0):
        raise InvalidParameterError("probabilities must be non-negative")
    total = probs.sum()
    if abs(total - 1.0) > SUM_TOL:
        raise InvalidParameterError(f"probabilities sum to {total}, expected 1")
    if abs(total - 1.0) > _SILENT_SUM_TOL:
        warnings.warn(f"renormalizing probabilities off by {total - 1.0:.3e}",
                      stacklevel=3)
    return probs / total


def _nats(probs: np.ndarray) -> float:
    nz = probs[probs > 0]
    return float(-(nz * np.log(nz)).sum())


def shannon_entropy(probs, base: float = math.e) -> EntropyReport:
    """-sum p log p over the nonzero entries of `probs`."""
    probs = _checked_probs(probs)
    return EntropyReport(_nats(probs) / math.log(base), base,
                         int((probs > 0).sum()))


def conditional_entropy(joint: JointDistribution, base: float = math.e) -> EntropyReport:
    """Mean entropy of the later outcome given the earlier one.

    Computed directly from the conditionals p(k_j | k_i); columns with zero
    marginal contribute nothing.
    """
    probs = joint.probs
    marginal = joint.marginal_earlier()
    value = 0.0
    for i in np.nonzero(marginal > 0)[0]:
        value += marginal[i] * _nats(probs[:, i] / marginal[i])
    return EntropyReport(value / math.log(base), base, int((probs > 0).sum()))


def joint_entropy(joint: JointDistribution, base: float = math.e) -> EntropyReport:
    """-sum p(k_j, k_i) log p(k_j, k_i) over the joint support."""
    return EntropyReport(_nats(joint.probs.ravel()) / math.log(base), base,
                         int((joint.probs > 0).sum()))


def marginal_entropy(joint: JointDistribution, which: str = "earlier",
                     base: float = math.e) -> EntropyReport:
    if which not in ("earlier", "later"):
        raise InvalidParameterError(f"unknown marginal {which!r}")
    marginal = joint.marginal_earlier() if which == "earlier" else joint.marginal_later()
    return shannon_entropy(marginal, base=base)


def grouped_entropy(probs, grouping, base: float = math.e) -> tuple[EntropyReport, float]:
    """Entropy of the coarse-grained distribution plus the within-group remainder.

    `grouping` is a partition of the support of `probs` into index subsets I_j;
    the coarse distribution is q_j = sum_{i in I_j} p_i.  Returns (H(q), Hbar)
    with Hbar the q-weighted mean entropy of the within-group conditionals, so
    that H(q) = H(p) - Hbar.
    """
    probs = _checked_probs(probs)
    seen: set[int] = set()
    for group in grouping:
        for i in group:
            if i in seen:
                raise InvalidParameterError(f"index {i} appears in two groups")
            if not 0 <= i < probs.size:
                raise InvalidParameterError(f"index {i} outside the distribution")
            seen.add(i)
    missing = set(np.nonzero(probs > 0)[0].tolist()) - seen
    if missing:
        raise InvalidParameterError(f"support indices {sorted(missing)} not covered")
    q = np.array([probs[list(group)].sum() for group in grouping])
    within = 0.0
    for group, qj in zip(grouping, q):
        if qj > 0:
            within += qj * _nats(probs[list(group)] / qj)
    log_base = math.log(base)
    return (EntropyReport(_nats(q) / log_base, base, int((q > 0).sum())),
            within / log_base)


def work_entropy(workdist: WorkDistribution, view: str | None = None,
                 base: float = math.e) -> EntropyReport:
    """Entropy of a work distribution.

    With no-degeneracy spectra the fine-grained value equals the joint outcome
    entropy; the grouped value is smaller by the within-group remainder of the
    grouping identity.  A fine-grained distribution can be re-grouped on the fly;
    the reverse is impossible.
    """
    if view is None or view == workdist.view:
        target = workdist
    elif workdist.view == "fine" and view == "grouped":
        target = workdist.grouped()
    else:
        raise InvalidParameterError(
            f"cannot view a {workdist.view} distribution as {view!r}"
        )
    return EntropyReport(_nats(target.probabilities) / math.log(base), base,
                         int((target.probabilities > 0).sum()))
