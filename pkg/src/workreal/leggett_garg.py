"""Dichotomic correlators, macrorealism parameters, and their entropic analogues.

Both parameters are built from three two-time statistics.  The (t1,t0) and (t2,t1)
statistics come from the measured three-point protocol; the (t2,t0) statistic always
comes from the branch WITHOUT the middle measurement.  Using the measured (t2,t0)
marginal instead would make both parameters provably non-negative, because the
three-time outcome table is itself a perfectly classical joint distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .entropy import EntropyReport, shannon_entropy, work_entropy
from .errors import InvalidParameterError
from .hilbert import DiagonalDensity, EnergySpectrum, UnitaryPropagator
from .protocol import (
    JointDistribution,
    three_time_joint,
    two_time_joint,
    two_time_joint_skipping_middle,
    work_distribution,
)

REPORTING_TOL = 1e-12


@dataclass(frozen=True)
class DichotomicMapping:
    """Assignment of +/-1 to each measurement outcome index."""

    assignment: tuple[int, ...]

    def __post_init__(self):
        if not self.assignment or any(q not in (-1, 1) for q in self.assignment):
            raise InvalidParameterError("assignment must map every index to +1 or -1")

    @property
    def values(self) -> np.ndarray:
        return np.asarray(self.assignment, dtype=float)


GROUND_EXCITED = DichotomicMapping((1, -1))


@dataclass(frozen=True)
class CorrelatorSet:
    """<Q_i Q_j> for the three time pairs; c02 must come from the no-middle branch."""

    c01: float
    c12: float
    c02: float
    provenance: tuple[str, str, str] = (
        "(t1,t0) joint of the measured protocol",
        "(t2,t1) marginal of the measured protocol",
        "(t2,t0) joint without the middle measurement",
    )

    def __post_init__(self):
        for name, c in (("c01", self.c01), ("c12", self.c12), ("c02", self.c02)):
            if abs(c) > 1.0 + 1e-12:
                raise InvalidParameterError(f"{name} = {c} outside [-1, 1]")


@dataclass(frozen=True)
class LGResult:
    """The three macrorealism parameters; negative values witness a violation."""

    k_cor: float
    k_cor_flipped: float
    k_en: float
    tol_violation: float = 0.0

    def __post_init__(self):
        if not -1.0 - 1e-9 <= self.k_cor <= 1.0 + 1e-9:
            raise InvalidParameterError(f"k_cor = {self.k_cor} outside the sanity band")

    @property
    def violated_cor(self) -> bool:
        return self.k_cor < -self.tol_violation

    @property
    def violated_cor_flipped(self) -> bool:
        return self.k_cor_flipped < -self.tol_violation

    @property
    def violated_en(self) -> bool:
        return self.k_en < -self.tol_violation


def dichotomic_correlator(joint: JointDistribution, mapping: DichotomicMapping) -> float:
    """<Q_later Q_earlier> = sum Q(k_j) Q(k_i) p(k_j, k_i)."""
    q = mapping.values
    if q.size != joint.probs.shape[0] or q.size != joint.probs.shape[1]:
        raise InvalidParameterError("mapping does not cover every outcome index")
    return float(q @ joint.probs @ q)


def correlator_set(rho0: DiagonalDensity, u10: UnitaryPropagator, u21: UnitaryPropagator,
                   mapping: DichotomicMapping = GROUND_EXCITED) -> CorrelatorSet:
    """Assemble the three correlators with the required branch discipline."""
    joint3 = three_time_joint(rho0, u10, u21)
    return CorrelatorSet(
        c01=dichotomic_correlator(joint3.marginal_t1_t0(), mapping),
        c12=dichotomic_correlator(joint3.marginal_t2_t1(), mapping),
        c02=dichotomic_correlator(two_time_joint_skipping_middle(rho0, u10, u21), mapping),
    )


def k3_correlator(c: CorrelatorSet) -> float:
    """(1/4)(1 - C01 - C12 + C02); negative iff the two-time correlation bound fails."""
    return 0.25 * (1.0 - c.c01 - c.c12 + c.c02)


def k3_correlator_swapped(c: CorrelatorSet) -> float:
    """Variant with the roles of C02 and C12 exchanged, kept for comparison only.

    For two-level rotations this expression reduces to sin(theta)^2 / 2 and can
    never be negative, so it is useless as a violation witness.
    """
    return 0.25 * (1.0 - c.c01 - c.c02 + c.c12)


def k3_correlator_flipped(c: CorrelatorSet) -> float:
    """Same bound after Q1 -> -Q1, which flips every correlator touching t1."""
    return 0.25 * (1.0 + c.c01 + c.c12 + c.c02)


def _require_common_base(*reports: EntropyReport) -> None:
    bases = {r.base for r in reports}
    if len(bases) != 1:
        raise InvalidParameterError(f"entropy reports mix logarithm bases {bases}")


def k3_entropic(h_w21: EntropyReport, h_w10: EntropyReport, h_w20: EntropyReport,
                h_e1: EntropyReport) -> float:
    """(1/2)(H(w21) + H(w10) - H(w20) - H(E1)); negative iff the entropic bound fails.

    h_w20 must come from the no-middle branch and h_e1 is the entropy of the middle
    marginal of the measured protocol.
    """
    _require_common_base(h_w21, h_w10, h_w20, h_e1)
    return 0.5 * (h_w21.value + h_w10.value - h_w20.value - h_e1.value)


def k3_entropic_weak(h_w21: EntropyReport, h_w10: EntropyReport,
                     h_w20: EntropyReport) -> float:
    """The easier bound that drops the middle-marginal entropy term."""
    _require_common_base(h_w21, h_w10, h_w20)
    return 0.5 * (h_w21.value + h_w10.value - h_w20.value)


def entropic_k3_from_protocol(rho0: DiagonalDensity, u10: UnitaryPropagator,
                              u21: UnitaryPropagator,
                              spectrum_1: EnergySpectrum | None = None,
                              spectrum_2: EnergySpectrum | None = None,
                              degeneracy: str = "fine",
                              base: float = math.e) -> float:
    """Run the full pipeline and evaluate the entropic parameter.

    `degeneracy` picks the work-entropy convention: "fine" keeps one entry per
    outcome pair (the convention under which the derivation of the bound is exact),
    "grouped" merges equal work values first.
    """
    if degeneracy not in ("fine", "grouped"):
        raise InvalidParameterError(f"unknown degeneracy convention {degeneracy!r}")
    joint3 = three_time_joint(rho0, u10, u21, spectrum_1=spectrum_1, spectrum_2=spectrum_2)
    no_middle = two_time_joint_skipping_middle(rho0, u10, u21, spectrum_later=spectrum_2)
    view = degeneracy
    h_w10 = work_entropy(work_distribution(joint3.marginal_t1_t0(), view=view), base=base)
    h_w21 = work_entropy(work_distribution(joint3.marginal_t2_t1(), view=view), base=base)
    h_w20 = work_entropy(work_distribution(no_middle, view=view), base=base)
    h_e1 = shannon_entropy(joint3.marginal_t1(), base=base)
    return k3_entropic(h_w21, h_w10, h_w20, h_e1)
