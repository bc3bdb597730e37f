"""Joint statistics of sequential projective energy measurements and derived work laws.

The first measurement acts on a diagonal (thermal) state, and conditioning on any
outcome leaves a pure eigenstate, so every joint distribution factorizes into
transition probabilities:

    p(k1, k0)     = |U10_{k1,k0}|^2 p(k0)
    p(k2, k1, k0) = |U21_{k2,k1}|^2 |U10_{k1,k0}|^2 p(k0)

Skipping the middle measurement is NOT the same as marginalizing over k1: the
no-middle branch composes the propagators first and is kept separate throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.special import logsumexp

from .errors import InvalidParameterError
from .hilbert import (
    DiagonalDensity,
    EnergySpectrum,
    UnitaryPropagator,
    compose_propagators,
    transition_probabilities,
)

JOINT_NORM_TOL = 1e-10
WORK_DEGENERACY_TOL = 1e-9


def _relabel(spectrum: EnergySpectrum, label: int) -> EnergySpectrum:
    return EnergySpectrum(spectrum.levels, label=label)


@dataclass(frozen=True)
class JointDistribution:
    """p(k_later, k_earlier) for two sequential energy measurements.

    `probs[j, i]` is the probability of outcome j at the later time and i at the
    earlier one, so column sums give the earlier-time marginal.
    """

    probs: np.ndarray
    spectrum_earlier: EnergySpectrum
    spectrum_later: EnergySpectrum
    norm_tol: float = JOINT_NORM_TOL

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.shape != (self.spectrum_later.dim, self.spectrum_earlier.dim):
            raise InvalidParameterError("joint shape must match the two spectra")
        if np.any(probs < 0):
            raise InvalidParameterError("joint probabilities must be non-negative")
        total = probs.sum()
        if abs(total - 1.0) > self.norm_tol:
            raise InvalidParameterError(
                f"joint not normalized: sum deviates by {total - 1.0:.3e} (tol {self.norm_tol:.1e})"
            )
        object.__setattr__(self, "probs", probs)

    def marginal_earlier(self) -> np.ndarray:
        return self.probs.sum(axis=0)

    def marginal_later(self) -> np.ndarray:
        return self.probs.sum(axis=1)


class JointDistribution3:
    """p(k2, k1, k0) for three sequential energy measurements.

    Exact protocols are stored in factorized form (two transition matrices plus the
    initial populations); the full cube is materialized only on demand, so large
    truncated-oscillator protocols stay cheap.  Empirical frequency tables from the
    trajectory sampler store the cube directly with a `sample_count` annotation.
    """

    def __init__(self, spectra, *, trans10=None, trans21=None, populations=None,
                 cube=None, sample_count=None, norm_tol: float = JOINT_NORM_TOL):
        self.spectra = tuple(spectra)  # (t0, t1, t2)
        if len(self.spectra) != 3:
            raise InvalidParameterError("three spectra are required")
        self.sample_count = sample_count
        self.norm_tol = norm_tol
        self._trans10 = trans10
        self._trans21 = trans21
        self._populations = populations
        self._cube = cube
        if abs(self.total_mass() - 1.0) > norm_tol:
            raise InvalidParameterError(
                f"three-time joint not normalized: off by {self.total_mass() - 1.0:.3e}"
            )

    @classmethod
    def from_factors(cls, trans21, trans10, populations, spectra,
                     norm_tol: float = JOINT_NORM_TOL) -> "JointDistribution3":
        trans21 = np.asarray(trans21, dtype=float)
        trans10 = np.asarray(trans10, dtype=float)
        populations = np.asarray(populations, dtype=float)
        if trans10.shape[1] != populations.size or trans21.shape[1] != trans10.shape[0]:
            raise InvalidParameterError("factor dimensions are inconsistent")
        return cls(spectra, trans10=trans10, trans21=trans21,
                   populations=populations, norm_tol=norm_tol)

    @classmethod
    def from_cube(cls, cube, spectra, sample_count=None,
                  norm_tol: float = JOINT_NORM_TOL) -> "JointDistribution3":
        cube = np.asarray(cube, dtype=float)
        if cube.ndim != 3:
            raise InvalidParameterError("cube must have three axes (k2, k1, k0)")
        if np.any(cube < 0):
            raise InvalidParameterError("probabilities must be non-negative")
        return cls(spectra, cube=cube, sample_count=sample_count, norm_tol=norm_tol)

    @property
    def dims(self) -> tuple[int, int, int]:
        if self._cube is not None:
            return self._cube.shape
        return (self._trans21.shape[0], self._trans10.shape[0], self._populations.size)

    @property
    def probs(self) -> np.ndarray:
        """The full cube p[k2, k1, k0]; materialized lazily for factorized protocols."""
        if self._cube is None:
            leg1 = self._trans10 * self._populations[None, :]
            self._cube = self._trans21[:, :, None] * leg1[None, :, :]
        return self._cube

    def total_mass(self) -> float:
        if self._cube is not None:
            return float(self._cube.sum())
        p1 = self._trans10 @ self._populations
        return float(self._trans21.sum(axis=0) @ p1)

    def marginal_t1_t0(self) -> JointDistribution:
        """Sum over k2.  In factorized form this is the first-leg joint itself,
        because the k2 transition columns each sum to one up to the declared
        normalization tolerance."""
        if self._cube is not None:
            probs = self._cube.sum(axis=0)
        else:
            probs = self._trans10 * self._populations[None, :]
        return JointDistribution(probs, self.spectra[0], self.spectra[1],
                                 norm_tol=self.norm_tol)

    def marginal_t2_t1(self) -> JointDistribution:
        if self._cube is not None:
            probs = self._cube.sum(axis=2)
        else:
            p1 = self._trans10 @ self._populations
            probs = self._trans21 * p1[None, :]
        return JointDistribution(probs, self.spectra[1], self.spectra[2],
                                 norm_tol=self.norm_tol)

    def marginal_t2_t0(self) -> JointDistribution:
        """Sum over the middle outcome.  This is the *measured* (t2, t0) marginal;
        it differs from the no-middle-measurement joint whenever the middle
        measurement is invasive."""
        if self._cube is not None:
            probs = self._cube.sum(axis=1)
        else:
            probs = (self._trans21 @ self._trans10) * self._populations[None, :]
        return JointDistribution(probs, self.spectra[0], self.spectra[2],
                                 norm_tol=self.norm_tol)

    def marginal_t1(self) -> np.ndarray:
        if self._cube is not None:
            return self._cube.sum(axis=(0, 2))
        return self._trans10 @ self._populations


def two_time_joint(rho0: DiagonalDensity, u: UnitaryPropagator,
                   spectrum_later: EnergySpectrum | None = None,
                   norm_tol: float = JOINT_NORM_TOL) -> JointDistribution:
    """Joint outcome distribution for measure / evolve / measure."""
    if u.dim != rho0.dim:
        raise InvalidParameterError("propagator and state dimensions differ")
    if spectrum_later is None:
        spectrum_later = _relabel(rho0.spectrum, rho0.spectrum.label + 1)
    probs = transition_probabilities(u) * rho0.populations[None, :]
    return JointDistribution(probs, rho0.spectrum, spectrum_later, norm_tol=norm_tol)


def three_time_joint(rho0: DiagonalDensity, u10: UnitaryPropagator, u21: UnitaryPropagator,
                     spectrum_1: EnergySpectrum | None = None,
                     spectrum_2: EnergySpectrum | None = None,
                     norm_tol: float = JOINT_NORM_TOL) -> JointDistribution3:
    """Joint outcome distribution with a projective measurement at all three times."""
    if u10.dim != rho0.dim or u21.dim != u10.dim:
        raise InvalidParameterError("propagator and state dimensions differ")
    s0 = rho0.spectrum
    s1 = spectrum_1 if spectrum_1 is not None else _relabel(s0, s0.label + 1)
    s2 = spectrum_2 if spectrum_2 is not None else _relabel(s0, s0.label + 2)
    return JointDistribution3.from_factors(
        transition_probabilities(u21), transition_probabilities(u10),
        rho0.populations, (s0, s1, s2), norm_tol=norm_tol)


def two_time_joint_skipping_middle(rho0: DiagonalDensity, u10: UnitaryPropagator,
                                   u21: UnitaryPropagator,
                                   spectrum_later: EnergySpectrum | None = None,
                                   norm_tol: float = JOINT_NORM_TOL) -> JointDistribution:
    """(t2, t0) joint when no measurement happens at t1: compose first, then measure."""
    if spectrum_later is None:
        spectrum_later = _relabel(rho0.spectrum, rho0.spectrum.label + 2)
    return two_time_joint(rho0, compose_propagators(u10, u21),
                          spectrum_later=spectrum_later, norm_tol=norm_tol)


@dataclass(frozen=True)
class WorkDistribution:
    """Discrete work values with probabilities.

    `view` is "fine" (one entry per contributing index pair, zero-probability pairs
    dropped) or "grouped" (entries within `WORK_DEGENERACY_TOL` of each other merged,
    values strictly increasing).  `sources` lists the contributing
    (k_later, k_earlier) pairs of each entry.
    """

    works: np.ndarray
    probabilities: np.ndarray
    sources: tuple[tuple[tuple[int, int], ...], ...]
    view: str
    norm_tol: float = JOINT_NORM_TOL

    def __post_init__(self):
        works = np.asarray(self.works, dtype=float)
        probs = np.asarray(self.probabilities, dtype=float)
        if works.shape != probs.shape or works.ndim != 1:
            raise InvalidParameterError("works and probabilities must be 1-d and aligned")
        if self.view not in ("fine", "grouped"):
            raise InvalidParameterError(f"unknown view {self.view!r}")
        if abs(probs.sum() - 1.0) > self.norm_tol:
            raise InvalidParameterError(
                f"work distribution not normalized: off by {probs.sum() - 1.0:.3e}"
            )
        if self.view == "grouped" and np.any(np.diff(works) <= 0):
            raise InvalidParameterError("grouped work values must be strictly increasing")
        object.__setattr__(self, "works", works)
        object.__setattr__(self, "probabilities", probs)

    def grouped(self, tol: float = WORK_DEGENERACY_TOL) -> "WorkDistribution":
        """Merge entries whose work values coincide within `tol` (adjacent-gap clustering)."""
        if self.view == "grouped":
            return self
        order = np.argsort(self.works, kind="stable")
        works = self.works[order]
        probs = self.probabilities[order]
        sources = [self.sources[k] for k in order]
        boundaries = np.flatnonzero(np.diff(works) >= tol) + 1
        merged_w, merged_p, merged_src = [], [], []
        for chunk in np.split(np.arange(works.size), boundaries):
            p = probs[chunk].sum()
            merged_w.append(float(np.dot(works[chunk], probs[chunk]) / p))
            merged_p.append(float(p))
            merged_src.append(tuple(pair for k in chunk for pair in sources[k]))
        return WorkDistribution(np.array(merged_w), np.array(merged_p),
                                tuple(merged_src), "grouped", norm_tol=self.norm_tol)


def work_distribution(joint: JointDistribution, view: str = "grouped",
                      degeneracy_tol: float = WORK_DEGENERACY_TOL) -> WorkDistribution:
    """Distribution of w = E_later(k_j) - E_earlier(k_i) under `joint`."""
    later, earlier = np.nonzero(joint.probs)
    works = joint.spectrum_later.levels[later] - joint.spectrum_earlier.levels[earlier]
    probs = joint.probs[later, earlier]
    order = np.lexsort((earlier, later, works))
    fine = WorkDistribution(works[order], probs[order],
                            tuple(((int(later[k]), int(earlier[k])),) for k in order),
                            "fine", norm_tol=joint.norm_tol)
    if view == "fine":
        return fine
    if view == "grouped":
        return fine.grouped(degeneracy_tol)
    raise InvalidParameterError(f"unknown view {view!r}")


def total_work_distribution(joint3: JointDistribution3, view: str = "grouped",
                            degeneracy_tol: float = WORK_DEGENERACY_TOL) -> WorkDistribution:
    """Distribution of w1 + w2; depends only on the first and last outcomes."""
    return work_distribution(joint3.marginal_t2_t0(), view=view,
                             degeneracy_tol=degeneracy_tol)


def work_pair_distribution(joint3: JointDistribution3) -> list[tuple[float, float, float]]:
    """(w1, w2, probability) triples, one per outcome path with nonzero probability.

    Materializes the cube; intended for modest dimensions.
    """
    cube = joint3.probs
    s0, s1, s2 = joint3.spectra
    k2, k1, k0 = np.nonzero(cube)
    w1 = s1.levels[k1] - s0.levels[k0]
    w2 = s2.levels[k2] - s1.levels[k1]
    order = np.lexsort((k0, k1, k2))
    return [(float(w1[k]), float(w2[k]), float(cube[k2[k], k1[k], k0[k]])) for k in order]


def jarzynski_deviation(workdist: WorkDistribution, beta: float, delta_f: float) -> float:
    """|<exp(-beta w)> - exp(-beta dF)|, accumulated in log space to avoid overflow."""
    if not (beta > 0 and math.isfinite(beta)):
        raise InvalidParameterError("beta must be positive and finite")
    mask = workdist.probabilities > 0
    lse = logsumexp(np.log(workdist.probabilities[mask]) - beta * workdist.works[mask])
    return abs(math.exp(-beta * delta_f) * math.expm1(lse + beta * delta_f))


def sample_trajectories(rho0: DiagonalDensity, u10: UnitaryPropagator,
                        u21: UnitaryPropagator, n_samples: int, seed: int,
                        spectrum_1: EnergySpectrum | None = None,
                        spectrum_2: EnergySpectrum | None = None) -> JointDistribution3:
    """Monte Carlo frequency table of (k0, k1, k2) outcome triples.

    Draws are inverse-CDF per conditioning column, so two runs with the same seed
    produce bit-identical tables.
    """
    if n_samples < 1:
        raise InvalidParameterError("n_samples must be at least 1")
    s0 = rho0.spectrum
    s1 = spectrum_1 if spectrum_1 is not None else _relabel(s0, s0.label + 1)
    s2 = spectrum_2 if spectrum_2 is not None else _relabel(s0, s0.label + 2)
    rng = np.random.default_rng(seed)
    k0 = _sample_categorical(rng, np.broadcast_to(rho0.populations[:, None],
                                                  (rho0.dim, 1)), np.zeros(n_samples, int))
    k1 = _sample_categorical(rng, transition_probabilities(u10), k0)
    k2 = _sample_categorical(rng, transition_probabilities(u21), k1)
    dims = (u21.dim, u10.dim, rho0.dim)
    flat = np.ravel_multi_index((k2, k1, k0), dims)
    counts = np.bincount(flat, minlength=int(np.prod(dims))).reshape(dims)
    return JointDistribution3.from_cube(counts / n_samples, (s0, s1, s2),
                                        sample_count=n_samples)


def _sample_categorical(rng, columns: np.ndarray, conditions: np.ndarray) -> np.ndarray:
    """Draw outcome[j] ~ columns[:, conditions[j]] via per-column CDF inversion."""
    cdf = np.cumsum(columns, axis=0)
    cdf /= cdf[-1, :]
    u = rng.random(conditions.size)
    out = np.empty(conditions.size, dtype=int)
    for col in np.unique(conditions):
        idx = np.nonzero(conditions == col)[0]
        out[idx] = np.searchsorted(cdf[:, col], u[idx], side="right")
    return np.minimum(out, columns.shape[0] - 1)


def total_variation_distance(a: JointDistribution, b: JointDistribution) -> float:
    if a.probs.shape != b.probs.shape:
        raise InvalidParameterError("distributions must share a shape")
    return 0.5 * float(np.abs(a.probs - b.probs).sum())


def empirical_chi_squared_pvalue(empirical: JointDistribution3,
                                 exact: JointDistribution3) -> float:
    """Goodness-of-fit p-value of a sampled frequency table against the exact cube.

    Cells with zero exact probability must be empty in the sample; remaining cells
    enter a standard chi-squared statistic with (support - 1) degrees of freedom.
    """
    n = empirical.sample_count
    if n is None:
        raise InvalidParameterError("first argument must be a sampled frequency table")
    observed = empirical.probs * n
    expected = exact.probs * n
    support = expected > 0
    if np.any(observed[~support] > 0):
        return 0.0
    statistic = float(((observed[support] - expected[support]) ** 2
                       / expected[support]).sum())
    dof = int(support.sum()) - 1
    if dof <= 0:
        return 1.0
    return float(stats.chi2.sf(statistic, dof))
