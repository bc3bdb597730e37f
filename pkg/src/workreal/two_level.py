"""Driven two-level system in the adiabatic basis and its angle sweep.

The propagator between measurement bases is the standard SU(2) matrix

    [[ exp(i(alpha+beta)/2) cos(theta/2),  exp(i(alpha-beta)/2) sin(theta/2)],
     [-exp(-i(alpha-beta)/2) sin(theta/2), exp(-i(alpha+beta)/2) cos(theta/2)]]

which reduces to a real rotation for alpha = beta = 0.  theta controls how much
population transfers between the instantaneous eigenstates; theta = 0 is the
adiabatic limit.  Both evolution intervals use the same matrix in the sweep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .entropy import shannon_entropy, work_entropy
from .errors import InvalidParameterError
from .hilbert import DiagonalDensity, EnergySpectrum, UnitaryPropagator, build_thermal_state
from .leggett_garg import (
    GROUND_EXCITED,
    LGResult,
    correlator_set,
    k3_correlator,
    k3_correlator_flipped,
    k3_entropic,
)
from .protocol import three_time_joint, two_time_joint_skipping_middle, work_distribution
from .tables import SweepTable

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TlsAngles:
    theta: float
    alpha: float = 0.0
    beta_angle: float = 0.0

    def __post_init__(self):
        for name in ("theta", "alpha", "beta_angle"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParameterError(f"{name} must be finite")
        object.__setattr__(self, "theta", self.theta % TWO_PI)


def tls_propagator(angles: TlsAngles) -> UnitaryPropagator:
    """The 2x2 adiabatic-basis propagator for the given angles."""
    c = math.cos(angles.theta / 2.0)
    s = math.sin(angles.theta / 2.0)
    plus = 0.5 * (angles.alpha + angles.beta_angle)
    minus = 0.5 * (angles.alpha - angles.beta_angle)
    matrix = np.array([
        [np.exp(1j * plus) * c, np.exp(1j * minus) * s],
        [-np.exp(-1j * minus) * s, np.exp(-1j * plus) * c],
    ])
    return UnitaryPropagator(matrix, unitarity_tol=1e-14)


def tls_spectrum(label: int = 0, levels=(0.0, 1.0)) -> EnergySpectrum:
    """Ground/excited spectrum with unit splitting unless overridden."""
    return EnergySpectrum(np.asarray(levels, dtype=float), label=label)


def incommensurate_tls_spectra() -> tuple[EnergySpectrum, EnergySpectrum, EnergySpectrum]:
    """Splittings 1, sqrt2, sqrt3: no two work values coincide, so the grouped and
    fine-grained conventions agree."""
    return (tls_spectrum(0, (0.0, 1.0)),
            tls_spectrum(1, (0.0, math.sqrt(2.0))),
            tls_spectrum(2, (0.0, math.sqrt(3.0))))


def default_theta_grid(n_points: int = 721) -> np.ndarray:
    return np.linspace(0.0, TWO_PI, n_points)


def tls_lg_parameters(beta: float, angles: TlsAngles,
                      spectra: tuple[EnergySpectrum, EnergySpectrum, EnergySpectrum] | None = None,
                      base: float = math.e,
                      rho0: DiagonalDensity | None = None) -> dict[str, float]:
    """All macrorealism parameters for one angle setting (both intervals equal)."""
    if spectra is None:
        spectra = (tls_spectrum(0), tls_spectrum(1), tls_spectrum(2))
    s0, s1, s2 = spectra
    if rho0 is None:
        rho0 = build_thermal_state(s0, beta)
    u = tls_propagator(angles)
    correlators = correlator_set(rho0, u, u, GROUND_EXCITED)
    joint3 = three_time_joint(rho0, u, u, spectrum_1=s1, spectrum_2=s2)
    no_middle = two_time_joint_skipping_middle(rho0, u, u, spectrum_later=s2)
    h_e1 = shannon_entropy(joint3.marginal_t1(), base=base)
    out = {
        "k_cor": k3_correlator(correlators),
        "k_cor_flipped": k3_correlator_flipped(correlators),
    }
    for view in ("fine", "grouped"):
        h_w10 = work_entropy(work_distribution(joint3.marginal_t1_t0(), view=view), base=base)
        h_w21 = work_entropy(work_distribution(joint3.marginal_t2_t1(), view=view), base=base)
        h_w20 = work_entropy(work_distribution(no_middle, view=view), base=base)
        out[f"k_en_{view}"] = k3_entropic(h_w21, h_w10, h_w20, h_e1)
    return out


def tls_lg_result(beta: float, angles: TlsAngles, degeneracy: str = "fine",
                  tol_violation: float = 0.0) -> LGResult:
    """Single-point summary with violation flags, using one work-entropy convention."""
    values = tls_lg_parameters(beta, angles)
    return LGResult(k_cor=values["k_cor"], k_cor_flipped=values["k_cor_flipped"],
                    k_en=values[f"k_en_{degeneracy}"], tol_violation=tol_violation)


def tls_theta_sweep(beta: float = 1.0, theta_grid: np.ndarray | None = None,
                    spectra=None, alpha: float = 0.0, beta_angle: float = 0.0,
                    base: float = math.e) -> SweepTable:
    """Macrorealism parameters on a theta grid at fixed inverse temperature."""
    if theta_grid is None:
        theta_grid = default_theta_grid()
    theta_grid = np.asarray(theta_grid, dtype=float)
    if theta_grid.size == 0 or not np.all(np.isfinite(theta_grid)):
        raise InvalidParameterError("theta grid must be non-empty and finite")
    if spectra is None:
        spectra = (tls_spectrum(0), tls_spectrum(1), tls_spectrum(2))
    rho0 = build_thermal_state(spectra[0], beta)
    columns = ["theta", "k_cor", "k_cor_flipped", "k_en_fine", "k_en_grouped"]
    rows = np.empty((theta_grid.size, len(columns)))
    for k, theta in enumerate(theta_grid):
        values = tls_lg_parameters(beta, TlsAngles(theta, alpha, beta_angle),
                                   spectra=spectra, base=base, rho0=rho0)
        rows[k] = (theta, values["k_cor"], values["k_cor_flipped"],
                   values["k_en_fine"], values["k_en_grouped"])
    return SweepTable(columns, rows, meta={
        "experiment": "tls-theta", "beta": beta,
        "entropy_base": "2" if base == 2 else "e",
        "theta_points": theta_grid.size,
    })
