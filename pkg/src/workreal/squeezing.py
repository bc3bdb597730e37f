"""Truncated-Fock squeezing propagator and the oscillator sweeps.

The transition matrix G_{mn}(r) = <m|U_r|n> of the squeeze unitary
U_r = exp[(r/2)(adag^2 - a^2)] is evaluated from its closed-form series over
number-state paths:

    G_{mn} = (-1)^{floor(n/2)} sqrt(m! n!) sech(r)^{1/2}
             * sum_i (-4)^i sinh(r)^{(m+n)/2 - 2i - p} (2 cosh(r))^{-(m+n)/2}
                     * 2^p / [(2i+p)! ((m-p)/2 - i)! ((n-p)/2 - i)!]

with p = 0 (1) for even (odd) m, n and zero whenever m + n is odd.  The series is
summed in log space with signed accumulation, which keeps 200!-scale factorials
finite but cannot help where the alternating terms cancel almost completely (large
m and n simultaneously).  Elements whose cancellation exceeds what float64 can
certify are therefore recomputed from the exponential of the generator's
antisymmetric tridiagonal parity blocks via an orthogonal eigendecomposition,
which is unconditionally stable.  An independent scaling-and-squaring matrix
exponential is kept as the ground-truth oracle for gate comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal, expm
from scipy.special import gammaln

from .entropy import shannon_entropy, work_entropy
from .errors import InvalidParameterError, TruncationError
from .hilbert import EnergySpectrum, UnitaryPropagator, build_thermal_state
from .protocol import JointDistribution, JointDistribution3, work_distribution
from .tables import SweepTable, contour_points

EPS = float(np.finfo(float).eps)
THERMAL_TAIL_TOL = 1e-12
COLUMN_DEFECT_TOL = 1e-10
SUPPORT_TOL = 1e-10
SERIES_REL_TOL = 1e-12
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SqueezeParams:
    """Squeeze amplitude and phase; the phase is fixed to zero in this package."""

    r: float
    phi: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.r) and self.r >= 0.0):
            raise InvalidParameterError(f"squeeze amplitude must be >= 0, got {self.r}")
        if self.phi != 0.0:
            raise InvalidParameterError("nonzero squeeze phase is not supported")
        mu, nu = self.mu, self.nu
        if abs(mu * mu - nu * nu - 1.0) > 1e-12 * max(1.0, mu * mu):
            raise InvalidParameterError("Bogoliubov coefficients violate mu^2 - nu^2 = 1")

    @property
    def mu(self) -> float:
        return math.cosh(self.r)

    @property
    def nu(self) -> float:
        return math.sinh(self.r)


@dataclass
class SqueezeMatrix:
    """Real transition matrix G_{mn}(r) on a truncated number basis.

    `column_defects[n]` is |1 - sum_m G_{mn}^2|, the mass a unit population on level
    n would leak past the truncation.  `series_fraction` reports how much of the
    matrix came straight from the series (the rest from the eigendecomposition
    fallback); it is 1.0 wherever float64 can certify the series.
    """

    g: np.ndarray
    r: float
    n_max: int
    column_defects: np.ndarray = field(init=False)
    series_fraction: float = 1.0

    def __post_init__(self):
        self.column_defects = np.abs(1.0 - (self.g * self.g).sum(axis=0))

    @property
    def transition_probabilities(self) -> np.ndarray:
        return self.g * self.g


@lru_cache(maxsize=64)
def _log_factorials(size: int) -> np.ndarray:
    return gammaln(np.arange(size, dtype=float) + 1.0)


def _series_blocks(r: float, size: int) -> tuple[np.ndarray, np.ndarray]:
    """Signed log-space evaluation of the closed-form series.

    Returns (values, certified).  certified[m, n] is False where the alternating
    sum cancelled past the float64 noise floor, i.e. where `values` cannot be
    trusted to ~1e-12 relative or 1e-16 absolute.
    """
    g = np.zeros((size, size))
    certified = np.ones((size, size), dtype=bool)
    lf = _log_factorials(2 * size + 2)
    ls = math.log(math.sinh(r))
    lc2 = math.log(2.0 * math.cosh(r))
    lch = math.log(math.cosh(r))
    for p in (0, 1):
        levels = np.arange(p, size, 2)
        n_half = levels.size
        if n_half == 0:
            continue
        half = np.arange(n_half)
        base = 0.5 * lf[levels] + half * (ls - lc2)
        running_max = np.full((n_half, n_half), -np.inf)
        acc = np.zeros((n_half, n_half))
        for i in range(n_half):
            c_i = -2.0 * i * (ls - lc2) - (2 * i + p + 0.5) * lch - lf[2 * i + p]
            u = base[i:] - lf[: n_half - i]
            term = u[:, None] + u[None, :] + c_i
            view_max = running_max[i:, i:]
            new_max = np.maximum(view_max, term)
            acc[i:, i:] = acc[i:, i:] * np.exp(view_max - new_max) \
                + (-1.0) ** i * np.exp(term - new_max)
            running_max[i:, i:] = new_max
        n_terms = np.minimum(half[:, None], half[None, :]) + 1.0
        noise = EPS * n_terms
        abs_acc = np.abs(acc)
        with np.errstate(divide="ignore", over="ignore"):
            ok = (noise < SERIES_REL_TOL * abs_acc) \
                | (running_max + np.log(noise) < math.log(1e-16))
            log_val = running_max + np.log(np.where(abs_acc > 0.0, abs_acc, 1.0))
            vals = np.where((abs_acc > 0.0) & ok,
                            np.sign(acc) * np.exp(np.minimum(log_val, 700.0)), 0.0)
        sign = np.where(half % 2 == 0, 1.0, -1.0)  # (-1)^{floor(n/2)}
        idx = np.ix_(levels, levels)
        g[idx] = vals * sign[None, :]
        certified[idx] = ok
    return g, certified


def _eigen_exponential(r: float, size: int) -> np.ndarray:
    """exp of the squeeze generator via its antisymmetric tridiagonal parity blocks.

    i*T is Hermitian; conjugating by diag(i^x) turns it into a real symmetric
    tridiagonal matrix, so exp(T) = V f(Lambda) V^T up to i-power phases that
    reduce to cos/sin selections on the (row - column) offset.
    """
    g = np.zeros((size, size))
    for p in (0, 1):
        levels = np.arange(p, size, 2)
        n_half = levels.size
        if n_half == 0:
            continue
        if n_half == 1:
            g[levels[0], levels[0]] = 1.0 if r == 0.0 else math.cosh(r) ** -0.5 \
                if p == 0 else math.cosh(r) ** -1.5
            continue
        lev = levels.astype(float)
        off_diag = 0.5 * r * np.sqrt((lev[:-1] + 1.0) * (lev[:-1] + 2.0))
        lam, vec = eigh_tridiagonal(np.zeros(n_half), off_diag)
        cos_part = (vec * np.cos(lam)) @ vec.T
        sin_part = (vec * np.sin(lam)) @ vec.T
        offset = np.arange(n_half)[:, None] - np.arange(n_half)[None, :]
        block = np.where(offset % 2 == 0,
                         np.where(offset % 4 == 0, cos_part, -cos_part),
                         np.where(offset % 4 == 1, sin_part, -sin_part))
        g[np.ix_(levels, levels)] = block
    return g


def _validate_squeeze_args(r: float, n_max: int) -> None:
    if not (math.isfinite(r) and r >= 0.0):
        raise InvalidParameterError(f"squeeze amplitude must be >= 0, got {r}")
    if n_max < 1:
        raise InvalidParameterError("n_max must be at least 1")


def _closed_form_uncached(r: float, n_max: int) -> SqueezeMatrix:
    size = n_max + 1
    if r == 0.0:
        return SqueezeMatrix(np.eye(size), r, n_max, series_fraction=1.0)
    values, certified = _series_blocks(r, size)
    if certified.all():
        return SqueezeMatrix(values, r, n_max, series_fraction=1.0)
    filled = np.where(certified, values, _eigen_exponential(r, size))
    return SqueezeMatrix(filled, r, n_max, series_fraction=float(certified.mean()))


@lru_cache(maxsize=12)
def _closed_form_cached(r: float, n_max: int) -> SqueezeMatrix:
    return _closed_form_uncached(r, n_max)


def squeeze_matrix_closed_form(r: float, n_max: int) -> SqueezeMatrix:
    """Closed-form squeeze transition matrix; see the module docstring."""
    _validate_squeeze_args(r, n_max)
    return _closed_form_cached(float(r), int(n_max))


def squeeze_matrix_legacy_transcription(r: float, n_max: int) -> np.ndarray:
    """A known mis-transcription of the series, retained only for diagnosis.

    Sums start at i = 1 instead of 0, the prefactor is 1/cosh(r) instead of
    sech(r)^{1/2} with sign (-1)^{floor(m/2)}, and the odd branch scales as
    (2 cosh r)^{-(m+n)/2 - 1}.  It fails the oracle comparison badly (already
    G_{00} = 0), which is how the corrected transcription above was pinned down.
    """
    _validate_squeeze_args(r, n_max)
    if n_max > 64:
        raise InvalidParameterError("diagnostic transcription is capped at n_max = 64")
    size = n_max + 1
    if r == 0.0:
        return np.eye(size)
    g = np.zeros((size, size))
    sh, ch = math.sinh(r), math.cosh(r)
    for m in range(size):
        for n in range(size):
            if (m + n) % 2:
                continue
            p = m % 2
            total = 0.0
            for i in range(1, min((m - p) // 2, (n - p) // 2) + 1):
                log_mag = (0.5 * (gammaln(m + 1) + gammaln(n + 1))
                           + i * math.log(4.0)
                           + (0.5 * (m + n) - 2 * i - p) * math.log(sh)
                           - (0.5 * (m + n) + p) * math.log(2.0 * ch)
                           - gammaln(2 * i + p + 1)
                           - gammaln((m - p) // 2 - i + 1)
                           - gammaln((n - p) // 2 - i + 1))
                total += (-1.0) ** i * math.exp(min(log_mag, 700.0))
            g[m, n] = (-1.0) ** (m // 2) / ch * total
    return g


def squeeze_matrix_exponential_oracle(r: float, n_max: int) -> SqueezeMatrix:
    """Ground truth by scaling-and-squaring: expm of (r/2)(adag^2 - a^2)."""
    _validate_squeeze_args(r, n_max)
    size = n_max + 1
    if r == 0.0:
        return SqueezeMatrix(np.eye(size), r, n_max)
    raising_sq = np.zeros((size, size))
    for m in range(size - 2):
        raising_sq[m + 2, m] = math.sqrt((m + 1.0) * (m + 2.0))
    return SqueezeMatrix(expm(0.5 * r * (raising_sq - raising_sq.T)), r, n_max)


def squeeze_propagator(sq: SqueezeMatrix,
                       unitarity_tol: float | None = None) -> UnitaryPropagator:
    """Wrap a truncated squeeze matrix as a propagator.

    A truncated squeeze is orthogonal only away from the truncation edge, so the
    whole-matrix deviation is dominated by the top corner no matter how large the
    basis is.  By default the measured deviation itself is declared as the
    tolerance; accuracy inside the trusted band is certified separately by the
    per-column defects.
    """
    from .hilbert import validate_unitary
    matrix = sq.g.astype(complex)
    if unitarity_tol is None:
        unitarity_tol = validate_unitary(matrix) * (1.0 + 1e-9) + 1e-12
    return UnitaryPropagator(matrix, unitarity_tol=unitarity_tol)


def oscillator_spectrum(n_max: int, label: int = 0, omega: float = 1.0) -> EnergySpectrum:
    """E_n = omega (n + 1/2) on the truncated number basis."""
    return EnergySpectrum(omega * (np.arange(n_max + 1.0) + 0.5), label=label)


def thermal_tail_mass(beta: float, n_max: int) -> float:
    """Exact thermal mass above level n_max for the ladder spectrum: q^(n_max+1)."""
    if not (beta > 0 and math.isfinite(beta)):
        raise InvalidParameterError("beta must be positive and finite")
    return math.exp(-beta * (n_max + 1.0))


def _thermal_support(beta: float, tol: float) -> int:
    """Smallest K with thermal mass above K below `tol`."""
    return max(0, int(math.ceil(-math.log(tol) / beta)) - 1)


@lru_cache(maxsize=256)
def _select_n_max_cached(beta: float, r_total: float) -> int:
    support_hi = _thermal_support(beta, SUPPORT_TOL)
    n_thermal = _thermal_support(beta, THERMAL_TAIL_TOL)
    guess = max(n_thermal + 1, int((support_hi + 8) * math.exp(2.0 * r_total)) + 8, 48)
    candidate = 64 * int(math.ceil(guess / 64.0))
    while candidate <= 8192:
        matrix = _closed_form_cached(r_total, candidate)
        if matrix.column_defects[: support_hi + 1].max() < COLUMN_DEFECT_TOL:
            return candidate
        candidate += max(64, (candidate // 128) * 64)
    raise TruncationError(
        f"no truncation below 8192 levels meets the budget for beta={beta}, r={r_total}")


def select_n_max(beta: float, r_total: float) -> int:
    """Smallest multiple-of-64 truncation with thermal tail below 1e-12 and
    squeeze-column defects below 1e-10 on the thermally occupied support.

    `r_total` is the largest squeeze amplitude the run will compose (r1 + r2).
    The amplitude is quantized upward to 0.02 so repeated nearby queries share a
    cached answer; a larger amplitude never yields a smaller truncation.
    """
    if not (beta > 0 and math.isfinite(beta)):
        raise InvalidParameterError("beta must be positive and finite")
    if not (math.isfinite(r_total) and r_total >= 0.0):
        raise InvalidParameterError("r_total must be >= 0")
    quantized = round(math.ceil(r_total / 0.02) * 0.02, 10)
    return _select_n_max_cached(float(beta), quantized)


@dataclass
class OscillatorProtocol:
    """A three-point squeeze protocol with its truncation certificate.

    `truncation_budget` bounds every truncation effect in the run: probability
    mass missing from the joints plus the thermal tail, with a safety factor.
    """

    joint3: JointDistribution3
    no_middle: JointDistribution
    beta: float
    r1: float
    r2: float
    n_max: int
    thermal_tail: float
    mass_deficit_measured: float
    mass_deficit_no_middle: float
    truncation_budget: float
    spectra: tuple[EnergySpectrum, EnergySpectrum, EnergySpectrum]


def _budget(thermal_tail: float, deficit_a: float, deficit_b: float) -> float:
    return 10.0 * (thermal_tail + abs(deficit_a) + abs(deficit_b)) + 1e-10


def oscillator_three_time(beta: float, r1: float, r2: float,
                          n_max: int | None = None,
                          max_budget: float = 1e-6) -> OscillatorProtocol:
    """Exact outcome statistics for squeeze(r1), measure, squeeze(r2).

    The no-middle branch uses the composed squeeze r1 + r2 directly, since
    zero-phase squeezes compose additively.  Raises TruncationError when the
    thermal tail or the measured leakage exceeds what `max_budget` allows.
    """
    for name, r in (("r1", r1), ("r2", r2)):
        if not (math.isfinite(r) and r >= 0.0):
            raise InvalidParameterError(f"{name} must be >= 0, got {r}")
    if n_max is None:
        n_max = select_n_max(beta, r1 + r2)
    tail = thermal_tail_mass(beta, n_max)
    if tail > THERMAL_TAIL_TOL:
        raise TruncationError(
            f"thermal tail {tail:.3e} above {THERMAL_TAIL_TOL:.1e} at "
            f"beta={beta}, n_max={n_max}", leaked_mass=tail)
    spectra = tuple(oscillator_spectrum(n_max, label=k) for k in range(3))
    rho0 = build_thermal_state(spectra[0], beta)
    t1 = squeeze_matrix_closed_form(r1, n_max).transition_probabilities
    t2 = squeeze_matrix_closed_form(r2, n_max).transition_probabilities
    t_total = squeeze_matrix_closed_form(r1 + r2, n_max).transition_probabilities
    pops = rho0.populations
    deficit_measured = 1.0 - float(t2.sum(axis=0) @ (t1 @ pops))
    deficit_no_middle = 1.0 - float(t_total.sum(axis=0) @ pops)
    budget = _budget(tail, deficit_measured, deficit_no_middle)
    if budget > max_budget:
        raise TruncationError(
            f"truncation budget {budget:.3e} exceeds {max_budget:.1e} at "
            f"beta={beta}, r1={r1}, r2={r2}, n_max={n_max}",
            leaked_mass=max(abs(deficit_measured), abs(deficit_no_middle)))
    joint3 = JointDistribution3.from_factors(t2, t1, pops, spectra, norm_tol=budget)
    no_middle = JointDistribution(t_total * pops[None, :], spectra[0], spectra[2],
                                  norm_tol=budget)
    return OscillatorProtocol(joint3, no_middle, beta, r1, r2, n_max, tail,
                              deficit_measured, deficit_no_middle, budget, spectra)


def _column_entropies(t: np.ndarray) -> np.ndarray:
    logs = np.log(np.where(t > 0.0, t, 1.0))
    return -np.einsum("mn,mn->n", t, logs)


_GROUPING_OFFSETS: dict[int, np.ndarray] = {}


def _grouped_work_entropy(joint_probs: np.ndarray) -> float:
    """Work entropy for an equal-ladder joint, where w is set by m - n alone."""
    size = joint_probs.shape[0]
    offsets = _GROUPING_OFFSETS.get(size)
    if offsets is None:
        offsets = (np.arange(size)[:, None] - np.arange(size)[None, :] + size - 1).ravel()
        _GROUPING_OFFSETS[size] = offsets
    pw = np.bincount(offsets, weights=joint_probs.ravel(), minlength=2 * size - 1)
    nz = pw[pw > 0.0]
    return float(-(nz * np.log(nz)).sum())


def _entropy(p: np.ndarray) -> float:
    nz = p[p > 0.0]
    return float(-(nz * np.log(nz)).sum())


def _check_conventions(degeneracy: str, middle_entropy: str) -> None:
    if degeneracy not in ("fine", "grouped"):
        raise InvalidParameterError(f"unknown degeneracy convention {degeneracy!r}")
    if middle_entropy not in ("initial", "measured"):
        raise InvalidParameterError(
            f"unknown middle-entropy convention {middle_entropy!r}")


def entropic_k3_oscillator(beta: float, r1: float, r2: float,
                           n_max: int | None = None, degeneracy: str = "fine",
                           base: float = math.e,
                           middle_entropy: str = "initial") -> tuple[float, float]:
    """The entropic macrorealism parameter and the truncation budget of its run.

    `middle_entropy` picks the distribution whose entropy enters as H(E1):
    "measured" uses the middle marginal of the three-point protocol (the literal
    reading of the bound), "initial" evaluates it on the thermal populations
    instead.  The initial-state variant remains a valid witness (the squeeze
    transition matrix is doubly stochastic, so the propagated marginal can only
    gain entropy); it is the default for the sweeps because it keeps the
    temperature dependence of the violation depth monotone, which the strict
    variant does not.  Both are cross-checked in the module tests.

    In the fine-grained convention most marginal entropies cancel, so the value
    reduces to conditional entropies evaluated directly from transition columns
    without forming any joint.
    """
    _check_conventions(degeneracy, middle_entropy)
    if n_max is None:
        n_max = select_n_max(beta, r1 + r2)
    tail = thermal_tail_mass(beta, n_max)
    if tail > THERMAL_TAIL_TOL:
        raise TruncationError(
            f"thermal tail {tail:.3e} too large at beta={beta}, r1={r1}, r2={r2}, "
            f"n_max={n_max}", leaked_mass=tail)
    t1 = squeeze_matrix_closed_form(r1, n_max).transition_probabilities
    t2 = squeeze_matrix_closed_form(r2, n_max).transition_probabilities
    t_total = squeeze_matrix_closed_form(r1 + r2, n_max).transition_probabilities
    levels = np.arange(n_max + 1.0)
    weights = np.exp(-beta * levels)
    pops = weights / weights.sum()
    p1 = t1 @ pops
    deficit_measured = 1.0 - float(t2.sum(axis=0) @ p1)
    deficit_no_middle = 1.0 - float(t_total.sum(axis=0) @ pops)
    budget = _budget(tail, deficit_measured, deficit_no_middle)
    h_e1_shift = _entropy(p1) - _entropy(pops) if middle_entropy == "initial" else 0.0
    if degeneracy == "fine":
        value = 0.5 * (p1 @ _column_entropies(t2)
                       + pops @ _column_entropies(t1)
                       - pops @ _column_entropies(t_total)
                       + h_e1_shift)
    else:
        h_w10 = _grouped_work_entropy(t1 * pops[None, :])
        h_w21 = _grouped_work_entropy(t2 * p1[None, :])
        h_w20 = _grouped_work_entropy(t_total * pops[None, :])
        value = 0.5 * (h_w21 + h_w10 - h_w20 - _entropy(p1) + h_e1_shift)
    return float(value) / math.log(base), budget


def golden_section_minimum(f, a: float, b: float, xtol: float = 1e-4):
    """Minimizer of a unimodal function on [a, b], located to within xtol."""
    if not b > a:
        raise InvalidParameterError("need b > a")
    h = b - a
    if h <= xtol:
        x = 0.5 * (a + b)
        return x, f(x)
    c = b - INV_PHI * h
    d = a + INV_PHI * h
    fc, fd = f(c), f(d)
    while (b - a) > xtol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def diagonal_scan(beta: float, r_grid: np.ndarray, degeneracy: str = "fine",
                  base: float = math.e, extend_to_sign_change: bool = False,
                  r_cap: float = 2.0, middle_entropy: str = "initial") -> SweepTable:
    """K_en along the r1 = r2 = r line.

    With `extend_to_sign_change` the grid keeps growing geometrically past its end
    until the parameter has turned positive again after its dip (or `r_cap` is hit),
    so the zero crossing beyond the minimum is always bracketed when it exists.
    """
    r_values = [float(r) for r in np.asarray(r_grid, dtype=float)]
    if not r_values or min(r_values) < 0:
        raise InvalidParameterError("r grid must be non-empty and non-negative")
    rows = []
    seen_negative = False
    crossed_back = False
    queue = list(r_values)
    while queue:
        r = queue.pop(0)
        if r == 0.0:
            rows.append((0.0, 0.0, 0, 0.0))
            continue
        n_max = select_n_max(beta, 2.0 * r)
        value, budget = entropic_k3_oscillator(beta, r, r, n_max=n_max,
                                               degeneracy=degeneracy, base=base,
                                               middle_entropy=middle_entropy)
        rows.append((r, value, n_max, budget))
        seen_negative = seen_negative or value < 0.0
        crossed_back = crossed_back or (seen_negative and value > 0.0)
        if not queue and extend_to_sign_change and seen_negative and not crossed_back:
            nxt = rows[-1][0] * 1.3
            if nxt <= r_cap:
                queue.append(nxt)
    return SweepTable(
        ["r", "k_en", "n_max", "truncation_budget"],
        np.array(rows),
        meta={"experiment": "squeeze-diagonal", "beta": beta, "degeneracy": degeneracy,
              "middle_entropy": middle_entropy,
              "entropy_base": "2" if base == 2 else "e",
              "sign_change_bracketed": crossed_back},
    )


def squeeze_grid_sweep(beta: float = 0.1, r1_grid: np.ndarray | None = None,
                       r2_grid: np.ndarray | None = None, n_max: int | None = None,
                       degeneracy: str = "fine", base: float = math.e,
                       threads: int = 1,
                       contour_levels: tuple[float, ...] = (0.0, -0.05),
                       middle_entropy: str = "initial") -> SweepTable:
    """K_en over a rectangular (r1, r2) grid, plus contour point sets.

    The fine-grained convention lets every cell reduce to dot products between
    per-r1 marginals and per-r2 column-entropy vectors, so each distinct squeeze
    amplitude is built exactly once.  Contours are in meta["contours"].
    """
    _check_conventions(degeneracy, middle_entropy)
    if r1_grid is None:
        r1_grid = np.linspace(0.0, 0.1, 101)
    if r2_grid is None:
        r2_grid = np.linspace(0.0, 0.1, 101)
    r1_grid = np.asarray(r1_grid, dtype=float)
    r2_grid = np.asarray(r2_grid, dtype=float)
    for grid in (r1_grid, r2_grid):
        if grid.size == 0 or np.any(grid < 0) or not np.all(np.isfinite(grid)):
            raise InvalidParameterError("grids must be non-empty, finite, non-negative")
    if n_max is None:
        n_max = select_n_max(beta, float(r1_grid.max() + r2_grid.max()))
    tail = thermal_tail_mass(beta, n_max)
    if tail > THERMAL_TAIL_TOL:
        raise TruncationError(
            f"thermal tail {tail:.3e} too large at beta={beta}, "
            f"r grid up to ({r1_grid.max():g}, {r2_grid.max():g}), n_max={n_max}",
            leaked_mass=tail)
    levels = np.arange(n_max + 1.0)
    weights = np.exp(-beta * levels)
    pops = weights / weights.sum()

    def transitions(r: float) -> np.ndarray:
        return _closed_form_uncached(float(r), n_max).transition_probabilities

    def map_in_order(fn, values):
        if threads > 1:
            from concurrent.futures import ThreadPoolExecutor
            with ThreadPoolExecutor(max_workers=threads) as pool:
                return list(pool.map(fn, values))
        return [fn(v) for v in values]

    def leg1_stats(r1: float):
        t = transitions(r1)
        p1 = t @ pops
        h_w10 = float(pops @ _column_entropies(t)) if degeneracy == "fine" \
            else _grouped_work_entropy(t * pops[None, :])
        shift = _entropy(p1) - _entropy(pops) if middle_entropy == "initial" else 0.0
        return p1, h_w10, shift

    leg1 = map_in_order(leg1_stats, r1_grid)

    sums: dict[float, tuple[float, float]] = {}
    for r1 in r1_grid:
        for r2 in r2_grid:
            sums.setdefault(round(float(r1 + r2), 12), (0.0, 0.0))

    def no_middle_stats(r_sum: float):
        t = transitions(r_sum)
        deficit = 1.0 - float(t.sum(axis=0) @ pops)
        value = float(pops @ _column_entropies(t)) if degeneracy == "fine" \
            else _grouped_work_entropy(t * pops[None, :])
        return value, deficit

    sum_keys = sorted(sums)
    for key, stats in zip(sum_keys, map_in_order(no_middle_stats, sum_keys)):
        sums[key] = stats

    log_base = math.log(base)
    rows = np.empty((r1_grid.size * r2_grid.size, 4))
    z = np.empty((r1_grid.size, r2_grid.size))

    def fill_column(j: int) -> float:
        t2 = transitions(r2_grid[j])
        colsum2 = t2.sum(axis=0)
        col_entropy2 = _column_entropies(t2) if degeneracy == "fine" else None
        column_worst = 0.0
        for i, r1 in enumerate(r1_grid):
            p1, h_w10, shift = leg1[i]
            h20, deficit_nm = sums[round(float(r1 + r2_grid[j]), 12)]
            if degeneracy == "fine":
                value = 0.5 * (p1 @ col_entropy2 + h_w10 - h20 + shift)
            else:
                h_w21 = _grouped_work_entropy(t2 * p1[None, :])
                value = 0.5 * (h_w21 + h_w10 - h20 - _entropy(p1) + shift)
            deficit_measured = 1.0 - float(colsum2 @ p1)
            budget = _budget(tail, deficit_measured, deficit_nm)
            column_worst = max(column_worst, budget)
            z[i, j] = value / log_base
            rows[i * r2_grid.size + j] = (r1, r2_grid[j], z[i, j], budget)
        return column_worst

    worst_budget = max(map_in_order(fill_column, range(r2_grid.size)))
    contours = {level: contour_points(r1_grid, r2_grid, z, level)
                for level in contour_levels}
    return SweepTable(
        ["r1", "r2", "k_en", "truncation_budget"], rows,
        meta={"experiment": "squeeze-grid", "beta": beta, "n_max": n_max,
              "degeneracy": degeneracy, "middle_entropy": middle_entropy,
              "entropy_base": "2" if base == 2 else "e",
              "thermal_tail": tail, "worst_truncation_budget": worst_budget,
              "contours": contours},
    )


def beta_sweep_min_k(beta_grid, r_grid: np.ndarray | None = None,
                     refine_xtol: float = 1e-4, degeneracy: str = "fine",
                     base: float = math.e,
                     middle_entropy: str = "initial") -> SweepTable:
    """Per beta: the deepest K_en on the r1 = r2 line and where it sits.

    A coarse geometric scan brackets the single dip (stopping once the parameter
    has risen well past it), then golden-section search refines the minimizer to
    `refine_xtol`.  The truncation is re-selected per beta and held fixed through
    the refinement.
    """
    if r_grid is None:
        r_grid = np.geomspace(0.004, 0.8, 20)
    r_grid = np.asarray(r_grid, dtype=float)
    rows = []
    for beta in np.asarray(beta_grid, dtype=float):
        coarse: list[tuple[float, float]] = []
        best = math.inf
        for r in r_grid:
            value, _ = entropic_k3_oscillator(beta, float(r), float(r),
                                              degeneracy=degeneracy, base=base,
                                              middle_entropy=middle_entropy)
            coarse.append((float(r), value))
            best = min(best, value)
            if best < 0.0 and value >= 0.0:
                break
            if len(coarse) > 4 and value > best + 0.5 * abs(best):
                break
        i0 = min(range(len(coarse)), key=lambda k: coarse[k][1])
        lo = coarse[max(0, i0 - 1)][0]
        hi = coarse[min(len(coarse) - 1, i0 + 1)][0]
        n_max = select_n_max(float(beta), 2.0 * hi)

        def k_of_r(r: float, _beta=float(beta), _n=n_max) -> float:
            return entropic_k3_oscillator(_beta, r, r, n_max=_n,
                                          degeneracy=degeneracy, base=base,
                                          middle_entropy=middle_entropy)[0]

        argmin_r, min_value = golden_section_minimum(k_of_r, lo, hi, xtol=refine_xtol)
        _, budget = entropic_k3_oscillator(float(beta), argmin_r, argmin_r, n_max=n_max,
                                           degeneracy=degeneracy, base=base,
                                           middle_entropy=middle_entropy)
        rows.append((float(beta), min_value, argmin_r, n_max, budget))
    table = SweepTable(
        ["beta", "min_k_en", "argmin_r", "n_max", "truncation_budget"],
        np.array(rows),
        meta={"experiment": "squeeze-beta", "degeneracy": degeneracy,
              "middle_entropy": middle_entropy,
              "entropy_base": "2" if base == 2 else "e",
              "refine_xtol": refine_xtol},
    )
    depth = table.column("min_k_en")
    argmin = table.column("argmin_r")
    betas = table.column("beta")
    table.meta["depth_shallows_with_beta"] = bool(depth[-1] > depth[0])
    interior = int(np.argmax(argmin))
    table.meta["argmin_r_peak_beta"] = float(betas[interior])
    table.meta["argmin_r_peak_interior"] = bool(0 < interior < betas.size - 1)
    return table


def oscillator_entropy_reports(protocol: OscillatorProtocol, degeneracy: str = "fine",
                               base: float = math.e):
    """The four entropy reports feeding the entropic parameter, via the public
    work-distribution pipeline (slower than entropic_k3_oscillator but exercises
    the same objects as any other model)."""
    view = degeneracy
    joint3 = protocol.joint3
    h_w10 = work_entropy(work_distribution(joint3.marginal_t1_t0(), view=view), base=base)
    h_w21 = work_entropy(work_distribution(joint3.marginal_t2_t1(), view=view), base=base)
    h_w20 = work_entropy(work_distribution(protocol.no_middle, view=view), base=base)
    h_e1 = shannon_entropy(joint3.marginal_t1(), base=base)
    return h_w21, h_w10, h_w20, h_e1
