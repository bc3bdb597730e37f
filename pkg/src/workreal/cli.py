"""Configuration-driven command line for the named experiments.

One experiment per invocation; every run writes CSV files whose bytes are a pure
function of (config, seed).  Wall time and other run chatter go to stdout and a
sidecar .log file so they never break byte-level reproducibility of the data.

Exit codes: 0 success (all budgets met), 2 invalid configuration, 3 truncation
budget failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InvalidParameterError, TruncationError
from .hilbert import build_thermal_state, free_energy_difference
from .protocol import (
    empirical_chi_squared_pvalue,
    jarzynski_deviation,
    sample_trajectories,
    three_time_joint,
    total_work_distribution,
    work_distribution,
    two_time_joint,
)
from .squeezing import beta_sweep_min_k, oscillator_three_time, squeeze_grid_sweep
from .tables import SweepTable, write_table_csv
from .two_level import TlsAngles, tls_propagator, tls_spectrum, tls_theta_sweep

EXPERIMENTS = ("tls-theta", "squeeze-grid", "squeeze-beta", "jarzynski-check",
               "mc-crosscheck")


@dataclass
class SweepConfig:
    experiment: str
    out_dir: Path = Path(".")
    beta: float | None = None
    n_max: int | None = None
    seed: int | None = None
    grid_spec: str | None = None
    beta_grid: str | None = None
    theta: float | None = None
    n_samples: int = 100000
    entropy_base: str = "e"
    degeneracy: str = "fine"
    middle_entropy: str = "initial"
    threads: int = 1

    def validate(self) -> list[str]:
        problems = []
        if self.experiment not in EXPERIMENTS:
            problems.append(f"experiment: unknown experiment {self.experiment!r}")
        if self.beta is not None and not (self.beta > 0 and math.isfinite(self.beta)):
            problems.append(f"beta: must be positive and finite, got {self.beta}")
        if self.n_max is not None and self.n_max < 1:
            problems.append(f"n_max: must be >= 1, got {self.n_max}")
        if self.entropy_base not in ("e", "2"):
            problems.append(f"entropy_base: must be 'e' or '2', got {self.entropy_base!r}")
        if self.degeneracy not in ("fine", "grouped"):
            problems.append(f"degeneracy: must be 'fine' or 'grouped', got {self.degeneracy!r}")
        if self.middle_entropy not in ("initial", "measured"):
            problems.append(
                f"middle_entropy: must be 'initial' or 'measured', got {self.middle_entropy!r}")
        if self.threads < 1:
            problems.append(f"threads: must be >= 1, got {self.threads}")
        if self.n_samples < 1:
            problems.append(f"n_samples: must be >= 1, got {self.n_samples}")
        if self.experiment == "mc-crosscheck" and self.seed is None:
            problems.append("seed: required whenever sampling is requested")
        if self.grid_spec is not None:
            try:
                parse_grid_spec(self.grid_spec)
            except InvalidParameterError as err:
                problems.append(f"grid_spec: {err}")
        if self.beta_grid is not None:
            try:
                parse_value_list(self.beta_grid)
            except InvalidParameterError as err:
                problems.append(f"beta_grid: {err}")
        return problems

    @property
    def base(self) -> float:
        return 2.0 if self.entropy_base == "2" else math.e


def parse_grid_spec(spec: str) -> np.ndarray:
    """"start:stop:count" for a linear grid, "geom:start:stop:count" for geometric,
    or a comma-separated list of values."""
    spec = spec.strip()
    if "," in spec:
        return parse_value_list(spec)
    parts = spec.split(":")
    try:
        if len(parts) == 4 and parts[0] == "geom":
            start, stop, count = float(parts[1]), float(parts[2]), int(parts[3])
            if start <= 0 or stop <= start or count < 2:
                raise ValueError
            return np.geomspace(start, stop, count)
        if len(parts) == 3:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1 or not (math.isfinite(start) and math.isfinite(stop)):
                raise ValueError
            return np.linspace(start, stop, count)
    except ValueError:
        pass
    raise InvalidParameterError(
        f"cannot parse grid spec {spec!r} (want start:stop:count, geom:..., or a value list)")


def parse_value_list(spec: str) -> np.ndarray:
    try:
        values = np.array([float(x) for x in spec.split(",") if x.strip()])
    except ValueError as err:
        raise InvalidParameterError(f"bad value list {spec!r}: {err}") from None
    if values.size == 0 or not np.all(np.isfinite(values)):
        raise InvalidParameterError(f"value list {spec!r} must be non-empty and finite")
    return values


def load_config_file(path: Path) -> dict[str, str]:
    """Plain-text `key = value` pairs; '#' starts a comment."""
    known = {f.name for f in fields(SweepConfig)}
    values: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or not key or not value.strip():
            raise InvalidParameterError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        if key not in known:
            raise InvalidParameterError(f"{path}:{lineno}: unknown field {key!r}")
        values[key] = value.strip()
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="workreal",
        description="Measurement-based quantum work statistics and macrorealism sweeps.")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, default=None,
                       help="key = value config file; command-line flags win")
        p.add_argument("--out", type=Path, default=None, help="output directory")
        p.add_argument("--beta", type=float, default=None)
        p.add_argument("--n-max", type=int, default=None, dest="n_max")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--grid-spec", default=None, dest="grid_spec")
        p.add_argument("--beta-grid", default=None, dest="beta_grid")
        p.add_argument("--theta", type=float, default=None)
        p.add_argument("--n-samples", type=int, default=None, dest="n_samples")
        p.add_argument("--entropy-base", choices=("e", "2"), default=None,
                       dest="entropy_base")
        p.add_argument("--degeneracy", choices=("fine", "grouped"), default=None)
        p.add_argument("--middle-entropy", choices=("initial", "measured"),
                       default=None, dest="middle_entropy")
        p.add_argument("--threads", type=int, default=None)
    return parser


_FIELD_PARSERS = {
    "beta": float, "n_max": int, "seed": int, "theta": float,
    "n_samples": int, "threads": int, "out_dir": Path,
}


def build_config(args: argparse.Namespace) -> SweepConfig:
    config = SweepConfig(experiment=args.experiment)
    if args.config is not None:
        for key, raw in load_config_file(args.config).items():
            setattr(config, key, _FIELD_PARSERS.get(key, str)(raw))
    overrides = {name: getattr(args, name, None)
                 for name in ("beta", "n_max", "seed", "grid_spec", "beta_grid",
                              "theta", "n_samples", "entropy_base", "degeneracy",
                              "middle_entropy", "threads")}
    for key, value in overrides.items():
        if value is not None:
            setattr(config, key, value)
    if args.out is not None:
        config.out_dir = args.out
    if config.threads == 1:
        config.threads = int(os.environ.get("WORKREAL_THREADS", "1") or 1)
    return config


def _base_meta(config: SweepConfig) -> dict:
    meta = {"library": f"workreal {__version__}", "experiment": config.experiment}
    for name in ("beta", "n_max", "seed", "grid_spec", "beta_grid", "theta",
                 "n_samples", "entropy_base", "degeneracy", "middle_entropy",
                 "threads"):
        value = getattr(config, name)
        if value is not None:
            meta[name] = value
    return meta


def _run_tls_theta(config: SweepConfig) -> list[Path]:
    beta = config.beta if config.beta is not None else 1.0
    grid = parse_grid_spec(config.grid_spec) if config.grid_spec else None
    table = tls_theta_sweep(beta=beta, theta_grid=grid, base=config.base)
    table.meta = {**_base_meta(config), **table.meta}
    out = config.out_dir / "tls_theta.csv"
    write_table_csv(out, table)
    return [out]

def _run_squeeze_grid(config: SweepConfig) -> list[Path]:
    beta = config.beta if config.beta is not None else 0.1
    grid = parse_grid_spec(config.grid_spec) if config.grid_spec else None
    table = squeeze_grid_sweep(beta=beta, r1_grid=grid, r2_grid=grid,
                               n_max=config.n_max, degeneracy=config.degeneracy,
                               base=config.base, threads=config.threads,
                               middle_entropy=config.middle_entropy)
    contours = table.meta.pop("contours")
    table.meta = {**_base_meta(config), **table.meta}
    written = [config.out_dir / "squeeze_grid.csv"]
    write_table_csv(written[0], table)
    for level, points in contours.items():
        path = config.out_dir / f"squeeze_grid_contour_{level:g}.csv"
        contour_table = SweepTable(["r1", "r2"],
                                   points.reshape(-1, 2) if points.size else np.empty((0, 2)),
                                   meta={**_base_meta(config), "contour_level": level})
        write_table_csv(path, contour_table)
        written.append(path)
    return written


def _run_squeeze_beta(config: SweepConfig) -> list[Path]:
    betas = parse_value_list(config.beta_grid) if config.beta_grid else \
        np.array([0.1, 0.2, 0.3, 0.5, 0.7, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0])
    r_grid = parse_grid_spec(config.grid_spec) if config.grid_spec else None
    table = beta_sweep_min_k(betas, r_grid=r_grid, degeneracy=config.degeneracy,
                             base=config.base, middle_entropy=config.middle_entropy)
    table.meta = {**_base_meta(config), **table.meta}
    out = config.out_dir / "squeeze_beta.csv"
    write_table_csv(out, table)
    return [out]


def _run_jarzynski_check(config: SweepConfig) -> tuple[list[Path], bool]:
    seed = config.seed if config.seed is not None else 20
    rng = np.random.default_rng(seed)
    rows = []
    all_ok = True
    # two-level: random angles, temperatures, and spectra at each measurement time
    for _ in range(100):
        beta = float(np.exp(rng.uniform(np.log(0.1), np.log(10.0))))
        angles = TlsAngles(*rng.uniform(0.0, 2.0 * math.pi, size=3))
        s0 = tls_spectrum(0, (0.0, float(rng.uniform(0.2, 3.0))))
        s1 = tls_spectrum(1, (0.0, float(rng.uniform(0.2, 3.0))))
        rho0 = build_thermal_state(s0, beta)
        joint = two_time_joint(rho0, tls_propagator(angles), spectrum_later=s1)
        deviation = jarzynski_deviation(work_distribution(joint), beta,
                                        free_energy_difference(s0, s1, beta))
        ok = deviation < 1e-10
        all_ok &= ok
        rows.append((0.0, beta, angles.theta, deviation, 1e-10, float(ok)))
    # oscillator: total work through the middle measurement (equal spectra, dF = 0)
    for beta in (0.5, 1.0):
        protocol = oscillator_three_time(beta, 0.3, 0.3, n_max=config.n_max)
        deviation = jarzynski_deviation(total_work_distribution(protocol.joint3),
                                        beta, 0.0)
        ok = deviation < protocol.truncation_budget
        all_ok &= ok
        rows.append((1.0, beta, 0.3, deviation, protocol.truncation_budget, float(ok)))
    table = SweepTable(
        ["model", "beta", "parameter", "deviation", "bound", "within_bound"],
        np.array(rows), meta={**_base_meta(config), "seed": seed,
                              "model_codes": "0=two-level 1=oscillator"})
    out = config.out_dir / "jarzynski_check.csv"
    write_table_csv(out, table)
    return [out], all_ok


def _run_mc_crosscheck(config: SweepConfig) -> list[Path]:
    theta = config.theta if config.theta is not None else math.pi / 3.0
    beta = config.beta if config.beta is not None else 1.0
    u = tls_propagator(TlsAngles(theta))
    rho0 = build_thermal_state(tls_spectrum(0), beta)
    exact = three_time_joint(rho0, u, u)
    empirical = sample_trajectories(rho0, u, u, config.n_samples, config.seed)
    pvalue = empirical_chi_squared_pvalue(empirical, exact)
    rows = []
    for k2 in range(2):
        for k1 in range(2):
            for k0 in range(2):
                rows.append((k2, k1, k0, empirical.probs[k2, k1, k0],
                             exact.probs[k2, k1, k0]))
    table = SweepTable(["k2", "k1", "k0", "empirical", "exact"], np.array(rows),
                       meta={**_base_meta(config), "theta": theta, "beta": beta,
                             "chi_squared_pvalue": pvalue})
    out = config.out_dir / "mc_crosscheck.csv"
    write_table_csv(out, table)
    return [out]


def run(config: SweepConfig) -> int:
    problems = config.validate()
    if problems:
        for problem in problems:
            print(f"config error: {problem}", file=sys.stderr)
        return 2
    config.out_dir.mkdir(parents=True, exist_ok=True)
    started = time.monotonic()
    budgets_ok = True
    try:
        if config.experiment == "tls-theta":
            written = _run_tls_theta(config)
        elif config.experiment == "squeeze-grid":
            written = _run_squeeze_grid(config)
        elif config.experiment == "squeeze-beta":
            written = _run_squeeze_beta(config)
        elif config.experiment == "jarzynski-check":
            written, budgets_ok = _run_jarzynski_check(config)
        else:
            written = _run_mc_crosscheck(config)
    except TruncationError as err:
        print(f"truncation budget failure: {err}", file=sys.stderr)
        return 3
    except InvalidParameterError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    elapsed = time.monotonic() - started
    log_lines = [f"experiment = {config.experiment}",
                 f"wall_time_s = {elapsed:.3f}"] + \
        [f"wrote {path}" for path in written]
    (config.out_dir / "run.log").write_text("\n".join(log_lines) + "\n", encoding="utf-8")
    for line in log_lines:
        print(line)
    if not budgets_ok:
        print("requested bounds not met; see the output table", file=sys.stderr)
        return 3
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = build_config(args)
    except (InvalidParameterError, OSError, ValueError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
