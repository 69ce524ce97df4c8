"""Command-line sweeps, validation runs and figure presets.

Configuration is a flat JSON object. Gains and SNR are in dB, angles in
degrees, densities in BS/m^2; conversion to linear units happens here and
nowhere else. Precedence: command-line flag > environment variable
(``MMWAVE_ASEP_<FLAG>``) > config file > built-in default.

Example config::

    {"axis": "snr_db", "grid": [0, 10, 20], "lambda_bs": 1e-4,
     "main_gain_db": 10, "side_gain_db": -10, "beamwidth_deg": 15}
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .errorprob import BeamErrorModel, Scenario, evaluate_asep
from .errors import NumericFailure, ParameterError
from .mc import McConfig, estimate_asep

CSV_HEADER = ["axis", "value", "asep_analytic", "asep_mc", "mc_stderr", "z_score", "flags", "seconds"]
AXES = ("snr_db", "lambda_bs", "main_gain_db", "modulation_order", "sigma_be")
ENV_PREFIX = "MMWAVE_ASEP_"
PRESETS = ("fig1", "fig2", "fig3", "fig4")
SNR_GRID = [float(s) for s in range(0, 101, 10)]
Z_LIMIT = 3.0


@dataclass(frozen=True)
class PointConfig:
    """Operating point in user units (dB, degrees)."""

    lambda_bs: float = 1e-4
    snr_db: float = 10.0
    main_gain_db: float = 10.0
    side_gain_db: float = -10.0
    beamwidth_deg: float = 15.0
    modulation_order: int = 2
    sigma_be: float = 0.0  # degrees
    ball_radius: float = 141.0
    alpha_los: float = 2.1
    alpha_nlos: float = 4.0
    noise_level: float = 1.0
    fading_power: float = 1.0
    mode: str = "mmwave"
    interference: bool = True

    def scenario(self) -> Scenario:
        if self.mode == "omni":
            return Scenario.omni(self.lambda_bs, self.snr_db, int(self.modulation_order),
                                 self.alpha_los, self.noise_level, self.fading_power,
                                 self.interference)
        if self.mode != "mmwave":
            raise ParameterError(f"mode must be 'mmwave' or 'omni', got {self.mode!r}")
        return Scenario.mmwave(self.lambda_bs, self.snr_db, self.main_gain_db, self.side_gain_db,
                               self.beamwidth_deg, int(self.modulation_order), self.ball_radius,
                               self.alpha_los, self.alpha_nlos, self.noise_level,
                               self.fading_power, self.interference)

    def beam(self) -> BeamErrorModel | None:
        if self.sigma_be == 0.0:
            return None
        return BeamErrorModel.from_degrees(self.sigma_be)


@dataclass(frozen=True)
class McSettings:
    trials: int = 20_000
    seed: int = 0
    batch: int = 10_000


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    grid: tuple
    fixed: PointConfig = field(default_factory=PointConfig)
    output: str | None = None
    validate: McSettings | None = None

    def __post_init__(self):
        if self.axis not in AXES:
            raise ParameterError(f"axis must be one of {AXES}, got {self.axis!r}")
        if len(self.grid) == 0:
            raise ParameterError("grid must be nonempty")
        for v in self.grid:
            if self.axis == "modulation_order" and (int(v) != v or v < 2):
                raise ParameterError(f"modulation orders must be integers >= 2, got {v}")
            if self.axis in ("lambda_bs", "sigma_be") and not v >= 0:
                raise ParameterError(f"{self.axis} values must be >= 0, got {v}")

    def point(self, value) -> PointConfig:
        return replace(self.fixed, **{self.axis: value})


def _point_seed(seed: int, index: int) -> int:
    """Independent per-grid-point seed, a pure function of (seed, index)."""
    return int(np.random.SeedSequence(seed, spawn_key=(index,)).generate_state(1, np.uint64)[0])


def _format(x) -> str:
    if x is None:
        return ""
    return repr(float(x))


def evaluate_point(spec: SweepSpec, index: int) -> dict:
    """One CSV row; numeric failures become an ``error:`` flag."""
    value = spec.grid[index]
    row = dict(axis=spec.axis, value=value, asep_analytic=None, asep_mc=None,
               mc_stderr=None, z_score=None, flags=[], seconds=0.0)
    t0 = time.perf_counter()
    try:
        point = spec.point(value)
        scenario, beam = point.scenario(), point.beam()
        result = evaluate_asep(scenario, beam)
        row["asep_analytic"] = result.value
        if result.flags:
            row["flags"].append(result.flags)
        if spec.validate is not None and spec.validate.trials > 0:
            mc = McConfig(trials=spec.validate.trials, seed=_point_seed(spec.validate.seed, index),
                          batch=spec.validate.batch)
            est = estimate_asep(mc, scenario, beam)
            row["asep_mc"], row["mc_stderr"] = est.mean, est.std_error
            row["z_score"] = est.z_score(result.value)
    except (NumericFailure, ParameterError, ArithmeticError) as exc:
        row["flags"].append(f"error:{type(exc).__name__}:{exc}".replace(",", ";"))
    row["seconds"] = time.perf_counter() - t0
    return row


def _point_job(args):
    return evaluate_point(*args)


def run_sweep(spec: SweepSpec, jobs: int = 1) -> list[dict]:
    """Evaluate every grid point; rows come back in grid order."""
    tasks = [(spec, i) for i in range(len(spec.grid))]
    if jobs <= 1 or len(tasks) == 1:
        rows = [_point_job(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_point_job, tasks))
    if spec.output:
        write_csv(rows, spec.output)
    return rows


def write_csv(rows, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in rows:
            writer.writerow([
                r["axis"], repr(r["value"]), _format(r["asep_analytic"]), _format(r["asep_mc"]),
                _format(r["mc_stderr"]), _format(r["z_score"]), ";".join(r["flags"]),
                f"{r['seconds']:.3f}",
            ])


def failing_rows(rows) -> list[dict]:
    """Rows with an error flag, a missing estimate, or |z| above the limit."""
    bad = []
    for r in rows:
        z = r["z_score"]
        if any(f.startswith("error:") for f in r["flags"]) or z is None or not abs(z) <= Z_LIMIT:
            bad.append(r)
    return bad


# --------------------------------------------------------------------------
# presets


def preset_specs(name: str, mc: McSettings | None) -> dict[str, SweepSpec]:
    """Named curves of a figure preset, all swept over SNR."""
    snr = tuple(SNR_GRID)
    base = PointConfig(side_gain_db=-10.0, beamwidth_deg=15.0, modulation_order=2)
    curves: dict[str, PointConfig] = {}
    if name == "fig1":
        for lam in (1e-5, 1e-4):
            curves[f"mmwave_lambda{lam:g}"] = replace(base, main_gain_db=10.0, lambda_bs=lam)
            curves[f"omni_lambda{lam:g}"] = replace(base, main_gain_db=0.0, side_gain_db=0.0,
                                                    beamwidth_deg=360.0, mode="omni", lambda_bs=lam)
    elif name == "fig2":
        curves["M20_lambda1e-05"] = replace(base, main_gain_db=20.0, lambda_bs=1e-5)
        curves["M10_lambda0.0001"] = replace(base, main_gain_db=10.0, lambda_bs=1e-4)
    elif name == "fig3":
        for order in (2, 4, 8):
            curves[f"order{order}"] = replace(base, main_gain_db=20.0, lambda_bs=1e-4,
                                              modulation_order=order)
    elif name == "fig4":
        for sigma in (0.0, 2.0, 5.0, 8.0):
            curves[f"sigma{sigma:g}deg"] = replace(base, main_gain_db=20.0, lambda_bs=1e-5,
                                                   sigma_be=sigma)
    else:
        raise ParameterError(f"unknown preset {name!r}, expected one of {PRESETS}")
    return {k: SweepSpec("snr_db", snr, v, None, mc) for k, v in curves.items()}


# --------------------------------------------------------------------------
# argument handling


def _env(name: str):
    return os.environ.get(ENV_PREFIX + name.upper())


def _resolve(args, config: dict, name: str, cast, default):
    flag = getattr(args, name, None)
    if flag is not None:
        return cast(flag)
    env = _env(name)
    if env is not None:
        return cast(env)
    if name in config:
        return cast(config[name])
    return default


def load_config(path) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict) or any(isinstance(v, dict) for v in data.values()):
        raise ParameterError("config must be a flat JSON object")
    return data


def spec_from_config(config: dict, mc: McSettings | None, output: str | None) -> SweepSpec:
    known = {f for f in PointConfig.__dataclass_fields__}
    extra = set(config) - known - {"axis", "grid", "output", "seed", "trials", "jobs", "batch"}
    if extra:
        raise ParameterError(f"unknown config keys: {sorted(extra)}")
    fixed = PointConfig(**{k: v for k, v in config.items() if k in known})
    if "axis" not in config or "grid" not in config:
        raise ParameterError("config needs 'axis' and 'grid'")
    return SweepSpec(config["axis"], tuple(config["grid"]), fixed, output, mc)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmwave-asep", description=__doc__.split("\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat JSON config file")
    common.add_argument("--out", help="CSV file (sweep/validate) or directory (preset)")
    common.add_argument("--seed", type=int, help="Monte Carlo seed (u64)")
    common.add_argument("--trials", type=int, help="Monte Carlo trials per point (0 disables)")
    common.add_argument("--jobs", type=int, help="worker processes over grid points")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("sweep", parents=[common], help="analytic sweep (MC only if --trials > 0)")
    sub.add_parser("validate", parents=[common], help="analytic vs MC; nonzero exit if |z| > 3")
    pre = sub.add_parser("preset", parents=[common], help="run a figure preset")
    pre.add_argument("name", choices=PRESETS)
    return parser


def _print_rows(label, rows, stream):
    for r in rows:
        z = "" if r["z_score"] is None else f" z={r['z_score']:+.2f}"
        mc = "" if r["asep_mc"] is None else f" mc={r['asep_mc']:.4g}"
        an = "nan" if r["asep_analytic"] is None else f"{r['asep_analytic']:.4g}"
        flags = f" [{';'.join(r['flags'])}]" if r["flags"] else ""
        print(f"{label} {r['axis']}={r['value']:g} asep={an}{mc}{z}{flags}", file=stream)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(_resolve(args, {}, "config", str, None))
        seed = _resolve(args, config, "seed", int, 0)
        jobs = _resolve(args, config, "jobs", int, 1)
        out = _resolve(args, config, "out", str, config.get("output"))
        default_trials = 0 if args.command == "sweep" else McSettings.trials
        trials = _resolve(args, config, "trials", int, default_trials)
        if not 0 <= seed < 2**64 or trials < 0 or jobs < 1:
            raise ParameterError("need 0 <= seed < 2^64, trials >= 0, jobs >= 1")
        if args.command == "validate" and trials == 0:
            raise ParameterError("validate needs trials > 0")
        mc = McSettings(trials, seed, int(config.get("batch", McSettings.batch))) if trials else None

        if args.command == "preset":
            outdir = Path(out or f"results/{args.name}")
            for label, spec in preset_specs(args.name, mc).items():
                rows = run_sweep(replace(spec, output=str(outdir / f"{args.name}_{label}.csv")), jobs)
                _print_rows(label, rows, sys.stdout)
            return 0

        spec = spec_from_config(config, mc, out)
        rows = run_sweep(spec, jobs)
        _print_rows(args.command, rows, sys.stdout)
        if args.command == "validate":
            bad = failing_rows(rows)
            if bad:
                print(f"{len(bad)} of {len(rows)} points failed |z| <= {Z_LIMIT}", file=sys.stderr)
                return 1
        return 0
    except (ParameterError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
