"""Seeded gamma-sweeps comparing transform-domain sampling with the analysis baseline.

Each ``(gamma, trial)`` pair is an independent job. Every random draw in a
job is seeded from ``(master_seed, gamma_index, trial_index, role)`` through
:class:`numpy.random.SeedSequence`, so results do not depend on how jobs are
scheduled across workers.
"""

import csv
import json
import logging
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np

from .operators import random_tight_frame
from .schemes import recover_analysis_baseline, recover_dif_scheme, recover_frame_scheme
from .sensing import compose_frame_ensemble, compose_stacked_ensemble, gaussian_matrix, measure, plain_ensemble
from .signals import NoiseModel, gen_cosparse, gen_piecewise_image
from .solvers import ALGORITHMS, SynthesisProgramSpec

logger = logging.getLogger(__name__)

BASELINE = "analysis_baseline"
NEW_SCHEME = {"frame": "frame_scheme", "dif2d": "dif_scheme"}

# role codes for seed derivation
_SIGNAL, _BASELINE, _NEW = 0, 1, 2


class ConfigError(ValueError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid experiment config: " + "; ".join(self.problems))


def derive_seed(*keys):
    """Stable 32-bit seed from a tuple of non-negative integers."""
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1)[0])


def measurement_count(d, gamma):
    # guard against 120 * 0.9 = 108.00000000000001 rounding up to 109
    return int(math.ceil(d * gamma - 1e-9))


@dataclass
class ExperimentConfig:
    family: str
    d: int
    gamma_grid: List[float]
    n: Optional[int] = None
    cosparsity: int = 0
    num_components: int = 4
    trials: int = 50
    noise: NoiseModel = field(default_factory=NoiseModel)
    program: dict = field(default_factory=lambda: {"algorithm": "l1_bpdn"})
    success_threshold: float = 1e-3
    m2_rule: str = "fixed"
    m2_value: float = 2
    master_seed: int = 0

    def __post_init__(self):
        if isinstance(self.noise, dict):
            self.noise = NoiseModel(**self.noise)
        self.gamma_grid = [float(g) for g in self.gamma_grid]
        if self.n is None:
            if self.family == "frame":
                self.n = int(round(1.2 * self.d))
            elif self.family == "dif2d":
                N = math.isqrt(self.d)
                self.n = 2 * N * (N - 1)
        problems = self.problems()
        if problems:
            raise ConfigError(problems)

    @property
    def image_size(self):
        return math.isqrt(self.d)

    def problems(self):
        out = []
        if self.family not in NEW_SCHEME:
            out.append(f"family: must be 'frame' or 'dif2d', got {self.family!r}")
        if not isinstance(self.d, int) or self.d < 1:
            out.append("d: must be a positive integer")
        if not self.gamma_grid or any(not 0 < g <= 1 for g in self.gamma_grid):
            out.append("gamma_grid: must be a non-empty list of values in (0, 1]")
        if not isinstance(self.trials, int) or self.trials < 1:
            out.append("trials: must be an integer >= 1")
        if not self.success_threshold > 0:
            out.append("success_threshold: must be positive")
        if self.family == "frame" and isinstance(self.n, int):
            if self.n < self.d:
                out.append(f"n: a frame needs n >= d ({self.d})")
            if not 0 <= self.cosparsity < self.n:
                out.append(f"cosparsity: must satisfy 0 <= cosparsity < n ({self.n})")
        if self.family == "dif2d" and isinstance(self.d, int):
            N = math.isqrt(self.d)
            if N * N != self.d or N < 2:
                out.append("d: must be a square N^2 with N >= 2 for the dif2d family")
            elif self.n != 2 * N * (N - 1):
                out.append(f"n: must equal 2N(N-1) = {2 * N * (N - 1)} for dif2d")
            if self.num_components < 1:
                out.append("num_components: must be >= 1")
        if self.m2_rule not in ("fixed", "fraction"):
            out.append("m2_rule: must be 'fixed' or 'fraction'")
        elif self.m2_rule == "fixed" and (int(self.m2_value) != self.m2_value or self.m2_value < 1):
            out.append("m2_value: the fixed rule needs an integer >= 1")
        elif self.m2_rule == "fraction" and not 0 < self.m2_value < 1:
            out.append("m2_value: the fraction rule needs a value in (0, 1)")
        prog = self.program
        if not isinstance(prog, dict) or prog.get("algorithm") not in ALGORITHMS:
            out.append(f"program.algorithm: must be one of {', '.join(ALGORITHMS)}")
        else:
            try:
                SynthesisProgramSpec.from_dict({"k": 1, **prog})
            except (TypeError, ValueError) as exc:
                out.append(f"program: {exc}")
        return out

    def program_spec(self, k):
        data = {"k": max(int(k), 1), **self.program}
        return SynthesisProgramSpec.from_dict(data)

    def m2_for(self, m):
        if self.m2_rule == "fixed":
            return int(self.m2_value)
        return int(math.ceil(m * self.m2_value - 1e-9))

    def to_dict(self):
        out = asdict(self)
        out["noise"] = asdict(self.noise)
        return out

    @classmethod
    def from_dict(cls, data):
        known = {f for f in cls.__dataclass_fields__}
        problems = [f"{key}: unknown field" for key in data if key not in known]
        missing = [f"{key}: required field missing" for key in ("family", "d", "gamma_grid") if key not in data]
        if missing:
            raise ConfigError(problems + missing)
        try:
            config = cls(**{key: value for key, value in data.items() if key in known})
        except ConfigError as exc:
            raise ConfigError(problems + exc.problems) from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(problems + [str(exc)]) from None
        if problems:
            raise ConfigError(problems)
        return config

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class TrialRecord:
    gamma: float
    trial_index: int
    scheme: str
    rel_error: float
    error_l2: float
    success: bool
    seed: int
    converged: bool = True
    wall_time: float = 0.0
    note: str = ""


@dataclass
class SweepResult:
    config: ExperimentConfig
    per_gamma: list
    records: list

    def rates(self, scheme):
        return {row["gamma"]: row["rate"] for row in self.summary_rows() if row["scheme"] == scheme}

    def mses(self, scheme):
        return {row["gamma"]: row["mse"] for row in self.summary_rows() if row["scheme"] == scheme}

    def summary_rows(self):
        return _group(self.records)


def _record(gamma, trial_index, scheme, x, x_hat, seed, threshold, converged, wall, note=""):
    err = float(np.linalg.norm(x_hat - x))
    rel = err / float(np.linalg.norm(x)) if np.linalg.norm(x) > 0 else err
    return TrialRecord(gamma, trial_index, scheme, rel, err, bool(rel <= threshold), seed, bool(converged), wall, note)


def _noise(config, seed):
    return config.noise.with_seed(seed)


def _budget(e, config):
    return float(np.linalg.norm(e)) if config.noise.kind != "none" else 0.0


def _baseline_trial(config, gi, ti, gamma, x, omega):
    seed = derive_seed(config.master_seed, gi, ti, _BASELINE)
    m = measurement_count(config.d, gamma)
    t0 = time.perf_counter()
    M = gaussian_matrix(m, config.d, unit_columns=True, seed=derive_seed(seed, 0))
    meas = measure(plain_ensemble(M), x, _noise(config, derive_seed(seed, 1)))
    res = recover_analysis_baseline(meas.y, M, omega, _budget(meas.e, config))
    return _record(gamma, ti, BASELINE, x, res.x_hat, seed, config.success_threshold, res.converged,
                   time.perf_counter() - t0)


def frame_trial(config, gi, ti):
    """Both pipelines on one tight-frame instance; returns two records."""
    gamma = config.gamma_grid[gi]
    omega = random_tight_frame(config.n, config.d, seed=derive_seed(config.master_seed, gi, ti, _SIGNAL, 0))
    sig = gen_cosparse(omega, config.cosparsity, seed=derive_seed(config.master_seed, gi, ti, _SIGNAL, 1))
    base = _baseline_trial(config, gi, ti, gamma, sig.x, omega)

    seed = derive_seed(config.master_seed, gi, ti, _NEW)
    m = measurement_count(config.d, gamma)
    t0 = time.perf_counter()
    A = gaussian_matrix(m, config.n, unit_columns=True, seed=derive_seed(seed, 0))
    meas = measure(compose_frame_ensemble(A, omega), sig.x, _noise(config, derive_seed(seed, 1)))
    res = recover_frame_scheme(meas.y, A, omega, config.program_spec(sig.k), noise_budget=_budget(meas.e, config))
    new = _record(gamma, ti, "frame_scheme", sig.x, res.x_hat, seed, config.success_threshold, res.converged,
                  time.perf_counter() - t0)
    return [base, new]


def dif_trial(config, gi, ti):
    """Both pipelines on one piecewise-constant image; returns two records."""
    from .operators import dif_2d

    gamma = config.gamma_grid[gi]
    N = config.image_size
    omega = dif_2d(N)
    sig = gen_piecewise_image(N, config.num_components, seed=derive_seed(config.master_seed, gi, ti, _SIGNAL, 1))
    base = _baseline_trial(config, gi, ti, gamma, sig.x, omega)

    seed = derive_seed(config.master_seed, gi, ti, _NEW)
    m = measurement_count(config.d, gamma)
    m2 = config.m2_for(m)
    m1 = m - m2
    t0 = time.perf_counter()
    if m1 < 1:
        note = f"m={m} leaves no transform-domain rows after reserving m2={m2}"
        new = _record(gamma, ti, "dif_scheme", sig.x, np.zeros(config.d), seed, config.success_threshold, False,
                      time.perf_counter() - t0, note)
        return [base, new]
    A = gaussian_matrix(m1, omega.n, unit_columns=True, seed=derive_seed(seed, 0))
    B = gaussian_matrix(m2, config.d, unit_columns=True, seed=derive_seed(seed, 2))
    meas = measure(compose_stacked_ensemble(A, omega, B), sig.x, _noise(config, derive_seed(seed, 1)))
    res = recover_dif_scheme(meas.y1, meas.y2, A, B, N, config.program_spec(sig.k),
                             epsilon2=_budget(meas.e2, config), noise_budget=_budget(meas.e1, config))
    new = _record(gamma, ti, "dif_scheme", sig.x, res.x_hat, seed, config.success_threshold, res.converged,
                  time.perf_counter() - t0)
    return [base, new]


_TRIALS = {"frame": frame_trial, "dif2d": dif_trial}


def _run_job(args):
    config, gi, ti = args
    return _TRIALS[config.family](config, gi, ti)


def _sweep(config, family, workers):
    if config.family != family:
        raise ValueError(f"config family is {config.family!r}, expected {family!r}")
    jobs = []
    for gi, gamma in enumerate(config.gamma_grid):
        if measurement_count(config.d, gamma) < 1:
            warnings.warn(f"gamma={gamma} gives fewer than one measurement; skipped", RuntimeWarning)
            continue
        jobs.extend((config, gi, ti) for ti in range(config.trials))
    if workers and workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        chunks = [_run_job(job) for job in jobs]
    records = [rec for chunk in chunks for rec in chunk]
    records.sort(key=lambda r: (config.gamma_grid.index(r.gamma), r.trial_index, r.scheme))
    return summarize(records, config)


def run_frame_sweep(config, workers=1):
    return _sweep(config, "frame", workers)


def run_dif_sweep(config, workers=1):
    return _sweep(config, "dif2d", workers)


def run_sweep(config, workers=1):
    return _sweep(config, config.family, workers)


def _group(records):
    groups = {}
    for rec in records:
        groups.setdefault((rec.gamma, rec.scheme), []).append(rec)
    rows = []
    for (gamma, scheme), recs in sorted(groups.items()):
        rows.append({
            "gamma": gamma,
            "scheme": scheme,
            "rate": float(np.mean([r.success for r in recs])),
            "mse": float(np.mean([r.error_l2**2 for r in recs])),
            "trials": len(recs),
        })
    return rows


def summarize(records, config):
    """Aggregate trial records into per-gamma recovery rates and MSEs."""
    if not records:
        raise ValueError("no trial records to summarize")
    rows = _group(records)
    new_name = NEW_SCHEME[config.family]
    per_gamma = []
    for gamma in config.gamma_grid:
        by_scheme = {r["scheme"]: r for r in rows if r["gamma"] == gamma}
        if not by_scheme:
            warnings.warn(f"no records for gamma={gamma}; group omitted", RuntimeWarning)
            continue
        new, base = by_scheme.get(new_name), by_scheme.get(BASELINE)
        per_gamma.append({
            "gamma": gamma,
            "rate_new_scheme": new["rate"] if new else float("nan"),
            "rate_baseline": base["rate"] if base else float("nan"),
            "mse_new_scheme": new["mse"] if new else float("nan"),
            "mse_baseline": base["mse"] if base else float("nan"),
            "trials": max(r["trials"] for r in by_scheme.values()),
        })
    return SweepResult(config, per_gamma, list(records))


# --- CSV export ------------------------------------------------------------

TRIAL_COLUMNS = ["gamma", "trial_index", "scheme", "rel_error", "error_l2", "success", "seed", "converged", "note"]
SUMMARY_COLUMNS = ["gamma", "scheme", "rate", "mse", "trials"]


def _cell(value):
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def export_csv(result, path):
    """Write ``<path>.trials.csv``, ``<path>.summary.csv`` and ``<path>.config.json``.

    Wall-clock times are left out so reruns produce byte-identical files.
    """
    path = str(path)
    with open(f"{path}.trials.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRIAL_COLUMNS)
        for rec in result.records:
            writer.writerow([_cell(getattr(rec, c)) for c in TRIAL_COLUMNS])
    with open(f"{path}.summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for row in result.summary_rows():
            writer.writerow([_cell(row[c]) for c in SUMMARY_COLUMNS])
    with open(f"{path}.config.json", "w") as fh:
        json.dump(result.config.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return f"{path}.trials.csv", f"{path}.summary.csv"


def read_trials_csv(filename):
    records = []
    with open(filename, newline="") as fh:
        for row in csv.DictReader(fh):
            records.append(TrialRecord(
                gamma=float(row["gamma"]),
                trial_index=int(row["trial_index"]),
                scheme=row["scheme"],
                rel_error=float(row["rel_error"]),
                error_l2=float(row["error_l2"]),
                success=row["success"] == "1",
                seed=int(row["seed"]),
                converged=row["converged"] == "1",
                note=row["note"],
            ))
    return records


def read_summary_csv(filename):
    with open(filename, newline="") as fh:
        return [
            {"gamma": float(r["gamma"]), "scheme": r["scheme"], "rate": float(r["rate"]),
             "mse": float(r["mse"]), "trials": int(r["trials"])}
            for r in csv.DictReader(fh)
        ]


def load_sweep(path):
    path = str(path)
    config = ExperimentConfig.from_json(f"{path}.config.json")
    return summarize(read_trials_csv(f"{path}.trials.csv"), config)


def format_table(result):
    lines = [f"{'gamma':>6}  {'rate_new':>8}  {'rate_base':>9}  {'mse_new':>10}  {'mse_base':>10}  trials"]
    for row in result.per_gamma:
        lines.append(
            f"{row['gamma']:>6.3f}  {row['rate_new_scheme']:>8.3f}  {row['rate_baseline']:>9.3f}  "
            f"{row['mse_new_scheme']:>10.3e}  {row['mse_baseline']:>10.3e}  {row['trials']}"
        )
    return "\n".join(lines)
