"""Monte Carlo sweep harness.

Each (scheduler, snr, realization) cell builds a scenario from a seed derived
counter-style from the master seed, runs the two-block pipeline, and records
one row.  The record stream is byte-deterministic for a given master seed
regardless of the parallelism degree: workers split by realization, channel
substreams are keyed on (realization, snr) only, and rows are sorted before
writing.  Wall-clock timing is optional because it would break that contract.
"""
import csv
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .scenario import STREAM_PIPELINE, build_scenario, substream
from .scheduling import SchedulerConfig, run_block_pipeline

RAW_COLUMNS = ("scheduler", "snr_db", "realization", "seed", "sum_se",
               "n_scheduled", "n_candidates", "prelog", "runtime_ms")
AGGREGATE_COLUMNS = ("scheduler", "snr_db", "mean_se", "stderr_se",
                     "ci95_lo", "ci95_hi", "n")


@dataclass(frozen=True)
class ExperimentRecord:
    scheduler: str
    snr_db: float
    realization: int
    seed: int
    sum_se: float          # NaN marks a failed realization
    n_scheduled: int
    n_candidates: int
    prelog: float
    runtime_ms: float


@dataclass(frozen=True)
class SweepPlan:
    scenario_config: object                 # ScenarioConfig template (noise overridden per SNR)
    scheduler_config: SchedulerConfig
    modes: tuple
    snr_grid_db: tuple
    realizations: int = 50
    parallelism: int = 1
    master_seed: int = 0
    timing: bool = False                    # record wall time (breaks byte determinism)

    def __post_init__(self):
        if not self.modes:
            raise ValueError("sweep needs at least one scheduler mode")
        if not self.snr_grid_db:
            raise ValueError("sweep needs a non-empty SNR grid")
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")


def realization_seed(master_seed, realization):
    """Integer scenario seed for one realization (documented derivation)."""
    return int(np.random.SeedSequence(int(master_seed), spawn_key=(int(realization),))
               .generate_state(1)[0])


def _run_realization(plan, realization):
    """All (mode, snr) cells of one realization; scenario built once."""
    seed = realization_seed(plan.master_seed, realization)
    base = plan.scenario_config
    records = []
    built = build_scenario(base, seed)
    for snr_idx, snr_db in enumerate(plan.snr_grid_db):
        noise = base.tx_power / (10.0 ** (snr_db / 10.0))
        # geometry/correlation are SNR-independent; only the stored config's
        # noise power changes across the grid
        scenario = replace(built, config=replace(base, noise_power=noise))
        for mode in plan.modes:
            cfg = replace(plan.scheduler_config, mode=mode)
            rng = substream(plan.master_seed, STREAM_PIPELINE, realization, snr_idx)
            started = time.perf_counter()
            try:
                result = run_block_pipeline(scenario, cfg, rng)
                elapsed = (time.perf_counter() - started) * 1e3
                records.append(ExperimentRecord(
                    scheduler=mode, snr_db=float(snr_db), realization=realization,
                    seed=seed, sum_se=result.sum_se,
                    n_scheduled=len(result.selected),
                    n_candidates=len(result.candidates),
                    prelog=result.prelog,
                    runtime_ms=elapsed if plan.timing else 0.0))
            except Exception as exc:  # failed cell: marked, sweep continues
                print(f"[sweep] realization {realization} mode {mode} snr {snr_db} dB "
                      f"failed: {exc}", file=sys.stderr)
                records.append(ExperimentRecord(
                    scheduler=mode, snr_db=float(snr_db), realization=realization,
                    seed=seed, sum_se=float("nan"), n_scheduled=0, n_candidates=0,
                    prelog=1.0, runtime_ms=0.0))
    return records


def snr_sweep(plan, progress=None):
    """Run the full sweep; returns records sorted by (scheduler, snr, realization)."""
    records = []
    realizations = range(plan.realizations)
    if plan.parallelism == 1:
        for r in realizations:
            records.extend(_run_realization(plan, r))
            if progress is not None:
                progress(r + 1, plan.realizations)
    else:
        with ProcessPoolExecutor(max_workers=plan.parallelism) as pool:
            done = 0
            for chunk in pool.map(_run_realization, [plan] * plan.realizations, realizations):
                records.extend(chunk)
                done += 1
                if progress is not None:
                    progress(done, plan.realizations)
    records.sort(key=lambda rec: (rec.scheduler, rec.snr_db, rec.realization))
    return records


@dataclass(frozen=True)
class AggregateRow:
    scheduler: str
    snr_db: float
    mean_se: float
    stderr_se: float
    ci95_lo: float
    ci95_hi: float
    n: int


def aggregate(records):
    """Per-(scheduler, snr) mean, standard error and normal 95% CI.

    Failed rows (NaN sum SE) are excluded; cells with fewer than two valid
    realizations are omitted with a warning on stderr.
    """
    cells = {}
    for rec in records:
        cells.setdefault((rec.scheduler, rec.snr_db), []).append(rec.sum_se)
    rows = []
    for (mode, snr_db), values in sorted(cells.items()):
        valid = np.array([v for v in values if np.isfinite(v)])
        dropped = len(values) - valid.size
        if dropped:
            print(f"[aggregate] {mode} @ {snr_db} dB: excluded {dropped} failed "
                  f"realization(s)", file=sys.stderr)
        if valid.size < 2:
            print(f"[aggregate] {mode} @ {snr_db} dB: fewer than 2 valid realizations, "
                  f"cell omitted", file=sys.stderr)
            continue
        mean = float(valid.mean())
        stderr = float(valid.std(ddof=1) / np.sqrt(valid.size))
        rows.append(AggregateRow(
            scheduler=mode, snr_db=float(snr_db), mean_se=mean, stderr_se=stderr,
            ci95_lo=mean - 1.96 * stderr, ci95_hi=mean + 1.96 * stderr,
            n=int(valid.size)))
    return rows


def _fmt(value):
    if isinstance(value, float):
        return format(value, ".15g")
    return str(value)


def write_raw_csv(records, path):
    """Raw rows, stable formatting (UTF-8, LF, >= 12 significant digits)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RAW_COLUMNS)
        for rec in records:
            writer.writerow([_fmt(getattr(rec, col)) for col in RAW_COLUMNS])


def write_aggregate_csv(rows, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(AGGREGATE_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(getattr(row, col)) for col in AGGREGATE_COLUMNS])


def read_raw_csv(path):
    records = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            records.append(ExperimentRecord(
                scheduler=row["scheduler"], snr_db=float(row["snr_db"]),
                realization=int(row["realization"]), seed=int(row["seed"]),
                sum_se=float(row["sum_se"]), n_scheduled=int(row["n_scheduled"]),
                n_candidates=int(row["n_candidates"]), prelog=float(row["prelog"]),
                runtime_ms=float(row["runtime_ms"])))
    return records
