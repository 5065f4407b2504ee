import numpy as np
import pytest

from xlmimo.experiment import (AggregateRow, ExperimentRecord, SweepPlan,
                               aggregate, read_raw_csv, realization_seed,
                               snr_sweep, write_aggregate_csv, write_raw_csv)
from xlmimo.scenario import ScenarioConfig
from xlmimo.scheduling import SchedulerConfig

SMALL_PLAN = SweepPlan(
    scenario_config=ScenarioConfig(num_users=6, num_antennas=8, specular_paths=2),
    scheduler_config=SchedulerConfig(candidate_size=3),
    modes=("ISP", "PERFECT"),
    snr_grid_db=(0.0, 10.0, 20.0),
    realizations=5,
    master_seed=77,
)


def test_sweep_cardinality():
    records = snr_sweep(SMALL_PLAN)
    assert len(records) == 2 * 3 * 5
    keys = {(r.scheduler, r.snr_db, r.realization) for r in records}
    assert len(keys) == len(records)


def test_sweep_sorted_and_deterministic():
    a = snr_sweep(SMALL_PLAN)
    b = snr_sweep(SMALL_PLAN)
    assert a == b
    assert a == sorted(a, key=lambda r: (r.scheduler, r.snr_db, r.realization))


def test_sweep_parallel_matches_serial(tmp_path):
    from dataclasses import replace
    serial = snr_sweep(SMALL_PLAN)
    parallel = snr_sweep(replace(SMALL_PLAN, parallelism=2))
    assert serial == parallel
    p1, p2 = tmp_path / "serial.csv", tmp_path / "parallel.csv"
    write_raw_csv(serial, p1)
    write_raw_csv(parallel, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_realization_seed_stable():
    assert realization_seed(77, 0) == realization_seed(77, 0)
    assert realization_seed(77, 0) != realization_seed(77, 1)
    assert realization_seed(78, 0) != realization_seed(77, 0)


def test_aggregate_constant_values():
    records = [ExperimentRecord("ISP", 0.0, r, 1, 2.5, 1, 0, 1.0, 0.0)
               for r in range(4)]
    rows = aggregate(records)
    assert rows[0].mean_se == 2.5
    assert rows[0].stderr_se == 0.0
    assert rows[0].n == 4


def test_aggregate_hand_arithmetic():
    records = [ExperimentRecord("ISP", 0.0, 0, 1, 1.0, 1, 0, 1.0, 0.0),
               ExperimentRecord("ISP", 0.0, 1, 1, 3.0, 1, 0, 1.0, 0.0)]
    row = aggregate(records)[0]
    assert row.mean_se == 2.0
    assert row.stderr_se == 1.0     # std(ddof=1)/sqrt(2) = sqrt(2)/sqrt(2)
    assert abs(row.ci95_lo - (2.0 - 1.96)) < 1e-12
    assert abs(row.ci95_hi - (2.0 + 1.96)) < 1e-12


def test_aggregate_excludes_failures(capsys):
    records = [ExperimentRecord("ISP", 0.0, 0, 1, 1.0, 1, 0, 1.0, 0.0),
               ExperimentRecord("ISP", 0.0, 1, 1, float("nan"), 0, 0, 1.0, 0.0),
               ExperimentRecord("ISP", 0.0, 2, 1, 3.0, 1, 0, 1.0, 0.0)]
    rows = aggregate(records)
    assert rows[0].n == 2
    assert np.isfinite(rows[0].mean_se)
    assert "excluded 1 failed" in capsys.readouterr().err


def test_aggregate_omits_thin_cells(capsys):
    records = [ExperimentRecord("ISP", 0.0, 0, 1, 1.0, 1, 0, 1.0, 0.0)]
    assert aggregate(records) == []
    assert "fewer than 2" in capsys.readouterr().err


def test_ci_shrinks_like_sqrt_n():
    rng = np.random.default_rng(0)
    values = rng.normal(5.0, 1.0, 1600)

    def width(n):
        recs = [ExperimentRecord("ISP", 0.0, i, 1, float(v), 1, 0, 1.0, 0.0)
                for i, v in enumerate(values[:n])]
        row = aggregate(recs)[0]
        return row.ci95_hi - row.ci95_lo

    w100, w400, w1600 = width(100), width(400), width(1600)
    assert w400 == pytest.approx(w100 / 2, rel=0.25)
    assert w1600 == pytest.approx(w100 / 4, rel=0.25)


def test_raw_csv_roundtrip_and_format(tmp_path):
    records = snr_sweep(SMALL_PLAN)
    path = tmp_path / "raw.csv"
    write_raw_csv(records, path)
    text = path.read_text(encoding="utf-8")
    assert text.startswith("scheduler,snr_db,realization,seed,sum_se,"
                           "n_scheduled,n_candidates,prelog,runtime_ms\n")
    assert "\r" not in text
    back = read_raw_csv(path)
    for orig, rt in zip(records, back):
        assert rt.scheduler == orig.scheduler
        assert rt.snr_db == orig.snr_db
        assert rt.realization == orig.realization
        assert rt.seed == orig.seed
        assert rt.sum_se == pytest.approx(orig.sum_se, rel=1e-12)
        assert rt.prelog == pytest.approx(orig.prelog, rel=1e-12)
    # >= 12 significant digits survive the round trip
    row = text.splitlines()[1].split(",")
    assert len(row[4].replace(".", "").replace("-", "").lstrip("0")) >= 12


def test_empty_records_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    write_raw_csv([], path)
    assert path.read_text(encoding="utf-8").strip() == \
        "scheduler,snr_db,realization,seed,sum_se,n_scheduled,n_candidates,prelog,runtime_ms"
    agg_path = tmp_path / "agg.csv"
    write_aggregate_csv([], agg_path)
    assert agg_path.read_text(encoding="utf-8").strip() == \
        "scheduler,snr_db,mean_se,stderr_se,ci95_lo,ci95_hi,n"


def test_aggregate_csv_format(tmp_path):
    rows = [AggregateRow("ISP", 10.0, 1.23456789012345, 0.1, 1.0, 1.4, 50)]
    path = tmp_path / "agg.csv"
    write_aggregate_csv(rows, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "scheduler,snr_db,mean_se,stderr_se,ci95_lo,ci95_hi,n"
    assert lines[1].startswith("ISP,10,1.23456789012345,")


def test_plan_validation():
    with pytest.raises(ValueError):
        SweepPlan(scenario_config=SMALL_PLAN.scenario_config,
                  scheduler_config=SMALL_PLAN.scheduler_config,
                  modes=(), snr_grid_db=(0.0,))
    with pytest.raises(ValueError):
        SweepPlan(scenario_config=SMALL_PLAN.scenario_config,
                  scheduler_config=SMALL_PLAN.scheduler_config,
                  modes=("ISP",), snr_grid_db=())
