import csv
import json
from dataclasses import replace

import numpy as np
import pytest

from alqpt.harness import (
    CSV_HEADER,
    DEPTH_TABLE,
    ExperimentConfig,
    ExperimentError,
    read_records,
    records_to_csv,
    repeat_seeds,
    run_experiment,
    summarize,
    write_outputs,
)

SMALL = ExperimentConfig(n_qubits=2, budget=5, repeats=2, epochs=15, committee_size=3, base_seed=4)


@pytest.fixture(scope="module")
def small_result():
    return run_experiment(SMALL)


def test_resolved_defaults():
    cfg = ExperimentConfig(n_qubits=3).resolved()
    assert (cfg.vqc_depth, cfg.target_depth, cfg.budget) == (5, 5, 32)
    assert ExperimentConfig(n_qubits=2).resolved().budget == 16
    assert ExperimentConfig(n_qubits=1).resolved().vqc_depth == 1
    assert DEPTH_TABLE == {2: 3, 3: 5, 4: 7, 5: 8, 6: 8, 7: 8}
    assert ExperimentConfig().repeats == 30


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(repeats=0)
    with pytest.raises(ValueError):
        ExperimentConfig(strategies=("QBC", "QBC"))
    with pytest.raises(ValueError):
        ExperimentConfig(strategies=("NOPE",))
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"n_qubits": 2, "colour": "blue"})


def test_config_file_round_trip(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(SMALL.to_dict()))
    assert ExperimentConfig.from_file(path) == SMALL


def test_repeat_seeds():
    a = repeat_seeds(0, 3)
    assert a == repeat_seeds(0, 3)
    assert set(a) == {"target", "bootstrap", "init", "strategy"}
    assert len(set(a.values())) == 4
    assert a != repeat_seeds(0, 4) and a != repeat_seeds(1, 3)


def test_records_shape_and_order(small_result):
    recs = small_result.records
    assert len(recs) == 4 * 2 * 5
    keys = [(SMALL.strategies.index(r.strategy), r.repeat, r.step) for r in recs]
    assert keys == sorted(keys)
    for s in SMALL.strategies:
        for rep in range(2):
            labels = [r.labels_used for r in recs if r.strategy == s and r.repeat == rep]
            assert labels == [1, 2, 3, 4, 5]
    assert all(0.0 <= r.similarity <= 1.0 for r in recs)


def test_fairness_within_repeat(small_result):
    # committees train as a batch, single models alone: agreement is to rounding
    for rep in range(SMALL.repeats):
        step0 = np.array([(r.loss, r.similarity) for r in small_result.records
                          if r.step == 0 and r.repeat == rep])
        assert len(step0) == 4
        np.testing.assert_allclose(step0, step0[:1].repeat(4, axis=0), rtol=0, atol=1e-12)


def test_summary_matches_records(small_result):
    summary = small_result.summary["strategies"]
    for s, rows in summary.items():
        for row in rows:
            sims = [r.similarity for r in small_result.records
                    if r.strategy == s and r.labels_used == row["labels_used"]]
            assert row["n"] == len(sims) == 2
            assert row["mean_similarity"] == pytest.approx(np.mean(sims), abs=1e-15)
            assert row["std_similarity"] == pytest.approx(np.std(sims), abs=1e-15)


def test_improvement_recomputed_from_csv(small_result, tmp_path):
    write_outputs(small_result, tmp_path)
    # independent recomputation straight from the CSV text
    with open(tmp_path / "records.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    means = {}
    for row in rows:
        means.setdefault((row["strategy"], int(row["labels_used"])), []).append(float(row["similarity"]))
    summary = json.loads((tmp_path / "summary.json").read_text())["strategies"]
    for s, table in summary.items():
        for row in table:
            key = row["labels_used"]
            ratio = np.mean(means[(s, key)]) / np.mean(means[("RAND", key)])
            assert row["improvement"] == pytest.approx(ratio, abs=1e-9)


def test_improvement_undefined_is_null():
    from alqpt.al import RunRecord

    recs = [RunRecord("QBC", 0, 0, 1, 1.0, 0.5, 0.5), RunRecord("RAND", 0, 0, 1, 1.0, 0.0, 0.0)]
    out = summarize(recs, ["QBC", "RAND"])["strategies"]
    assert out["QBC"][0]["improvement"] is None


def test_csv_format(small_result):
    text = records_to_csv(small_result.records)
    assert "\r" not in text
    lines = text.split("\n")
    assert lines[0] == ",".join(CSV_HEADER)
    assert lines[-1] == ""
    assert lines[1].endswith(",")  # wall time left empty without timing


def test_csv_round_trip(small_result, tmp_path):
    out = write_outputs(small_result, tmp_path / "x")
    assert read_records(out / "records.csv") == small_result.records
    echo = json.loads((out / "config.echo.json").read_text())
    assert echo["vqc_depth"] == 3 and echo["budget"] == 5


def test_read_records_rejects_bad_header(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_records(p)


def test_byte_identical_reruns(small_result, tmp_path):
    again = run_experiment(SMALL)
    assert records_to_csv(again.records) == records_to_csv(small_result.records)


def test_parallel_matches_sequential(small_result):
    par = run_experiment(replace(SMALL, workers=2))
    assert records_to_csv(par.records) == records_to_csv(small_result.records)


def test_timing_recorded_when_enabled():
    res = run_experiment(replace(SMALL, repeats=1, strategies=("GS",), record_timing=True))
    assert all(r.wall_time_s is not None for r in res.records)


def test_failed_repeat_aborts():
    bad = replace(SMALL, budget=17)  # more than the 16-state pool
    with pytest.raises(ExperimentError):
        run_experiment(bad)


def test_statistical_trends(n2_experiment):
    """Every strategy ends above where it started, averaged over 30 repeats."""
    for s, rows in n2_experiment.summary["strategies"].items():
        assert rows[-1]["mean_similarity"] >= rows[0]["mean_similarity"], s
    assert {s: len(rows) for s, rows in n2_experiment.summary["strategies"].items()} == {
        s: 16 for s in ("QBC", "EMCM", "GS", "RAND")
    }
