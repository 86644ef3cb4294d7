import csv
import io

import numpy as np
import pytest

from netid import experiment
from netid.errors import InvalidInputError, SolverError
from netid.experiment import CSV_HEADER, ExperimentConfig, flip_percentage, rows_to_csv, \
    run_experiment, trial_network, trial_sensors
from netid.model import GraphEnsembleConfig, format_float

SMALL = [GraphEnsembleConfig(model="er", n=10, p_edge=0.3),
         GraphEnsembleConfig(model="ws", n=10, K=2, beta=0.1)]


def test_config_validation():
    with pytest.raises(InvalidInputError):
        ExperimentConfig(SMALL, measured_counts=[0, 1])
    with pytest.raises(InvalidInputError):
        ExperimentConfig(SMALL, measured_counts=[11])
    with pytest.raises(InvalidInputError):
        ExperimentConfig(SMALL, trials=0)
    with pytest.raises(InvalidInputError):
        ExperimentConfig.from_dict({"ensembles": [{"model": "er", "bogus": 1}]})
    with pytest.raises(InvalidInputError):
        ExperimentConfig.from_dict({})
    cfg = ExperimentConfig.from_dict({"ensembles": [{"model": "ws", "n": 12}], "trials": 3})
    assert cfg.trials == 3 and cfg.ensembles[0].n == 12


def test_rerun_is_bit_identical():
    cfg = ExperimentConfig(SMALL, measured_counts=[1, 2, 5], trials=1, seed=4)
    assert rows_to_csv(run_experiment(cfg, 1)) == rows_to_csv(run_experiment(cfg, 1))


def test_output_independent_of_workers():
    cfg = ExperimentConfig(SMALL, measured_counts=[1, 3], trials=4, seed=2)
    assert rows_to_csv(run_experiment(cfg, 1)) == rows_to_csv(run_experiment(cfg, 2))


def test_harness_matches_library_loop():
    cfg = ExperimentConfig(SMALL, measured_counts=list(range(1, 11)), trials=3, seed=9)
    text = rows_to_csv(run_experiment(cfg, 1))

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for e, ens in enumerate(cfg.ensembles):
        data = np.array([[flip_percentage(trial_network(ens, e, t, cfg.seed),
                                          trial_sensors(ens.n, c, e, t, cfg.seed))
                          for c in cfg.measured_counts] for t in range(cfg.trials)])
        for k, c in enumerate(cfg.measured_counts):
            w.writerow([ens.name, ens.n, c, format_float(data[:, k].mean()),
                        format_float(data[:, k].std(ddof=1)), cfg.trials, 0])
    assert text == buf.getvalue()


def test_rows_are_sane():
    cfg = ExperimentConfig(SMALL, measured_counts=[1, 10], trials=3, seed=1)
    rows = run_experiment(cfg, 1)
    assert len(rows) == 4
    for r in rows:
        assert 0.0 <= r.mean <= 100.0 and r.std >= 0.0 and r.trials == 3
    # measuring every node leaves nothing to flip
    assert all(r.mean == 0.0 for r in rows if r.measured == 10)


def test_seeds_differ_across_trials_and_ensembles():
    ens = SMALL[0]
    assert not np.array_equal(trial_network(ens, 0, 0, 0), trial_network(ens, 0, 1, 0))
    assert not np.array_equal(trial_network(ens, 0, 0, 0), trial_network(ens, 1, 0, 0))
    assert not np.array_equal(trial_network(ens, 0, 0, 0), trial_network(ens, 0, 0, 1))
    assert trial_sensors(10, 3, 0, 0, 0) == trial_sensors(10, 3, 0, 0, 0)


def test_failed_trials_are_counted(monkeypatch):
    real = experiment.flip_percentage
    calls = {"n": 0}

    def flaky(A, sensors, *args):
        calls["n"] += 1
        if calls["n"] == 1:
            raise SolverError("synthetic failure")
        return real(A, sensors, *args)

    monkeypatch.setattr(experiment, "flip_percentage", flaky)
    cfg = ExperimentConfig(SMALL[:1], measured_counts=[1, 2], trials=3, seed=0)
    rows = run_experiment(cfg, 1)
    assert all(r.trials == 2 and r.failed == 1 for r in rows)


def test_csv_header_names_denominator():
    text = rows_to_csv([])
    assert text.splitlines()[0] == ",".join(CSV_HEADER)
    assert "n2" in CSV_HEADER[3]


def test_default_workers_env(monkeypatch):
    monkeypatch.setenv("NETID_WORKERS", "3")
    assert experiment.default_workers() == 3
    monkeypatch.setenv("NETID_WORKERS", "junk")
    assert experiment.default_workers() == 1
