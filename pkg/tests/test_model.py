import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netid.errors import InvalidInputError
from netid.model import GraphEnsembleConfig, NetworkSystem, generate, generate_er, \
    generate_ws, load_json, load_system, matrix_to_csv, random_sensors, read_matrix_csv, \
    save_system, sensor_matrix, sparsity_mask, system_from_dict, system_to_dict, ws_edge_list

from conftest import EXAMPLE_A


def test_system_validation():
    with pytest.raises(InvalidInputError):
        NetworkSystem(np.ones((2, 3)), np.ones((1, 3)))
    with pytest.raises(InvalidInputError):
        NetworkSystem(np.eye(3), np.ones((1, 2)))
    with pytest.raises(InvalidInputError):
        NetworkSystem(np.eye(3), [[1.0, 0, 0], [2.0, 0, 0]])
    with pytest.raises(InvalidInputError):
        NetworkSystem([[np.inf]], [[1.0]])


def test_measured_indices():
    sys = NetworkSystem.from_sensors(np.eye(4), [2, 0])
    assert sys.measured == [0, 2]
    assert NetworkSystem(np.eye(2), [[0.5, 0.5]]).measured is None


def test_sensor_matrix():
    assert np.array_equal(sensor_matrix(4, [0]), [[1.0, 0, 0, 0]])
    assert np.array_equal(sensor_matrix(3, [2, 1]), [[0.0, 1, 0], [0, 0, 1]])
    for bad in ([], [0, 0], [3], [-1]):
        with pytest.raises(InvalidInputError):
            sensor_matrix(3, bad)


def test_sparsity_mask_of_example():
    Z = sparsity_mask(EXAMPLE_A)
    assert Z.sum() == 9
    assert np.array_equal(Z, EXAMPLE_A != 0)
    assert sparsity_mask([[1e-5, 2e-5]]).tolist() == [[0.0, 1.0]]
    with pytest.raises(InvalidInputError):
        sparsity_mask(EXAMPLE_A, -1.0)


def test_ensemble_config_validation():
    with pytest.raises(InvalidInputError):
        GraphEnsembleConfig(model="ba")
    with pytest.raises(InvalidInputError):
        GraphEnsembleConfig(p_edge=1.5)
    with pytest.raises(InvalidInputError):
        GraphEnsembleConfig(model="ws", n=3, K=3)
    assert "ER" in GraphEnsembleConfig().name
    assert "WS" in GraphEnsembleConfig(model="ws").name


def test_er_edge_density_concentrates():
    cfg = GraphEnsembleConfig(n=200, p_edge=1 / 6)
    A = generate_er(cfg, np.random.default_rng(1))
    count = np.count_nonzero(A)
    trials = cfg.n ** 2
    mean = trials * cfg.p_edge
    sd = np.sqrt(trials * cfg.p_edge * (1 - cfg.p_edge))
    assert abs(count - mean) < 5 * sd
    diag = np.count_nonzero(np.diag(A))
    assert abs(diag - cfg.n / 6) < 5 * np.sqrt(cfg.n * 5 / 36)


def test_er_extremes():
    assert np.count_nonzero(generate_er(GraphEnsembleConfig(n=10, p_edge=0.0))) == 0
    assert np.count_nonzero(generate_er(GraphEnsembleConfig(n=10, p_edge=1.0))) == 100


def test_ws_structure():
    cfg = GraphEnsembleConfig(model="ws", n=60, K=3, beta=0.2)
    edges = ws_edge_list(cfg, np.random.default_rng(7))
    assert len(edges) == 60 * 3
    src = np.array([e[0] for e in edges])
    dst = np.array([e[1] for e in edges])
    assert np.all(src != dst)
    assert np.all(np.bincount(src, minlength=60) == 3)
    assert len({(s, d) for s, d in zip(src, dst)}) == len(edges)
    A = generate_ws(cfg, np.random.default_rng(7))
    assert np.count_nonzero(A) == 180
    assert np.all(np.diag(A) == 0)


def test_ws_rewiring_rate_concentrates():
    cfg = GraphEnsembleConfig(model="ws", n=400, K=3, beta=0.25)
    edges = ws_edge_list(cfg, np.random.default_rng(3))
    rewired = sum(e[3] for e in edges)
    m = len(edges)
    assert abs(rewired - m * cfg.beta) < 5 * np.sqrt(m * cfg.beta * (1 - cfg.beta))


def test_ws_without_rewiring_is_a_ring():
    cfg = GraphEnsembleConfig(model="ws", n=8, K=2, beta=0.0)
    A = generate_ws(cfg)
    for i in range(8):
        assert set(np.flatnonzero(A[:, i])) == {(i + 1) % 8, (i + 2) % 8}


def test_generators_deterministic():
    for model in ("er", "ws"):
        cfg = GraphEnsembleConfig(model=model, n=30, seed=5)
        assert np.array_equal(generate(cfg), generate(cfg))
        assert not np.array_equal(generate(cfg), generate(GraphEnsembleConfig(model=model, n=30, seed=6)))


def test_random_sensors():
    rng = np.random.default_rng(0)
    s = random_sensors(10, 4, rng)
    assert s == sorted(s) and len(set(s)) == 4
    with pytest.raises(InvalidInputError):
        random_sensors(10, 0, rng)
    with pytest.raises(InvalidInputError):
        random_sensors(10, 11, rng)


def test_random_sensors_uniform():
    rng = np.random.default_rng(0)
    hits = np.zeros(5)
    draws = 4000
    for _ in range(draws):
        hits[random_sensors(5, 2, rng)] += 1
    p = 2 / 5
    assert np.all(np.abs(hits - draws * p) < 5 * np.sqrt(draws * p * (1 - p)))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**31 - 1))
def test_json_round_trip(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    sys = NetworkSystem.from_sensors(A, [0])
    back = system_from_dict(json.loads(json.dumps(system_to_dict(sys))))
    assert np.array_equal(back.A, sys.A) and np.array_equal(back.C, sys.C)


def test_system_file_round_trip(tmp_path):
    sys = NetworkSystem.from_sensors(EXAMPLE_A, [0])
    path = tmp_path / "sys.json"
    save_system(sys, path)
    back = load_system(path)
    assert np.array_equal(back.A, sys.A)


def test_system_from_dict_errors():
    with pytest.raises(InvalidInputError):
        system_from_dict({"A": [[1.0]]})
    with pytest.raises(InvalidInputError):
        system_from_dict({"A": [[1.0]], "C": [[1.0]], "n": 2})
    with pytest.raises(InvalidInputError):
        system_from_dict([1, 2])


def test_load_json_reports_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "A": [[1, 2],\n        [3 4]],\n  "C": [[1, 0]]\n}\n')
    with pytest.raises(InvalidInputError) as info:
        load_json(path)
    msg = str(info.value)
    assert ":3:" in msg and "[3 4]" in msg


@settings(max_examples=30, deadline=None)
@given(rows=st.integers(1, 5), cols=st.integers(1, 5), seed=st.integers(0, 2**31 - 1))
def test_csv_round_trip_is_exact(tmp_path_factory, rows, cols, seed):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((rows, cols)) * 10.0 ** rng.integers(-8, 8, (rows, cols))
    path = tmp_path_factory.mktemp("csv") / "m.csv"
    path.write_text(matrix_to_csv(M))
    assert np.array_equal(read_matrix_csv(path), M)


def test_csv_format_and_errors(tmp_path):
    text = matrix_to_csv([[1.5, -2.0]], header=["a", "b"])
    assert text == "a,b\n1.5,-2.0\n"
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n3,x\n")
    with pytest.raises(InvalidInputError, match=":2:"):
        read_matrix_csv(bad)
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("1,2\n3\n")
    with pytest.raises(InvalidInputError):
        read_matrix_csv(ragged)
