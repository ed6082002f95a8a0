import math

import numpy as np
import pytest

import ncq


def test_car_relations_and_moments():
    assert ncq.car_relation_residual(4) <= 1e-13
    mu = [0.3, 0.6]
    # tr(D a_1* a_1) = mu_1
    assert abs(ncq.car_dense_trace(mu, [(1, True), (1, False)]) - 0.3) <= 1e-14
    assert abs(ncq.car_moment_formula(mu, [1, 2], [1, 2]) - 0.18) <= 1e-15
    word = [(1, False), (2, False), (2, True), (1, True)]
    assert abs(ncq.car_wick_moment(mu, word, -1.0) - ncq.car_dense_trace(mu, word)) <= 1e-12


def test_generator_shape_and_density():
    a = ncq.car_generator(1, 2)
    assert a.shape == (4, 4)
    d = ncq.quasifree_density([0.25, 0.5])
    assert abs(np.trace(d) - 1) <= 1e-14


def test_clt_converges():
    word = [(1, False), (2, False), (1, True), (2, True)]
    lim = ncq.clt_limit_moment([0.3, 0.7], word, q=0.5)
    e8 = abs(ncq.clt_finite_moment([0.3, 0.7], word, 8, q=0.5) - lim)
    e16 = abs(ncq.clt_finite_moment([0.3, 0.7], word, 16, q=0.5) - lim)
    assert 1.5 <= e8 / e16 <= 3.0


def test_ccr_series():
    series, closed, err = ncq.ccr_charfn_series(0.3, 0.5, -1.0)
    z, w, mu = 0.5, -1.0, 0.3
    expect = np.exp(1j * z * w * (2 * mu - 1)) * math.exp((z * z + w * w) / 2)
    assert abs(closed - expect) <= 1e-12
    assert err <= 1e-6


def test_khintchine_scalar_ratio():
    r = ncq.khintchine_ratio([np.eye(1, dtype=complex)], [0.5])
    assert 1 / math.sqrt(2) - 0.01 <= r["ratio"] <= math.sqrt(2) + 0.01
    assert r["within_budget"]


def test_oh_and_weights():
    for n in range(1, 6):
        x = [np.outer(np.eye(n)[k], np.eye(n)[0]).astype(complex) for k in range(n)]
        assert abs(ncq.oh_norm(x) - n ** 0.25) <= 1e-10
    assert ncq.rp_sigma(2, 0) == 0.5
    assert ncq.rp_sigma(2, 1) == 1.0
    assert ncq.rp_sigma(2, -1) == 0.0


def test_errors_map_to_python():
    with pytest.raises(ValueError):
        ncq.car_dense_trace([1.2], [(1, False)])
    with pytest.raises(ValueError):
        ncq.run({"command": "clt-mc"})


def test_run_report_and_determinism():
    assert "kh-ratio" in ncq.commands()
    cfg = {"command": "kh-ratio", "kh-ratio": {"random_instances": 3}}
    a = ncq.run(cfg, seed=4)
    b = ncq.run(cfg, seed=4, jobs=2)
    assert a["summary"]["failed"] == 0
    assert a["records"] == b["records"]
    assert a["config"]["seed"] == 4
