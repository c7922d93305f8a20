import math

import numpy as np
import pytest

import dictrnn


def test_chebyshev_pipeline_tracks_exactly():
    traj = dictrnn.generate(dictrnn.make_map("chebyshev"), [0.3], 5000, 1000, 100)
    grid = dictrnn.build_grid(32, [traj.at(0)], 1e-3, 1, 16)
    q = dictrnn.quantize_series(traj, grid, traj.t_min, 0)
    d = dictrnn.build_dictionary(q, grid, 1)
    assert d.N <= 32
    assert dictrnn.check_closure(d).closed
    init = dictrnn.initial_window(q, 1)
    ws = dictrnn.build_weights(d, init)
    assert isinstance(ws.X, np.ndarray) and ws.X.shape == (d.N, d.N)
    rec = dictrnn.run(ws, 1000, d)
    orbit = dictrnn.generate_ystar(d, init, 1000)
    assert rec.status == dictrnn.RunStatus.completed
    for row in rec.rows:
        assert abs(row.yhat - grid.points[orbit.index_at(row.t)]) <= 1e-12
        assert row.onehot_residual <= 1e-8
    cert = dictrnn.lipschitz(dictrnn.make_map("chebyshev"), dictrnn.LipschitzMethod.analytic)
    assert cert.e_lambda == 4.0
    rep = dictrnn.check_bound(traj, rec, orbit, grid, cert, 1)
    assert rep.verdict == dictrnn.BoundVerdict.holds


def test_quantizer_ties_go_up():
    g = dictrnn.make_grid([-0.75, -0.25, 0.25, 0.75])
    assert g.quantize(0.0) == 2
    assert dictrnn.quantize(-0.5, g) == 1
    assert math.isclose(g.radius, 0.25)


def test_full_suite_and_config():
    cfg = dictrnn.config(map="periodic", params={"p": 2}, seed_window=[0.3, -0.3], K=4,
                         jitter_scale=0.0, train_len=20, eval_len=20, burn_in=0, horizon=20)
    r = dictrnn.full_suite(cfg)
    assert r.ledger.passed
    assert r.weights.N == 2
    assert list(r.weights.W_in) == [-4.0, 4.0]
    with pytest.raises(dictrnn.ConfigError):
        dictrnn.config(map="lorenz")
    with pytest.raises(dictrnn.ConfigError):
        dictrnn.config(no_such_field=1)


def test_cli_commands(tmp_path):
    cfg = dictrnn.config(map="constant", params={"c": 0.3, "L": 2}, K=4, jitter_scale=0.0,
                         train_len=50, eval_len=100, horizon=100, burn_in=0,
                         out_dir=str(tmp_path))
    for cmd in (dictrnn.cmd_generate, dictrnn.cmd_build, dictrnn.cmd_run, dictrnn.cmd_verify):
        rc, log = cmd(cfg)
        assert rc == 0, log
    manifest = dictrnn.load_manifest(str(tmp_path))
    assert manifest["N"] == 1
    rc, log = dictrnn.cmd_report(str(tmp_path))
    assert rc == 0
    (tmp_path / "weights.bin").write_bytes(b"RNNW" + b"\0" * 8)
    with pytest.raises(dictrnn.ChecksumMismatch):
        dictrnn.load_manifest(str(tmp_path))
