import json

import numpy as np
import pytest

from vnlab.cli import EXPERIMENTS, list_experiments, main, validate_config
from vnlab.errors import BadConfig


def write_cfg(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return p


SIGMA_CFGS = {
    "lie-rank": {
        "kind": "lie-rank",
        "generators": [
            {"dim": 2, "re": [0, 0, 0, 0], "im": [0, 1, 1, 0]},
            {"dim": 2, "re": [0, 0, 0, 0], "im": [1, 0, 0, -1]},
            {"dim": 2, "re": [0, 0, 0, 0], "im": [1, 0, 0, 1]},
        ],
        "algebra": {"blocks": [[2, 1]], "weights": [1.0], "perm": [0, 1]},
    },
    "drift-approx": {
        "kind": "drift-approx",
        "torus": {"d": 1, "alpha": [1.0], "K": 3},
        "z_grid": [1.0, 0.5],
        "levels": 3,
    },
    "koopman": {"kind": "koopman", "torus": {"d": 2, "alpha": [1.0, 1.0], "K": 1}},
    "product-formula": {
        "kind": "product-formula",
        "formula": "trotter",
        "dim": 6,
        "t": 1.0,
        "n_ladder": [4, 8, 16],
        "seed": 3,
    },
    "born": {"kind": "born", "dim": 5, "seed": 1, "horizon": 1.0, "nodes": 9},
    "reachable": {
        "kind": "reachable",
        "dim": 4,
        "seed": 7,
        "horizon": 1.0,
        "bound": 1.0,
        "samples": 3,
    },
    "jaynes-cummings": {"kind": "jaynes-cummings", "n_max": 8},
    "oscillator": {"kind": "oscillator", "n_max": 12},
}


def test_list_covers_all_kinds():
    text = list_experiments()
    assert len(EXPERIMENTS) == 8
    for kind, (_, fields) in EXPERIMENTS.items():
        assert kind in text
        for f in fields:
            assert f in text


def test_list_stable():
    assert list_experiments() == list_experiments()


def test_list_exit_code(capsys):
    assert main(["list"]) == 0
    assert "drift-approx" in capsys.readouterr().out


def test_required_fields_match_validator():
    for kind, (_, fields) in EXPERIMENTS.items():
        cfg = {"kind": kind}
        with pytest.raises(BadConfig) as err:
            validate_config(cfg)
        for f in fields:
            assert f in str(err.value)


@pytest.mark.parametrize("kind", sorted(SIGMA_CFGS))
def test_run_each_kind(tmp_path, kind):
    cfg = SIGMA_CFGS[kind]
    out = tmp_path / "out"
    code = main(["run", str(write_cfg(tmp_path, cfg)), "--out", str(out)])
    assert code == 0
    result = json.loads((out / "result.json").read_text())
    assert result["kind"] == kind
    assert result["version"]
    assert "tolerances" in result and "verdicts" in result
    assert all(result["verdicts"].values()), result["verdicts"]


def test_malformed_config_exits_2_without_artifacts(tmp_path):
    out = tmp_path / "out"
    cfg = write_cfg(tmp_path, {"kind": "drift-approx", "z_grid": [1.0]})
    assert main(["run", str(cfg), "--out", str(out)]) == 2
    assert not out.exists()


def test_unknown_kind_exits_2(tmp_path):
    cfg = write_cfg(tmp_path, {"kind": "nope"})
    assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_unreadable_config_exits_2(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    assert main(["run", str(p), "--out", str(tmp_path / "o")]) == 2


def test_numerical_failure_exits_3(tmp_path, monkeypatch):
    from vnlab import cli
    from vnlab.errors import NoConvergence

    def boom(*args, **kwargs):
        raise NoConvergence("synthetic diagonalization failure")

    monkeypatch.setattr(cli, "convergence_sweep", boom)
    cfg = write_cfg(tmp_path, SIGMA_CFGS["drift-approx"])
    assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 3


def test_reproducible_csv_bytes(tmp_path):
    cfg = SIGMA_CFGS["product-formula"]
    out1, out2 = tmp_path / "a", tmp_path / "b"
    main(["run", str(write_cfg(tmp_path, cfg)), "--out", str(out1)])
    main(["run", str(write_cfg(tmp_path, cfg, "cfg2.json")), "--out", str(out2)])
    assert (out1 / "product_formula.csv").read_bytes() == (out2 / "product_formula.csv").read_bytes()


def test_drift_csv_shape(tmp_path):
    out = tmp_path / "out"
    main(["run", str(write_cfg(tmp_path, SIGMA_CFGS["drift-approx"])), "--out", str(out)])
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0] == "z,refinement_index,srt_distance"
    assert len(lines) == 1 + 2 * 3  # z grid outer, refinement inner
    zs = [float(l.split(",")[0]) for l in lines[1:]]
    assert zs == [1.0, 1.0, 1.0, 0.5, 0.5, 0.5]


def test_reachable_csv_columns(tmp_path):
    out = tmp_path / "out"
    main(["run", str(write_cfg(tmp_path, SIGMA_CFGS["reachable"])), "--out", str(out)])
    lines = (out / "trajectories.csv").read_text().splitlines()
    header = lines[0].split(",")
    dim = SIGMA_CFGS["reachable"]["dim"]
    assert header[:3] == ["seed", "segment_count", "T"]
    assert len(header) == 3 + 2 * dim
    assert len(lines) == 1 + SIGMA_CFGS["reachable"]["samples"]
    # endpoints are unit vectors
    for line in lines[1:]:
        vals = np.array([float(x) for x in line.split(",")[3:]])
        assert np.hypot(vals[:dim], vals[dim:]).sum() > 0
        assert abs(np.sum(vals**2) - 1.0) <= 1e-9


def test_koopman_result_blocks(tmp_path):
    out = tmp_path / "out"
    main(["run", str(write_cfg(tmp_path, SIGMA_CFGS["koopman"])), "--out", str(out)])
    result = json.loads((out / "result.json").read_text())
    assert result["block_multiplicities"] == [1, 1, 2, 2, 3]
