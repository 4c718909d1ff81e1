import json
import subprocess
import sys

import numpy as np
import pytest

from structmor.cli import main
from structmor.interconnection import topology_to_dict
from structmor.lti import StateSpace, load_model, model_to_dict, save_model
from systems import random_passive, random_topology

MODEL = StateSpace([[0, 1], [-2, -3]], [[0], [1]], [[3, 1]], [[0]])


def _error(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


@pytest.fixture
def msd_file(tmp_path):
    path = tmp_path / "msd.json"
    save_model(MODEL, path)
    return path


@pytest.fixture
def topo_file(tmp_path):
    rng = np.random.default_rng(3)
    subs = [random_passive(rng, 4, 1)[0], random_passive(rng, 3, 2)[0]]
    topo = random_topology(rng, [1, 2])
    path = tmp_path / "topo.json"
    path.write_text(json.dumps(topology_to_dict(topo, [model_to_dict(s) for s in subs], [2, 2])))
    return path


def test_reduce_single_system(msd_file, tmp_path, capsys):
    out = tmp_path / "r"
    assert main(["reduce", "--method", "lyapbt", "--model", str(msd_file), "--order", "1",
                 "--out", str(out)]) == 0
    assert "order 2 -> 1" in capsys.readouterr().out
    data = json.loads((out / "reduced.json").read_text())
    assert data["method"] == "LyapBT" and len(data["gamma"]) == 2
    assert load_model(out / "reduced.json").n == 1


def test_reduce_is_deterministic(msd_file, tmp_path):
    texts = []
    for k in range(2):
        out = tmp_path / f"r{k}"
        assert main(["--seed", str(k), "reduce", "--method", "mgbt", "--model", str(msd_file),
                     "--order", "1", "--out", str(out)]) == 0
        texts.append((out / "reduced.json").read_text())
    assert texts[0] == texts[1]


def test_missing_input_is_io_error(tmp_path, capsys):
    out = tmp_path / "never"
    code = main(["reduce", "--method", "lyapbt", "--model", str(tmp_path / "nope.json"),
                 "--order", "1", "--out", str(out)])
    assert code == 1 and _error(capsys)["exit_code"] == 1
    assert not out.exists()


def test_invalid_json_is_io_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["analyze", str(bad), str(bad), "--out", str(tmp_path / "a")]) == 1


def test_precondition_failures(msd_file, tmp_path, capsys):
    unstable = tmp_path / "u.json"
    save_model(StateSpace([[1.0]], [[1]], [[1]], [[0]]), unstable)
    assert main(["reduce", "--method", "prbt", "--model", str(unstable), "--order", "1",
                 "--out", str(tmp_path / "x")]) == 2
    assert "stable" in _error(capsys)["message"]
    wide = tmp_path / "w.json"
    save_model(StateSpace([[-1]], [[1, 1]], [[1], [1]], np.zeros((2, 2))), wide)
    assert main(["analyze", str(msd_file), str(wide), "--out", str(tmp_path / "y")]) == 2
    assert _error(capsys)["error"] == "DimensionError"
    assert main(["reduce", "--method", "lyapbt", "--model", str(msd_file), "--orders", "a,b",
                 "--out", str(tmp_path / "z")]) == 2
    assert not (tmp_path / "x").exists() and not (tmp_path / "z").exists()


def test_analyze(msd_file, tmp_path, capsys):
    first = tmp_path / "first.json"
    save_model(StateSpace([[-1.0]], [[1.0]], [[0.5]], [[0.0]]), first)
    assert main(["analyze", str(msd_file), str(first), "--out", str(tmp_path / "a")]) == 0
    text = capsys.readouterr().out
    norms = json.loads((tmp_path / "a" / "norms.json").read_text())
    assert f"h2 {norms['h2']:.6g}" in text and norms["linf"] > 0


@pytest.mark.parametrize("method", ["isbt", "pibt"])
def test_structured_reduction(method, topo_file, tmp_path, capsys):
    out = tmp_path / method
    assert main(["reduce", "--method", method, "--topology", str(topo_file),
                 "--out", str(out)]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert {"sub0.json", "sub1.json", "coupled.json"} <= set(names)
    assert load_model(out / "coupled.json").n == 4
    if method == "pibt":
        certs = json.loads((out / "certificates.json").read_text())
        assert all(c["feasible"] for c in certs.values())
        assert "coupled passive: yes" in capsys.readouterr().out


def test_couple(topo_file, tmp_path, capsys):
    out = tmp_path / "c"
    assert main(["couple", str(topo_file), "--certify", "--out", str(out)]) == 0
    data = json.loads((out / "coupled.json").read_text())
    assert len(data["A"]) == 7 and data["Xi"] is not None
    assert "passive: yes" in capsys.readouterr().out


def test_bench_beam_subset(tmp_path, capsys):
    out = tmp_path / "b"
    assert main(["bench-beam", "--orders", "6,6", "--methods", "mgbt", "--svg",
                 "--out", str(out)]) == 0
    assert (out / "frf.svg").exists() and (out / "norms.csv").exists()
    assert capsys.readouterr().out.startswith("method")
    assert main(["bench-beam", "--methods", "foo", "--out", str(tmp_path / "n")]) == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "structmor.cli", "--help"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "bench-beam" in res.stdout
