import json

import numpy as np
import pytest

from boundkde.boundary_kernels import SampleSet, estimate, estimate_grid
from boundkde.cli import eval_model, main, worker_count
from boundkde.errors import ModelFormatError, OutOfDomain, ParseError
from boundkde.io import ModelFile, dump_model, format_float, load_model, read_csv, write_table
from boundkde.selection import SelectionConfig, select


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_read_csv_examples(tmp_path):
    s = read_csv(write(tmp_path, "a.csv", "0.1\n0.2\n"))
    assert (s.n, s.d) == (2, 1)
    np.testing.assert_array_equal(s.points[:, 0], [0.1, 0.2])
    s = read_csv(write(tmp_path, "b.csv", "x,y\n0.5,0.5\n"))
    assert (s.n, s.d) == (1, 2)
    with pytest.raises(OutOfDomain) as err:
        read_csv(write(tmp_path, "c.csv", "1.5\n"))
    assert (err.value.line, err.value.column) == (1, 1)


def test_read_csv_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_csv(tmp_path / "missing.csv")
    with pytest.raises(ParseError) as err:
        read_csv(write(tmp_path, "d.csv", "0.1,0.2\n0.3\n"))
    assert err.value.line == 2
    with pytest.raises(ParseError) as err:
        read_csv(write(tmp_path, "e.csv", "0.1\nabc\n"))
    assert err.value.line == 2
    with pytest.raises(OutOfDomain) as err:
        read_csv(write(tmp_path, "f.csv", "a,b\n0.1,0.2\n\n0.3,-0.1\n"))
    assert (err.value.line, err.value.column) == (4, 2)
    with pytest.raises(ParseError):
        read_csv(write(tmp_path, "g.csv", "x\n"))


def test_format_float_round_trips():
    rng = np.random.default_rng(0)
    for v in rng.random(200) * 10.0 ** rng.integers(-8, 8, 200):
        assert float(format_float(v)) == v
    with pytest.raises(ValueError):
        format_float(float("nan"))
    assert write_table(["a", "b"], [(1, 0.1)]) == "a,b\n1,0.1\n"


def fitted_model(seed=0, n=1000):
    sample = SampleSet(np.random.default_rng(seed).random((n, 1)))
    cfg = SelectionConfig()
    trace, spec = select(sample, cfg)
    return ModelFile.from_fit({"p": 2.0, "mode": "iso"}, trace, spec, sample), sample, spec


def test_model_round_trip(tmp_path):
    model, sample, spec = fitted_model()
    path = tmp_path / "m.json"
    text = dump_model(model, path)
    back = load_model(path)
    assert back == model
    assert dump_model(back) == text
    assert back.spec() == spec
    assert back.sample() == sample
    assert json.loads(text)["schema_version"] == 1


def test_model_format_errors(tmp_path):
    model, _, _ = fitted_model()
    data = model.to_dict()
    for broken in (
        {**data, "schema_version": 2},
        {k: v for k, v in data.items() if k != "trace"},
        {**data, "sample": {**data["sample"], "n": 5}},
    ):
        path = write(tmp_path, "bad.json", json.dumps(broken))
        with pytest.raises(ModelFormatError):
            load_model(path)
    with pytest.raises(ModelFormatError):
        load_model(write(tmp_path, "junk.json", "{not json"))
    tampered = dict(data)
    tampered["kernels"] = [{"order": 1, "coeffs": [4.0, -5.0]}]
    with pytest.raises(ModelFormatError):
        ModelFile.from_dict(tampered).spec()


@pytest.fixture
def sample100(tmp_path):
    pts = np.random.default_rng(1).random(100)
    return write(tmp_path, "s.csv", "x\n" + "".join(f"{float(v)!r}\n" for v in pts))


def test_fit_and_eval(tmp_path, sample100, capsys):
    model_path = tmp_path / "model.json"
    assert main(["fit", "--input", str(sample100), "--out", str(model_path)]) == 0
    model = load_model(model_path)
    assert model.chosen == (3,)
    assert model.config["tau"] == 1.0 and model.config["mode"] == "iso"
    out = tmp_path / "eval.csv"
    assert main(["eval", "--model", str(model_path), "--grid-res", "11", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t_1,fhat"
    assert len(lines) == 12
    sample = read_csv(sample100)
    spec = model.spec()
    for line in lines[1:]:
        t, f = (float(v) for v in line.split(","))
        assert f == pytest.approx(estimate(spec, sample, [t]), abs=1e-14)
    # stdout path
    assert main(["eval", "--model", str(model_path), "--grid-res", "3"]) == 0
    assert capsys.readouterr().out.count("\n") == 4


def test_eval_clip_negative(tmp_path):
    model, _, _ = fitted_model(seed=5, n=300)
    path = tmp_path / "m.json"
    dump_model(model, path)
    pts, raw = eval_model(model, 201)
    _, clipped = eval_model(model, 201, clip=True)
    assert np.all(clipped >= 0)
    np.testing.assert_array_equal(raw, estimate_grid(model.spec(), model.sample(), pts))


def test_exit_codes(tmp_path, capsys):
    assert main(["family", "--n", "100", "--d", "2", "--c", "1", "--mode", "ani"]) == 4
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith("boundkde: error: EmptyFamily:")
    assert main(["family"]) == 2
    assert main(["nonsense"]) == 2
    assert main(["fit", "--input", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "m.json")]) == 3
    bad = write(tmp_path, "bad.csv", "0.5\n1.5\n")
    assert main(["fit", "--input", str(bad), "--out", str(tmp_path / "m.json")]) == 3
    assert "OutOfDomain" in capsys.readouterr().err
    assert main(["kernels", "--order", "41"]) == 3


def test_family_and_kernels_output(tmp_path, capsys):
    assert main(["family", "--n", "1000"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "ell,m,h"
    assert [line.split(",")[:2] for line in out[1:]] == [["3", "1"], ["4", "1"]]
    assert main(["family", "--n", "1000000", "--d", "2", "--mode", "ani"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "ell_1,ell_2,m_1,m_2,h_1,h_2" and len(out) == 11
    assert main(["kernels", "--order", "2", "--samples", "4"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "u,w"
    assert out[1] == "0.0,9.0"
    assert len(out) == 6


def test_repeated_runs_byte_identical(tmp_path, sample100, monkeypatch):
    outs = []
    for threads in ("1", "4", "1"):
        monkeypatch.setenv("BOUNDKDE_THREADS", threads)
        path = tmp_path / f"m{len(outs)}.json"
        assert main(["fit", "--input", str(sample100), "--out", str(path)]) == 0
        risk = tmp_path / f"r{len(outs)}.csv"
        assert main(["simulate", "risk", "--n-list", "200,400", "--reps", "5", "--seed", "3",
                     "--out", str(risk)]) == 0
        outs.append((path.read_bytes(), risk.read_bytes()))
    assert outs[0] == outs[1] == outs[2]


def test_worker_count(monkeypatch):
    monkeypatch.setenv("BOUNDKDE_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("BOUNDKDE_THREADS", "0")
    assert worker_count() >= 1
    monkeypatch.setenv("BOUNDKDE_THREADS", "-1")
    assert main(["simulate", "risk", "--reps", "2", "--n-list", "50"]) == 2


def test_simulate_config_file(tmp_path):
    cfg = write(tmp_path, "cfg.json", json.dumps({"p": 1.0, "h_list": [0.05, 0.1]}))
    out = tmp_path / "bias.csv"
    assert main(["simulate", "bias", "--config", str(cfg), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "h,integrated_bias_naive,integrated_bias_boundary"
    assert [float(line.split(",")[0]) for line in lines[1:]] == [0.05, 0.1]
    naive = float(lines[1].split(",")[1])
    assert naive == pytest.approx(2 * 0.05 * 3 / 16, rel=1e-12)
    bad = write(tmp_path, "bad.json", json.dumps({"bogus": 1}))
    assert main(["simulate", "bias", "--config", str(bad)]) == 2


def test_simulate_risk_and_oracle_tables(tmp_path):
    out = tmp_path / "risk.csv"
    assert main(["simulate", "risk", "--fixed-ell", "3", "--fixed-order", "1", "--n-list", "200,800",
                 "--reps", "10", "--seed", "1", "--out", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "n,replicates,risk,stderr,slope"
    assert len(rows) == 3 and rows[1].split(",")[4] == rows[2].split(",")[4]
    out = tmp_path / "oracle.csv"
    assert main(["simulate", "oracle", "--density", "bump", "--n", "500", "--reps", "3",
                 "--seed", "2", "--out", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "replicate,chosen,best,loss_selected,loss_best,ratio"
    assert len(rows) == 4
    for row in rows[1:]:
        assert float(row.split(",")[5]) >= 1.0
