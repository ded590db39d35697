import json

import pytest

from kirchhoffkit.cli import main, run
from kirchhoffkit.config import RunConfig, parse_config
from kirchhoffkit.errors import ConfigError

KIRCHHOFF = {"case": "kirchhoff_e3", "a1": 1, "a3": 2, "c1": 1, "c3": 3}


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data) if not isinstance(data, str) else data)
    return str(p)


def load(path):
    return json.loads(path.read_text())


# -- config -----------------------------------------------------------------------


def test_minimal_config_defaults():
    cfg = parse_config(json.dumps({"model": KIRCHHOFF}), "painleve")
    assert (cfg.tol, cfg.seed, cfg.precision) == (1e-10, 42, "double")
    assert cfg.report_name == "painleve.json"


def test_empty_model_rejected():
    with pytest.raises(ConfigError, match="model.case required") as exc:
        parse_config(json.dumps({"model": {}}), "painleve")
    assert exc.value.key == "model.case"


def test_tol_out_of_range():
    with pytest.raises(ConfigError) as exc:
        parse_config(json.dumps({"model": KIRCHHOFF, "numeric": {"tol": 1e-20}}), "painleve")
    assert exc.value.key == "numeric.tol"


@pytest.mark.parametrize("seed", [-1, 2**63, 1.5, True])
def test_seed_range(seed):
    with pytest.raises(ConfigError):
        parse_config(json.dumps({"model": KIRCHHOFF, "numeric": {"seed": seed}}), "painleve")


def test_unknown_keys_rejected():
    for data in ({"model": KIRCHHOFF, "extra": 1},
                 {"model": KIRCHHOFF, "numeric": {"tolerance": 1e-8}},
                 {"model": KIRCHHOFF, "options": {"n_points": 5}}):
        with pytest.raises(ConfigError):
            parse_config(json.dumps(data), "painleve")


def test_parse_error_has_position():
    with pytest.raises(ConfigError) as exc:
        parse_config('{\n  "model": {,\n}', "painleve")
    assert exc.value.line == 2 and exc.value.column is not None


def test_invalid_model_is_config_error():
    with pytest.raises(ConfigError) as exc:
        parse_config(json.dumps({"model": dict(KIRCHHOFF, case="kirchhoff_e5")}), "painleve")
    assert exc.value.key == "model"


def test_round_trip():
    cfg = parse_config(json.dumps({
        "command": "perturb", "model": dict(KIRCHHOFF, b3=[0.1, 0.0]),
        "numeric": {"tol": 1e-12, "seed": 7, "precision": "extended"},
        "output": {"dir": "out", "report": "r.json"}, "options": {"alpha": 0.6, "beta": 0.8},
    }))
    again = parse_config(cfg.dumps())
    assert again == cfg
    assert isinstance(again, RunConfig)


# -- runs ---------------------------------------------------------------------------


def test_perturb_report(tmp_path):
    cfg = parse_config(json.dumps({"model": dict(KIRCHHOFF, b3=0.1), "output": {"dir": str(tmp_path)}}), "perturb")
    code, _ = run(cfg)
    rep = load(tmp_path / "perturb.json")
    assert code == 0
    assert rep["schema_version"] == 1
    re, im = rep["ln_coefficient"]
    assert abs(re) <= 1e-10 and abs(im + 0.5) <= 1e-10


def test_painleve_expected_failure(tmp_path):
    path = write(tmp_path, "p.json", {"model": dict(KIRCHHOFF, b3=0.1), "options": {"n_starts": 100}})
    out = tmp_path / "o"
    assert main(["painleve", "--config", path, "--out", str(out)]) == 0
    assert load(out / "painleve.json")["verdict"] == "fail: NoPoleBalance"
    assert main(["painleve", "--config", path, "--out", str(out), "--strict-pass"]) == 4


def test_simulate_through_pole(tmp_path):
    path = write(tmp_path, "s.json", {"model": KIRCHHOFF, "options": {"x0": "laurent", "path": [-1, 1]}})
    assert main(["simulate", "--config", path, "--out", str(tmp_path)]) == 3
    err = load(tmp_path / "simulate.json")["error"]
    assert err["type"] == "StepCollapse"


def test_simulate_writes_csv(tmp_path):
    path = write(tmp_path, "s.json", {"model": KIRCHHOFF, "options": {"x0": "laurent", "path": [1, 2]},
                                      "output": {"csv": "traj.csv"}})
    assert main(["simulate", "--config", path, "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "traj.csv").read_text().splitlines()
    assert lines[0].startswith("t_re,t_im,M1_re,M1_im")
    assert len(lines) > 2


def test_config_error_exit(tmp_path, capsys):
    path = write(tmp_path, "bad.json", '{"model": {"case": "kirchhoff_e3", "a1": }')
    assert main(["painleve", "--config", path]) == 2
    err = json.loads(capsys.readouterr().err)["error"]
    assert "line" in err and "column" in err


def test_missing_config_file(tmp_path):
    assert main(["painleve", "--config", str(tmp_path / "nope.json")]) == 2


def test_reports_byte_identical(tmp_path):
    path = write(tmp_path, "l.json", {"model": {"case": "chaplygin_e3", "a1": 1, "a3": 2, "a13": 0.3, "c1": 1, "c3": 3},
                                      "numeric": {"tol": 1e-11}})
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["lax-check", "--config", path, "--out", str(a), "--seed", "5"]) == 0
    assert main(["lax-check", "--config", path, "--out", str(b), "--seed", "5"]) == 0
    assert (a / "lax-check.json").read_bytes() == (b / "lax-check.json").read_bytes()


def test_float_format_17_digits(tmp_path):
    cfg = parse_config(json.dumps({"model": dict(KIRCHHOFF, b3=0.1), "output": {"dir": str(tmp_path)},
                                   "options": {"fit": False}}), "perturb")
    _, text = run(cfg)
    # b3 = 0.1 is echoed with all 17 significant digits
    assert '"b3": 0.10000000000000001' in text
    keys = list(json.loads(text))
    assert keys == sorted(keys)


def test_e4_check(tmp_path):
    path = write(tmp_path, "e.json", {"model": {"case": "kirchhoff_e4", "A1212": 1.3, "A1313": 0.7, "A3434": 2.1,
                                                "C11": 1.1, "C33": 2.5}, "options": {"n_points": 200}})
    assert main(["e4-check", "--config", path, "--out", str(tmp_path)]) == 0
    rep = load(tmp_path / "e4-check.json")
    assert rep["involution"]["passes"]
    assert all(w["found"] for w in rep["witnesses"].values())


def test_wrong_case_for_command(tmp_path):
    path = write(tmp_path, "e.json", {"model": KIRCHHOFF})
    assert main(["e4-check", "--config", path, "--out", str(tmp_path)]) == 2
