import csv
import hashlib
import json

import numpy as np
import pytest

from skpsolve import ConfigurationError, HypothesisViolation, build_domain
from skpsolve.cli import EXIT_CONFIG, EXIT_OK, main
from skpsolve.config import RunConfig, env_overrides, load_config, parse_config_text
from skpsolve.export import canonical_json, envelope, input_hash, strip_timestamps, write_profile


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_defaults():
    cfg = RunConfig().validate()
    assert (cfg.a, cfg.b, cfg.p, cfg.m, cfg.tol, cfg.max_iter, cfg.path_nodes) == \
        (1.0, 1.0, 5.0, 32, 1e-9, 50_000, 33)
    assert cfg.grid_points == 1023
    assert RunConfig(dim=2).grid_points == 63


def test_parse_config_text():
    text = "# model\na = 2\nb=0.5  # trailing comment\n\nalpha-plus = 3\nOUTPUT = out\nR = 8\n"
    with pytest.raises(ConfigurationError):
        parse_config_text(text)
    values = parse_config_text(text.replace("alpha-plus", "alpha_plus"))
    assert values == {"a": 2.0, "b": 0.5, "alpha_plus": 3.0, "output_dir": "out", "R": 8.0}


@pytest.mark.parametrize("text", ["a 2", "unknown = 1", "n = 2.5", "tol = abc"])
def test_parse_errors(text):
    with pytest.raises(ConfigurationError):
        parse_config_text(text)


def test_precedence(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("a = 2\nb = 3\nseed = 7\n")
    cfg = load_config(path, overrides={"b": 5.0, "seed": None}, environ={"SKP_A": "4", "SKP_M": "8"})
    assert (cfg.a, cfg.b, cfg.seed, cfg.m) == (4.0, 5.0, 7, 8)
    assert env_overrides({"SKP_OUTPUT_DIR": "x", "HOME": "/"}) == {"output_dir": "x"}


@pytest.mark.parametrize("kwargs,exc", [
    ({"a": 0.0}, HypothesisViolation), ({"b": -1.0}, HypothesisViolation),
    ({"p": 6.0}, HypothesisViolation), ({"alpha_minus": 0.0}, HypothesisViolation),
    ({"dim": 3}, ConfigurationError), ({"n": 2}, ConfigurationError),
    ({"m": 1}, ConfigurationError), ({"tol": 0.0}, ConfigurationError),
    ({"path_nodes": 2}, ConfigurationError), ({"R": -1.0}, ConfigurationError),
])
def test_validation(kwargs, exc):
    with pytest.raises(exc):
        RunConfig(**kwargs).validate()


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigurationError):
        load_config(tmp_path / "absent.cfg")


def test_input_hash_is_git_blob_sha256():
    inputs = {"x": 1, "y": [1.5, "a"]}
    data = canonical_json(inputs).encode()
    assert input_hash(inputs) == hashlib.sha256(b"blob %d\0" % len(data) + data).hexdigest()
    assert input_hash({"y": [1.5, "a"], "x": 1}) == input_hash(inputs)


def test_envelope_fields():
    cfg = RunConfig().canonical()
    a = envelope("solve", cfg, {"value": float("inf")}, created="t0")
    b = envelope("solve", dict(cfg, output_dir="elsewhere"), {"value": float("inf")}, created="t1")
    assert a["schema"] == 1 and a["value"] == "inf"
    assert a["input_hash"] == b["input_hash"]
    assert strip_timestamps(a) == {k: v for k, v in a.items() if k != "created"}


def test_profile_columns(tmp_path):
    for dim, header in [(1, ["x", "u", "phi"]), (2, ["x", "y", "u", "phi"])]:
        dom = build_domain(dim, 5)
        path = write_profile(tmp_path / f"p{dim}.csv", dom, np.arange(dom.size, dtype=float),
                             np.ones(dom.size))
        rows = _read_csv(path)
        assert rows[0] == header and len(rows) == dom.size + 1
        assert float(rows[1][0]) == pytest.approx(1 / 6)


def test_exit_code_for_invalid_exponent(capsys, tmp_path):
    assert main(["solve", "--p", "6", "--output", str(tmp_path)]) == EXIT_CONFIG
    assert "(f1)" in capsys.readouterr().err


def test_exit_code_for_uneven_multi(capsys, tmp_path):
    code = main(["multi", "--alpha-plus", "2", "--count", "2", "--output", str(tmp_path)])
    assert code == EXIT_CONFIG
    assert "odd" in capsys.readouterr().err


def test_bad_config_file_exit(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    assert main(["spectrum", "--config", str(cfg)]) == EXIT_CONFIG
    assert "colour" in capsys.readouterr().err


def test_spectrum_command(tmp_path, capsys):
    assert main(["spectrum", "--n", "255", "--output", str(tmp_path)]) == EXIT_OK
    eig = _read_csv(tmp_path / "eigenvalues.csv")
    assert eig[0] == ["index", "block", "eigenvalue", "closed_form"]
    assert float(eig[1][2]) == pytest.approx(np.pi**2, rel=1e-4)
    fountain = _read_csv(tmp_path / "fountain.csv")
    assert fountain[0] == ["k", "beta_k", "r_k", "b_k_lower"]
    assert [int(r[0]) for r in fountain[1:]] == list(range(2, 11))
    vecs = _read_csv(tmp_path / "eigenvectors.csv")
    assert vecs[0][:2] == ["x", "e1"] and len(vecs) == 256


def test_solve_command_writes_files(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["solve", "--branch", "positive", "--n", "255", "--output", str(out)]) == EXIT_OK
    payload = json.loads((out / "solution.json").read_text())
    assert payload["schema"] == 1 and payload["command"] == "solve"
    assert payload["config"]["n"] == 255 and payload["inputs"] == {"branch": "positive"}
    assert payload["report"]["branch"] == "positive" and payload["report"]["converged"]
    rows = _read_csv(out / "profile.csv")
    assert rows[0] == ["x", "u", "phi"] and len(rows) == 256


def test_solve_reports_non_convergence(tmp_path, capsys):
    code = main(["solve", "--n", "255", "--max-iter", "1", "--output", str(tmp_path)])
    assert code == 2
    assert "residual_below_tol" in capsys.readouterr().out


def test_multi_command(tmp_path, capsys):
    args = ["multi", "--k", "3", "--count", "2", "--n", "255", "--b", "0", "--output", str(tmp_path)]
    assert main(args) == EXIT_OK
    table = _read_csv(tmp_path / "solutions.csv")
    assert table[0][:2] == ["index", "energy"]
    energies = [float(r[1]) for r in table[1:]]
    assert energies == sorted(energies) and energies
    payload = json.loads((tmp_path / "multi.json").read_text())
    assert payload["found_distinct"] == len(energies)
    profiles = _read_csv(tmp_path / "multi_profiles.csv")
    assert profiles[0] == ["x"] + [f"u{i + 1}" for i in range(len(energies))]


def test_verify_json(tmp_path, capsys):
    assert main(["verify", "--json", "--n", "255"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["schema"] == 1 and payload["passed"]
    assert len(payload["checks"]) == 12
