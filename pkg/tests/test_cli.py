import json

import pytest

from fdp_cnd import cli, io


def run(capsys, *argv):
  code = cli.main(list(argv))
  out, err = capsys.readouterr()
  return code, out, err


def test_tradeoff_csv(capsys):
  code, out, _ = run(capsys, "tradeoff", "--family", "gdp", "--mu", "1",
                     "--grid-points", "11", "--seed", "3")
  assert code == 0
  meta, cols, rows = io.read_csv(out)
  assert meta["seed"] == 3 and meta["config"]["family"] == "gdp"
  assert cols == ["alpha", "beta"] and len(rows) == 11
  assert rows[5] == [0.5, pytest.approx(0.15865525393145707, abs=1e-15)]


def test_tradeoff_json(capsys):
  code, out, _ = run(capsys, "tradeoff", "--family", "eps-delta", "--eps",
                     "1", "--delta", "0", "--format", "json")
  doc = json.loads(out)
  assert code == 0 and doc["columns"] == ["alpha", "beta"]
  assert "version" in doc


def test_missing_parameter_is_usage_error(capsys):
  code, _, err = run(capsys, "tradeoff", "--family", "gdp")
  assert code == 2 and "--mu" in err


def test_bad_value_is_usage_error(capsys):
  code, _, _ = run(capsys, "tradeoff", "--family", "eps-delta", "--eps", "1",
                   "--delta", "2")
  assert code == 2


def test_argparse_errors_exit_2():
  with pytest.raises(SystemExit) as exc:
    cli.main(["tradeoff", "--family", "nope"])
  assert exc.value.code == 2


def test_seed_from_environment(capsys, monkeypatch):
  monkeypatch.setenv("FDP_SEED", "11")
  _, out, _ = run(capsys, "cnd", "sample", "--kind", "tulap", "--eps", "1",
                  "--n", "1000")
  meta, _, rows = io.read_csv(out)
  assert meta["seed"] == 11 and len(rows) == 1000
  _, again, _ = run(capsys, "cnd", "sample", "--kind", "tulap", "--eps", "1",
                    "--n", "1000")
  assert again == out


def test_bad_environment_seed(capsys, monkeypatch):
  monkeypatch.setenv("FDP_SEED", "x")
  code, _, _ = run(capsys, "tradeoff", "--family", "gdp", "--mu", "1")
  assert code == 2


def test_small_n_rejected(capsys):
  code, _, _ = run(capsys, "cnd", "sample", "--kind", "tulap", "--eps", "1",
                   "--n", "10")
  assert code == 2


def test_cnd_build_to_output_dir(capsys, tmp_path):
  code, out, _ = run(capsys, "cnd", "build", "--f", "gdp", "--mu", "1",
                     "--output-dir", str(tmp_path))
  assert code == 0 and out == ""
  meta = json.loads((tmp_path / "cnd_build_meta.json").read_text())
  assert meta["cnd"]["kind"] == "constructed"
  _, cols, rows = io.read_csv((tmp_path / "cnd_build.csv").read_text())
  assert cols == ["x", "cdf", "pdf"] and len(rows) == 201


def test_cnd_verify_exit_codes(capsys):
  code, out, _ = run(capsys, "cnd", "verify", "--kind", "tulap", "--eps", "1",
                     "--n", "20000", "--seed", "7")
  assert code == 0 and json.loads(out)["report"]["passed"]


def test_cnd_limit(capsys):
  code, out, _ = run(capsys, "cnd", "limit", "--family", "gdp", "--mu", "1",
                     "--format", "json", "--grid-points", "21")
  doc = json.loads(out)
  assert code == 0 and doc["diagnostics"]["error_bound"] <= 0.01


def test_mv_build_and_sample(capsys):
  code, out, _ = run(capsys, "mv", "build", "--kind", "gauss", "--dim", "2",
                     "--norm", "linf", "--sigma", "diag:1,4")
  doc = json.loads(out)
  assert code == 0
  assert doc["mv_cnd"]["params"]["mu"] == pytest.approx(1.25**0.5)
  code, out, _ = run(capsys, "mv", "sample", "--kind", "approx-dp", "--eps",
                     "1", "--delta", "0.1", "--k", "2", "--n", "1000")
  _, cols, rows = io.read_csv(out)
  assert code == 0 and cols == ["x0", "x1", "x2"] and len(rows) == 1000


def test_mv_iid_tulap_rejected(capsys):
  code, _, err = run(capsys, "mv", "build", "--kind", "iid-l1", "--base",
                     "tulap:1", "--k", "2")
  assert code == 2 and "log-concave" in err


def test_mv_verify_linf(capsys):
  code, out, _ = run(capsys, "mv", "verify", "--kind", "linf", "--eps", "1",
                     "--dim", "2", "--n", "20000")
  assert code == 0 and json.loads(out)["report"]["passed"]


def test_report_limits(capsys, tmp_path):
  code, _, _ = run(capsys, "report", "--suite", "limits", "--output-dir",
                   str(tmp_path))
  assert code == 0
  doc = json.loads((tmp_path / "report_limits.json").read_text())
  assert doc["report"]["passed"]
