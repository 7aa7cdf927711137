import csv
import io
import json

import pytest

from unitary_dirac import __version__
from unitary_dirac.cli import main
from unitary_dirac.config import ENV_VAR
from unitary_dirac.fields import read_field


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def table(text):
    lines = text.splitlines()
    assert lines[0].startswith("# unitary-dirac")
    return list(csv.DictReader(lines[1:]))


@pytest.fixture(autouse=True)
def no_env_config(monkeypatch):
    monkeypatch.delenv(ENV_VAR, raising=False)


def test_header_line():
    code, out, _ = run("spectrum", "--z", "50")
    head = out.splitlines()[0]
    assert code == 0
    assert head.startswith(f"# unitary-dirac {__version__} alpha=")
    assert "units=electron_mass" in head and "tolerances=" in head and "theta_min=0.001" in head


def test_spectrum_columns_and_ordering():
    code, out, _ = run("spectrum", "--z", "100", "--n", "2")
    rows = {r["level"]: r for r in table(out)}
    assert code == 0
    assert set(rows) == {"2S1/2", "2P1/2", "2P3/2"}
    assert float(rows["2P1/2"]["e_modified"]) > float(rows["2P3/2"]["e_modified"])
    assert float(rows["2P1/2"]["e_conventional"]) < float(rows["2P3/2"]["e_conventional"])
    assert rows["2P1/2"]["rank_modified"] == "1" and rows["2P1/2"]["rank_conventional"] == "2"


def test_json_output():
    code, out, _ = run("spectrum", "--z", "1", "--output", "json")
    lines = out.splitlines()
    assert code == 0 and lines[0].startswith("#") and len(lines) == 2
    doc = json.loads(lines[1])
    assert len(doc["levels"]) == 3


def test_flags_accepted_before_subcommand():
    assert run("--alpha", "0.01", "spectrum", "--z", "10")[1] == run("spectrum", "--z", "10", "--alpha", "0.01")[1]


def test_deterministic_output():
    argv = ("scatter", "--energy", "188e6", "--target-mass", "938e6")
    assert run(*argv)[1] == run(*argv)[1]


def test_scatter_sweep():
    code, out, _ = run("scatter", "--energy", "188e6", "--target-mass", "938e6", "--theta-grid", "30:150:5")
    rows = table(out)
    assert code == 0 and len(rows) == 5
    assert list(rows[0]) == ["theta_deg", "dcs_model", "dcs_conventional", "ratio"]
    assert all(float(r["dcs_model"]) > 0 for r in rows)
    assert float(rows[2]["ratio"]) == pytest.approx(2.0, rel=1e-8)
    assert "normalization=16" in out.splitlines()[0]


def test_scatter_json():
    code, out, _ = run("scatter", "--energy", "188e6", "--target-mass", "938e6", "--theta-grid", "30:150:5",
                       "--output", "json")
    doc = json.loads(out.splitlines()[1])
    assert code == 0 and len(doc["rows"]) == 5 and doc["rows"][2]["ratio"] == pytest.approx(2.0)


def test_scatter_fixed_centre():
    code, out, _ = run("scatter", "--energy", "2e6", "--theta-grid", "20:160:3")
    assert code == 0 and len(table(out)) == 3


def test_reproduce_targets():
    code, out, _ = run("reproduce", "percent-table")
    assert code == 0
    assert out.splitlines()[-1] == "PASS percent-table"
    code, out, _ = run("reproduce", "spin-sums")
    assert code == 0 and "FAIL" not in out


def test_radial_subcommand(tmp_path):
    prof = tmp_path / "profile.csv"
    code, out, _ = run("radial", "--z", "50", "--kappa", "-1", "--profile", str(prof))
    assert code == 0
    row = table(out)[0]
    assert abs(float(row["energy"]) - float(row["closed_form"])) < 1e-6
    assert row["nodes"] == "0" and row["converged"] == "true"
    doc = json.loads(run("radial", "--z", "50", "--kappa", "-1", "--output", "json")[1].splitlines()[1])
    assert doc["nodes"] == 0 and doc["converged"] is True
    assert prof.read_text().splitlines()[1].startswith("r,")


def test_fields_subcommand(tmp_path):
    code, out, _ = run("fields", "--source", "point", "--n", "16", "--h", "0.5",
                       "--save", str(tmp_path / "phi"), "--slice", str(tmp_path / "s.csv"))
    assert code == 0
    assert (tmp_path / "phi.hdr").exists() and (tmp_path / "phi.bin").exists()
    assert (tmp_path / "s.csv").read_text().splitlines()[0].startswith("# unitary-dirac")
    assert (tmp_path / "phi.hdr").read_text().startswith("# unitary-dirac")
    assert read_field(tmp_path / "phi").shape == (16, 16, 16)


def test_nls_and_gauge_and_algebra_subcommands():
    code, out, _ = run("nls", "--n", "256", "--length", "30", "--t", "0.1", "--dt", "0.01")
    assert code == 0
    code, out, _ = run("gauge-check", "--coeffs", "1:1", "--sizes", "32,64")
    rows = table(out)
    assert code == 0 and len(rows) == 2 and float(rows[1]["order"]) > 1.9
    doc = json.loads(run("gauge-check", "--coeffs", "1:1", "--sizes", "32,64", "--output", "json")[1]
                     .splitlines()[1])
    assert doc["sets"][0]["orders"][0] > 1.9
    code, out, _ = run("algebra-check", "--seed", "3")
    assert code == 0


def test_domain_error_exit_one():
    code, _, err = run("radial", "--z", "200", "--coupling", "vector")
    assert code == 1 and err.startswith("SingularRegime")


def test_usage_errors_exit_two():
    assert run("bogus")[0] == 2
    assert run("spectrum", "--no-such-flag")[0] == 2
    assert run("reproduce", "nothing")[0] == 2
    assert run("scatter", "--energy", "1e6", "--theta-grid", "1:2")[0] == 2


def test_config_precedence(tmp_path, monkeypatch):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nalpha = 0.01\nspectrum.z = 40\n")
    monkeypatch.setenv(ENV_VAR, str(cfg))
    code, out, _ = run("spectrum")
    assert code == 0 and "alpha=0.01 " in out.splitlines()[0]
    assert table(out)[0]["Z"] == "40"
    code, out, _ = run("spectrum", "--alpha", "0.02", "--z", "30")
    assert "alpha=0.02 " in out.splitlines()[0] and table(out)[0]["Z"] == "30"
    monkeypatch.delenv(ENV_VAR)
    code, out, _ = run("spectrum", "--config", str(cfg))
    assert "alpha=0.01 " in out.splitlines()[0]


def test_malformed_config_exit_two(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("alpha 0.01\n")
    assert run("spectrum", "--config", str(bad))[0] == 2
    bad.write_text("alpha = fast\n")
    assert run("spectrum", "--config", str(bad))[0] == 2
    assert run("spectrum", "--config", str(tmp_path / "missing.cfg"))[0] == 2


def test_out_path(tmp_path):
    target = tmp_path / "levels.csv"
    code, out, _ = run("spectrum", "--z", "20", "--out", str(target))
    assert code == 0 and target.read_text().startswith("# unitary-dirac")
