import json
import subprocess
import sys
from pathlib import Path

import pytest

from skewprod import __version__
from skewprod.cli import COMMANDS, SCHEMA_VERSION, load_config, main, run
from skewprod.errors import ValidationError

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _ini(tmp_path, text, name="c.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_every_command_has_example_config():
    names = {p.stem.replace("_", "-") for p in CONFIGS.glob("*.ini")}
    assert set(COMMANDS) <= names


def test_check_hypotheses_pld(tmp_path):
    assert run("check-hypotheses", None, tmp_path, stream=None) == 0
    doc = json.loads((tmp_path / "check_hypotheses.json").read_text())
    assert doc["result"]["kappa"] == pytest.approx(2.8218, abs=1e-4)
    assert all(doc["result"][h] for h in ("h1", "h2", "h3", "h4"))
    assert doc["version"] == __version__ and doc["schema_version"] == SCHEMA_VERSION
    assert len(doc["config_hash"]) == 64
    assert (tmp_path / "check_hypotheses.txt").read_text().startswith("check-hypotheses [ok]")


def test_mme_mobius(tmp_path):
    cfg = _ini(tmp_path, "[model]\nkind = mobius\nbeta = 2\n[mme]\nsamples = 20000\n")
    assert run("mme", cfg, tmp_path / "out", stream=None) == 0
    res = json.loads((tmp_path / "out" / "mme.json").read_text())["result"]
    assert res["chi"] == 0.0
    assert res["entropy"] == pytest.approx(0.6931471805599453, abs=1e-12)


def test_missing_delta_names_key(tmp_path, capsys):
    cfg = _ini(tmp_path, "[model]\nkind = mobius\n[boundary-approx]\ntarget = 0101\n")
    assert run("boundary-approx", cfg, tmp_path, stream=None) == 2
    assert "delta" in capsys.readouterr().err


@pytest.mark.parametrize("text", [
    "[model]\nkind = pld\ncolour = red\n",
    "[model]\nkind = circle\n",
    "[model]\nkind = mobius\nbeta = 0.5\n",
    "[fundamental-domains]\neps0 = 0.3\n",
    "[fundamental-domains]\neps0 = abc\n",
    "[density]\nx0 = 0.3\n",
])
def test_validation_errors(tmp_path, text):
    cmd = "fundamental-domains"
    assert run(cmd, _ini(tmp_path, text), tmp_path, stream=None) == 2


def test_budget_exit_code(tmp_path):
    cfg = _ini(tmp_path, "[model]\nkind = pld\n[density]\nmesh = 0.001\nbudget = 100\n")
    assert run("density", cfg, tmp_path, stream=None) == 3
    doc = json.loads((tmp_path / "density.json").read_text())
    assert doc["status"] == "budget-exhausted" and doc["result"]["partial"]["budget_exhausted"]


def test_core_exposed_not_found(tmp_path):
    cfg = _ini(tmp_path, "[model]\nkind = pld\n[connect]\np_a = 0.3\np_b = 1\n")
    assert run("connect", cfg, tmp_path, stream=None) == 3


def test_numerical_exit_code(tmp_path):
    # PLD does not satisfy f0 f1 = f1 f0^-1
    assert run("reduce-word", None, tmp_path, stream=None) == 4


def test_deterministic_reports(tmp_path):
    cfg = str(CONFIGS / "boundary_approx.ini")
    assert run("boundary-approx", cfg, tmp_path / "a", stream=None) == 0
    assert run("boundary-approx", cfg, tmp_path / "b", stream=None) == 0
    for name in ("boundary_approx.json", "boundary_approx.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    rows = (tmp_path / "a" / "boundary_approx.csv").read_text().splitlines()
    assert rows[0] == "n,distance,chi,N,M,delta_n" and len(rows) == 5


def test_hash_tracks_config(tmp_path):
    a = load_config("occupation", _ini(tmp_path, "[model]\nkind = arctan\n", "a.ini"))
    b = load_config("occupation", _ini(tmp_path, "[model]\nkind = mobius\n", "b.ini"))
    assert a.digest() != b.digest()
    assert a.params["n_grid"] == [10000, 1000000]


def test_output_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv("SKEWPROD_OUT", str(tmp_path / "env"))
    assert run("parry", None, None, stream=None) == 0
    assert (tmp_path / "env" / "parry.json").exists()


def test_unknown_section(tmp_path):
    with pytest.raises(ValidationError):
        load_config("parry", _ini(tmp_path, "[mme]\nsamples = 3\n"))


def test_main_and_module_entry(tmp_path):
    assert main(["parry", "--out", str(tmp_path)]) == 0
    r = subprocess.run([sys.executable, "-m", "skewprod", "lyapunov", "-o", str(tmp_path),
                        "-c", str(CONFIGS / "lyapunov.ini")], capture_output=True, text=True)
    assert r.returncode == 0 and "chi_1000" in r.stdout
