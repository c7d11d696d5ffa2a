import json
import math

import numpy as np
import pytest

from genmarkov import channels
from genmarkov.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, EXIT_VERIFY, main


BOUNDED = {"f_background", "f_combined", "f_rescaled", "F_background", "F_combined", "C_background", "C_combined"}


def write_config(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def read_csv(path):
    lines = [ln for ln in open(path).read().splitlines() if not ln.startswith("#")]
    cols = lines[0].split(",")
    rows = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    return {c: rows[:, i] for i, c in enumerate(cols)}


def header(path):
    return [ln for ln in open(path).read().splitlines() if ln.startswith("#")]


def run(tmp_path, cfg, *extra, out="out.csv"):
    path = write_config(tmp_path, cfg)
    code = main(["run", "--config", path, "--out", str(tmp_path / out), *extra])
    return code, tmp_path / out


@pytest.mark.parametrize("exp", ["fig1", "fig2", "fig3", "fig4", "fig5"])
def test_each_figure_runs(tmp_path, exp):
    code, out = run(tmp_path, {"experiment": exp})
    assert code == EXIT_OK
    data = read_csv(out)
    for name, col in data.items():
        if name in BOUNDED:
            assert np.all(col >= -1e-9) and np.all(col <= 1 + 1e-9), name


def test_fig1_values(tmp_path):
    code, out = run(tmp_path, {"experiment": "fig1"})
    assert code == EXIT_OK
    d = read_csv(out)
    i = int(np.argmin(np.abs(d["t"] - 1.0)))
    assert abs(d["f_background"][i] - 0.5 * (1 + math.exp(-2))) < 1e-9
    assert abs(d["f_combined"][i] - 0.5 * (1 + math.exp(-1.02))) < 1e-9


def test_fig2_values(tmp_path):
    code, out = run(tmp_path, {"experiment": "fig2"})
    assert code == EXIT_OK
    d = read_csv(out)
    gain = d[[c for c in d if "gain" in c.lower() or c.startswith("delta")][0]]
    assert gain.min() >= -2e-3
    meta = "\n".join(header(out))
    assert "# p0 = 0.4323" in meta and "# p = 0.3197" in meta


def test_fig3_concurrence_is_abs_lambda(tmp_path):
    code, out = run(tmp_path, {"experiment": "fig3"})
    assert code == EXIT_OK
    d = read_csv(out)
    lam = channels.lambda_exp(channels.ExpKernelParams(1.0, 5.0, 5.0), d["t"])
    assert np.abs(d["C_combined"] - np.abs(lam)).max() < 1e-6


def test_output_byte_identical(tmp_path):
    cfg = {"experiment": "fig5", "points": 41}
    _, a = run(tmp_path, cfg, out="a.csv")
    _, b = run(tmp_path, cfg, out="b.csv")
    assert a.read_bytes() == b.read_bytes()
    assert header(a)[0].startswith("# genmarkov ")


def test_experiment_flag_overrides_config(tmp_path):
    code, out = run(tmp_path, {"experiment": "fig1"}, "--experiment", "fig3")
    assert code == EXIT_OK
    assert "C_combined" in read_csv(out)


def test_default_output_from_config(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    path = write_config(tmp_path, {"experiment": "fig1", "points": 5, "output": "named.csv"})
    assert main(["run", "--config", path]) == EXIT_OK
    assert (tmp_path / "named.csv").exists()


@pytest.mark.parametrize(
    "cfg",
    [
        {"experiment": "fig1", "bogus": 1},
        {"experiment": "fig9"},
        {"experiment": "fig1", "gamma": -1},
        {"experiment": "fig1", "B": "tuned(0,1)"},
        {"experiment": "fig4", "B": 3.0},
        {"experiment": "fig5", "solver": "analytic"},
        {"experiment": "custom", "solver": "stochastic", "kernel": "modulated"},
        {"experiment": "fig1", "points": 1},
    ],
)
def test_config_errors(tmp_path, cfg):
    code, _ = run(tmp_path, cfg)
    assert code == EXIT_CONFIG


def test_bad_json_and_missing_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", "--config", str(bad)]) == EXIT_CONFIG
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG
    arr = tmp_path / "arr.json"
    arr.write_text("[1, 2]")
    assert main(["run", "--config", str(arr)]) == EXIT_CONFIG


def test_bad_seed_is_usage_error(tmp_path):
    path = write_config(tmp_path, {"experiment": "fig1"})
    with pytest.raises(SystemExit) as exc:
        main(["run", "--config", path, "--seed", str(2**64)])
    assert exc.value.code == EXIT_CONFIG


def test_numerical_failure(tmp_path):
    # small nu leaves no real oscillation frequency for the modulated solution
    code, _ = run(tmp_path, {"experiment": "fig4", "gamma": 1.0, "nu": 0.1})
    assert code == EXIT_NUMERIC


def test_stochastic_custom_seeded(tmp_path):
    cfg = {
        "experiment": "custom",
        "solver": "stochastic",
        "gamma": 0.0,
        "B": 0.3,
        "tau_k": 1.0,
        "t_max": 0.5,
        "points": 11,
        "dt": 0.01,
        "n_traj": 200,
    }
    _, a = run(tmp_path, cfg, "--seed", "7", out="a.csv")
    _, b = run(tmp_path, cfg, "--seed", "7", out="b.csv")
    _, c = run(tmp_path, cfg, "--seed", "8", out="c.csv")
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != c.read_bytes()
    assert '"seed": 7' in header(a)[1]
    d = read_csv(a)
    assert "stderr_re_rho_0n" in d and np.all(d["stderr_re_rho_0n"] >= 0)


@pytest.mark.parametrize("solver", ["analytic", "laplace", "embedded", "volterra"])
def test_custom_solvers_agree(tmp_path, solver):
    cfg = {"experiment": "custom", "solver": solver, "gamma": 1.0, "B": 2.0, "tau_k": 3.0, "t_max": 2.0, "points": 21}
    code, out = run(tmp_path, cfg)
    assert code == EXIT_OK
    d = read_csv(out)
    lam = channels.lambda_exp(channels.ExpKernelParams(1.0, 2.0, 3.0), d["t"])
    assert np.abs(2 * d["re_rho_0n"] - lam).max() < (1e-4 if solver == "volterra" else 1e-9)


def test_custom_thermal(tmp_path):
    cfg = {"experiment": "custom", "model": "thermal", "solver": "embedded", "t_max": 2.0, "points": 11}
    code, out = run(tmp_path, cfg)
    assert code == EXIT_OK
    d = read_csv(out)
    assert np.all(d["purity"] <= 1 + 1e-9)


def test_verify_fast(capsys):
    assert main(["verify", "--level", "fast"]) == EXIT_OK
    text = capsys.readouterr().out
    assert "PASS analytic-vs-embedded" in text and "FAIL" not in text


def test_verify_detects_phase_sign_mutation(monkeypatch, capsys):
    monkeypatch.setattr(
        channels.ExpKernelParams, "phi", property(lambda self: -math.atan2(self.offset, self.omega.real))
    )
    assert main(["verify", "--level", "full"]) == EXIT_VERIFY
    assert "FAIL analytic-vs-embedded" in capsys.readouterr().out


def test_step_too_large_is_numerical_failure(tmp_path):
    code, _ = run(tmp_path, {"experiment": "custom", "solver": "volterra", "dt": 0.5, "tau_k": 0.1})
    assert code == EXIT_NUMERIC
