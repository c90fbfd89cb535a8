import json

import numpy as np
import pytest

from whiter import cli
from whiter.analytic_core import LineGrid, LineSamples
from whiter.errors import ConfigError, DivergenceError
from whiter.whsolver import initial_phi, reduce

FAST1 = ["--lambda", "0.7+10i", "--L", "1", "--grid-n", "4096", "--grid-x", "100", "--iters", "4"]


@pytest.fixture
def outdir(tmp_path, monkeypatch):
    monkeypatch.delenv("WHITER_OUT", raising=False)
    return tmp_path / "out"


def test_parse_complex_forms():
    assert cli.parse_complex("0.7+10i") == 0.7 + 10j
    assert cli.parse_complex([1, -2]) == 1 - 2j
    assert cli.parse_complex(3) == 3
    for bad in ("abc", [1, 2, 3], None, True):
        with pytest.raises(ConfigError):
            cli.parse_complex(bad)


@pytest.mark.parametrize(
    "data",
    [
        {"bogus": 1},
        {"iters": -1},
        {"iters": 2.5},
        {"tol": 0},
        {"grid-n": 1000},
        {"format": "xml"},
        {"problem": "example3"},
        {"L": "abc"},
        {"A": "1"},
    ],
)
def test_bad_configs(data):
    with pytest.raises(ConfigError):
        cli.config_from_mapping(data)


def test_config_keys_match_flags():
    cfg = cli.config_from_mapping({"lambda": [0.2, 0], "L": 2, "grid-n": 1024, "grid_x": 50, "line-a": -0.1})
    assert cfg.lam == 0.2 and cfg.L == 2.0 and cfg.grid_n == 1024 and cfg.grid_x == 50.0 and cfg.line_a == -0.1


def test_config_errors_exit_4(tmp_path, outdir):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["solve", str(bad), "--out", str(outdir)]) == cli.EXIT_CONFIG
    assert cli.main(["solve", str(tmp_path / "missing.json")]) == cli.EXIT_CONFIG
    cfg = tmp_path / "expr.json"
    cfg.write_text(json.dumps({"A": "1 +* alpha", "B": "1", "C": "1", "f1": "0", "f2": "0", "L": 1, "strip": [-1, 1]}))
    assert cli.main(["solve", str(cfg), "--out", str(outdir)]) == cli.EXIT_CONFIG
    assert cli.main(["example2", "--lambda", "0.1+1i", "--out", str(outdir)]) == cli.EXIT_CONFIG


def test_class_violation_exit_3(outdir):
    code = cli.main(["split", "(alpha - i)/(alpha + i)", "--multiplicative", "--grid-n", "4096", "--out", str(outdir)])
    assert code == cli.EXIT_CLASS


def test_divergence_exit_2(outdir, monkeypatch):
    def boom(*a, **k):
        raise DivergenceError("increments grow")

    monkeypatch.setattr(cli, "solve", boom)
    assert cli.main(["example1", *FAST1, "--out", str(outdir)]) == cli.EXIT_DIVERGED


def test_exit_for_growing_increments():
    class Rep:
        converged = stagnated = False
        phi_increments = [1e-2, 1e-1]

    assert cli._exit_for(Rep) == cli.EXIT_DIVERGED
    Rep.phi_increments = [1e-1, 1e-2]
    assert cli._exit_for(Rep) == cli.EXIT_OK


def test_example1_run_writes_files(outdir):
    assert cli.main(["example1", *FAST1, "--out", str(outdir)]) == cli.EXIT_OK
    report = json.loads((outdir / "report.json").read_text())
    assert report["problem"] == "example1" and report["lambda"] == [0.7, 10.0]
    header = (outdir / "phiL_minus.csv").read_text().splitlines()[0]
    assert header == "alpha_re,alpha_im,value_re,value_im"
    assert (outdir / "errors.csv").exists() and (outdir / "phiL_iter000.csv").exists()


def test_whiter_out_overrides_out(tmp_path, monkeypatch):
    env_dir = tmp_path / "env"
    monkeypatch.setenv("WHITER_OUT", str(env_dir))
    assert cli.main(["example1", *FAST1, "--iters", "1", "--out", str(tmp_path / "flag")]) == 0
    assert (env_dir / "report.json").exists()
    assert not (tmp_path / "flag").exists()


def test_runs_are_deterministic(tmp_path, monkeypatch):
    monkeypatch.delenv("WHITER_OUT", raising=False)
    for d in ("r1", "r2"):
        assert cli.main(["example1", *FAST1, "--out", str(tmp_path / d)]) == 0
    names = sorted(p.name for p in (tmp_path / "r1").iterdir())
    assert names == sorted(p.name for p in (tmp_path / "r2").iterdir())
    for name in names:
        assert (tmp_path / "r1" / name).read_bytes() == (tmp_path / "r2" / name).read_bytes()


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_samples_round_trip(tmp_path, fmt):
    grid = LineGrid(-0.3, 20.0, 64)
    rng = np.random.default_rng(4)
    f = LineSamples(grid, rng.normal(size=64) + 1j * rng.normal(size=64))
    path = cli.write_samples(tmp_path, "f", f, fmt)
    alpha, value = cli.read_samples(path)
    assert np.array_equal(alpha, grid.points) and np.array_equal(value, f.values)


def test_json_complex_pairs(tmp_path):
    path = cli.write_json(tmp_path / "x.json", {"z": 1 + 2j, "bad": float("nan"), "v": [1j]})
    assert json.loads(path.read_text()) == {"bad": None, "v": [[0.0, 1.0]], "z": [1.0, 2.0]}


def test_zero_iterations_returns_initial_phi(outdir):
    cfg = cli.config_from_mapping({"lambda": "0.7+10i", "L": 1, "iters": 0, "grid-n": 4096, "grid-x": 100,
                                   "out": str(outdir)})
    art = cli.run(cfg)
    p = cli.oracles.Example1Params(0.7 + 10j, 1.0)
    opts = cli.ex.example1_options(p, max_iter=0, n_points=4096, half_width=100.0)
    sys_ = reduce(cli.ex.example1_problem(p), opts)
    _, phiL = cli.read_samples(art.files["phiL_minus"])
    expected = initial_phi(sys_, "out").boundary.values
    assert np.abs(phiL - expected).max() < 1e-14 * np.abs(expected).max()


def test_compare_to_oracle_self_zero(outdir):
    art = cli.run(cli.config_from_mapping({"lambda": "0.7+10i", "L": 1, "iters": 2, "grid-n": 4096,
                                           "grid-x": 100, "out": str(outdir)}))
    exact = cli.oracles.example1_exact(cli.oracles.Example1Params(0.7 + 10j, 1.0))
    grid = art.iterates["phiL"][0].grid
    art.iterates["phiL"] = [LineSamples(grid, exact.phiL_iterate(grid.points, n)) for n in range(3)]
    rows = cli.compare_to_oracle(art, "example1")
    assert all(r["phiL_max_iterate"] == 0 for r in rows)
    with pytest.raises(ConfigError):
        cli.compare_to_oracle(art, "custom")


def test_example2_run(outdir):
    assert cli.main(["example2", "--iters", "3", "--format", "json", "--out", str(outdir)]) == 0
    report = json.loads((outdir / "report.json").read_text())
    assert report["problem"] == "example2" and len(report["constants"]) == 4
    alpha, value = cli.read_samples(outdir / "U2_minus.json")
    assert alpha.shape == value.shape


def test_split_subcommand(outdir):
    assert cli.main(["split", "1/(alpha - i) + 1/(alpha + 2*i)", "--out", str(outdir)]) == 0
    summary = json.loads((outdir / "split.json").read_text())
    assert summary["reconstruction_error"] < 1e-12
    alpha, plus = cli.read_samples(outdir / "plus.csv")
    assert np.abs(plus - 1 / (alpha + 2j)).max() < 1e-9


def test_custom_problem_from_config(tmp_path, outdir):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({
        "A": "1 + 0.5/((alpha - i*lam)*(alpha + i*lam))",
        "B": "(alpha - 2*i)*(alpha + 2*i)/((alpha - 3*i)*(alpha + 3*i))",
        "C": "(alpha - 2*i)/(alpha - 3*i)",
        "f1": "1/(alpha - i) + 1/(alpha + 2*i)",
        "f2": "exp(i*alpha*L)/(alpha + 1.5*i)",
        "lambda": 0.6, "L": 2, "strip": [-0.5, 0.5], "grid-n": 8192, "grid-x": 100,
    }))
    assert cli.main(["solve", str(cfg), "--out", str(outdir)]) == 0
    report = json.loads((outdir / "report.json").read_text())
    assert max(report["residuals"][-1]) < 1e-8
