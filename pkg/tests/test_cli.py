import json
import math

import numpy as np
import pytest

from cavitysim import cli, io
from cavitysim.config import RunConfig, load_config
from cavitysim.errors import ValidationError

SHORT = ["--set", "t_max=50"]


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# manifest: manifest.json command=")
    header = lines[1].split(",")
    rows = np.array([[float(x) for x in ln.split(",")] for ln in lines[2:]])
    return header, rows


# -- config ------------------------------------------------------------------

def test_config_defaults_derive_couplings():
    cfg = RunConfig()
    assert cfg.lam == pytest.approx(0.1 * cfg.omega)
    assert cfg.J == pytest.approx(0.05 * cfg.lam)
    assert cfg.k0 == pytest.approx(0.01 * cfg.omega)
    assert cfg.space().dim == 9
    assert cfg.integrator().sample_times[-1] == 2000.0


def test_config_round_trip(tmp_path):
    cfg = RunConfig(Omega=0.002222, initial_state="(|00100>+|01001>)/sqrt(2)", max_step=0.5)
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert load_config(path) == cfg


def test_config_overrides_and_coercion(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"t_max": 100, "coupling": "constant"}))
    cfg = load_config(path, {"k0_ratio": 0.02})
    assert cfg.t_max == 100.0 and isinstance(cfg.t_max, float)
    assert cfg.coupling == "constant" and cfg.k0_ratio == 0.02


@pytest.mark.parametrize("data", [
    {"omgea": 1.0},
    {"t_max": "long"},
    {"cutoff_c": 2.5},
    {"probabilities": 1},
    {"coupling": "square"},
    {"omega": -1.0},
    {"max_step": "none"},
])
def test_config_rejects_bad_input(data):
    with pytest.raises(ValidationError):
        RunConfig.from_dict(data)


def test_config_bad_json(tmp_path):
    path = tmp_path / "c.json"
    path.write_text("{not json")
    with pytest.raises(ValidationError, match="invalid JSON"):
        load_config(path)


# -- helpers -------------------------------------------------------------------

def test_parse_range():
    np.testing.assert_allclose(cli.parse_range("0:0.01:46"), np.linspace(0, 0.01, 46))
    np.testing.assert_array_equal(cli.parse_range("0.5"), [0.5])
    for bad in ("0:1", "a:b:c", "0:1:0", "0:1:2:3"):
        with pytest.raises(ValidationError):
            cli.parse_range(bad)


def test_parse_pairs_and_subsystems():
    assert cli.parse_pairs("q1:q2, f1:f2") == [("q1", "q2"), ("f1", "f2")]
    assert len(cli.parse_pairs("all")) == 10
    assert cli.parse_pairs("") == []
    assert cli.parse_subsystems("all") == ["q1", "f1", "fb", "q2", "f2"]
    with pytest.raises(ValidationError):
        cli.parse_pairs("q1-q2")
    with pytest.raises(ValidationError):
        cli.parse_subsystems("q1,q3")


def test_fmt_round_trips():
    for x in (0.1, 1 / 3, -2.5e-17, 1e300, 0.0):
        assert float(io.fmt(x)) == x


# -- simulate ----------------------------------------------------------------

def test_simulate_outputs(tmp_path):
    assert cli.main(["simulate", "--out", str(tmp_path), "--svg", *SHORT]) == 0
    header, rows = read_csv(tmp_path / "timeline.csv")
    assert header == ["t_ns", "sz_q1", "sz_q2", "norm_drift"]
    assert rows.shape == (51, 4)
    np.testing.assert_array_equal(rows[0, :3], [0.0, -1.0, -1.0])
    assert (tmp_path / "inversion.svg").read_text().startswith("<svg")
    payload = json.loads((tmp_path / "timeline.json").read_text())
    assert payload["sz_q1"] == list(rows[:, 1])
    manifest = io.read_manifest(tmp_path)
    assert manifest["command"] == "simulate"
    assert manifest["config"]["t_max"] == 50.0
    assert {f["name"] for f in manifest["files"]} == {"timeline.csv", "timeline.json",
                                                      "inversion.svg"}


def test_simulate_probability_columns(tmp_path):
    cfg = RunConfig(t_max=10.0, probabilities=True)
    cli.cmd_simulate(cfg, tmp_path)
    header, rows = read_csv(tmp_path / "timeline.csv")
    assert header[4:] == ["p_" + "".join(map(str, lab)) for lab in cfg.space().labels]
    np.testing.assert_allclose(rows[:, 4:].sum(axis=1), 1.0, atol=1e-12)


def test_simulate_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cfg = RunConfig(t_max=100.0, initial_state="(|00100>+|01001>)/sqrt(2)")
    cli.cmd_simulate(cfg, a)
    cli.cmd_simulate(cfg, b)
    assert (a / "timeline.csv").read_bytes() == (b / "timeline.csv").read_bytes()


def test_entangled_start_gives_distinct_qubit_traces(tmp_path):
    cli.cmd_simulate(RunConfig(initial_state="(|00100>+|01001>)/sqrt(2)"), tmp_path)
    _, rows = read_csv(tmp_path / "timeline.csv")
    # small (~0.02 at most) but far above integrator precision
    assert np.abs(rows[:, 1] - rows[:, 2]).max() > 1e-3


def test_constant_coupling_inversion_stays_below_zero(tmp_path):
    cli.cmd_simulate(RunConfig(coupling="constant", t_max=500.0), tmp_path)
    _, rows = read_csv(tmp_path / "timeline.csv")
    for col in (1, 2):
        assert rows[:, col].min() >= -1 - 1e-12
        assert rows[:, col].max() <= 0.05
        assert rows[:, col].max() > -0.9  # it does oscillate


def test_bad_state_exits_with_validation_code(tmp_path, capsys):
    code = cli.main(["simulate", "--out", str(tmp_path), "--set", "initial_state=|0010>"])
    assert code == cli.EXIT_VALIDATION
    assert "error:" in capsys.readouterr().err


def test_unknown_override_key(tmp_path):
    assert cli.main(["simulate", "--out", str(tmp_path), "--set", "bogus=1"]) == 1


def test_numerical_failure_exit_code(tmp_path):
    code = cli.main(["simulate", "--out", str(tmp_path), "--set", "t_max=5",
                     "--set", "rel_tol=1e-300", "--set", "abs_tol=1e-300"])
    assert code == cli.EXIT_NUMERICAL


# -- sweep -------------------------------------------------------------------

def test_sweep_outputs(tmp_path):
    code = cli.main(["sweep", "--out", str(tmp_path), "--axis", "Omega", "--range", "0:0.01:3",
                     "--svg", *SHORT])
    assert code == 0
    header, rows = read_csv(tmp_path / "sweep.csv")
    assert header == ["axis_value", "t_ns", "sz_q1", "sz_q2"]
    assert rows.shape == (3 * 51, 4)
    np.testing.assert_allclose(np.unique(rows[:, 0]), [0, 0.005, 0.01])
    assert io.read_manifest(tmp_path)["sweep"]["axis"] == "Omega"
    assert (tmp_path / "sweep_q1.svg").exists() and (tmp_path / "sweep_q2.svg").exists()


def test_singleton_k0_sweep_equals_simulate(tmp_path):
    cfg = RunConfig(t_max=100.0)
    cli.cmd_simulate(cfg, tmp_path / "sim")
    cli.cmd_sweep(cfg, "k0", [cfg.k0], tmp_path / "sw")
    _, sim = read_csv(tmp_path / "sim" / "timeline.csv")
    _, sw = read_csv(tmp_path / "sw" / "sweep.csv")
    np.testing.assert_array_equal(sw[:, 1:], sim[:, :3])


def test_delta_sweep_mirror_rows(tmp_path):
    cfg = RunConfig(t_max=200.0, coupling="constant")
    vals = cli.parse_range("-0.6283:0.6283:5")
    cli.cmd_sweep(cfg, "delta", vals, tmp_path)
    _, rows = read_csv(tmp_path / "sweep.csv")
    z = rows[:, 2].reshape(5, -1)
    np.testing.assert_allclose(z, z[::-1], atol=1e-9)


def test_sweep_bad_axis(tmp_path):
    with pytest.raises(ValidationError):
        cli.cmd_sweep(RunConfig(t_max=10.0), "J", [1.0], tmp_path)


# -- entropy -----------------------------------------------------------------

def test_entropy_outputs(tmp_path):
    code = cli.main(["entropy", "--out", str(tmp_path), "--pairs", "q2:q1,f1:f2",
                     "--set", "initial_state=(|00100>+|01001>)/sqrt(2)", "--svg", *SHORT])
    assert code == 0
    header, rows = read_csv(tmp_path / "entropy.csv")
    assert header == ["t_ns", "S_q1", "S_f1", "S_fb", "S_q2", "S_f2", "I_q1_q2", "I_f1_f2"]
    np.testing.assert_allclose(rows[0, 1:], [0, 1, 1, 0, 1, 0, 1], atol=1e-9)
    assert (tmp_path / "mutual_information.svg").exists()


def test_entropy_pump_state_starts_at_zero(tmp_path):
    cli.cmd_entropy(RunConfig(t_max=20.0), cli.parse_subsystems("all"), [], tmp_path, every=5)
    _, rows = read_csv(tmp_path / "entropy.csv")
    np.testing.assert_array_equal(rows[0, 1:], 0.0)
    np.testing.assert_array_equal(rows[:, 0], [0, 5, 10, 15, 20])


# -- plateau -------------------------------------------------------------------

def test_plateau_command(capsys, tmp_path):
    assert cli.main(["plateau", "--Omega", "0.006667", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "Omega,t_enter_ns,t_zero_ns,t_exit_ns"
    vals = [float(x) for x in out[1].split(",")]
    np.testing.assert_allclose(vals[1:], [639.1, 706.8, 774.5], atol=0.1)
    assert (tmp_path / "plateau.csv").read_text().splitlines() == out


def test_plateau_cycles():
    rows = cli.cmd_plateau([0.004444], 0.1, cycles=2)
    assert len(rows) == 2
    assert rows[1][2] - rows[0][2] == pytest.approx(2 * math.pi / 0.004444)


def test_plateau_full_fraction():
    (_, enter, _, _), = cli.cmd_plateau([0.004444], 1.0)
    assert enter == pytest.approx(math.pi / 0.004444, rel=1e-15)


def test_plateau_zero_Omega_explained(capsys):
    assert cli.main(["plateau", "--Omega", "0"]) == cli.EXIT_VALIDATION
    assert "never vanishes" in capsys.readouterr().err


# -- oracle audit ----------------------------------------------------------------

def test_oracle_audit_defaults(capsys):
    assert cli.main(["oracle-audit"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 3 and "FAIL" not in out


def test_oracle_audit_without_hopping():
    report = cli.cmd_oracle_audit(RunConfig(J_ratio=0.0), t_max=100.0)
    assert report["closed_form"].startswith("skipped")
    assert "integrator_vs_eigen_solve" in report["checks"]
    assert "integrator_vs_closed_form" not in report["checks"]
    assert report["ok"]


def test_oracle_audit_tolerance_monotone():
    devs = [cli.cmd_oracle_audit(RunConfig(rel_tol=r, abs_tol=r * 1e-2))
            ["checks"]["integrator_vs_closed_form"] for r in (1e-9, 1e-11, 1e-13)]
    assert devs[0] > devs[1] > devs[2]


def test_oracle_audit_failure_exit(capsys):
    code = cli.main(["oracle-audit", "--set", "rel_tol=1e-8", "--set", "abs_tol=1e-10"])
    assert code == cli.EXIT_AUDIT
    assert "FAIL" in capsys.readouterr().out


# -- self-verify -------------------------------------------------------------

def test_self_verify(tmp_path, capsys):
    cli.main(["simulate", "--out", str(tmp_path), *SHORT])
    assert cli.main(["self-verify", "--out", str(tmp_path)]) == 0
    (tmp_path / "timeline.json").unlink()
    assert cli.main(["self-verify", "--out", str(tmp_path)]) == cli.EXIT_AUDIT
    assert "missing file timeline.json" in capsys.readouterr().err


def test_self_verify_detects_tampering(tmp_path):
    cli.main(["simulate", "--out", str(tmp_path), *SHORT])
    path = tmp_path / "timeline.csv"
    path.write_text(path.read_text().replace("-1.0", "-0.9", 1))
    assert io.verify_bundle(tmp_path) == ["checksum mismatch for timeline.csv"]


def test_self_verify_without_manifest(tmp_path):
    assert cli.main(["self-verify", "--out", str(tmp_path)]) == cli.EXIT_AUDIT
