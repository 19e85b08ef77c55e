import numpy as np
import pytest

from mohom import cli, harness


CFG_TEXT = """\
[problem]
dim = 1
operator = linear:1,3
f = linear

[mesh]
r = 32
cell_n = 128
ref_n = 512

[solver]
residual_tol = 1e-10

[sweep]
eps = 1/4,1/8

[table]
xi_min = -3
xi_max = 3
xi_n = 13

[output]
dir = {out}
seed = 77
"""


@pytest.fixture
def cfg_file(tmp_path):
    p = tmp_path / "exp.cfg"
    p.write_text(CFG_TEXT.format(out=tmp_path / "out"))
    return p


def test_config_roundtrip(cfg_file):
    cfg = harness.load_config(cfg_file)
    assert cfg.operator == "linear:1,3"
    assert cfg.cell_n == 128
    assert [float(e) for e in cfg.eps_list] == [0.25, 0.125]
    assert cfg.seed == 77


def test_config_validation():
    cfg = harness.ExperimentConfig(eps_list=("1/4", "1/2"))
    with pytest.raises(harness.ConfigError):
        cfg.validate()  # not decreasing
    cfg = harness.ExperimentConfig(eps_list=("2/5",))
    with pytest.raises(harness.ConfigError):
        cfg.validate()  # not a reciprocal integer
    cfg = harness.ExperimentConfig(operator="nosuch:1")
    with pytest.raises(ValueError):
        cfg.validate()


def test_make_F():
    F = harness.make_F("const:2.5")
    assert np.allclose(F(np.array([0.1, 0.9])), 2.5)
    assert harness.make_F("zero") is None
    with pytest.raises(harness.ConfigError):
        harness.make_F("nosuch")


def test_sweep_constant_coefficient():
    # constant coefficients: u_eps = u for every eps, so l1_err is only
    # the mesh-transfer error
    cfg = harness.ExperimentConfig(operator="linear:2,2",
                                   eps_list=("1/4", "1/8"),
                                   cell_n=32, ref_n=2048)
    rep = harness.run_sweep(cfg)
    for row in rep.rows:
        assert row.status == "ok"
        assert row.l1_err < 1e-4


def test_sweep_errors_decrease_laminate():
    cfg = harness.ExperimentConfig(eps_list=("1/4", "1/8", "1/16"))
    rep = harness.run_sweep(cfg)
    l1 = [r.l1_err for r in rep.rows]
    weak = [r.weak_err for r in rep.rows]
    assert l1[0] > l1[1] > l1[2]
    assert weak[0] > weak[1] > weak[2]


def test_sweep_csv_deterministic(tmp_path, cfg_file):
    cfg = harness.load_config(cfg_file)
    rep1 = harness.run_sweep(cfg)
    rep2 = harness.run_sweep(cfg)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    rep1.to_csv(p1)
    rep2.to_csv(p2)
    assert p1.read_bytes() == p2.read_bytes()
    header = p1.read_text().splitlines()[0].split(",")
    assert header == harness.SWEEP_HEADER


def test_apriori_uniform_bound():
    from mohom import fem, nfunc, opcat
    cfg = harness.ExperimentConfig(eps_list=("1/4", "1/8", "1/16"))
    rep = harness.run_sweep(cfg)
    op = opcat.make_operator(cfg.operator)
    c = opcat.estimate_coercivity(op, sample_count=500, rng_seed=0)
    mesh = fem.build_mesh(1, 256, "dirichlet_zero")
    m1s = lambda s: nfunc.scalar_conjugate(op.nfunction.m1, s)
    bound = fem.integrate(
        mesh, lambda x: np.vectorize(m1s)((2 / c) * np.abs(x[..., 0]))) / c
    for row in rep.rows:
        assert sum(row.modular_bounds) <= bound


def test_truncation_battery_decreases():
    levels, mods = harness.truncation_battery()
    assert levels == [1, 2, 4, 8]
    assert all(a > b for a, b in zip(mods, mods[1:]))


def test_run_checks_green_and_negative_control():
    rep, ok = harness.run_checks(harness.ExperimentConfig())
    assert ok
    rep, ok = harness.run_checks(harness.ExperimentConfig(),
                                 operator_override="nonmonotone")
    assert not ok


def test_cli_sweep_and_exit_codes(cfg_file, tmp_path):
    rc = cli.cli_main(["sweep", "--config", str(cfg_file)])
    assert rc == 0
    out = tmp_path / "out"
    assert (out / "sweep.csv").exists()
    assert (out / "ahat_table.csv").exists()
    assert cli.cli_main(["bogus"]) == 2
    assert cli.cli_main(["cell", "--config", "/does/not/exist.cfg"]) == 2


def test_cli_cell_prints_ahat(cfg_file, capsys):
    rc = cli.cli_main(["cell", "--xi", "1.0", "--config", str(cfg_file)])
    assert rc == 0
    cap = capsys.readouterr()
    val = float(cap.out.split("[")[1].split("]")[0])
    assert abs(val - 1.5) < 1e-3


def test_cli_check(cfg_file, tmp_path):
    assert cli.cli_main(["check", "--config", str(cfg_file)]) == 0
    assert (tmp_path / "out" / "checks.json").exists()


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("MOHOM_WORKERS", "3")
    assert harness.worker_count() == 3
    monkeypatch.delenv("MOHOM_WORKERS")
    assert harness.worker_count() >= 1
