import re

import numpy as np
import pytest

from adhesim import io
from adhesim.cli import EXIT_CONFIG, EXIT_OK, main
from adhesim.config import parse_config, parse_config_text
from adhesim.errors import ParseError, RangeError, UnknownKey, UnknownValue
from adhesim.kernel import Exponential, Tabulated
from adhesim.sensing import Neutral, NoFlux, WeightedBoundary

BASIC = """
# small periodic run
grid.L = 5
grid.N = 32
sim.alpha = 3.25
sim.t_end = 2
sim.outputs = 4
ic.seed = 1   # inline comment
"""


def write(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_parse_sets_values_and_records_explicit_keys():
    cfg = parse_config_text(BASIC)
    assert cfg.grid.N == 32 and cfg.sim.alpha == 3.25 and cfg.ic.seed == 1
    assert "sim.alpha" in cfg.explicit and "sim.D" not in cfg.explicit
    assert cfg.sim.D == 1.0


def test_builders_produce_runtime_objects():
    cfg = parse_config_text("kernel.family = exponential\nkernel.xi = 0.3\nbc.mode = neutral\nbc.base = noflux\n")
    assert cfg.build_kernel() == Exponential(xi=0.3)
    mode = cfg.build_mode()
    assert isinstance(mode, Neutral) and isinstance(mode.base, NoFlux) and mode.uref is None
    cfg = parse_config_text("bc.mode = weighted\nbc.beta0 = 0.5\nbc.betaL = 0.25\n")
    assert cfg.build_mode() == WeightedBoundary(beta0=0.5, betaL=0.25)


def test_tabulated_kernel_reads_csv(tmp_path):
    (tmp_path / "k.csv").write_text("r,omega\n0,1\n0.5,1\n1,0\n")
    cfg = parse_config(write(tmp_path, "kernel.family = tabulated\nkernel.table = k.csv\n"))
    spec = cfg.build_kernel()
    assert isinstance(spec, Tabulated) and spec.samples[-1] == (1.0, 0.0)


@pytest.mark.parametrize("text,error", [
    ("grid.L 5", ParseError),
    ("grid.L = five", ParseError),
    ("grid.X = 5", UnknownKey),
    ("mesh.L = 5", UnknownKey),
    ("kernel.family = cone", UnknownValue),
    ("bc.mode = open", UnknownValue),
    ("grid.L = 1.5", RangeError),
    ("sim.D = -1", RangeError),
    ("grid.N = 0", RangeError),
    ("ic.mean = 0", RangeError),
    ("kernel.family = tabulated", RangeError),
])
def test_invalid_configs_raise_specific_errors(text, error):
    with pytest.raises(error):
        parse_config_text(text)


def test_parse_error_reports_line_number():
    with pytest.raises(ParseError) as exc:
        parse_config_text("grid.L = 5\n\nnonsense\n")
    assert exc.value.line == 3


def test_unknown_value_lists_choices():
    with pytest.raises(UnknownValue) as exc:
        parse_config_text("sim.scheme = euler")
    assert "ars" in str(exc.value) and "cn" in str(exc.value)


def test_number_formatting():
    assert io.fmt(1.0) == "1.00000000000e+00"
    assert io.fmt(-0.000123456789012345) == "-1.23456789012e-04"
    assert io.fmt(3) == "3" and io.fmt(float("nan")) == "nan"


def test_csv_round_trip(tmp_path):
    path = io.write_csv(tmp_path / "t.csv", ("a", "b"), [(1.5, 2), (np.pi, -1e-300)])
    raw = path.read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")
    header, data = io.read_csv(path)
    assert header == ["a", "b"]
    assert data[1, 0] == pytest.approx(np.pi, rel=1e-11)


def test_svg_outputs_are_well_formed(tmp_path):
    x = np.linspace(0, 1, 20)
    io.line_plot(tmp_path / "l.svg", [(x, x**2, "sq")])
    io.heatmap(tmp_path / "h.svg", np.arange(3.0), x, np.outer(np.arange(3.0), x))
    for name in ("l.svg", "h.svg"):
        text = (tmp_path / name).read_text()
        assert text.startswith("<svg") and text.rstrip().endswith("</svg>")


def test_simulate_writes_reproducible_outputs(tmp_path):
    cfg = write(tmp_path, BASIC)
    for out in ("a", "b"):
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / out), "--svg"]) == EXIT_OK
    for name in ("profile.csv", "kymograph.csv", "trace.csv", "resolved_config.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert (tmp_path / "a" / "kymograph.svg").exists()
    header, kym = io.read_csv(tmp_path / "a" / "kymograph.csv")
    assert header[0] == "t" and kym.shape == (5, 161)
    header, trace = io.read_csv(tmp_path / "a" / "trace.csv")
    assert header == ["t", "mass", "peaks", "energy"]
    assert np.allclose(trace[:, 1], 5.0, atol=1e-10)
    assert re.search(r"^ic\.seed = 1$", (tmp_path / "a" / "resolved_config.txt").read_text(), re.M)


def test_seed_flag_overrides_config(tmp_path):
    cfg = write(tmp_path, BASIC)
    main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "a")])
    main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "b"), "--seed", "9"])
    assert (tmp_path / "a" / "profile.csv").read_bytes() != (tmp_path / "b" / "profile.csv").read_bytes()
    assert "ic.seed = 9" in (tmp_path / "b" / "resolved_config.txt").read_text()


def test_config_errors_exit_with_code_two(tmp_path, capsys):
    assert main(["simulate", "--config", str(write(tmp_path, "grid.L = 1"))]) == EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err
    assert main(["simulate", "--config", str(tmp_path / "missing.cfg")]) == EXIT_CONFIG
    assert main(["simulate"]) == EXIT_CONFIG


def test_bifurcate_and_kernel_info(tmp_path):
    cfg = write(tmp_path, "grid.L = 5\nbif.n_max = 3\n")
    assert main(["bifurcate", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_OK
    rows = (tmp_path / "bifpoints.csv").read_text().splitlines()
    assert rows[0] == "n,Mn,alpha_n,delta_Mn,alpha_3n,b_2n1,criticality"
    assert rows[1].startswith("1,2.74933402") and rows[1].endswith("subcritical")
    assert main(["kernel-info", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "moments.csv").read_text().count("\n") == 4


def test_steady_asymptotic_and_branch_commands(tmp_path):
    cfg = write(tmp_path, "grid.L = 5\ngrid.N = 32\nbc.mode = noflux\nsim.alpha = 0.05\nic.kind = constant\n"
                          "branch.alpha_end = 2.5\nbranch.d_alpha = 0.1\n")
    assert main(["steady", "--config", str(cfg), "--out", str(tmp_path / "s")]) == EXIT_OK
    diag = (tmp_path / "s" / "diagnostics.csv").read_text()
    assert diag.startswith("check_name,status,value,tolerance")
    assert main(["asymptotic", "--config", str(cfg), "--out", str(tmp_path / "a")]) == EXIT_OK
    _, prof = io.read_csv(tmp_path / "a" / "profile.csv")
    _, steady = io.read_csv(tmp_path / "s" / "profile.csv")
    assert np.max(np.abs(prof[:, 1] - steady[:, 1])) < 1e-3
    periodic = write(tmp_path, "grid.L = 5\ngrid.N = 32\nbranch.alpha_end = 2.5\nbranch.d_alpha = 0.1\n", "b.cfg")
    assert main(["branch", "--config", str(periodic), "--out", str(tmp_path / "b")]) == EXIT_OK
    _, branch = io.read_csv(tmp_path / "b" / "branch.csv")
    assert branch[-1, 0] == pytest.approx(2.5)
