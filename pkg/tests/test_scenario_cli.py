import csv
import io
import json
import math

import numpy as np
import pytest

from optosqueeze import cli, oracle
from optosqueeze.model import Scheme
from optosqueeze.scenario import (
    ConfigError,
    Grid,
    evaluate,
    load_scenario,
    parse_config_text,
    scenario_from_mapping,
)

FIG2A = """\
# matched dissipative drive, good cavity
scheme = dissipative
omega_m = 1e3
kappa_out = 1
gamma_m = 2e-5
n_th = 10
c = 1e5
auto_match = true
omega_min = -1e-3
omega_max = 1e-3
points = 201
"""


def _write(tmp_path, text, name="scenario.cfg"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def _read_csv(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    body = [ln for ln in lines if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def _run(tmp_path, text, *extra):
    cfg = _write(tmp_path, text)
    out = tmp_path / "out.csv"
    code = cli.main([*extra, "spectrum", "--config", str(cfg), "--out", str(out)])
    return code, out


class TestConfig:
    def test_key_value_and_json_agree(self):
        kv = scenario_from_mapping(parse_config_text(FIG2A))
        raw = parse_config_text(FIG2A)
        js = scenario_from_mapping(parse_config_text(json.dumps(raw)))
        assert kv == js

    def test_auto_match(self):
        sc = scenario_from_mapping(parse_config_text(FIG2A))
        assert sc.drives.g_plus < sc.drives.g_minus
        kt = 4 * (sc.drives.g_minus**2 - sc.drives.g_plus**2) / sc.params.gamma_m
        assert kt == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize(
        "text, key",
        [
            ("kapa = 1\n", "kapa"),
            ("gamma_m = abc\n", "gamma_m"),
            ("points = 1\n", "points"),
            ("points = 2.5\n", "points"),
            ("spacing = cubic\n", "spacing"),
            ("solver = exact\n", "solver"),
            ("c = 0.5\nauto_match = true\n", "c"),
            ("auto_match = true\n", "c"),
            ("g_minus = 0.1\ng_plus = 0.2\n", "g_plus"),
            ("scheme = squeezer\n", "scheme"),
            ("n_harm = 12\n", "n_harm"),
            ("omega_m = 1\nomega_m = 2\n", "omega_m"),
        ],
    )
    def test_errors_name_the_key(self, text, key):
        with pytest.raises(ConfigError, match=key):
            scenario_from_mapping(parse_config_text(text))

    def test_malformed_lines(self):
        with pytest.raises(ConfigError, match="line 2"):
            parse_config_text("a = 1\nnonsense\n")
        with pytest.raises(ConfigError):
            parse_config_text("{not json")
        with pytest.raises(ConfigError):
            parse_config_text("[1, 2]")

    def test_scheme_aliases(self):
        sc = scenario_from_mapping(parse_config_text("scheme = lossy\nkappa_out = 0.9\nkappa_int = 0.1\nc = 10\nauto_match = true\n"))
        assert sc.drives.scheme is Scheme.DISSIPATIVE_LOSSY

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_scenario(tmp_path / "absent.cfg")

    def test_log_grid(self):
        g = Grid(1e-3, 1e1, 5, "log")
        np.testing.assert_allclose(g.values(), [1e-3, 1e-2, 1e-1, 1, 10])
        with pytest.raises(ConfigError):
            Grid(0.0, 1.0, 5, "log")


class TestSpectrumCommand:
    def test_zero_couplings_give_shot_noise(self, tmp_path):
        code, out = _run(tmp_path, "omega_min = -5\nomega_max = 5\npoints = 41\n")
        assert code == cli.EXIT_OK
        for row in _read_csv(out):
            for key in ("s_u1", "s_u2", "s_opt"):
                assert float(row[key]) == pytest.approx(0.5, abs=1e-12)
            assert float(row["s_u12"]) == pytest.approx(0.0, abs=1e-12)

    def test_fig2a_minimum(self, tmp_path):
        code, out = _run(tmp_path, FIG2A)
        assert code == cli.EXIT_OK
        rows = _read_csv(out)
        s = np.array([float(r["s_u1"]) for r in rows]) / 0.5
        w = np.array([float(r["omega"]) for r in rows])
        assert s.min() == pytest.approx(5.25e-5, rel=1e-3)
        assert w[int(np.argmin(s))] == 0.0

    def test_schema_and_line_endings(self, tmp_path):
        code, out = _run(tmp_path, FIG2A)
        raw = out.read_bytes()
        assert b"\r\n" not in raw
        text = raw.decode("utf-8")
        header = next(ln for ln in text.splitlines() if not ln.startswith("#"))
        assert header == "omega,s_u1,s_u2,s_u12,s_opt,phi_opt,n_eff,solver,converged"
        assert "cavity resonance" in text

    def test_byte_identical(self, tmp_path):
        _, out = _run(tmp_path, FIG2A)
        first = out.read_bytes()
        _, out = _run(tmp_path, FIG2A, "--jobs", "3")
        assert out.read_bytes() == first
        _, out = _run(tmp_path, FIG2A, "--jobs", "1")
        assert out.read_bytes() == first

    def test_unstable_drive_writes_nothing(self, tmp_path, capsys):
        code, out = _run(tmp_path, "g_minus = 0.01\ng_plus = 0.02\n")
        assert code == cli.EXIT_INVALID
        assert not out.exists()
        assert "g_plus" in capsys.readouterr().err

    def test_bad_key_exit_code(self, tmp_path, capsys):
        code, out = _run(tmp_path, "kapa = 1\n")
        assert code == cli.EXIT_INVALID and not out.exists()
        assert "kapa" in capsys.readouterr().err

    def test_solver_failure_exit_code(self, tmp_path):
        # read-out coupling of half the mechanical frequency destabilizes the sideband system
        text = (
            "scheme = measurement\nomega_m = 1\ngamma_m = 1e-3\nc = 1e3\nauto_match = true\n"
            "g_zero = 0.5\na_zero = 1\nsolver = floquet\n"
        )
        code, out = _run(tmp_path, text)
        assert code == cli.EXIT_SOLVER and not out.exists()

    def test_floquet_override(self, tmp_path):
        text = FIG2A.replace("omega_m = 1e3", "omega_m = 10")
        code, out = _run(tmp_path, text, "--solver", "floquet")
        assert code == cli.EXIT_OK
        rows = _read_csv(out)
        assert {r["solver"] for r in rows} == {"floquet"}
        assert {r["converged"] for r in rows} == {"true"}

    def test_floquet_matches_rwa_without_sidebands(self):
        sc = scenario_from_mapping(parse_config_text(FIG2A))
        from dataclasses import replace

        a = evaluate(sc)
        b = evaluate(replace(sc, solver="floquet"))
        # the sidebands add at most the bad-cavity floor, which scales as (kappa/Omega)^2
        floor = oracle.bad_cavity_floor(sc.params.kappa_total / sc.params.omega_m, 1.0).value * 0.5
        excess = b.spectra.s_u1 - a.spectra.s_u1
        assert np.all(excess > -1e-12) and np.all(excess < 1.05 * floor)


class TestOtherCommands:
    def test_match(self, capsys):
        assert cli.main(["match", "--c", "1e5"]) == cli.EXIT_OK
        out = dict(ln.split(" = ") for ln in capsys.readouterr().out.splitlines())
        assert float(out["kappa_tilde_over_kappa"]) == pytest.approx(1.0, abs=1e-10)
        assert float(out["s_u1_zero_over_shot_noise"]) == pytest.approx(21 * oracle.matched_exp_minus_2r(1e5), rel=1e-9)

    def test_match_below_one(self, capsys):
        assert cli.main(["match", "--c", "0.5"]) == cli.EXIT_INVALID

    def test_threshold_ratio(self, capsys):
        assert cli.main(["threshold", "--ratio", "0.5"]) == cli.EXIT_OK
        out = dict(ln.split(" = ") for ln in capsys.readouterr().out.splitlines())
        assert float(out["c_min"]) == pytest.approx(1849 / 168, rel=1e-8)
        assert float(out["c_min_closed_form"]) == pytest.approx(1849 / 168, rel=1e-12)

    def test_threshold_db(self, capsys):
        assert cli.main(["threshold", "--target", "3"]) == cli.EXIT_OK
        out = dict(ln.split(" = ") for ln in capsys.readouterr().out.splitlines())
        assert float(out["target_ratio"]) == pytest.approx(10 ** -0.3)

    def test_threshold_bracket_failure(self, capsys):
        code = cli.main(["threshold", "--ratio", "0.5", "--c-max", "5"])
        assert code == cli.EXIT_SOLVER
        assert "f(" in capsys.readouterr().err

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as info:
            cli.main(["--version"])
        assert info.value.code == 0


def _table(tmp_path, name, stem, *extra):
    assert cli.main(["fig", name, "--out", str(tmp_path), *extra]) == cli.EXIT_OK
    return _read_csv(tmp_path / f"{stem}.csv")


class TestFigures:
    def test_fig2a_files(self, tmp_path, capsys):
        rows = _table(tmp_path, "2a", "fig2a_dissipative")
        s = min(float(r["s_u1"]) for r in rows) / 0.5
        assert s == pytest.approx(5.25e-5, rel=1e-3)
        assert (tmp_path / "fig2a_ponderomotive.csv").exists()

    def test_fig2c_dissipative_angle_is_zero(self, tmp_path, capsys):
        rows = _table(tmp_path, "2c", "fig2c_dissipative")
        assert all(float(r["phi_opt"]) == 0.0 for r in rows)
        ps = _read_csv(tmp_path / "fig2c_ponderomotive.csv")
        assert len({round(float(r["phi_opt"]), 6) for r in ps}) > 10

    def test_fig5_double_dip(self, tmp_path, capsys):
        rows = _table(tmp_path, "5", "fig5")
        w = np.array([float(r["omega"]) for r in rows])
        s = np.array([float(r["s_u1"]) for r in rows])
        left = w[np.argmin(np.where(w < 0, s, np.inf))]
        right = w[np.argmin(np.where(w > 0, s, np.inf))]
        sep = math.sqrt(8 * 0.5**2 - 1 - 0.1**2) / math.sqrt(2)
        step = w[1] - w[0]
        assert right - left == pytest.approx(sep, abs=2 * step)
        assert s[np.argmin(np.abs(w))] > s.min()

    def test_fig3_columns(self, tmp_path, capsys):
        rows = _table(tmp_path, "3", "fig3", "--points", "9")
        assert list(rows[0]) == ["c", "diss_rwa", "diss_floquet", "ps_zero", "ps_sideband", "converged"]
        diss = [float(r["diss_rwa"]) for r in rows]
        assert all(b < a for a, b in zip(diss, diss[1:]))
        # the dissipative scheme beats the ponderomotive one at resonance for every C
        assert all(float(r["diss_rwa"]) < float(r["ps_zero"]) for r in rows[1:])

    def test_fig4_contours(self, tmp_path, capsys):
        rows = _table(tmp_path, "4", "fig4", "--points", "15")
        vals = np.array([float(r["enhancement"]) for r in rows if r["status"] == "ok"])
        assert vals.size > 0.9 * len(rows)
        for level in (1, 10, 100, 1000):
            assert vals.min() < level < vals.max()
        for r in rows:
            assert (r["enhancement"] == "") == (r["status"] != "ok")
