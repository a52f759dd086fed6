"""Tests for the figure renderer: schema validation, determinism, and the
closed-form laminar guide-curve self-check against real simulation output."""

import math
import os
import sys

import numpy as np
import pytest

import render

GOLDEN = os.path.join(os.path.dirname(__file__), "golden")


def golden(name):
    return os.path.join(GOLDEN, name)


KIND_TO_FILE = {
    "dissipation_vs_nu": "sweep.csv",
    "balance_gap": "sweep.csv",
    "residual_series": "timeseries.csv",
    "no_travel": "no_travel.csv",
    "spectrum": "spectrum.csv",
}


class TestSchema:
    def test_missing_columns_named(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("nu,foo\n0.1,2.0\n")
        with pytest.raises(render.SchemaError) as err:
            render.load_csv(str(path), ("nu", "dissipation_rate"))
        assert "dissipation_rate" in str(err.value)
        assert "nu" not in str(err.value).split("missing")[1].split(";")[0]

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(render.SchemaError, match="empty"):
            render.load_csv(str(path), ("nu",))

    def test_header_only(self, tmp_path):
        path = tmp_path / "hdr.csv"
        path.write_text("nu,dissipation_rate\n")
        with pytest.raises(render.SchemaError, match="no data rows"):
            render.load_csv(str(path), ("nu",))

    def test_missing_file(self):
        with pytest.raises(render.SchemaError, match="cannot read"):
            render.load_csv("/does/not/exist.csv", ("nu",))

    def test_unknown_kind(self, tmp_path):
        with pytest.raises(render.SchemaError, match="unknown figure kind"):
            render.render(golden("sweep.csv"), "nope",
                          str(tmp_path / "x.png"))

    def test_cli_exit_code_on_schema_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n")
        code = render.main(["--input", str(bad), "--kind",
                            "dissipation_vs_nu", "--out",
                            str(tmp_path / "x.png")])
        assert code == 2
        assert "missing required columns" in capsys.readouterr().err


class TestRendering:
    @pytest.mark.parametrize("kind", sorted(KIND_TO_FILE))
    def test_each_kind_renders(self, kind, tmp_path):
        out = tmp_path / f"{kind}.png"
        render.render(golden(KIND_TO_FILE[kind]), kind, str(out))
        assert out.stat().st_size > 1000

    @pytest.mark.parametrize("kind", sorted(KIND_TO_FILE))
    def test_deterministic_output(self, kind, tmp_path):
        a = tmp_path / "a.png"
        b = tmp_path / "b.png"
        render.render(golden(KIND_TO_FILE[kind]), kind, str(a))
        render.render(golden(KIND_TO_FILE[kind]), kind, str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_svg_output(self, tmp_path):
        out = tmp_path / "fig.svg"
        render.render(golden("sweep.csv"), "dissipation_vs_nu", str(out))
        assert out.read_text().startswith("<?xml")


class TestGuideCurve:
    GUIDE = {"gamma": 0.5, "k_f": 1.0, "amplitude": 1.0,
             "length": 2.0 * math.pi}

    def test_closed_form_values(self):
        # nu k_f^2 (a/(gamma+nu k_f^2))^2 L^2/2 at nu=0.4, gamma=0.5:
        # 0.4 * (1/0.9)^2 * 2 pi^2
        expected = 0.4 * (1.0 / 0.9) ** 2 * 2.0 * math.pi**2
        got = render.laminar_curve(np.array([0.4]), self.GUIDE)
        assert got[0] == pytest.approx(expected, rel=1e-14)

    def test_laminar_sweep_lies_on_curve(self, tmp_path):
        deviation = render.render(golden("sweep.csv"), "dissipation_vs_nu",
                                  str(tmp_path / "g.png"), self.GUIDE)
        assert deviation is not None and deviation < 1e-6

    def test_cli_self_test_pass(self, tmp_path, capsys):
        code = render.main([
            "--input", golden("sweep.csv"), "--kind", "dissipation_vs_nu",
            "--out", str(tmp_path / "g.png"),
            "--guide", "gamma=0.5,k_f=1,amplitude=1",
        ])
        assert code == 0
        assert "deviation" in capsys.readouterr().out

    def test_cli_self_test_fails_off_curve(self, tmp_path, capsys):
        code = render.main([
            "--input", golden("sweep.csv"), "--kind", "dissipation_vs_nu",
            "--out", str(tmp_path / "g.png"),
            "--guide", "gamma=0.7,k_f=1,amplitude=1",
        ])
        assert code == 1
        assert "closed-form" in capsys.readouterr().err

    def test_guide_requires_gamma(self):
        with pytest.raises(render.SchemaError, match="gamma"):
            render.parse_guide("k_f=2")


class TestIsolation:
    def test_renderer_does_not_import_simulator(self):
        # fresh interpreter: importing the renderer must not pull in the
        # simulation package (the CSV schemas are the only interface)
        import subprocess
        code = ("import sys; import render; "
                "bad = [m for m in sys.modules if m.split('.')[0] == "
                "'ddns2d']; "
                "sys.exit(1 if bad else 0)")
        proc = subprocess.run([sys.executable, "-c", code],
                              cwd=os.path.dirname(__file__))
        assert proc.returncode == 0


class TestGoldenData:
    """Sanity on the checked-in golden CSVs (real simulation output)."""

    def test_sweep_monotone(self):
        data = render.load_csv(golden("sweep.csv"),
                               render.REQUIRED["balance_gap"])
        order = np.argsort(data["nu"])
        eps = data["dissipation_rate"][order]
        assert np.all(np.diff(eps) > 0)
        assert np.all(np.abs(data["balance_gap"])
                      <= data["dissipation_rate"]
                      + data["telescoping_slack"] + 1e-6)

    def test_no_travel_mass_small(self):
        data = render.load_csv(golden("no_travel.csv"),
                               render.REQUIRED["no_travel"])
        assert np.all(data["y_r3"] <= 0.05 * data["enstrophy"])

    def test_residual_series_small_after_transient(self, tmp_path):
        data = render.load_csv(golden("timeseries.csv"),
                               render.REQUIRED["residual_series"])
        t = data["t"]
        late = t > 0.5 * t[-1]
        q = data["enstrophy"]
        dq = np.gradient(q, t)
        resid = (0.5 * dq + data["damping"] + data["dissipation"]
                 - data["injection"])
        scale = np.abs(data["injection"]) + data["damping"] + 1e-30
        assert np.max(np.abs(resid[late]) / scale[late]) < 1e-2
