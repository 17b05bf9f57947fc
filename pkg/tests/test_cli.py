import csv
import json

import numpy as np
import pytest

from henochrome import exact, gauge, io, paraxial
from henochrome.cli import main, parse_kgrid, parse_tol_overrides, ConfigError
from henochrome.grid import SPECTRAL, ComplexVectorField, TransverseGrid, inverse_transform
from henochrome.verify import divergence_residual

GRID = {"n": 192, "L": 120.0}


def write_config(path, **doc):
    path.write_text(json.dumps(doc))
    return str(path)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def gen(tmp_path, capsys, mode, grid=GRID, name="modes"):
    cfg = write_config(tmp_path / f"{name}.json", grid=grid, k=1.0, mode=mode)
    code, out, err = run(capsys, "gen", "--config", cfg, "--out", tmp_path / name)
    assert code == 0, err
    return [w["file"] for w in json.loads(out)["written"]]


def read_slice(path):
    rows = [r for r in csv.reader(open(path)) if r][1:]
    return np.array(rows, dtype=float)


class TestGen:
    def test_hg00_norm(self, tmp_path, capsys):
        (f,) = gen(tmp_path, capsys, {"family": "hermite", "indices": [0, 0], "waist": 10})
        code, out, _ = run(capsys, "check", f)
        assert code == 0
        assert json.loads(out)["norm"] == pytest.approx(1.0, abs=1e-9)
        assert json.loads((tmp_path / "modes" / "run_config.json").read_text())["command"] == "gen"

    def test_odd_n_is_config_error(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.json", grid={"n": 191, "L": 120.0},
                           mode={"family": "hermite", "indices": [0, 0], "waist": 10})
        code, _, err = run(capsys, "gen", "--config", cfg, "--out", tmp_path)
        assert code == 2 and "even" in err

    def test_flags_override_config(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.json", grid={"n": 191, "L": 120.0},
                           mode={"family": "hermite", "indices": [0, 0], "waist": 10})
        code, _, _ = run(capsys, "gen", "--config", cfg, "--grid-n", 192, "--out", tmp_path / "o")
        assert code == 0
        assert io.load_field(next((tmp_path / "o").glob("*.heno"))).grid.n == 192

    def test_unresolvable_grid(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "c.json", grid={"n": 64, "L": 120.0},
                           mode={"family": "hermite", "indices": [0, 0], "waist": 10})
        code, _, err = run(capsys, "gen", "--config", cfg, "--out", tmp_path)
        assert code == 2 and "w0/6" in err

    def test_two_polarizations_orthogonal(self, tmp_path, capsys):
        files = gen(tmp_path, capsys, {"family": "laguerre", "indices": [0, 1], "waist": 10,
                                        "polarizations": [[1, 0], [0, 1]]})
        assert len(files) == 2
        a, b = (io.load_mode(f) for f in files)
        assert paraxial.envelope_inner_product(a, b) == 0

    def test_complex_polarization(self, tmp_path, capsys):
        (f,) = gen(tmp_path, capsys, {"family": "hermite", "indices": [1, 0], "waist": 10,
                                       "polarization": ["0.7071067811865476", "0.7071067811865476j"]})
        d = io.load_field(f).data
        i = np.unravel_index(np.argmax(np.abs(d[..., 0])), d.shape[:2])
        assert d[i][1] / d[i][0] == pytest.approx(1j)


class TestLift:
    def test_lift_then_check(self, tmp_path, capsys):
        (f,) = gen(tmp_path, capsys, {"family": "hermite", "indices": [2, 1], "waist": 10})
        code, out, _ = run(capsys, "lift", f, "--out", tmp_path / "lifted")
        assert code == 0
        info = json.loads(out)
        assert info["gauge_residual"] <= 1e-12
        code, out, _ = run(capsys, "check", info["file"])
        assert code == 0 and json.loads(out)["components"] == 3

    def test_azimuthal_mode_untouched(self, tmp_path, capsys):
        g = TransverseGrid(64, 60.0)
        qx, qy = g.spectral_mesh()
        data = np.stack([-qy, qx], -1) * np.exp(-(qx**2 + qy**2) * 25)[..., None]
        io.dump_field(ComplexVectorField(g, data, SPECTRAL, 1.0), tmp_path / "az.heno")
        code, out, _ = run(capsys, "lift", tmp_path / "az.heno", "--out", tmp_path / "az_l.heno")
        assert code == 0
        lifted = io.load_field(tmp_path / "az_l.heno").data
        src = io.load_field(tmp_path / "az.heno").data
        assert lifted[..., :2].tobytes() == src.tobytes()
        assert not lifted[..., 2].any()

    def test_hand_case(self, tmp_path, capsys):
        g = TransverseGrid(8, np.pi)
        i, j = g.q_index(1.0, 0.0)
        data = np.zeros((8, 8, 2))
        data[i, j, 0] = 1
        io.dump_field(ComplexVectorField(g, data, SPECTRAL, 1.0), tmp_path / "hand.heno")
        code, _, _ = run(capsys, "lift", tmp_path / "hand.heno", "--out", tmp_path / "hand_l.heno")
        assert code == 0
        np.testing.assert_allclose(io.load_field(tmp_path / "hand_l.heno").data[i, j], [0.6, 0, -0.8],
                                   atol=1e-15)

    def test_wrong_component_count(self, tmp_path, capsys):
        g = TransverseGrid(8, 1.0)
        io.dump_field(ComplexVectorField(g, np.ones((8, 8, 3)), SPECTRAL, 1.0), tmp_path / "x.heno")
        code, _, err = run(capsys, "lift", tmp_path / "x.heno", "--out", tmp_path / "y.heno")
        assert code == 2 and "2-component" in err


class TestSample:
    @pytest.fixture
    def files(self, tmp_path, capsys):
        (f,) = gen(tmp_path, capsys, {"family": "hermite", "indices": [1, 1], "waist": 10})
        run(capsys, "lift", f, "--out", tmp_path / "l.heno")
        return f, str(tmp_path / "l.heno")

    def test_heno_origin_slice(self, tmp_path, capsys, files):
        g = TransverseGrid(GRID["n"], GRID["L"])
        x, y = g.position_mesh()
        idx = [(96, 96), (90, 101), (110, 85)]
        io.write_points([[x[i, j], y[i, j], 0, 0] for i, j in idx], tmp_path / "p.csv")
        code, _, _ = run(capsys, "sample", files[1], tmp_path / "p.csv", "--kind", "heno",
                         "--out", tmp_path / "s.csv")
        assert code == 0
        ref = inverse_transform(io.load_field(files[1])).data
        np.testing.assert_allclose(io.read_samples(tmp_path / "s.csv"), [ref[i, j] for i, j in idx],
                                   atol=1e-13)

    def test_kind_mismatch(self, tmp_path, capsys, files):
        io.write_points([[0, 0, 0, 0]], tmp_path / "p.csv")
        code, _, err = run(capsys, "sample", files[0], tmp_path / "p.csv", "--kind", "heno",
                           "--out", tmp_path / "s.csv")
        assert code == 2 and "lifted" in err
        code, _, _ = run(capsys, "sample", files[1], tmp_path / "p.csv", "--kind", "mono",
                         "--out", tmp_path / "s.csv")
        assert code == 2

    def test_mono_divergence(self, tmp_path, capsys, files):
        from henochrome.verify import _stencil
        h = 2 * np.pi / 400
        pts = _stencil(np.array([2.0, -1.0, 15.0, 3.0]), h)
        io.write_points(pts, tmp_path / "p.csv")
        code, _, _ = run(capsys, "sample", files[0], tmp_path / "p.csv", "--kind", "mono",
                         "--out", tmp_path / "s.csv")
        assert code == 0
        vals = io.read_samples(tmp_path / "s.csv")
        lookup = {tuple(p): v for p, v in zip(pts, vals)}
        r = divergence_residual(lambda ps: np.array([lookup[tuple(p)] for p in ps]),
                                np.array([2.0, -1.0, 15.0, 3.0]), h, 1.0)
        assert r <= 1e-8

    def test_paraxial_vs_heno_gap_shrinks_with_waist(self, tmp_path, capsys):
        gaps = []
        for w0, grid in [(10, {"n": 128, "L": 60.0}), (40, {"n": 128, "L": 240.0})]:
            (f,) = gen(tmp_path, capsys, {"family": "hermite", "indices": [0, 0], "waist": w0},
                       grid=grid, name=f"w{w0}")
            run(capsys, "lift", f, "--out", tmp_path / f"l{w0}.heno")
            zr = w0**2 / 2
            pts = [[x, 0, z, z] for x in np.linspace(-w0, w0, 5) for z in np.linspace(0, zr, 3)]
            io.write_points(pts, tmp_path / "p.csv")
            run(capsys, "sample", f, tmp_path / "p.csv", "--kind", "paraxial", "--out", tmp_path / "a.csv")
            run(capsys, "sample", tmp_path / f"l{w0}.heno", tmp_path / "p.csv", "--kind", "heno",
                "--out", tmp_path / "b.csv")
            a, b = io.read_samples(tmp_path / "a.csv"), io.read_samples(tmp_path / "b.csv")
            gaps.append(np.linalg.norm(a - b) / np.linalg.norm(a))
        assert gaps[1] < gaps[0]


class TestVerify:
    def test_unknown_suite(self, tmp_path, capsys):
        code, _, err = run(capsys, "verify", "bogus", "--out", tmp_path)
        assert code != 0 and "unknown suite" in err

    def test_deterministic_reports(self, tmp_path, capsys):
        for name in ("a", "b"):
            code, _, _ = run(capsys, "verify", "consistency", "--seed", 3, "--no-figures",
                             "--out", tmp_path / name)
            assert code == 0
        assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()
        assert (tmp_path / "a" / "timings.json").exists()

    def test_tol_override_flips_exit(self, tmp_path, capsys):
        code, out, _ = run(capsys, "verify", "rotation", "--tol-override", "isometry=0",
                           "--no-figures", "--out", tmp_path)
        assert code == 1 and "FAIL" in out
        cfg = json.loads((tmp_path / "run_config.json").read_text())
        assert cfg["tolerances"] == {"isometry": 0.0}

    def test_full_suite_default_config(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("HENO_THREADS", "4")
        code, out, _ = run(capsys, "verify", "all", "--out", tmp_path)
        assert code == 0, out
        doc = json.loads((tmp_path / "report.json").read_text())
        assert doc["passed"] and len(doc["suites"]) == 8
        assert (tmp_path / "completeness_convergence.png").exists()

    def test_figures_written(self, tmp_path, capsys):
        code, _, _ = run(capsys, "verify", "negative-controls", "--out", tmp_path)
        assert code == 0
        assert (tmp_path / "negative-controls_ratios.png").stat().st_size > 0

    def test_parse_helpers(self):
        assert parse_tol_overrides(["gauge=1e-9"]) == {"gauge": 1e-9}
        with pytest.raises(ConfigError):
            parse_tol_overrides(["gauge"])
        with pytest.raises(ConfigError):
            parse_tol_overrides(["nonsense=1"])


class TestDecompose:
    def test_round_trip_matches_plane_wave_sum(self, tmp_path, capsys):
        code, out, _ = run(capsys, "profile", "--grid-n", 32, "--grid-L", 100, "--seed", 5,
                           "--out", tmp_path / "prof")
        assert code == 0
        prof_file = json.loads(out)["file"]
        code, out, _ = run(capsys, "decompose", prof_file, "--kgrid", "auto:32", "--out", tmp_path / "dec")
        assert code == 0
        rng = np.random.default_rng(0)
        io.write_points(np.column_stack([rng.uniform(-30, 30, (20, 2)), rng.uniform(-10, 10, (20, 2))]),
                        tmp_path / "p.csv")
        run(capsys, "reconstruct", json.loads(out)["index"], tmp_path / "p.csv", "--out", tmp_path / "r.csv")
        run(capsys, "sample", prof_file, tmp_path / "p.csv", "--kind", "planewave", "--out", tmp_path / "d.csv")
        r, d = io.read_samples(tmp_path / "r.csv"), io.read_samples(tmp_path / "d.csv")
        assert np.linalg.norm(r - d) / np.linalg.norm(d) <= 1e-4

    def test_coverage_error_exit(self, tmp_path, capsys):
        run(capsys, "profile", "--grid-n", 16, "--grid-L", 60, "--out", tmp_path)
        code, _, err = run(capsys, "decompose", tmp_path / "profile.heno", "--kgrid", "1.0:1.01:3",
                           "--out", tmp_path / "dec")
        assert code == 2 and "misses" in err

    def test_kgrid_specs(self):
        prof = exact.random_plane_wave_profile(np.random.default_rng(0), TransverseGrid(16, 60.0), 1.0, nkz=8)
        lo, hi = exact.k_support(prof)
        np.testing.assert_allclose(parse_kgrid("auto:5", prof), np.linspace(lo, hi, 5))
        np.testing.assert_allclose(parse_kgrid("0.5:1.5:3", prof), [0.5, 1.0, 1.5])
        for bad in ("auto", "1:2", "a:b:c"):
            with pytest.raises(ConfigError):
                parse_kgrid(bad, prof)


class TestPlotdata:
    def test_hg00_peak_at_origin(self, tmp_path, capsys):
        (f,) = gen(tmp_path, capsys, {"family": "hermite", "indices": [0, 0], "waist": 10})
        code, out, _ = run(capsys, "plotdata", f, "--kind", "heno", "--window", 20, "--out", tmp_path / "pl")
        assert code == 0
        data = read_slice(json.loads(out)["csv"])
        best = data[np.argmax(data[:, 2])]
        assert best[0] == 0 and best[1] == 0
        assert (tmp_path / "pl" / "hermite_0_0_m0_p0_heno_xy.png").exists()

    def test_lg01_null(self, tmp_path, capsys):
        (f,) = gen(tmp_path, capsys, {"family": "laguerre", "indices": [0, 1], "waist": 10})
        code, out, _ = run(capsys, "plotdata", f, "--no-figures", "--out", tmp_path / "pl")
        data = read_slice(json.loads(out)["csv"])
        axis = data[(data[:, 0] == 0) & (data[:, 1] == 0), 2][0]
        assert axis <= 1e-8 * data[:, 2].max()

    def test_widths_follow_sqrt2(self, tmp_path, capsys):
        w0 = 10.0
        (f,) = gen(tmp_path, capsys, {"family": "hermite", "indices": [0, 0], "waist": w0},
                   grid={"n": 256, "L": 150.0})
        cfg = write_config(tmp_path / "pc.json", waist=w0)
        code, _, _ = run(capsys, "plotdata", f, "--kind", "paraxial", "--plane", "xz", "--zmax", w0**2 / 2,
                         "--nz", 2, "--window", 60, "--config", cfg, "--out", tmp_path / "pl")
        assert code == 0
        w = np.loadtxt(tmp_path / "pl" / "hermite_0_0_m0_p0_paraxial_widths.csv", delimiter=",", skiprows=1)
        assert w[1, 1] / w[0, 1] == pytest.approx(np.sqrt(2), rel=0.01)
        assert (tmp_path / "pl" / "hermite_0_0_m0_p0_paraxial_widths.png").exists()

    def test_empty_slice(self, tmp_path, capsys):
        (f,) = gen(tmp_path, capsys, {"family": "hermite", "indices": [0, 0], "waist": 10})
        code, _, err = run(capsys, "plotdata", f, "--plane", "xz", "--out", tmp_path)
        assert code == 2 and "--zmax" in err
        code, _, _ = run(capsys, "plotdata", f, "--window", -1, "--out", tmp_path)
        assert code == 2
