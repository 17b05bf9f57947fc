import numpy as np
import pytest

from henochrome import exact, gauge, slices
from henochrome.grid import TransverseGrid
from henochrome.paraxial import Carrier, hermite_gauss, laguerre_gauss, rayleigh_range

W0 = 10.0


def test_fwhm_of_gaussian():
    x = np.linspace(-10, 10, 201)
    assert slices.fwhm(np.exp(-x**2 / 2), x) == pytest.approx(2 * np.sqrt(2 * np.log(2)), rel=1e-6)
    with pytest.raises(ValueError):
        slices.fwhm(np.ones_like(x), x)


def test_hg00_peaks_at_origin(grid, carrier):
    m = hermite_gauss(0, 0, W0, [1, 0], carrier, grid)
    for kind, obj in [("paraxial", m), ("heno", gauge.heno_lift(m)), ("mono", exact.mc_complete(m, 1.0))]:
        sl = slices.xy_slice(obj, kind, 0.0, 0.0, window=30)
        i, j = np.unravel_index(np.argmax(sl.intensity), sl.intensity.shape)
        assert (sl.u[i], sl.v[j]) == (0.0, 0.0)


def test_lg01_vortex_null(grid, carrier):
    sl = slices.xy_slice(laguerre_gauss(0, 1, W0, [1, 0], carrier, grid), "paraxial")
    c = grid.n // 2
    assert sl.intensity[c, c] <= 1e-8 * sl.intensity.max()


def test_xz_widths_follow_gaussian_law():
    car = Carrier(1.0)
    g = TransverseGrid(256, 150.0)
    m = hermite_gauss(0, 0, W0, [1, 0], car, g)
    zr = rayleigh_range(W0, 1.0)
    sl = slices.xz_slice(m, "paraxial", [0.0, zr], window=60)
    w = slices.widths_along_z(sl)
    assert w[1] / w[0] == pytest.approx(np.sqrt(2), rel=0.01)


def test_empty_slices(grid, carrier):
    m = hermite_gauss(0, 0, W0, [1, 0], carrier, grid)
    with pytest.raises(slices.EmptySliceError):
        slices.xy_slice(m, "paraxial", window=-1.0)
    with pytest.raises(slices.EmptySliceError):
        slices.xz_slice(m, "paraxial", [])


def test_csv_blocks(tmp_path, grid, carrier):
    m = hermite_gauss(0, 0, W0, [1, 0], carrier, grid)
    sl = slices.xy_slice(m, "paraxial", window=3)
    sl.write_csv(tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "x,y,intensity,phase"
    blocks = "\n".join(lines[1:]).strip().split("\n\n")
    assert len(blocks) == sl.u.size
    assert all(len(b.splitlines()) == sl.v.size for b in blocks)
