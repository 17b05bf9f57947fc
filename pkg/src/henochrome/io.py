"""
HENO1 binary container and CSV helpers.

Header (little-endian)::

    5s  magic  b"HENO1"
    I   n      samples per axis
    d   L      half-width of the position domain
    d   k      carrier wavenumber (NaN when untagged)
    B   space  0 position, 1 spectral, 2 plane-wave profile
    I   d      components per site

Plane-wave profiles append ``I nkz, d kz_min, d kz_step, B rho`` (0 uniform3d,
1 lightcone).  Samples follow as row-major complex128 (real, imag float64
pairs), components innermost.
"""
from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .exact import RHO_CHOICES, PlaneWaveProfile, trapezoid_weights
from .grid import POSITION, SPECTRAL, ComplexVectorField, TransverseGrid
from .paraxial import Carrier, ParaxialMode

MAGIC = b"HENO1"
HEADER = struct.Struct("<5sIddBI")
PROFILE_EXT = struct.Struct("<IddB")
SPACE_CODES = {POSITION: 0, SPECTRAL: 1}
PROFILE_CODE = 2
DTYPE = np.dtype("<c16")


class FormatError(ValueError):
    pass


def _header(grid: TransverseGrid, k, space_code: int, d: int) -> bytes:
    kval = float("nan") if k is None else float(k)
    return HEADER.pack(MAGIC, grid.n, grid.extent, kval, space_code, d)


def dump_field(field: ComplexVectorField, path) -> None:
    with open(path, "wb") as fh:
        fh.write(_header(field.grid, field.k, SPACE_CODES[field.space], field.d))
        fh.write(np.ascontiguousarray(field.data, dtype=DTYPE).tobytes())


def _read_header(fh):
    raw = fh.read(HEADER.size)
    if len(raw) != HEADER.size:
        raise FormatError("truncated HENO1 header")
    magic, n, L, k, space, d = HEADER.unpack(raw)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    return n, L, (None if np.isnan(k) else k), space, d


def load_field(path) -> ComplexVectorField:
    with open(path, "rb") as fh:
        n, L, k, space, d = _read_header(fh)
        if space == PROFILE_CODE:
            raise FormatError("file holds a plane-wave profile; use load_profile")
        names = {v: s for s, v in SPACE_CODES.items()}
        if space not in names:
            raise FormatError(f"unknown space code {space}")
        data = np.frombuffer(fh.read(), dtype=DTYPE)
    if data.size != n * n * d:
        raise FormatError(f"expected {n * n * d} samples, found {data.size}")
    return ComplexVectorField(TransverseGrid(n, L), data.reshape(n, n, d), names[space], k)


def load_mode(path, k: float | None = None) -> ParaxialMode:
    """Read a 2-component spectral file as a :class:`ParaxialMode`."""
    f = load_field(path)
    k = f.k if k is None else k
    if k is None:
        raise FormatError("file has no carrier; pass k explicitly")
    return ParaxialMode(Carrier(k), f.replace(k=k))


def dump_profile(profile: PlaneWaveProfile, path) -> None:
    with open(path, "wb") as fh:
        fh.write(_header(profile.grid, None, PROFILE_CODE, 3))
        fh.write(PROFILE_EXT.pack(profile.nkz, profile.kz_min, profile.kz_step,
                                  RHO_CHOICES.index(profile.rho_choice)))
        fh.write(np.ascontiguousarray(profile.amplitude, dtype=DTYPE).tobytes())


def load_profile(path) -> PlaneWaveProfile:
    with open(path, "rb") as fh:
        n, L, _, space, d = _read_header(fh)
        if space != PROFILE_CODE or d != 3:
            raise FormatError("not a plane-wave profile file")
        nkz, kz_min, kz_step, rho_code = PROFILE_EXT.unpack(fh.read(PROFILE_EXT.size))
        data = np.frombuffer(fh.read(), dtype=DTYPE)
    if data.size != n * n * nkz * 3:
        raise FormatError("sample count does not match header")
    return PlaneWaveProfile(TransverseGrid(n, L), kz_min, kz_step,
                            data.reshape(n, n, nkz, 3), RHO_CHOICES[rho_code])


def dump_decomposition(decomposition: dict, directory) -> Path:
    """One HENO1 file per carrier plus ``index.json`` with k values and weights."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    ks = sorted(decomposition)
    files = []
    for i, k in enumerate(ks):
        name = f"carrier_{i:04d}.heno"
        dump_field(decomposition[k].spectral, directory / name)
        files.append(name)
    index = {"k": ks, "weights": trapezoid_weights(ks).tolist(), "files": files}
    path = directory / "index.json"
    path.write_text(json.dumps(index, indent=2))
    return path


def load_decomposition(index_path):
    index_path = Path(index_path)
    index = json.loads(index_path.read_text())
    dec = {}
    for k, name in zip(index["k"], index["files"]):
        dec[float(k)] = load_mode(index_path.parent / name, k)
    return dec, np.asarray(index["weights"], dtype=float)


POINT_COLUMNS = ("s_x", "s_y", "z", "t")
SAMPLE_COLUMNS = ("re_Ax", "im_Ax", "re_Ay", "im_Ay", "re_Az", "im_Az")


def read_points(path) -> np.ndarray:
    """Rows of ``(s_x, s_y, z, t)``; a non-numeric first row is taken as a header."""
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#"):
                continue
            try:
                rows.append([float(v) for v in row[:4]])
            except ValueError:
                if rows:
                    raise
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 4:
        raise FormatError("points file needs four numeric columns")
    return arr


def write_points(points, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(POINT_COLUMNS)
        for p in np.asarray(points, dtype=float):
            w.writerow([repr(float(v)) for v in p])


def write_samples(values, path) -> None:
    values = np.asarray(values, dtype=complex)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SAMPLE_COLUMNS)
        for v in values:
            w.writerow([repr(float(x)) for c in v for x in (c.real, c.imag)])


def read_samples(path) -> np.ndarray:
    raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return raw[:, 0::2] + 1j * raw[:, 1::2]
