"""Two-dimensional intensity and phase slices of evaluated fields."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from . import exact, gauge, paraxial
from .grid import inverse_transform
from .paraxial import C

KINDS = ("paraxial", "heno", "mono")


def fwhm(profile: np.ndarray, coords: np.ndarray) -> float:
    """Full width at half maximum of a single-peaked sampled curve (cubic spline crossings)."""
    i = int(np.argmax(profile))
    half = profile[i] / 2
    spline = CubicSpline(coords, profile - half)
    left = np.nonzero(profile[:i] < half)[0]
    right = np.nonzero(profile[i:] < half)[0]
    if left.size == 0 or right.size == 0:
        raise ValueError("profile does not fall below half maximum on both sides")
    l0 = left[-1]
    r0 = i + right[0]
    xl = brentq(spline, coords[l0], coords[l0 + 1])
    xr = brentq(spline, coords[r0 - 1], coords[r0])
    return xr - xl


class EmptySliceError(ValueError):
    pass


@dataclass
class Slice:
    """``|A|^2`` and phase on axes ``u`` (rows) and ``v`` (columns)."""

    u: np.ndarray
    v: np.ndarray
    labels: tuple
    intensity: np.ndarray
    phase: np.ndarray

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([self.labels[0], self.labels[1], "intensity", "phase"])
            for i, u in enumerate(self.u):
                for j, v in enumerate(self.v):
                    w.writerow([repr(float(u)), repr(float(v)),
                                repr(float(self.intensity[i, j])), repr(float(self.phase[i, j]))])
                # blank line between scans for gnuplot pm3d
                fh.write("\n")


def _summarize(values: np.ndarray):
    """Intensity summed over components; phase of the strongest component."""
    intensity = np.sum(np.abs(values) ** 2, axis=-1)
    dominant = int(np.argmax(np.sum(np.abs(values) ** 2, axis=tuple(range(values.ndim - 1)))))
    return intensity, np.angle(values[..., dominant])


def _as_evaluator(obj, kind: str):
    if kind == "paraxial":
        return lambda p: exact.evaluate_paraxial_field(obj, p)
    if kind == "heno":
        return lambda p: gauge.evaluate_heno_field(obj, p)
    if kind == "mono":
        return lambda p: exact.evaluate_mc_field(obj, p)
    raise ValueError(f"unknown field kind {kind!r}")


def xy_slice(obj, kind: str, z: float = 0.0, t: float = 0.0, window: float | None = None) -> Slice:
    """Transverse slice on the grid's s-lattice at one ``(z, t)``."""
    g = obj.grid
    if kind == "paraxial":
        env = paraxial.propagate_envelope(obj, z).data
        values = env * np.exp(1j * obj.k * (z - C * t))
    elif kind == "heno":
        values = gauge.heno_slice(obj, z, t).data
    elif kind == "mono":
        phase = np.exp(1j * (obj.kz() * z - C * obj.k0 * t))
        values = inverse_transform(obj.spectral3.replace(obj.spectral3.data * phase[..., None])).data
    else:
        raise ValueError(f"unknown field kind {kind!r}")
    s = np.asarray(g.s)
    sel = np.ones(s.shape, bool) if window is None else np.abs(s) <= window
    if not sel.any():
        raise EmptySliceError("window excludes every lattice column")
    values = values[np.ix_(sel, sel)]
    intensity, phase = _summarize(values)
    return Slice(s[sel], s[sel], ("x", "y"), intensity, phase)


def xz_slice(obj, kind: str, zs, y: float = 0.0, window: float | None = None,
             comoving: bool = True) -> Slice:
    """Longitudinal slice through ``y``; ``t = z / c`` when ``comoving``."""
    zs = np.asarray(zs, dtype=float)
    s = np.asarray(obj.grid.s)
    xs = s if window is None else s[np.abs(s) <= window]
    if zs.size == 0 or xs.size == 0:
        raise EmptySliceError("slice has no sample points")
    X, Z = np.meshgrid(xs, zs, indexing="ij")
    T = Z / C if comoving else np.zeros_like(Z)
    pts = np.column_stack([X.ravel(), np.full(X.size, y), Z.ravel(), T.ravel()])
    values = _as_evaluator(obj, kind)(pts).reshape(xs.size, zs.size, 3)
    intensity, phase = _summarize(values)
    return Slice(xs, zs, ("x", "z"), intensity, phase)


def widths_along_z(sl: Slice) -> np.ndarray:
    """FWHM of the x-profile in each z column of an ``xz`` slice (NaN where undefined)."""
    out = np.full(sl.v.size, np.nan)
    for j in range(sl.v.size):
        try:
            out[j] = fwhm(sl.intensity[:, j], sl.u)
        except ValueError:
            pass
    return out
