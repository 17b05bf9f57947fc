"""
Exact Coulomb-gauge fields: monochromatic completion, plane-wave profiles,
the reduced relativistic inner product, and decomposition of an arbitrary
positive-frequency field into henochromatic components.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .gauge import (
    HENOCHROMATIC,
    HenoAmplitude,
    _q_sites,
    dispersion,
    evaluate_heno_field,
    heno_lift,
    spectral_sum,
)
from .grid import SPECTRAL, ComplexVectorField, GridMismatchError, TransverseGrid
from .paraxial import C, Carrier, ParaxialMode

UNIFORM3D = "uniform3d"
LIGHTCONE = "lightcone"
RHO_CHOICES = (UNIFORM3D, LIGHTCONE)

EVANESCENT_EDGE = 1 - 1e-9
EVANESCENT_WARN = 0.01
SUPPORT_RTOL = 1e-12


class EvanescentTruncationWarning(UserWarning):
    pass


class CoverageError(ValueError):
    """The carrier grid does not span the k-support of a plane-wave profile."""


# -- monochromatic fields ----------------------------------------------------

@dataclass(frozen=True, eq=False)
class MonochromaticField:
    k0: float
    spectral3: ComplexVectorField
    discarded_fraction: float = 0.0

    @property
    def grid(self) -> TransverseGrid:
        return self.spectral3.grid

    def kz(self) -> np.ndarray:
        q = _q_sites(self.grid)
        q2 = np.sum(q * q, axis=-1)
        return np.sqrt(np.clip(self.k0**2 - q2, 0.0, None))


def mc_complete(transverse, k0: float) -> MonochromaticField:
    """Fill in the longitudinal component ``-q.F / sqrt(k0^2 - |q|^2)``.

    Sites with ``|q| >= (1 - 1e-9) k0`` are zeroed; their share of the input
    norm is stored as ``discarded_fraction`` and a warning is issued when it
    exceeds 1 %.
    """
    if isinstance(transverse, ParaxialMode):
        transverse = transverse.spectral
    if transverse.space != SPECTRAL or transverse.d != 2:
        raise GridMismatchError("mc_complete expects a 2-component spectral field")
    if k0 <= 0:
        raise ValueError("k0 must be positive")
    q = _q_sites(transverse.grid)
    q2 = np.sum(q * q, axis=-1)
    keep = np.sqrt(q2) < EVANESCENT_EDGE * k0
    F = transverse.data
    power = np.sum(np.abs(F) ** 2, axis=-1)
    total = power.sum()
    discarded = float(power[~keep].sum() / total) if total else 0.0
    if discarded > EVANESCENT_WARN:
        warnings.warn(f"{discarded:.2%} of the field lies beyond the evanescent cutoff",
                      EvanescentTruncationWarning, stacklevel=2)
    out = np.zeros(F.shape[:2] + (3,), dtype=complex)
    kz = np.sqrt(np.where(keep, k0**2 - q2, 1.0))
    out[..., :2] = np.where(keep[..., None], F, 0)
    out[..., 2] = np.where(keep, -np.sum(q * F, axis=-1) / kz, 0)
    return MonochromaticField(float(k0), transverse.replace(out, k=k0), discarded)


def evaluate_mc_field(f: MonochromaticField, points, c: float = C) -> np.ndarray:
    g = f.grid
    q = _q_sites(g).reshape(-1, 2)
    kz = f.kz().reshape(-1)
    w = np.full(kz.shape, c * f.k0)
    return spectral_sum(f.spectral3.data.reshape(-1, 3), q, kz, w, points,
                        g.dq**2 / (2 * np.pi))


def evaluate_paraxial_field(mode: ParaxialMode, points, c: float = C) -> np.ndarray:
    """``Xi(s, z) exp(ik(z - ct))`` with a zero longitudinal column."""
    g = mode.grid
    k = mode.k
    q = _q_sites(g).reshape(-1, 2)
    q2 = np.sum(q * q, axis=-1)
    F = np.zeros((q.shape[0], 3), dtype=complex)
    F[:, :2] = mode.spectral.data.reshape(-1, 2)
    return spectral_sum(F, q, k - q2 / (2 * k), np.full(q2.shape, c * k), points,
                        g.dq**2 / (2 * np.pi))


# -- relativistic inner product ----------------------------------------------

def relativistic_inner_product_reduced(h1: HenoAmplitude, h2: HenoAmplitude,
                                       choice: str = HENOCHROMATIC, c: float = C) -> complex:
    """Coefficient of ``(4 pi / hbar c^2) delta(k2 - k1)`` in the single-particle product.

    ``int d^2q omega / |d kappa/dk| conj(F'_1) . F'_2``.  Distinct carriers are
    orthogonal and return 0.  ``choice`` selects the dispersion pair used in
    the weight; anything but the henochromatic one is a negative control.
    """
    if h1.grid != h2.grid:
        raise GridMismatchError("amplitudes live on different grids")
    if h1.k != h2.k:
        return 0j
    q = _q_sites(h1.grid)
    _, w, dk = dispersion(q, h1.k, choice, c)
    weight = np.where(np.isfinite(w / dk), w / np.abs(dk), 0.0)
    dot = np.sum(np.conj(h1.spectral3.data) * h2.spectral3.data, axis=-1)
    return complex(h1.grid.dq**2 * np.sum(weight * dot))


# -- plane-wave profiles -----------------------------------------------------

def rho(choice: str, kmag):
    if choice == UNIFORM3D:
        return np.ones_like(np.asarray(kmag, dtype=float))
    if choice == LIGHTCONE:
        return 1.0 / (2.0 * np.asarray(kmag, dtype=float))
    raise ValueError(f"unknown density of states {choice!r}")


@dataclass(frozen=True, eq=False)
class PlaneWaveProfile:
    """Amplitude ``A(q, kz)`` on the spectral lattice times a uniform kz axis.

    ``amplitude`` has shape ``(n, n, nkz, 3)``; ``kz = kz_min + i kz_step``.
    """

    grid: TransverseGrid
    kz_min: float
    kz_step: float
    amplitude: np.ndarray
    rho_choice: str = UNIFORM3D

    def __post_init__(self):
        a = np.array(self.amplitude, dtype=complex, copy=True)
        n = self.grid.n
        if a.ndim != 4 or a.shape[:2] != (n, n) or a.shape[3] != 3:
            raise GridMismatchError(f"amplitude shape {a.shape} does not fit the grid")
        if self.kz_min <= 0 or self.kz_step <= 0:
            raise ValueError("the kz axis must lie in kz > 0 with a positive step")
        if self.rho_choice not in RHO_CHOICES:
            raise ValueError(f"rho must be one of {RHO_CHOICES}")
        if not np.all(np.isfinite(a)):
            raise ValueError("amplitude samples must be finite")
        a.flags.writeable = False
        object.__setattr__(self, "amplitude", a)
        object.__setattr__(self, "kz_min", float(self.kz_min))
        object.__setattr__(self, "kz_step", float(self.kz_step))
        res = self.transversality_residual()
        if res > 1e-12:
            raise ValueError(f"profile is not transverse: residual {res:.3g}")

    @property
    def nkz(self) -> int:
        return self.amplitude.shape[2]

    @property
    def kz(self) -> np.ndarray:
        return self.kz_min + self.kz_step * np.arange(self.nkz)

    def wavevectors(self) -> np.ndarray:
        """``(n, n, nkz, 3)`` array of ``(qx, qy, kz)``."""
        q = _q_sites(self.grid)
        n = self.grid.n
        out = np.empty((n, n, self.nkz, 3))
        out[..., :2] = q[:, :, None, :]
        out[..., 2] = self.kz[None, None, :]
        return out

    def transversality_residual(self) -> float:
        kv = self.wavevectors()
        dot = np.abs(np.sum(kv * self.amplitude, axis=-1))
        scale = np.linalg.norm(kv, axis=-1) * np.linalg.norm(self.amplitude, axis=-1)
        top = scale.max()
        return float((dot / np.maximum(scale, 1e-300)).max()) if top > 0 else 0.0

    def physical_amplitude(self) -> np.ndarray:
        """``sqrt(rho) A``, the combination that does not depend on ``rho``."""
        kmag = np.linalg.norm(self.wavevectors(), axis=-1)
        return np.sqrt(rho(self.rho_choice, kmag))[..., None] * self.amplitude

    def with_rho(self, choice: str) -> "PlaneWaveProfile":
        """The same physical field re-expressed under another density of states."""
        kmag = np.linalg.norm(self.wavevectors(), axis=-1)
        a = self.physical_amplitude() / np.sqrt(rho(choice, kmag))[..., None]
        return PlaneWaveProfile(self.grid, self.kz_min, self.kz_step, a, choice)


def plane_wave_field(profile: PlaneWaveProfile, points, c: float = C) -> np.ndarray:
    """Direct 3-D lattice quadrature of the plane-wave superposition."""
    kv = profile.wavevectors().reshape(-1, 3)
    kmag = np.linalg.norm(kv, axis=-1)
    amp = profile.physical_amplitude().reshape(-1, 3)
    amp = amp / np.sqrt((2 * np.pi) ** 3 * 2 * kmag)[:, None]
    weight = profile.grid.dq**2 * profile.kz_step
    return spectral_sum(amp, kv[:, :2], kv[:, 2], c * kmag, points, weight)


def random_plane_wave_profile(rng: np.random.Generator, grid: TransverseGrid, k0: float,
                              width: float = 0.2, nkz: int = 96, q_max: float | None = None,
                              rho_choice: str = UNIFORM3D, order: int = 2) -> PlaneWaveProfile:
    """Band-limited, seeded profile with kz in ``k0 (1 +- width/2)`` and ``|q| < q_max``.

    Amplitudes are random polynomial-times-bump functions projected onto the
    plane transverse to each wavevector; they vanish with three continuous
    derivatives at the support boundary.
    """
    if q_max is None:
        q_max = 0.3 * k0
    half = width * k0 / 2
    kz_min = k0 - half
    kz_step = 2 * half / (nkz - 1)
    kz = kz_min + kz_step * np.arange(nkz)
    q = _q_sites(grid)
    qx = q[..., 0] / q_max
    qy = q[..., 1] / q_max
    xz = (kz - k0) / half
    bump_q = np.clip(1 - qx**2 - qy**2, 0, None) ** 4
    bump_z = np.clip(1 - xz**2, 0, None) ** 4
    v = np.zeros(q.shape[:2] + (nkz, 3), dtype=complex)
    for a in range(order + 1):
        for b in range(order + 1 - a):
            for cz in range(order + 1):
                coef = rng.normal(size=3) + 1j * rng.normal(size=3)
                basis = (qx**a * qy**b)[:, :, None] * (xz**cz)[None, None, :]
                v += basis[..., None] * coef
    v *= (bump_q[:, :, None] * bump_z[None, None, :])[..., None]
    kv = np.empty(v.shape)
    kv[..., :2] = q[:, :, None, :]
    kv[..., 2] = kz[None, None, :]
    khat = kv / np.linalg.norm(kv, axis=-1, keepdims=True)
    phys = v - khat * np.sum(khat * v, axis=-1, keepdims=True)
    phys /= np.abs(phys).max()
    kmag = np.linalg.norm(kv, axis=-1)
    amp = phys / np.sqrt(rho(rho_choice, kmag))[..., None]
    return PlaneWaveProfile(grid, kz_min, kz_step, amp, rho_choice)


# -- henochromatic decomposition ---------------------------------------------

def carrier_of(q2, kz):
    """Carrier ``k`` with ``kappa(q, k) = kz``: ``(kz + sqrt(kz^2 + |q|^2)) / 2``."""
    return (kz + np.sqrt(kz * kz + q2)) / 2


def k_support(profile: PlaneWaveProfile) -> tuple[float, float]:
    """Range of carriers reached by the non-negligible part of ``profile``."""
    p = np.linalg.norm(profile.physical_amplitude(), axis=-1)
    mask = p > SUPPORT_RTOL * p.max()
    if not mask.any():
        raise ValueError("profile is identically zero")
    kv = profile.wavevectors()
    ks = carrier_of(kv[..., 0] ** 2 + kv[..., 1] ** 2, kv[..., 2])[mask]
    return float(ks.min()), float(ks.max())


def _cubic_kz(values: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Four-point Lagrange interpolation along axis 2 at fractional indices ``u[n, n]``.

    Samples outside the kz axis count as zero.
    """
    nkz = values.shape[2]
    i0 = np.floor(u).astype(int)
    t = u - i0
    w = [-t * (t - 1) * (t - 2) / 6,
         (t + 1) * (t - 1) * (t - 2) / 2,
         -(t + 1) * t * (t - 2) / 2,
         (t + 1) * t * (t - 1) / 6]
    out = np.zeros(values.shape[:2] + values.shape[3:], dtype=values.dtype)
    for off, wt in zip(range(-1, 3), w):
        idx = i0 + off
        ok = (idx >= 0) & (idx < nkz)
        safe = np.clip(idx, 0, nkz - 1)
        picked = np.take_along_axis(values, safe[:, :, None, None], axis=2)[:, :, 0]
        out += np.where(ok, wt, 0.0)[..., None] * picked
    return out


def decompose_heno(profile: PlaneWaveProfile, k_grid) -> dict[float, ParaxialMode]:
    """Paraxial amplitude ``F(q; k)`` at each carrier of ``k_grid``.

    At each site the profile is read at ``kz = k - |q|^2/4k`` and combined as
    ``sqrt((4k^2 + |q|^2)/(16 pi k^3) rho) [A - (q/2k + z) A_z]``; the
    longitudinal part of the bracket vanishes identically and is dropped.
    """
    k_grid = np.sort(np.asarray(k_grid, dtype=float))
    if k_grid.size == 0 or np.any(k_grid <= 0):
        raise ValueError("carrier grid must be non-empty and positive")
    lo, hi = k_support(profile)
    missing = []
    if k_grid[0] > lo:
        missing.append((lo, float(k_grid[0])))
    if k_grid[-1] < hi:
        missing.append((float(k_grid[-1]), hi))
    if missing:
        spans = ", ".join(f"[{a:.6g}, {b:.6g}]" for a, b in missing)
        raise CoverageError(f"carrier grid misses k-support {spans}")
    q = _q_sites(profile.grid)
    q2 = np.sum(q * q, axis=-1)
    phys = profile.physical_amplitude()
    out = {}
    for k in k_grid:
        u = (k - q2 / (4 * k) - profile.kz_min) / profile.kz_step
        a = _cubic_kz(phys, u)
        jac = np.sqrt((4 * k * k + q2) / (16 * np.pi * k**3))
        F = jac[..., None] * (a[..., :2] - q / (2 * k) * a[..., 2:3])
        field = ComplexVectorField(profile.grid, F, SPECTRAL, k)
        out[float(k)] = ParaxialMode(Carrier(k), field)
    return out


def trapezoid_weights(ks) -> np.ndarray:
    ks = np.asarray(ks, dtype=float)
    if ks.size == 1:
        return np.ones(1)
    d = np.diff(ks)
    w = np.zeros_like(ks)
    w[:-1] += d / 2
    w[1:] += d / 2
    return w


def reconstruct_from_heno(decomposition: dict, points, weights=None) -> np.ndarray:
    """Sum of henochromatic fields over carriers with trapezoid weights in k."""
    ks = sorted(decomposition)
    if weights is None:
        weights = trapezoid_weights(ks)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    total = np.zeros((points.shape[0], 3), dtype=complex)
    for k, w in zip(ks, weights):
        mode = decomposition[k]
        h = mode if isinstance(mode, HenoAmplitude) else heno_lift(mode)
        total += w * evaluate_heno_field(h, points)
    return total
