"""
Solutions of the paraxial wave equation, generated in q-space.

Hermite- and Laguerre-Gaussian amplitudes are written down in closed form on
the spectral lattice; with the unitary transform of :mod:`henochrome.grid`
they carry the phase ``(-i)**order`` so that their position-space envelopes
are the familiar real-waist modes at ``z = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial, sqrt

import numpy as np
from scipy.special import eval_genlaguerre, eval_hermite

from .grid import (
    SPECTRAL,
    ComplexVectorField,
    GridMismatchError,
    ResolutionError,
    TransverseGrid,
    inner_product,
    inverse_transform,
)

# Internal units; exposed so reports can print dimensionful prefactors.
HBAR = 1.0
C = 1.0


class CarrierMismatchError(ValueError):
    """Raised when inner products are requested across different carriers."""


@dataclass(frozen=True)
class Carrier:
    k: float
    c: float = C

    def __post_init__(self):
        if not (np.isfinite(self.k) and self.k > 0):
            raise ValueError(f"carrier wavenumber must be positive, got {self.k}")
        object.__setattr__(self, "k", float(self.k))


@dataclass(frozen=True, eq=False)
class ParaxialMode:
    """Transverse spectral amplitude ``F(q)`` (two components) with its carrier."""

    carrier: Carrier
    spectral: ComplexVectorField

    def __post_init__(self):
        if self.spectral.space != SPECTRAL:
            raise GridMismatchError("a paraxial mode is stored in q-space")
        if self.spectral.d != 2:
            raise GridMismatchError(
                f"a paraxial mode has exactly 2 components, got {self.spectral.d}")
        if self.spectral.k != self.carrier.k:
            object.__setattr__(self, "spectral", self.spectral.replace(k=self.carrier.k))

    @property
    def grid(self) -> TransverseGrid:
        return self.spectral.grid

    @property
    def k(self) -> float:
        return self.carrier.k

    def norm(self) -> float:
        return self.spectral.norm()

    def normalized(self) -> "ParaxialMode":
        return ParaxialMode(self.carrier, self.spectral * (1.0 / self.norm()))

    def __add__(self, other: "ParaxialMode") -> "ParaxialMode":
        _check_carriers(self, other)
        return ParaxialMode(self.carrier, self.spectral + other.spectral)

    def __mul__(self, scalar) -> "ParaxialMode":
        return ParaxialMode(self.carrier, self.spectral * scalar)

    __rmul__ = __mul__


def _check_carriers(a: ParaxialMode, b: ParaxialMode):
    if a.carrier.k != b.carrier.k:
        raise CarrierMismatchError(f"carriers differ: k = {a.carrier.k} vs {b.carrier.k}")


def _polarization(pol) -> np.ndarray:
    pol = np.asarray(pol, dtype=complex).reshape(2)
    if abs(np.linalg.norm(pol) - 1.0) > 1e-12:
        raise ValueError(f"polarization must be a unit 2-vector, got norm {np.linalg.norm(pol)}")
    return pol


def check_resolution(grid: TransverseGrid, w0: float, order: int):
    """Raise :class:`ResolutionError` unless ``grid`` resolves a waist-``w0`` mode.

    ``order`` is the largest 1-D Hermite index (or ``2p + |l|`` for LG modes).
    """
    if w0 <= 0:
        raise ValueError(f"waist must be positive, got {w0}")
    # tolerance absorbs float roundoff when the grid is built exactly at the limit
    if grid.ds > w0 / 6 * (1 + 1e-12):
        raise ResolutionError(f"ds = {grid.ds:.4g} exceeds w0/6 = {w0 / 6:.4g}")
    need = 6 * w0 * sqrt(order + 1)
    if grid.extent < need * (1 - 1e-12):
        raise ResolutionError(f"extent L = {grid.extent:.4g} is below {need:.4g}")


def _hermite_1d(m: int, q: np.ndarray, w0: float) -> np.ndarray:
    a = w0 / sqrt(2.0)
    norm = sqrt(a / (sqrt(np.pi) * 2.0**m * factorial(m)))
    return norm * eval_hermite(m, a * q) * np.exp(-(a * q) ** 2 / 2)


def hermite_gauss(m: int, n: int, w0: float, pol, carrier: Carrier,
                  grid: TransverseGrid, check: bool = True) -> ParaxialMode:
    """Unit-norm HG_mn amplitude with waist ``w0`` and polarization ``pol``.

    In q-space this is the (m, n) Hermite-Gaussian with waist ``2 / w0``.
    """
    if m < 0 or n < 0:
        raise ValueError("Hermite indices must be non-negative")
    if check:
        check_resolution(grid, w0, max(m, n))
    pol = _polarization(pol)
    qx, qy = grid.spectral_mesh()
    scalar = (-1j) ** (m + n) * _hermite_1d(m, qx, w0) * _hermite_1d(n, qy, w0)
    data = scalar[..., None] * pol
    return ParaxialMode(carrier, ComplexVectorField(grid, data, SPECTRAL, carrier.k))


def laguerre_gauss(p: int, l: int, w0: float, pol, carrier: Carrier,
                   grid: TransverseGrid, check: bool = True) -> ParaxialMode:
    """Unit-norm LG_p^l amplitude; ``l`` carries the azimuthal phase ``exp(i l phi)``."""
    if p < 0:
        raise ValueError("radial index must be non-negative")
    al = abs(l)
    if check:
        check_resolution(grid, w0, 2 * p + al)
    pol = _polarization(pol)
    qx, qy = grid.spectral_mesh()
    r2 = (qx**2 + qy**2) * w0**2 / 2
    norm = sqrt(2 * factorial(p) / (np.pi * factorial(p + al))) * w0 / 2
    radial = norm * r2 ** (al / 2) * eval_genlaguerre(p, al, r2) * np.exp(-r2 / 2)
    # (qx + i qy)^|l| / |q|^|l| without the 0/0 at the origin
    azim = ((qx + 1j * np.sign(l) * qy) / np.maximum(np.hypot(qx, qy), 1e-300)) ** al
    scalar = (-1j) ** (2 * p + al) * radial * azim
    data = scalar[..., None] * pol
    return ParaxialMode(carrier, ComplexVectorField(grid, data, SPECTRAL, carrier.k))


def mode_superposition(coefficients: dict, w0: float, carrier: Carrier,
                       grid: TransverseGrid) -> ParaxialMode:
    """``sum c * HG_mn`` for ``{(m, n, axis): c}`` with ``axis`` 0 (x) or 1 (y)."""
    top = max(max(m, n) for m, n, _ in coefficients) if coefficients else 0
    # separable: F_axis = H^T C_axis H with H[m] = (-i)^m h_m(q)
    h = np.array([(-1j) ** m * _hermite_1d(m, np.asarray(grid.q), w0) for m in range(top + 1)])
    coef = np.zeros((2, top + 1, top + 1), dtype=complex)
    for (m, n, axis), c in coefficients.items():
        coef[axis, m, n] += c
    data = np.einsum("mi,amn,nj->ija", h, coef, h)
    return ParaxialMode(carrier, ComplexVectorField(grid, data, SPECTRAL, carrier.k))


def random_hg_superposition(rng: np.random.Generator, w0: float, carrier: Carrier,
                            grid: TransverseGrid, max_order: int = 4,
                            normalize: bool = True) -> ParaxialMode:
    """Seeded complex-Gaussian combination of HG_mn (m, n <= ``max_order``), both polarizations."""
    coeffs = {}
    for m in range(max_order + 1):
        for n in range(max_order + 1):
            for axis in (0, 1):
                coeffs[(m, n, axis)] = complex(rng.normal(), rng.normal())
    mode = mode_superposition(coeffs, w0, carrier, grid)
    return mode.normalized() if normalize else mode


def _propagated(mode: ParaxialMode, z: float, phase_sign: int = -1) -> ComplexVectorField:
    qx, qy = mode.grid.spectral_mesh()
    phase = np.exp(phase_sign * 1j * (qx**2 + qy**2) * z / (2 * mode.k))
    return mode.spectral.replace(mode.spectral.data * phase[..., None])


def propagate_envelope(mode: ParaxialMode, z: float) -> ComplexVectorField:
    """Position-space envelope ``Xi(s, z)`` on the lattice."""
    return inverse_transform(_propagated(mode, z))


def rayleigh_range(w0: float, k: float) -> float:
    return k * w0**2 / 2


def _laplacian(a: np.ndarray, ds: float) -> np.ndarray:
    out = -4.0 * a
    for axis in (0, 1):
        out += np.roll(a, 1, axis) + np.roll(a, -1, axis)
    return out / ds**2


def paraxial_residual(mode: ParaxialMode, z: float, dz: float | None = None,
                      phase_sign: int = -1) -> float:
    """Relative L2 residual of ``(2ik d/dz + d2/dx2 + d2/dy2) Xi`` at ``z``.

    All derivatives are second-order central differences; the transverse ones
    wrap periodically.  The z-step defaults to ``min(1/k, z_R/100)`` where
    ``z_R`` is taken from the mode's rms spectral width.  ``phase_sign=+1``
    propagates with the wrong-sign diffraction phase (a negative control).
    """
    k = mode.k
    if dz is None:
        qx, qy = mode.grid.spectral_mesh()
        p = np.sum(np.abs(mode.spectral.data) ** 2, axis=2)
        q2 = np.sum((qx**2 + qy**2) * p) / np.sum(p)
        # for a Gaussian <|q|^2> = 2 / w0^2
        zr = rayleigh_range(sqrt(2.0 / q2), k) if q2 > 0 else np.inf
        dz = min(1.0 / k, zr / 100)
    env = {}
    for dzi in (-dz, 0.0, dz):
        env[dzi] = inverse_transform(_propagated(mode, z + dzi, phase_sign)).data
    ddz = (env[dz] - env[-dz]) / (2 * dz)
    res = 2j * k * ddz + _laplacian(env[0.0], mode.grid.ds)
    return float(np.linalg.norm(res) / np.linalg.norm(env[0.0]))


def envelope_inner_product(a: ParaxialMode, b: ParaxialMode, z: float | None = None) -> complex:
    """``<a, b>`` over q, or over the ``z`` cross-section when ``z`` is given."""
    _check_carriers(a, b)
    if z is None:
        return inner_product(a.spectral, b.spectral)
    return inner_product(propagate_envelope(a, z), propagate_envelope(b, z))
