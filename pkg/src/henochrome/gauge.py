"""
Lift of a paraxial spectral amplitude to its henochromatic Coulomb-gauge
amplitude, and evaluation of the resulting exact field.

Every plane-wave component of the lifted field has transverse wavevector q,
longitudinal wavenumber ``kappa(q, k) = k - |q|^2/4k`` and frequency
``omega(q, k) = c (k + |q|^2/4k)``.  The amplitude is obtained from ``(F, 0)``
by a rotation about ``z x q`` that tilts the q-parallel polarization onto
the plane transverse to ``(q, kappa)``::

    F'(q) = F - 2 (q + 2k z) (q . F) / (|q|^2 + 4k^2)
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .grid import SPECTRAL, ComplexVectorField, GridMismatchError, inverse_transform
from .paraxial import C, Carrier, ParaxialMode

HENOCHROMATIC = "henochromatic"
MONOCHROMATIC = "monochromatic"


def _q2(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return np.sum(q * q, axis=-1)


def omega(q, k: float, c: float = C):
    """Angular frequency ``c (k + |q|^2 / 4k)``; ``q`` has trailing axis of length 2."""
    if k <= 0:
        raise ValueError("k must be positive")
    return c * (k + _q2(q) / (4 * k))


def kappa(q, k: float):
    """Longitudinal wavenumber ``k - |q|^2 / 4k``; negative beyond ``|q| = 2k``."""
    if k <= 0:
        raise ValueError("k must be positive")
    return k - _q2(q) / (4 * k)


def dkappa_dk(q, k: float):
    """Analytic ``d kappa / dk = 1 + |q|^2 / 4k^2``."""
    return 1.0 + _q2(q) / (4 * k * k)


def dispersion(q, k: float, choice: str = HENOCHROMATIC, c: float = C):
    """``(kappa, omega, d kappa/dk)`` for the henochromatic or monochromatic choice.

    The monochromatic choice ``kappa = sqrt(k^2 - |q|^2)``, ``omega = ck`` is
    only used as a negative control; it is undefined for ``|q| >= k``.
    """
    if choice == HENOCHROMATIC:
        return kappa(q, k), omega(q, k, c), dkappa_dk(q, k)
    if choice == MONOCHROMATIC:
        q2 = _q2(q)
        with np.errstate(invalid="ignore", divide="ignore"):
            kz = np.sqrt(k * k - q2)
            return kz, c * k * np.ones_like(q2), k / kz
    raise ValueError(f"unknown dispersion choice {choice!r}")


def _q_sites(grid) -> np.ndarray:
    qx, qy = grid.spectral_mesh()
    return np.stack([qx, qy], axis=-1)


@dataclass(frozen=True, eq=False)
class HenoAmplitude:
    """Three-component amplitude ``F'(q)`` at carrier ``k``."""

    carrier: Carrier
    spectral3: ComplexVectorField

    def __post_init__(self):
        if self.spectral3.space != SPECTRAL or self.spectral3.d != 3:
            raise GridMismatchError("a henochromatic amplitude is a 3-component q-space field")

    @property
    def grid(self):
        return self.spectral3.grid

    @property
    def k(self) -> float:
        return self.carrier.k


def embed(F: np.ndarray) -> np.ndarray:
    """``(Fx, Fy) -> (Fx, Fy, 0)`` along the trailing axis."""
    out = np.zeros(F.shape[:-1] + (3,), dtype=complex)
    out[..., :2] = F
    return out


def lift_array(F: np.ndarray, q: np.ndarray, k: float) -> np.ndarray:
    """Apply the closed-form lift to transverse amplitudes ``F[..., 2]`` at sites ``q[..., 2]``."""
    F = np.asarray(F, dtype=complex)
    q = np.asarray(q, dtype=float)
    terms = q * F
    qF = np.sum(terms, axis=-1)
    # a q.F no larger than its own rounding error is a gauge-compatible site
    bound = 4 * np.finfo(float).eps * np.sum(np.abs(terms), axis=-1)
    live = np.abs(qF) > bound
    coef = -2.0 * qF[live] / (_q2(q[live]) + 4 * k * k)
    out = embed(F)
    # untouched sites keep their exact bits (including signed zeros)
    out[live, 0] += coef * q[live][:, 0]
    out[live, 1] += coef * q[live][:, 1]
    out[live, 2] += coef * 2 * k
    return out


def rotation_lift(F: np.ndarray, q: np.ndarray, kz: np.ndarray) -> np.ndarray:
    """Gauge-restoring rotation for an arbitrary longitudinal wavenumber ``kz(q)``.

    Keeps the component of ``F`` along ``z x q`` and turns the component along
    ``q`` onto the unit vector ``(kz q_hat - |q| z) / sqrt(kz^2 + |q|^2)``.
    With the henochromatic ``kz`` this reproduces :func:`lift_array`.
    """
    F = np.asarray(F, dtype=complex)
    q = np.asarray(q, dtype=float)
    qn = np.sqrt(_q2(q))
    safe = np.where(qn > 0, qn, 1.0)
    qhat = np.where((qn > 0)[..., None], q / safe[..., None], 0.0)
    f_par = np.sum(qhat * F, axis=-1)
    r = np.hypot(kz, qn)
    out = embed(F)
    # subtract the in-plane parallel part, then add back the rotated one
    out[..., :2] -= f_par[..., None] * qhat
    out[..., :2] += (f_par * kz / r)[..., None] * qhat
    out[..., 2] = -f_par * qn / r
    return out


def heno_lift(mode: ParaxialMode) -> HenoAmplitude:
    q = _q_sites(mode.grid)
    data = lift_array(mode.spectral.data, q, mode.k)
    return HenoAmplitude(mode.carrier, mode.spectral.replace(data))


def unlifted(mode: ParaxialMode) -> HenoAmplitude:
    """``(F, 0)`` packaged as an amplitude; it violates the gauge condition."""
    return HenoAmplitude(mode.carrier, mode.spectral.replace(embed(mode.spectral.data)))


def gauge_residual(h: HenoAmplitude, floor: float = 1e-15) -> float:
    """Largest ``|(q + kappa z) . F'| / (|q + kappa z| max(|F'|, floor max|F'|))``.

    The per-site ratio is the cosine between ``F'`` and the propagation
    direction, so the diagnostic is dimensionless.
    """
    q = _q_sites(h.grid)
    kz = kappa(q, h.k)
    F = h.spectral3.data
    dot = q[..., 0] * F[..., 0] + q[..., 1] * F[..., 1] + kz * F[..., 2]
    mag = np.linalg.norm(F, axis=-1)
    top = mag.max()
    if top == 0:
        return 0.0
    kvec = np.sqrt(_q2(q) + kz**2)
    return float(np.max(np.abs(dot) / (kvec * np.maximum(mag, floor * top))))


def beyond_paraxial_mass(h: HenoAmplitude) -> float:
    """Fraction of ``<F', F'>`` on sites with ``kappa < 0`` (``|q| > 2k``)."""
    q = _q_sites(h.grid)
    p = np.sum(np.abs(h.spectral3.data) ** 2, axis=-1)
    total = p.sum()
    return float(p[kappa(q, h.k) < 0].sum() / total) if total else 0.0


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("HENO_THREADS", "1")))
    except ValueError:
        return 1


def spectral_sum(amplitude: np.ndarray, q: np.ndarray, kz: np.ndarray, w: np.ndarray,
                 points: np.ndarray, weight: float, chunk: int = 256) -> np.ndarray:
    """``weight * sum_q amplitude(q) exp(i q.s + i kz z - i w t)`` at each point.

    ``amplitude`` is ``(N, d)`` over N spectral sites; ``points`` is ``(P, 4)``
    rows of ``(sx, sy, z, t)``.  Returns ``(P, d)``.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != 4:
        raise ValueError("points must have columns (sx, sy, z, t)")
    keep = np.any(amplitude != 0, axis=1)
    amplitude, q, kz, w = amplitude[keep], q[keep], kz[keep], w[keep]
    coords = np.stack([q[:, 0], q[:, 1], kz, -w])

    def block(rows):
        phase = rows @ coords
        return weight * (np.exp(1j * phase) @ amplitude)

    blocks = [points[i:i + chunk] for i in range(0, len(points), chunk)]
    n = _threads()
    if n > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(n) as pool:
            out = list(pool.map(block, blocks))
    else:
        out = [block(b) for b in blocks]
    if not out:
        return np.zeros((0, amplitude.shape[1]), dtype=complex)
    return np.concatenate(out, axis=0)


def evaluate_heno_field(h: HenoAmplitude, points) -> np.ndarray:
    """``A(s, z, t)`` as complex 3-vectors, one row per ``(sx, sy, z, t)`` point."""
    g = h.grid
    q = _q_sites(g).reshape(-1, 2)
    data = h.spectral3.data.reshape(-1, 3)
    return spectral_sum(data, q, kappa(q, h.k), omega(q, h.k), points,
                        g.dq**2 / (2 * np.pi))


def heno_slice(h: HenoAmplitude, z: float, t: float) -> ComplexVectorField:
    """The lifted field on the whole s-lattice at one ``(z, t)``, via FFT."""
    q = _q_sites(h.grid)
    phase = np.exp(1j * (kappa(q, h.k) * z - omega(q, h.k) * t))
    return inverse_transform(h.spectral3.replace(h.spectral3.data * phase[..., None]))
