"""
Transverse sample lattices, continuum-normalized 2-D Fourier transforms and
quadrature inner products.

Conventions
-----------
The envelope and its spectral amplitude are related by

    Xi(s) = int d^2q / (2 pi) F(q) exp(+i q.s)
    F(q)  = int d^2s / (2 pi) Xi(s) exp(-i q.s)

and both integrals are discretized as plain lattice sums with weights
``ds**2 / (2 pi)`` and ``dq**2 / (2 pi)``.  Position samples sit at
``s_j = -L + j ds`` and spectral samples at ``q_m = (m - n/2) dq`` for
``j, m = 0 .. n-1``, so ``ds * dq * n == 2 pi`` and the two sums are an exact
discrete transform pair.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

POSITION = "position"
SPECTRAL = "spectral"
SPACES = (POSITION, SPECTRAL)


class GridMismatchError(ValueError):
    """Raised when fields on different lattices or in different spaces meet."""


class ResolutionError(ValueError):
    """Raised when a lattice is too coarse or too small for a requested mode."""


@dataclass(frozen=True)
class TransverseGrid:
    """Uniform ``n x n`` lattice on ``[-L, L)^2`` and its dual q-lattice.

    Parameters
    ----------
    n : int
        Samples per axis, even and at least 8.
    extent : float
        Half-width ``L`` of the position domain.
    """

    n: int
    extent: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 8 or self.n % 2:
            raise ValueError(f"grid n must be an even integer >= 8, got {self.n}")
        if not np.isfinite(self.extent) or self.extent <= 0:
            raise ValueError(f"grid extent must be positive, got {self.extent}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "extent", float(self.extent))

    @property
    def ds(self) -> float:
        return 2.0 * self.extent / self.n

    @property
    def dq(self) -> float:
        return np.pi / self.extent

    @cached_property
    def s(self) -> np.ndarray:
        """1-D position coordinates, ``-L + j ds``."""
        s = -self.extent + self.ds * np.arange(self.n)
        s.flags.writeable = False
        return s

    @cached_property
    def q(self) -> np.ndarray:
        """1-D spectral coordinates, ``(m - n/2) dq``; the Nyquist row is ``q[0]``."""
        q = self.dq * (np.arange(self.n) - self.n // 2)
        q.flags.writeable = False
        return q

    def position_mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """``(x, y)`` arrays of shape ``(n, n)``, first index along x."""
        return np.meshgrid(self.s, self.s, indexing="ij")

    def spectral_mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """``(qx, qy)`` arrays of shape ``(n, n)``, first index along qx."""
        return np.meshgrid(self.q, self.q, indexing="ij")

    def weight(self, space: str) -> float:
        """Quadrature cell area for inner products in ``space``."""
        if space == POSITION:
            return self.ds**2
        if space == SPECTRAL:
            return self.dq**2
        raise ValueError(f"unknown space tag {space!r}")

    def q_index(self, qx: float, qy: float) -> tuple[int, int]:
        """Lattice indices of the spectral site nearest ``(qx, qy)``."""
        i = int(round(qx / self.dq)) + self.n // 2
        j = int(round(qy / self.dq)) + self.n // 2
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise ValueError(f"q = ({qx}, {qy}) lies outside the spectral lattice")
        return i, j


@dataclass(frozen=True, eq=False)
class ComplexVectorField:
    """Immutable ``d``-component complex samples on a :class:`TransverseGrid`.

    ``data`` has shape ``(n, n, d)``.  ``k`` is the carrier wavenumber tag; it is
    carried along for file headers and consistency checks and may be ``None``
    for untagged fields.
    """

    grid: TransverseGrid
    data: np.ndarray
    space: str
    k: float | None = None

    def __post_init__(self):
        if self.space not in SPACES:
            raise ValueError(f"space must be one of {SPACES}, got {self.space!r}")
        data = np.array(self.data, dtype=np.complex128, copy=True)
        if data.ndim == 2:
            data = data[..., None]
        n = self.grid.n
        if data.ndim != 3 or data.shape[:2] != (n, n):
            raise GridMismatchError(
                f"data shape {data.shape} does not match a {n}x{n} grid")
        if not np.all(np.isfinite(data)):
            raise ValueError("field samples must be finite")
        data.flags.writeable = False
        object.__setattr__(self, "data", data)
        if self.k is not None:
            object.__setattr__(self, "k", float(self.k))

    @property
    def d(self) -> int:
        return self.data.shape[2]

    def replace(self, data=None, space=None, k="keep") -> "ComplexVectorField":
        return ComplexVectorField(
            self.grid,
            self.data if data is None else data,
            self.space if space is None else space,
            self.k if k == "keep" else k,
        )

    def norm(self) -> float:
        return float(np.sqrt(inner_product(self, self).real))

    def __add__(self, other):
        _check_compatible(self, other)
        return self.replace(self.data + other.data)

    def __sub__(self, other):
        _check_compatible(self, other)
        return self.replace(self.data - other.data)

    def __mul__(self, scalar):
        return self.replace(self.data * scalar)

    __rmul__ = __mul__


def _check_compatible(a: ComplexVectorField, b: ComplexVectorField):
    if a.grid != b.grid:
        raise GridMismatchError(f"grids differ: {a.grid} vs {b.grid}")
    if a.space != b.space:
        raise GridMismatchError(f"space tags differ: {a.space} vs {b.space}")
    if a.d != b.d:
        raise GridMismatchError(f"component counts differ: {a.d} vs {b.d}")


def _phases(grid: TransverseGrid, sign: int) -> tuple[np.ndarray, np.ndarray]:
    # q_m s_j = q0 s0 + q0 j ds + m dq s0 + 2 pi m j / n
    idx = np.arange(grid.n)
    q0, s0 = grid.q[0], grid.s[0]
    pre = np.exp(sign * 1j * q0 * grid.ds * idx)
    post = np.exp(sign * 1j * (q0 * s0 + grid.dq * s0 * idx))
    return pre, post


def forward_transform(f: ComplexVectorField) -> ComplexVectorField:
    """Spectral amplitude ``F(q) = sum ds^2/(2 pi) Xi(s) exp(-i q.s)``."""
    if f.space != POSITION:
        raise GridMismatchError("forward_transform expects a position-space field")
    g = f.grid
    pre, post = _phases(g, -1)
    a = f.data * pre[:, None, None] * pre[None, :, None]
    a = np.fft.fft2(a, axes=(0, 1))
    a *= post[:, None, None] * post[None, :, None] * (g.ds**2 / (2 * np.pi))
    return f.replace(a, SPECTRAL)


def inverse_transform(F: ComplexVectorField) -> ComplexVectorField:
    """Envelope ``Xi(s) = sum dq^2/(2 pi) F(q) exp(+i q.s)``."""
    if F.space != SPECTRAL:
        raise GridMismatchError("inverse_transform expects a spectral field")
    g = F.grid
    pre, post = _phases(g, +1)
    a = F.data * post[:, None, None] * post[None, :, None]
    a = np.fft.ifft2(a, axes=(0, 1))
    a *= pre[:, None, None] * pre[None, :, None] * (g.dq**2 * g.n**2 / (2 * np.pi))
    return F.replace(a, POSITION)


def inner_product(a: ComplexVectorField, b: ComplexVectorField) -> complex:
    """Quadrature of ``conj(a) . b`` with the cell area of the fields' space."""
    _check_compatible(a, b)
    w = a.grid.weight(a.space)
    return complex(w * np.vdot(a.data, b.data))


def field_from_function(grid: TransverseGrid, func, space: str = SPECTRAL,
                        k: float | None = None) -> ComplexVectorField:
    """Sample ``func(x, y) -> (..., d)`` array on the lattice of ``space``."""
    x, y = grid.spectral_mesh() if space == SPECTRAL else grid.position_mesh()
    return ComplexVectorField(grid, func(x, y), space, k)


def tail_mass(F: ComplexVectorField, radius: float) -> float:
    """Fraction of ``<F, F>`` carried by spectral sites with ``|q| >= radius``."""
    if F.space != SPECTRAL:
        raise GridMismatchError("tail_mass expects a spectral field")
    qx, qy = F.grid.spectral_mesh()
    p = np.sum(np.abs(F.data) ** 2, axis=2)
    total = p.sum()
    if total == 0:
        return 0.0
    return float(p[np.hypot(qx, qy) >= radius].sum() / total)
