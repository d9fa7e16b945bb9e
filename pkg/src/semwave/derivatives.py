"""Discrete derivatives on a :class:`SpatialGrid`.

Periodic grids get Fourier spectral derivatives; reflecting grids get
second-order central differences with hard walls at the grid ends
(cell-centred, ghost value -psi mirrored across each wall).
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .state import SpatialGrid

SPECTRAL = "spectral"
FINITE_DIFFERENCE = "fd"


def wavenumbers(grid: SpatialGrid) -> np.ndarray:
    return 2.0 * np.pi * np.fft.fftfreq(grid.n_points, d=grid.dx)


def spectral_derivative(f: np.ndarray, grid: SpatialGrid, order: int = 1) -> np.ndarray:
    k = wavenumbers(grid)
    if order % 2 == 1 and grid.n_points % 2 == 0:
        # Nyquist mode has no odd derivative on a real grid
        k = k.copy()
        k[grid.n_points // 2] = 0.0
    out = np.fft.ifft((1j * k) ** order * np.fft.fft(f))
    return out.real if np.isrealobj(f) else out


_LAPLACIAN_STENCILS = {
    2: {-1: 1.0, 0: -2.0, 1: 1.0},
    4: {-2: -1 / 12, -1: 16 / 12, 0: -30 / 12, 1: 16 / 12, 2: -1 / 12},
}


def fd_laplacian(grid: SpatialGrid, order: int = 2) -> sp.csr_matrix:
    """Central-difference Laplacian D2 of the given accuracy order (2 or 4).

    Reflecting grids fold ghost points back with a sign flip
    (psi[-1-j] = -psi[j]), which places a node exactly on each wall.
    """
    try:
        stencil = _LAPLACIAN_STENCILS[order]
    except KeyError:
        raise ValueError(f"order must be 2 or 4, got {order}") from None
    n = grid.n_points
    rows, cols, vals = [], [], []
    i = np.arange(n)
    for off, c in stencil.items():
        j = i + off
        sign = np.ones(n)
        if grid.periodic:
            j = j % n
        else:
            lo, hi = j < 0, j >= n
            j = np.where(lo, -j - 1, np.where(hi, 2 * n - 1 - j, j))
            sign[lo | hi] = -1.0
        rows.append(i)
        cols.append(j)
        vals.append(c * sign)
    lap = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )
    return (lap / grid.dx**2).tocsr()


def fd_gradient(f: np.ndarray, grid: SpatialGrid) -> np.ndarray:
    if grid.periodic:
        return (np.roll(f, -1) - np.roll(f, 1)) / (2.0 * grid.dx)
    return np.gradient(f, grid.dx, edge_order=2)


def gradient(f: np.ndarray, grid: SpatialGrid, scheme: str | None = None) -> np.ndarray:
    scheme = scheme or default_scheme(grid)
    if scheme == SPECTRAL:
        return spectral_derivative(f, grid, 1)
    return fd_gradient(f, grid)


def laplacian(f: np.ndarray, grid: SpatialGrid, scheme: str | None = None) -> np.ndarray:
    scheme = scheme or default_scheme(grid)
    if scheme == SPECTRAL:
        return spectral_derivative(f, grid, 2)
    return fd_laplacian(grid) @ f


def default_scheme(grid: SpatialGrid) -> str:
    return SPECTRAL if grid.periodic else FINITE_DIFFERENCE


def spectral_laplacian_matrix(grid: SpatialGrid) -> np.ndarray:
    """Dense real matrix of the Fourier second derivative (periodic only)."""
    n = grid.n_points
    k2 = wavenumbers(grid) ** 2
    # circulant: first column is ifft(-k^2)
    col = np.fft.ifft(-k2).real
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return col[idx]
