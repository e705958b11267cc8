"""Component-summed Lebesgue norms of vector fields.

L2-type norms are evaluated spectrally (Parseval under the 1/n^3 forward
normalization gives ||f||_2^2 = L^3 sum_k |f_hat|^2); L1 and Linf use
cell-volume-weighted physical samples.  Gradient norms use the derivative
wavenumbers (Nyquist zeroed) so they agree exactly with the derivative
operators.
"""

from __future__ import annotations

import numpy as np

from .fields import RealVectorField, SpectralVectorField, inverse_transform
from .grid import Grid


def l2(f: SpectralVectorField) -> float:
    """||f||_2 with the square summed over the three components."""
    return float(np.sqrt(f.grid.volume * np.sum(np.abs(f.data) ** 2)))


def l2_grad(f: SpectralVectorField) -> float:
    """||Df||_2: all nine first derivatives, component-summed."""
    g = f.grid
    return float(np.sqrt(g.volume * np.sum(g.deriv_k_sq * np.abs(f.data) ** 2)))


def l2_grad2(f: SpectralVectorField) -> float:
    """||D^2 f||_2: all 27 second derivatives (weight |k|^4)."""
    g = f.grid
    return float(np.sqrt(g.volume * np.sum(g.deriv_k_sq**2 * np.abs(f.data) ** 2)))


def l2_div(f: SpectralVectorField) -> float:
    """||div f||_2."""
    g = f.grid
    div_hat = 1j * (g.dkx * f.data[0] + g.dky * f.data[1] + g.dkz * f.data[2])
    return float(np.sqrt(g.volume * np.sum(np.abs(div_hat) ** 2)))


def l2_grad_div(f: SpectralVectorField) -> float:
    """||D(div f)||_2, the gradient of the divergence scalar."""
    g = f.grid
    div_hat = 1j * (g.dkx * f.data[0] + g.dky * f.data[1] + g.dkz * f.data[2])
    return float(np.sqrt(g.volume * np.sum(g.deriv_k_sq * np.abs(div_hat) ** 2)))


def linf(f: RealVectorField) -> float:
    """max over components of the pointwise sup norm."""
    return float(np.abs(f.data).max())


def linf_spectral(f: SpectralVectorField) -> float:
    """Sup norm evaluated by transforming to physical space."""
    return float(np.abs(inverse_transform(f.data)).max())


def lr_phys(f: RealVectorField, r: float) -> float:
    """||f||_r by cell-volume-weighted quadrature, 1 <= r < inf."""
    if not 1.0 <= r < np.inf:
        raise ValueError(f"r must be in [1, inf), got {r}")
    g = f.grid
    return float((g.cell_volume * np.sum(np.abs(f.data) ** r)) ** (1.0 / r))


def inner(f: SpectralVectorField, h: SpectralVectorField) -> float:
    """Grid L2 inner product <f, h> = L^3 Re sum_k conj(f_hat) h_hat."""
    return float(f.grid.volume * np.sum(np.conj(f.data) * h.data).real)


def spectral_l2_sq(data: np.ndarray, grid: Grid) -> float:
    """L^3 sum |data|^2 for raw coefficient arrays (internal fast path)."""
    return float(grid.volume * np.sum(np.abs(data) ** 2))
