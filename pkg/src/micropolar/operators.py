"""Differential and projection operators in Fourier space.

All operators act mode-wise.  First derivatives multiply by i*k with the
Nyquist entry of the differentiated axis zeroed (its derivative has no real
representation); composite operators (Laplacian, grad(div)) are built from
the same derivative symbols so that operator identities hold exactly.
"""

from __future__ import annotations

import numpy as np

from .fields import (
    RealVectorField,
    ScalarField,
    SpectralVectorField,
    forward_transform,
    inverse_transform,
    to_spectral,
)
from .grid import Grid
from .norms import l2, l2_grad, l2_grad2, linf

# Rank-3 alternating symbol eps_{ijk}.
LEVI_CIVITA = np.zeros((3, 3, 3))
LEVI_CIVITA[0, 1, 2] = LEVI_CIVITA[1, 2, 0] = LEVI_CIVITA[2, 0, 1] = 1.0
LEVI_CIVITA[0, 2, 1] = LEVI_CIVITA[2, 1, 0] = LEVI_CIVITA[1, 0, 2] = -1.0
LEVI_CIVITA.setflags(write=False)

# Sup-norm interpolation constant ||u||_inf <= C ||u||_2^{1/4} ||D^2 u||_2^{3/4},
# calibrated as the max ratio over the seeded ensemble of calibration_ensemble()
# (1000 band-limited fields at n=32, L=2*pi); regression-tested by the lemma1
# verification suite.  Recalibrate with calibrate_c_infty() if the generator
# changes.
CALIBRATED_C_INFTY = 0.11261643628557787


def _dk(grid: Grid, axis: int) -> np.ndarray:
    return (grid.dkx, grid.dky, grid.dkz)[axis]


def derivative(f: SpectralVectorField, axis: int) -> SpectralVectorField:
    """d/dx_axis applied to every component (axis 0 is x)."""
    if axis not in (0, 1, 2):
        raise ValueError(f"axis must be 0, 1 or 2, got {axis}")
    return SpectralVectorField(f.grid, 1j * _dk(f.grid, axis) * f.data)


def divergence_hat(data: np.ndarray, grid: Grid) -> np.ndarray:
    """Spectral divergence i k . f_hat of a (3,n,n,n) coefficient array."""
    return 1j * (grid.dkx * data[0] + grid.dky * data[1] + grid.dkz * data[2])


def divergence(f: SpectralVectorField) -> ScalarField:
    """div f as a physical scalar field."""
    return ScalarField(f.grid, inverse_transform(divergence_hat(f.data, f.grid)))


def gradient(p: ScalarField) -> SpectralVectorField:
    """Spectral gradient of a physical scalar field."""
    g = p.grid
    p_hat = forward_transform(p.values)
    out = np.empty((3,) + g.shape, dtype=np.complex128)
    out[0] = 1j * g.dkx * p_hat
    out[1] = 1j * g.dky * p_hat
    out[2] = 1j * g.dkz * p_hat
    return SpectralVectorField(g, out)


def curl_hat(data: np.ndarray, grid: Grid) -> np.ndarray:
    """Spectral curl i k x f_hat of a (3,n,n,n) coefficient array."""
    kx, ky, kz = grid.dkx, grid.dky, grid.dkz
    out = np.empty_like(data)
    out[0] = 1j * (ky * data[2] - kz * data[1])
    out[1] = 1j * (kz * data[0] - kx * data[2])
    out[2] = 1j * (kx * data[1] - ky * data[0])
    return out


def curl(f: SpectralVectorField) -> SpectralVectorField:
    """(curl f)_i = sum_{jk} eps_{ijk} D_j f_k."""
    return SpectralVectorField(f.grid, curl_hat(f.data, f.grid))


def laplacian(f: SpectralVectorField) -> SpectralVectorField:
    """Componentwise Laplacian, symbol -|k|^2 (derivative wavenumbers)."""
    return SpectralVectorField(f.grid, -f.grid.deriv_k_sq * f.data)


def grad_div_hat(data: np.ndarray, grid: Grid) -> np.ndarray:
    div = divergence_hat(data, grid)
    out = np.empty_like(data)
    out[0] = 1j * grid.dkx * div
    out[1] = 1j * grid.dky * div
    out[2] = 1j * grid.dkz * div
    return out


def grad_div(f: SpectralVectorField) -> SpectralVectorField:
    """grad(div f), symbol -k (k . f_hat)."""
    return SpectralVectorField(f.grid, grad_div_hat(f.data, f.grid))


def leray_hat(data: np.ndarray, grid: Grid) -> np.ndarray:
    """Project raw coefficients onto divergence-free fields; k=0 mode to 0.

    Uses the derivative wavenumbers, so the kernel is exactly the span of the
    implemented gradient operator.
    """
    k_dot = grid.dkx * data[0] + grid.dky * data[1] + grid.dkz * data[2]
    factor = k_dot * grid.inv_deriv_k_sq
    out = np.empty_like(data)
    out[0] = data[0] - grid.dkx * factor
    out[1] = data[1] - grid.dky * factor
    out[2] = data[2] - grid.dkz * factor
    out[:, 0, 0, 0] = 0.0
    return out


def leray_project(f: SpectralVectorField) -> SpectralVectorField:
    """Helmholtz-Leray projection f_hat -> f_hat - k (k.f_hat)/|k|^2."""
    return SpectralVectorField(f.grid, leray_hat(f.data, f.grid))


def dealias(f: SpectralVectorField) -> SpectralVectorField:
    """Zero every coefficient with any |k_axis| above the 2/3-rule cutoff."""
    return SpectralVectorField(f.grid, f.data * f.grid.dealias_mask)


def advect_hat(
    v_data: np.ndarray,
    f_data: np.ndarray,
    grid: Grid,
    apply_dealias: bool = True,
    v_phys: np.ndarray | None = None,
) -> np.ndarray:
    """(v . grad) f via pseudo-spectral products, dealiased by default.

    v_phys optionally carries precomputed physical samples of v.
    """
    if v_phys is None:
        v_phys = inverse_transform(v_data)
    out = np.zeros((3,) + grid.shape)
    for j, dk in enumerate((grid.dkx, grid.dky, grid.dkz)):
        df = inverse_transform(1j * dk * f_data)
        out += v_phys[j] * df
    result = forward_transform(out)
    if apply_dealias:
        result *= grid.dealias_mask
    return result


def advect(v: SpectralVectorField, f: SpectralVectorField) -> SpectralVectorField:
    """Dealiased spectral transform of (v . grad) f."""
    return SpectralVectorField(v.grid, advect_hat(v.data, f.data, v.grid))


def epsilon_cross_integral(w: SpectralVectorField, u: SpectralVectorField) -> float:
    """sum_{ijkl} eps_{ijk} int D_l w_i D_l D_j u_k dx, evaluated spectrally.

    Parseval turns each term into L^3 sum_k k_l^2 k_j Re[i conj(w_i) u_k];
    the eps contraction is done against LEVI_CIVITA explicitly.
    """
    g = w.grid
    kvec = g.deriv_wavevector()
    weighted = np.conj(w.data) * g.deriv_k_sq
    contraction = np.einsum(
        "ijk,jabc,iabc,kabc->", LEVI_CIVITA, kvec, weighted, u.data
    )
    return float(-g.volume * contraction.imag)


def _require_nonzero_mean_free(u: RealVectorField, u_hat: np.ndarray) -> None:
    scale = np.abs(u_hat).max()
    if scale == 0.0:
        raise ValueError("ratio undefined for the zero field")
    if np.abs(u_hat[:, 0, 0, 0]).max() > 1e-12 * scale:
        raise ValueError("field must be mean-zero")


def gn_ratio_infty(u: RealVectorField) -> float:
    """||u||_inf / (||u||_2^{1/4} ||D^2 u||_2^{3/4}) for a mean-zero field."""
    spec = to_spectral(u)
    _require_nonzero_mean_free(u, spec.data)
    return linf(u) / (l2(spec) ** 0.25 * l2_grad2(spec) ** 0.75)


def gn_ratio_grad(u: RealVectorField) -> float:
    """||Du||_2 / (||u||_2^{1/2} ||D^2 u||_2^{1/2}); Cauchy-Schwarz gives <= 1."""
    spec = to_spectral(u)
    _require_nonzero_mean_free(u, spec.data)
    return l2_grad(spec) / np.sqrt(l2(spec) * l2_grad2(spec))


def random_band_limited(
    grid: Grid,
    rng: np.random.Generator,
    solenoidal: bool = False,
    envelope: np.ndarray | None = None,
) -> SpectralVectorField:
    """Mean-zero random field inside the dealiased band.

    envelope, if given, multiplies the flat white-noise spectrum (any real
    radial profile keeps the Hermitian symmetry of the noise).
    """
    noise = rng.standard_normal((3,) + grid.shape)
    data = forward_transform(noise) * grid.dealias_mask
    if envelope is not None:
        data *= envelope
    data[:, 0, 0, 0] = 0.0
    if solenoidal:
        data = leray_hat(data, grid)
    return SpectralVectorField(grid, data)


def calibration_ensemble(count: int = 1000, n: int = 32, seed: int = 20240917):
    """Yield the seeded band-limited fields used to calibrate C_infty.

    Each draw carries a Gaussian radial shell exp(-(|k|-c)^2 / (2s^2)) with a
    random center and width, so the ensemble spans broadband noise through
    near-single-shell fields (the near-extremal cases for the sup-norm ratio).
    """
    from .grid import make_grid

    grid = make_grid(n, 2.0 * np.pi)
    rng = np.random.default_rng(seed)
    k_abs = np.sqrt(grid.k_sq)
    k_cut = (n / 3.0) * (2.0 * np.pi / grid.box_length)
    for _ in range(count):
        center = rng.uniform(1.0, 0.8 * k_cut)
        width = center * 10.0 ** rng.uniform(-1.5, 0.3)
        envelope = np.exp(-((k_abs - center) ** 2) / (2.0 * width**2))
        spec = random_band_limited(grid, rng, envelope=envelope)
        yield RealVectorField(grid, inverse_transform(spec.data))


def calibrate_c_infty(count: int = 1000, n: int = 32, seed: int = 20240917) -> float:
    """Max sup-norm interpolation ratio over the calibration ensemble."""
    return max(gn_ratio_infty(f) for f in calibration_ensemble(count, n, seed))
