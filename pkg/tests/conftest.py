"""Shared fixtures and field builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from micropolar.fields import RealVectorField, SpectralVectorField
from micropolar.grid import Grid, make_grid
from micropolar.operators import random_band_limited


@pytest.fixture(scope="session")
def grid8() -> Grid:
    return make_grid(8, 2.0 * np.pi)


@pytest.fixture(scope="session")
def grid16() -> Grid:
    return make_grid(16, 2.0 * np.pi)


def random_real_field(grid: Grid, seed: int) -> RealVectorField:
    rng = np.random.default_rng(seed)
    return RealVectorField(grid, rng.standard_normal((3,) + grid.shape))


def random_spectral_field(
    grid: Grid, seed: int, solenoidal: bool = False
) -> SpectralVectorField:
    """Dealiased, mean-zero random field (solenoidal on request)."""
    rng = np.random.default_rng(seed)
    return random_band_limited(grid, rng, solenoidal=solenoidal)


def single_mode_field(
    grid: Grid, component: int, axis: int, index: int = 1, amplitude: float = 1.0
) -> SpectralVectorField:
    """amplitude * sin(index * (2 pi / L) * x_axis) in one component."""
    data = np.zeros((3,) + grid.shape, dtype=np.complex128)
    pos = [0, 0, 0]
    neg = [0, 0, 0]
    pos[axis] = index
    neg[axis] = grid.n_per_axis - index
    data[(component,) + tuple(pos)] = amplitude / 2.0 * -1j
    data[(component,) + tuple(neg)] = amplitude / 2.0 * 1j
    return SpectralVectorField(grid, data)
