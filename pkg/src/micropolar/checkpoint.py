"""Bit-exact binary checkpoints.

Layout (all little-endian):

    bytes 0..7    magic "MPOLAR01"
    u32           n (points per axis)
    f64           L, t, mu, gamma, chi
    6 blocks      u then w, 3 components each, complex128 coefficients in
                  C order over the (n, n, n) lattice in standard FFT index
                  ordering (axis index m maps to wavenumber 2*pi/L * m for
                  m <= n/2 and 2*pi/L * (m - n) above)

complex128 is an interleaved (re, im) pair of f64, so the payload matches
the documented wire format byte for byte.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .fields import PhysicalParams, SimState, SpectralVectorField
from .grid import make_grid

MAGIC = b"MPOLAR01"
_HEADER = struct.Struct("<8sIddddd")


class CheckpointError(RuntimeError):
    """Unreadable, truncated, or inconsistent checkpoint file."""


def write_checkpoint(state: SimState, params: PhysicalParams, path: str | Path) -> None:
    grid = state.grid
    header = _HEADER.pack(
        MAGIC,
        grid.n_per_axis,
        grid.box_length,
        state.t,
        params.mu,
        params.gamma,
        params.chi,
    )
    payload = (
        state.u.data.astype("<c16", copy=False).tobytes()
        + state.w.data.astype("<c16", copy=False).tobytes()
    )
    Path(path).write_bytes(header + payload)


def read_checkpoint(path: str | Path) -> tuple[SimState, PhysicalParams]:
    blob = Path(path).read_bytes()
    if len(blob) < _HEADER.size:
        raise CheckpointError(f"{path}: truncated header")
    magic, n, length, t, mu, gamma, chi = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise CheckpointError(
            f"{path}: bad magic {magic!r} (expected {MAGIC!r})"
        )
    if n < 4 or n % 2 != 0:
        raise CheckpointError(f"{path}: invalid grid size {n}")
    expected = _HEADER.size + 2 * 3 * n**3 * 16
    if len(blob) != expected:
        raise CheckpointError(
            f"{path}: truncated payload ({len(blob)} bytes, expected {expected})"
        )
    grid = make_grid(int(n), float(length))
    flat = np.frombuffer(blob, dtype="<c16", offset=_HEADER.size)
    data = flat.reshape(2, 3, n, n, n)
    if not np.isfinite(data.view(np.float64)).all():
        raise CheckpointError(f"{path}: non-finite payload")
    try:
        params = PhysicalParams(mu=mu, gamma=gamma, chi=chi)
        state = SimState(
            t,
            SpectralVectorField(grid, data[0].copy()),
            SpectralVectorField(grid, data[1].copy()),
        )
    except ValueError as exc:
        raise CheckpointError(f"{path}: {exc}") from exc
    return state, params
