"""Right-hand sides, time stepping, pressure recovery, initial conditions.

The stepper is an integrating-factor RK4: every linear term is integrated
exactly per mode and the advection / curl-coupling terms are explicit.  The
micro-rotation linear symbol gamma*|k|^2 + k (x) k + 2*chi is diagonalized by
splitting each mode into its curl-free part (along k) and its solenoidal
remainder.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import (
    PhysicalParams,
    ScalarField,
    SimState,
    SpectralVectorField,
    forward_transform,
    inverse_transform,
)
from .grid import Grid
from .norms import spectral_l2_sq
from .operators import curl_hat, leray_hat


class CflError(RuntimeError):
    """Advective CFL cap exceeded."""


class SimulationDiverged(RuntimeError):
    """Non-finite field values detected; carries the last good time."""

    def __init__(self, message: str, t: float, step: int):
        super().__init__(message)
        self.t = t
        self.step = step


@dataclass(frozen=True)
class StepperConfig:
    """Time-stepping controls.

    dt          step size
    t_end       stop time (the run takes ceil((t_end - t0)/dt) steps)
    cfl_safety  cap on max|u| * dt / dx, in (0, 1]
    dealias     apply the 2/3 rule to the quadratic products
    freeze_u    hold u fixed and evolve only w (linear-decay experiments)
    """

    dt: float
    t_end: float
    cfl_safety: float = 0.5
    dealias: bool = True
    freeze_u: bool = False

    def __post_init__(self) -> None:
        if not self.dt > 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.t_end > 0.0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if not 0.0 < self.cfl_safety <= 1.0:
            raise ValueError(
                f"cfl_safety must lie in (0, 1], got {self.cfl_safety}"
            )


@dataclass(frozen=True)
class InitialCondition:
    """Initial (u, w) specification.

    kind             one of taylor_green_like, random_solenoidal, single_mode
    peak_wavenumber  spectrum peak (physical units, 1/length)
    amplitude        L2 norm of each generated field (sine peak amplitude for
                     single_mode)
    seed             RNG seed for random_solenoidal
    """

    kind: str
    peak_wavenumber: float
    amplitude: float
    seed: int = 0

    KINDS = ("taylor_green_like", "random_solenoidal", "single_mode")

    def __post_init__(self) -> None:
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown initial condition kind {self.kind!r}")


# ---------------------------------------------------------------------------
# right-hand sides


def _explicit_hats(
    u_data: np.ndarray,
    w_data: np.ndarray,
    grid: Grid,
    chi: float,
    apply_dealias: bool = True,
    u_phys_out: list | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Explicitly-integrated terms: advection plus the chi curl coupling.

    Returns (N_u, N_w) with N_u already Leray-projected.  u_phys_out, if
    given, receives the physical velocity samples (for the CFL check).
    """
    u_phys = inverse_transform(u_data)
    if u_phys_out is not None:
        u_phys_out.append(u_phys)

    adv_u = np.zeros((3,) + grid.shape)
    adv_w = np.zeros((3,) + grid.shape)
    for j, dk in enumerate((grid.dkx, grid.dky, grid.dkz)):
        du = inverse_transform(1j * dk * u_data)
        dw = inverse_transform(1j * dk * w_data)
        uj = u_phys[j]
        adv_u += uj * du
        adv_w += uj * dw

    n_u = -forward_transform(adv_u)
    n_w = -forward_transform(adv_w)
    if apply_dealias:
        n_u *= grid.dealias_mask
        n_w *= grid.dealias_mask
    if chi != 0.0:
        n_u += chi * curl_hat(w_data, grid)
        n_w += chi * curl_hat(u_data, grid)
    n_u = leray_hat(n_u, grid)
    n_w[:, 0, 0, 0] = 0.0
    return n_u, n_w


def rhs_u(state: SimState, p: PhysicalParams) -> SpectralVectorField:
    """P_h[-(u.grad)u + chi curl w] + (mu+chi) Lap u."""
    g = state.grid
    n_u, _ = _explicit_hats(state.u.data, state.w.data, g, p.chi)
    n_u += -(p.mu + p.chi) * g.deriv_k_sq * state.u.data
    return SpectralVectorField(g, n_u)


def rhs_w(state: SimState, p: PhysicalParams) -> SpectralVectorField:
    """-(u.grad)w + gamma Lap w + grad(div w) + chi curl u - 2 chi w."""
    g = state.grid
    _, n_w = _explicit_hats(state.u.data, state.w.data, g, p.chi)
    div_hat = 1j * (
        g.dkx * state.w.data[0] + g.dky * state.w.data[1] + g.dkz * state.w.data[2]
    )
    n_w += -p.gamma * g.deriv_k_sq * state.w.data
    n_w[0] += 1j * g.dkx * div_hat
    n_w[1] += 1j * g.dky * div_hat
    n_w[2] += 1j * g.dkz * div_hat
    n_w += -2.0 * p.chi * state.w.data
    return SpectralVectorField(g, n_w)


def recover_pressure(state: SimState, p: PhysicalParams | None = None) -> ScalarField:
    """Solve -Lap P = div((u.grad)u) mode-wise; P is mean-zero.

    The curl coupling is divergence-free and contributes nothing, so the
    result does not depend on the physical parameters.
    """
    from .operators import advect_hat

    g = state.grid
    n_hat = advect_hat(state.u.data, state.u.data, g)
    div_n = 1j * (g.dkx * n_hat[0] + g.dky * n_hat[1] + g.dkz * n_hat[2])
    p_hat = div_n * g.inv_deriv_k_sq
    return ScalarField(g, inverse_transform(p_hat))


def energy_power(state: SimState, p: PhysicalParams) -> float:
    """Instantaneous pair-energy production 2<rhs_u, u> + 2<rhs_w, w>."""
    g = state.grid
    u0, w0 = state.u.data, state.w.data
    n_u, n_w = _explicit_hats(u0, w0, g, p.chi)
    dsq = g.deriv_k_sq
    div_w = 1j * (g.dkx * w0[0] + g.dky * w0[1] + g.dkz * w0[2])
    lin = (
        -(p.mu + p.chi) * np.sum(dsq * np.abs(u0) ** 2).real
        - p.gamma * np.sum(dsq * np.abs(w0) ** 2).real
        - np.sum(np.abs(div_w) ** 2)
        - 2.0 * p.chi * np.sum(np.abs(w0) ** 2)
    )
    cross = np.sum(np.conj(u0) * n_u).real + np.sum(np.conj(w0) * n_w).real
    return 2.0 * g.volume * float(lin + cross)


# ---------------------------------------------------------------------------
# integrating-factor RK4


class Stepper:
    """Advances a SimState by a fixed dt with precomputed propagators."""

    def __init__(self, grid: Grid, params: PhysicalParams, config: StepperConfig):
        self.grid = grid
        self.params = params
        self.config = config
        self.last_power = 0.0  # 2<rhs_u, u> + 2<rhs_w, w> at the step start
        self.last_vmax = 0.0
        dt = config.dt
        dsq = grid.deriv_k_sq
        mu_eff = params.mu + params.chi
        self._eu_half = np.exp(-mu_eff * dsq * (dt / 2.0))
        self._eu_full = self._eu_half**2
        gamma, chi = params.gamma, params.chi
        self._ew_half = np.exp(-(gamma * dsq + 2.0 * chi) * (dt / 2.0))
        self._ew_full = self._ew_half**2
        # extra decay of the curl-free (along-k) part: factor exp(-dsq * tau)
        self._bw_half = np.expm1(-dsq * (dt / 2.0))
        self._bw_full = np.expm1(-dsq * dt)

    def _apply_w(self, data: np.ndarray, half: bool) -> np.ndarray:
        g = self.grid
        k_dot = g.dkx * data[0] + g.dky * data[1] + g.dkz * data[2]
        factor = k_dot * g.inv_deriv_k_sq
        b = self._bw_half if half else self._bw_full
        e = self._ew_half if half else self._ew_full
        out = np.empty_like(data)
        out[0] = e * (data[0] + b * g.dkx * factor)
        out[1] = e * (data[1] + b * g.dky * factor)
        out[2] = e * (data[2] + b * g.dkz * factor)
        return out

    def _check_cfl(self, u_phys: np.ndarray) -> None:
        vmax = float(np.abs(u_phys).max())
        self.last_vmax = vmax
        if vmax == 0.0:
            return  # no advective constraint; linear terms are exact
        number = vmax * self.config.dt / self.grid.spacing
        if number > self.config.cfl_safety:
            raise CflError(
                f"CFL number {number:.3f} exceeds cfl_safety "
                f"{self.config.cfl_safety} (max|u|={vmax:.3e})"
            )

    def step(self, state: SimState, t_next: float | None = None) -> SimState:
        g, p, cfg = self.grid, self.params, self.config
        dt = cfg.dt
        chi, mu_eff, gamma = p.chi, p.mu + p.chi, p.gamma
        u0, w0 = state.u.data, state.w.data
        dsq = g.deriv_k_sq

        grab: list = []
        n1u, n1w = _explicit_hats(u0, w0, g, chi, cfg.dealias, u_phys_out=grab)
        self._check_cfl(grab[0])

        # instantaneous energy production 2<rhs, y> at the step start
        lin_u = -mu_eff * np.sum(dsq * np.abs(u0) ** 2).real
        div_w = 1j * (g.dkx * w0[0] + g.dky * w0[1] + g.dkz * w0[2])
        lin_w = (
            -gamma * np.sum(dsq * np.abs(w0) ** 2).real
            - np.sum(np.abs(div_w) ** 2)
            - 2.0 * chi * np.sum(np.abs(w0) ** 2)
        )
        cross = (
            np.sum(np.conj(u0) * n1u).real + np.sum(np.conj(w0) * n1w).real
        )
        self.last_power = 2.0 * g.volume * float(lin_u + lin_w + cross)

        half = dt / 2.0
        if cfg.freeze_u:
            u_next = u0
            apply_w = self._apply_w
            w2 = apply_w(w0 + half * n1w, True)
            _, n2w = _explicit_hats(u0, w2, g, chi, cfg.dealias)
            w3 = apply_w(w0, True) + half * n2w
            _, n3w = _explicit_hats(u0, w3, g, chi, cfg.dealias)
            w4 = apply_w(w0, False) + dt * apply_w(n3w, True)
            _, n4w = _explicit_hats(u0, w4, g, chi, cfg.dealias)
            w_next = apply_w(w0, False) + (dt / 6.0) * (
                apply_w(n1w, False) + 2.0 * apply_w(n2w + n3w, True) + n4w
            )
        else:
            u2 = self._eu_half * (u0 + half * n1u)
            w2 = self._apply_w(w0 + half * n1w, True)
            u2 = leray_hat(u2, g)
            n2u, n2w = _explicit_hats(u2, w2, g, chi, cfg.dealias)

            u3 = self._eu_half * u0 + half * n2u
            w3 = self._apply_w(w0, True) + half * n2w
            u3 = leray_hat(u3, g)
            n3u, n3w = _explicit_hats(u3, w3, g, chi, cfg.dealias)

            u4 = self._eu_full * u0 + dt * self._eu_half * n3u
            w4 = self._apply_w(w0, False) + dt * self._apply_w(n3w, True)
            u4 = leray_hat(u4, g)
            n4u, n4w = _explicit_hats(u4, w4, g, chi, cfg.dealias)

            u_next = self._eu_full * u0 + (dt / 6.0) * (
                self._eu_full * n1u
                + 2.0 * self._eu_half * (n2u + n3u)
                + n4u
            )
            u_next = leray_hat(u_next, g)
            w_next = self._apply_w(w0, False) + (dt / 6.0) * (
                self._apply_w(n1w, False)
                + 2.0 * self._apply_w(n2w + n3w, True)
                + n4w
            )

        u_next[:, 0, 0, 0] = 0.0
        w_next[:, 0, 0, 0] = 0.0
        energy = spectral_l2_sq(u_next, g) + spectral_l2_sq(w_next, g)
        if not np.isfinite(energy):
            raise SimulationDiverged(
                f"non-finite fields after step at t={state.t:.6g}",
                t=state.t,
                step=-1,
            )
        return SimState(
            state.t + dt if t_next is None else t_next,
            SpectralVectorField(g, u_next),
            SpectralVectorField(g, w_next),
        )


def step(state: SimState, p: PhysicalParams, cfg: StepperConfig) -> SimState:
    """One integrating-factor RK4 step (convenience wrapper)."""
    return Stepper(state.grid, p, cfg).step(state)


def evolve(state: SimState, p: PhysicalParams, cfg: StepperConfig):
    """Yield (step_index, state, stepper) for every step up to t_end.

    Time stamps are pinned to t0 + j*dt to avoid accumulation drift; the run
    covers ceil((t_end - t0)/dt) steps.
    """
    stepper = Stepper(state.grid, p, cfg)
    n_steps = int(np.ceil((cfg.t_end - state.t) / cfg.dt - 1e-9))
    t0 = state.t
    current = state
    for j in range(1, n_steps + 1):
        current = stepper.step(current, t_next=t0 + j * cfg.dt)
        yield j, current, stepper


# ---------------------------------------------------------------------------
# initial conditions


def _single_sine(grid: Grid, component: int, axis: int, m: int, amp: float):
    data = np.zeros((3,) + grid.shape, dtype=np.complex128)
    n = grid.n_per_axis
    pos = [0, 0, 0]
    neg = [0, 0, 0]
    pos[axis] = m
    neg[axis] = n - m
    data[(component,) + tuple(pos)] = -0.5j * amp
    data[(component,) + tuple(neg)] = 0.5j * amp
    return data


def make_initial(ic: InitialCondition, grid: Grid) -> SimState:
    """Deterministic initial state; u is solenoidal, both fields mean-zero."""
    k_min = 2.0 * np.pi / grid.box_length
    k_cut = (grid.n_per_axis / 3.0) * k_min
    if not 0.0 < ic.peak_wavenumber <= k_cut:
        raise ValueError(
            f"peak wavenumber {ic.peak_wavenumber:.4g} outside the dealiased "
            f"band (0, {k_cut:.4g}]"
        )

    if ic.amplitude == 0.0:
        zeros = np.zeros((3,) + grid.shape, dtype=np.complex128)
        return SimState(
            0.0,
            SpectralVectorField(grid, zeros),
            SpectralVectorField(grid, zeros.copy()),
        )

    if ic.kind == "single_mode":
        m = max(1, int(round(ic.peak_wavenumber / k_min)))
        u_hat = _single_sine(grid, component=1, axis=0, m=m, amp=ic.amplitude)
        w_hat = _single_sine(grid, component=0, axis=0, m=m, amp=ic.amplitude)
        return SimState(
            0.0, SpectralVectorField(grid, u_hat), SpectralVectorField(grid, w_hat)
        )

    if ic.kind == "taylor_green_like":
        m = max(1, int(round(ic.peak_wavenumber / k_min)))
        kappa = m * k_min
        n = grid.n_per_axis
        x = (np.arange(n) * grid.spacing).reshape(n, 1, 1)
        y = (np.arange(n) * grid.spacing).reshape(1, n, 1)
        z = (np.arange(n) * grid.spacing).reshape(1, 1, n)
        a = ic.amplitude
        u_phys = np.zeros((3,) + grid.shape)
        u_phys[0] = np.sin(kappa * x) * np.cos(kappa * y) * np.cos(kappa * z)
        u_phys[1] = -np.cos(kappa * x) * np.sin(kappa * y) * np.cos(kappa * z)
        w_phys = np.zeros((3,) + grid.shape)
        w_phys[0] = np.cos(kappa * x) * np.sin(kappa * y) * np.sin(kappa * z)
        w_phys[1] = np.sin(kappa * x) * np.cos(kappa * y) * np.sin(kappa * z)
        u_hat = leray_hat(
            forward_transform(u_phys) * grid.dealias_mask, grid
        )
        w_hat = forward_transform(w_phys) * grid.dealias_mask
        w_hat[:, 0, 0, 0] = 0.0
        u_hat *= a / np.sqrt(spectral_l2_sq(u_hat, grid))
        w_hat *= a / np.sqrt(spectral_l2_sq(w_hat, grid))
        return SimState(
            0.0, SpectralVectorField(grid, u_hat), SpectralVectorField(grid, w_hat)
        )

    # random_solenoidal; the envelope width peak/4 keeps the box-scale modes
    # strongly suppressed (they decay too slowly to be useful at desk scale)
    rng = np.random.default_rng(ic.seed)
    k_abs = np.sqrt(grid.k_sq)
    sigma = ic.peak_wavenumber / 4.0
    envelope = np.exp(-((k_abs - ic.peak_wavenumber) ** 2) / (2.0 * sigma**2))
    from .operators import random_band_limited

    u = random_band_limited(grid, rng, solenoidal=True, envelope=envelope)
    w = random_band_limited(grid, rng, solenoidal=False, envelope=envelope)
    u_hat = u.data * (ic.amplitude / np.sqrt(spectral_l2_sq(u.data, grid)))
    w_hat = w.data * (ic.amplitude / np.sqrt(spectral_l2_sq(w.data, grid)))
    return SimState(
        0.0, SpectralVectorField(grid, u_hat), SpectralVectorField(grid, w_hat)
    )
