"""Norm records, energy ledgers, monotonicity detection, and decay fits.

record() folds a time-ordered stream of states into rows carrying every
tracked norm plus the running dissipation integrals of the pair-energy
ledger; derivative_ledger() does the same for the gradient-energy estimate.
Both accumulate with the trapezoid rule between the supplied samples -- the
run driver feeds them every step and upgrades the integrals with the
end-corrected accumulator from quadrature.py.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import PhysicalParams, SimState, inverse_transform
from .norms import (
    l2,
    l2_div,
    l2_grad,
    l2_grad2,
    l2_grad_div,
)
from .operators import CALIBRATED_C_INFTY, epsilon_cross_integral


@dataclass(frozen=True)
class DiagnosticsRecord:
    """One row of tracked norms and ledger terms at time t.

    The pair norms satisfy l2_pair^2 = l2_u^2 + l2_w^2 by construction, and
    the ledger sides read
        lhs = ||(u,w)(t)||^2 + 2 mu int ||Du||^2 + 2 gamma int ||Dw||^2
              + 2 int ||div w||^2 + 2 chi int ||w||^2
        rhs = ||(u,w)(t0)||^2
    with all integrals taken from the first record of the fold.
    """

    t: float
    l2_u: float
    l2_w: float
    l2_pair: float
    l2_du: float
    l2_dw: float
    l2_dpair: float
    l2_d2pair: float
    l2_divw: float
    linf_pair: float
    cross_term: float
    energy_ledger_lhs: float
    energy_ledger_rhs: float
    int_du_sq: float = 0.0
    int_dw_sq: float = 0.0
    int_divw_sq: float = 0.0
    int_w_sq: float = 0.0

    def __post_init__(self) -> None:
        for name in (
            "l2_u", "l2_w", "l2_pair", "l2_du", "l2_dw", "l2_dpair",
            "l2_d2pair", "l2_divw", "linf_pair",
        ):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0.0:
                raise ValueError(f"{name} must be a finite non-negative real")
        if abs(self.l2_pair**2 - self.l2_u**2 - self.l2_w**2) > 1e-12 * max(
            self.l2_pair**2, 1e-300
        ):
            raise ValueError("pair norm does not compose from l2_u, l2_w")


def _instantaneous(state: SimState, p: PhysicalParams) -> dict:
    u, w = state.u, state.w
    l2_u, l2_w = l2(u), l2(w)
    l2_du, l2_dw = l2_grad(u), l2_grad(w)
    d2u, d2w = l2_grad2(u), l2_grad2(w)
    linf_u = float(np.abs(inverse_transform(u.data)).max())
    linf_w = float(np.abs(inverse_transform(w.data)).max())
    return {
        "t": state.t,
        "l2_u": l2_u,
        "l2_w": l2_w,
        "l2_pair": float(np.hypot(l2_u, l2_w)),
        "l2_du": l2_du,
        "l2_dw": l2_dw,
        "l2_dpair": float(np.hypot(l2_du, l2_dw)),
        "l2_d2pair": float(np.hypot(d2u, d2w)),
        "l2_divw": l2_div(w),
        "linf_pair": float(np.hypot(linf_u, linf_w)),
        "cross_term": 4.0 * p.chi * epsilon_cross_integral(w, u),
    }


def record(
    state: SimState,
    p: PhysicalParams,
    running: DiagnosticsRecord | None = None,
) -> DiagnosticsRecord:
    """Fold one state into the diagnostics stream (trapezoid accumulation)."""
    vals = _instantaneous(state, p)
    if running is None:
        ints = dict(int_du_sq=0.0, int_dw_sq=0.0, int_divw_sq=0.0, int_w_sq=0.0)
        rhs = vals["l2_pair"] ** 2
    else:
        dt = state.t - running.t
        if dt <= 0.0:
            raise ValueError(
                f"non-monotone time stamps: {state.t} after {running.t}"
            )
        ints = dict(
            int_du_sq=running.int_du_sq
            + 0.5 * dt * (running.l2_du**2 + vals["l2_du"] ** 2),
            int_dw_sq=running.int_dw_sq
            + 0.5 * dt * (running.l2_dw**2 + vals["l2_dw"] ** 2),
            int_divw_sq=running.int_divw_sq
            + 0.5 * dt * (running.l2_divw**2 + vals["l2_divw"] ** 2),
            int_w_sq=running.int_w_sq
            + 0.5 * dt * (running.l2_w**2 + vals["l2_w"] ** 2),
        )
        rhs = running.energy_ledger_rhs
    lhs = ledger_lhs(vals["l2_pair"], p, **ints)
    return DiagnosticsRecord(
        energy_ledger_lhs=lhs, energy_ledger_rhs=rhs, **vals, **ints
    )


def ledger_lhs(
    l2_pair: float,
    p: PhysicalParams,
    int_du_sq: float,
    int_dw_sq: float,
    int_divw_sq: float,
    int_w_sq: float,
) -> float:
    """Left side of the pair-energy inequality from its ingredients."""
    return (
        l2_pair**2
        + 2.0 * p.mu * int_du_sq
        + 2.0 * p.gamma * int_dw_sq
        + 2.0 * int_divw_sq
        + 2.0 * p.chi * int_w_sq
    )


# ---------------------------------------------------------------------------
# derivative-energy ledger


@dataclass(frozen=True)
class DerivativeLedgerRecord:
    """Gradient-energy estimate ingredients at time t.

    sng_majorant is the interpolation majorant
    4 ||(u,w)||^{1/2} ||(Du,Dw)||^{1/2} ||(D^2u,D^2w)||^2 whose time integral
    bounds the advective production, and cross_term is
    4 chi sum_{ijkl} eps_{ijk} int D_l w_i D_l D_j u_k dx.
    """

    t: float
    l2_dpair: float
    l2_d2u: float
    l2_d2w: float
    l2_ddivw: float
    cross_term: float
    sng_majorant: float
    int_d2u_sq: float = 0.0
    int_d2w_sq: float = 0.0
    int_ddivw_sq: float = 0.0
    int_dw_sq: float = 0.0
    int_cross: float = 0.0
    int_sng: float = 0.0
    l2_dw: float = 0.0


def derivative_ledger(
    state: SimState,
    p: PhysicalParams,
    running: DerivativeLedgerRecord | None = None,
) -> DerivativeLedgerRecord:
    """Fold one state into the gradient-energy stream."""
    u, w = state.u, state.w
    l2_du, l2_dw = l2_grad(u), l2_grad(w)
    d2u, d2w = l2_grad2(u), l2_grad2(w)
    pair = float(np.hypot(l2(u), l2(w)))
    dpair = float(np.hypot(l2_du, l2_dw))
    d2pair_sq = d2u**2 + d2w**2
    vals = dict(
        t=state.t,
        l2_dpair=dpair,
        l2_d2u=d2u,
        l2_d2w=d2w,
        l2_ddivw=l2_grad_div(w),
        cross_term=4.0 * p.chi * epsilon_cross_integral(w, u),
        sng_majorant=4.0 * np.sqrt(pair) * np.sqrt(dpair) * d2pair_sq,
        l2_dw=l2_dw,
    )
    if running is None:
        return DerivativeLedgerRecord(**vals)
    dt = state.t - running.t
    if dt <= 0.0:
        raise ValueError(f"non-monotone time stamps: {state.t} after {running.t}")

    def trap(prev: float, cur: float) -> float:
        return 0.5 * dt * (prev + cur)

    return DerivativeLedgerRecord(
        **vals,
        int_d2u_sq=running.int_d2u_sq + trap(running.l2_d2u**2, d2u**2),
        int_d2w_sq=running.int_d2w_sq + trap(running.l2_d2w**2, d2w**2),
        int_ddivw_sq=running.int_ddivw_sq
        + trap(running.l2_ddivw**2, vals["l2_ddivw"] ** 2),
        int_dw_sq=running.int_dw_sq + trap(running.l2_dw**2, l2_dw**2),
        int_cross=running.int_cross
        + trap(running.cross_term, vals["cross_term"]),
        int_sng=running.int_sng
        + trap(running.sng_majorant, vals["sng_majorant"]),
    )


# ---------------------------------------------------------------------------
# t0 detection and decay fits


@dataclass(frozen=True)
class DecayFit:
    """Detected transient onset and finite-horizon decay trends."""

    t0_detected: float | None
    window: tuple[float, float] | None
    monotone_after_t0: bool
    c_infty_used: float = CALIBRATED_C_INFTY
    slope_pair: float | None = None
    w_scaled_trend: np.ndarray | None = None
    pair_strictly_decreasing: bool | None = None
    t_weighted_grad_sq: np.ndarray | None = None
    grad_argmax_in_first_half: bool | None = None
    w_exp_rate: float | None = None

    @property
    def found(self) -> bool:
        return self.t0_detected is not None


MONOTONE_RTOL = 1e-9


def _check_ordered(series) -> list[DiagnosticsRecord]:
    series = list(series)
    if not series:
        raise ValueError("series is empty")
    times = [rec.t for rec in series]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("series is not time-ordered")
    return series


def detect_t0(
    series,
    p: PhysicalParams,
    c_infty: float = CALIBRATED_C_INFTY,
) -> DecayFit:
    """Earliest time where the gradient-smallness condition holds.

    The condition is c^2 ||(u,w)(0)|| ||(Du,Dw)(t)|| < min(mu, gamma)^2 with
    the calibrated sup-norm constant standing in for c.  Returns a DecayFit
    with t0_detected None when no sample qualifies (not an error), and scans
    ||(Du,Dw)|| for relative increases beyond 1e-9 after the detected onset.
    """
    series = _check_ordered(series)
    initial_pair = series[0].l2_pair
    threshold = min(p.mu, p.gamma) ** 2
    t0 = None
    idx = None
    for i, rec in enumerate(series):
        if c_infty**2 * initial_pair * rec.l2_dpair < threshold:
            t0, idx = rec.t, i
            break
    if t0 is None:
        return DecayFit(
            t0_detected=None,
            window=None,
            monotone_after_t0=False,
            c_infty_used=c_infty,
        )
    monotone = True
    for prev, cur in zip(series[idx:], series[idx + 1 :]):
        if cur.l2_dpair > prev.l2_dpair * (1.0 + MONOTONE_RTOL):
            monotone = False
            break
    return DecayFit(
        t0_detected=t0,
        window=(t0, series[-1].t),
        monotone_after_t0=monotone,
        c_infty_used=c_infty,
    )


def fit_decay(series, fit_window: tuple[float, float]) -> DecayFit:
    """Finite-horizon decay trends over the records inside fit_window."""
    series = _check_ordered(series)
    t_lo, t_hi = fit_window
    window = [rec for rec in series if t_lo - 1e-12 <= rec.t <= t_hi + 1e-12]
    if not window:
        raise ValueError(f"no records inside window [{t_lo}, {t_hi}]")

    times = np.array([rec.t for rec in window])
    pair = np.array([rec.l2_pair for rec in window])
    dpair = np.array([rec.l2_dpair for rec in window])
    l2_w = np.array([rec.l2_w for rec in window])

    strictly_decreasing = bool(np.all(np.diff(pair) < 0.0))
    monotone = bool(
        np.all(dpair[1:] <= dpair[:-1] * (1.0 + MONOTONE_RTOL))
    )

    positive = (times > 0.0) & (pair > 0.0)
    slope_pair = None
    if positive.sum() >= 2:
        slope_pair = float(
            np.polyfit(np.log(times[positive]), np.log(pair[positive]), 1)[0]
        )

    t_grad_sq = times * dpair**2
    half = 0.5 * (t_lo + t_hi)
    argmax_first_half = bool(times[int(np.argmax(t_grad_sq))] <= half)

    w_exp_rate = None
    if np.all(l2_w > 0.0) and len(times) >= 2:
        w_exp_rate = float(-np.polyfit(times, np.log(l2_w), 1)[0])

    return DecayFit(
        t0_detected=t_lo,
        window=(t_lo, t_hi),
        monotone_after_t0=monotone,
        slope_pair=slope_pair,
        w_scaled_trend=np.sqrt(times) * l2_w,
        pair_strictly_decreasing=strictly_decreasing,
        t_weighted_grad_sq=t_grad_sq,
        grad_argmax_in_first_half=argmax_first_half,
        w_exp_rate=w_exp_rate,
    )


# ---------------------------------------------------------------------------
# per-step accumulation for the run driver


class RunAccumulator:
    """Per-step ledger accumulation with end-corrected trapezoid integrals.

    The four dissipation integrands are cheap spectral sums, sampled every
    step; full records (with the transforms behind the sup norm and the
    cross term) are only assembled at output times.
    """

    def __init__(self, p: PhysicalParams, dt: float):
        from .quadrature import RunningIntegral

        self.params = p
        self._du = RunningIntegral(dt)
        self._dw = RunningIntegral(dt)
        self._divw = RunningIntegral(dt)
        self._w = RunningIntegral(dt)
        self.initial_pair_sq: float | None = None

    def push(self, state: SimState) -> None:
        u, w = state.u, state.w
        du, dw = l2_grad(u), l2_grad(w)
        self._du.push(du**2)
        self._dw.push(dw**2)
        self._divw.push(l2_div(w) ** 2)
        self._w.push(l2(w) ** 2)
        if self.initial_pair_sq is None:
            self.initial_pair_sq = l2(u) ** 2 + l2(w) ** 2

    def record(self, state: SimState) -> DiagnosticsRecord:
        vals = _instantaneous(state, self.params)
        ints = dict(
            int_du_sq=self._du.value,
            int_dw_sq=self._dw.value,
            int_divw_sq=self._divw.value,
            int_w_sq=self._w.value,
        )
        lhs = ledger_lhs(vals["l2_pair"], self.params, **ints)
        return DiagnosticsRecord(
            energy_ledger_lhs=lhs,
            energy_ledger_rhs=self.initial_pair_sq,
            **vals,
            **ints,
        )
