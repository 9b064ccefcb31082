"""Linear propagators and frequency-regularized nonlinear steppers.

Equations (coupling sign lam in {-1, 0, +1}):

    heat:        d/dt u = Lap u + lam |u|^{p-1} u
    schrodinger: i d/dt u - Lap u = lam |u|^{p-1} u

The nonlinearity is optionally regularized by the dyadic projection P_{<j}
and is always evaluated on an ``oversample``-times finer grid followed by
spectral truncation (non-polynomial powers cannot be de-aliased exactly; the
discarded coefficient mass is reported per step as ``alias_residual``).

Integrators: ETD1 / ETD2 (heat; exact semigroup plus phi-function weights)
and Strang splitting (Schrodinger; exact phase rotation when no cutoff is
set, midpoint rule on the projected nonlinearity otherwise).  The linear
part is integrated exactly in all three, so the dt * 4^j guard below is an
accuracy budget for the explicit nonlinear parts, not a CFL constraint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Literal

import numpy as np

from .spectral import (
    Field,
    Grid,
    SpaceTimeField,
    SymbolSpec,
    apply_symbol,
    bump_below,
    smooth_step,
    to_spectrum,
)

Equation = Literal["heat", "schrodinger"]
Integrator = Literal["etd1", "etd2", "strang"]

STIFFNESS_BOUND = 2.0e4
BLOWUP_NORM = 1.0e8
TRUNCATION_SPAN = 2.0
TIME_RATIO = 8.0  # enforced T <= T1 / 8 and T1 <= 1 / 8


def linear_propagate(field: Field, t: float, equation: Equation) -> Field:
    """Exact linear flow: e^{t Lap} for heat, the free Schrodinger group otherwise."""
    if equation == "heat":
        return apply_symbol(field, SymbolSpec.heat(t))
    if equation == "schrodinger":
        return apply_symbol(field, SymbolSpec.schrodinger(t))
    raise ValueError(f"unknown equation {equation!r}")


@dataclass(frozen=True)
class EvolutionConfig:
    """Stepper configuration; validated on construction."""

    equation: Equation
    p: float
    lambda_sign: int = 1
    freq_cutoff_j: int | None = None
    dt: float = 1e-3
    t_final: float = 1.0
    integrator: Integrator = "etd2"
    oversample: int = 2
    save_every: int = 1

    def __post_init__(self):
        if self.p <= 1:
            raise ValueError("p must exceed 1")
        if self.lambda_sign not in (-1, 0, 1):
            raise ValueError("lambda_sign must be -1, 0 or +1")
        if self.dt <= 0 or self.t_final < self.dt:
            raise ValueError("require 0 < dt <= t_final")
        if self.oversample < 2:
            raise ValueError("oversample must be at least 2")
        if self.save_every < 1:
            raise ValueError("save_every must be at least 1")
        if self.equation == "heat" and self.integrator not in ("etd1", "etd2"):
            raise ValueError("heat evolution uses etd1 or etd2")
        if self.equation == "schrodinger" and self.integrator != "strang":
            raise ValueError("schrodinger evolution uses strang splitting")
        if self.freq_cutoff_j is not None:
            if self.freq_cutoff_j < 0:
                raise ValueError("freq_cutoff_j must be nonnegative")
            if self.dt * 4.0**self.freq_cutoff_j > STIFFNESS_BOUND:
                raise ValueError(
                    f"dt * 4^j = {self.dt * 4.0 ** self.freq_cutoff_j:.3g} exceeds "
                    f"the stiffness budget {STIFFNESS_BOUND:.3g}"
                )

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))


@dataclass(frozen=True)
class Trajectory:
    """Saved slices of an evolution plus per-slice diagnostics."""

    config: EvolutionConfig
    states: SpaceTimeField
    mass: np.ndarray          # ||u||_{L^2}^2 per saved slice
    sup_norm: np.ndarray      # max |u| per saved slice
    alias_residual: np.ndarray
    blow_up: bool = False
    last_valid_time: float | None = None

    def times(self) -> np.ndarray:
        return self.states.times()

    def final(self) -> Field:
        return self.states.slice(self.states.n_slices - 1)

    def diagnostics_rows(self) -> list[dict[str, float]]:
        return [
            {
                "t": float(t),
                "mass": float(m),
                "sup_norm": float(s),
                "alias_residual": float(a),
            }
            for t, m, s, a in zip(self.times(), self.mass, self.sup_norm, self.alias_residual)
        ]


class _NonlinearTerm:
    """lam |u|^{p-1} u with oversampled evaluation, truncation and optional P_{<j}."""

    def __init__(self, grid: Grid, config: EvolutionConfig):
        self.p = config.p
        self.lam = float(config.lambda_sign)
        n = grid.n_points
        self.n = n
        self.fine = n * config.oversample
        self.cutoff = None
        if config.freq_cutoff_j is not None:
            self.cutoff = bump_below(grid.frequency_magnitude(), config.freq_cutoff_j)
        self.last_alias = 0.0

    def coeffs(self, u_hat: np.ndarray) -> np.ndarray:
        """Fourier coefficients of the (projected, de-aliased) nonlinearity."""
        if self.lam == 0.0:
            self.last_alias = 0.0
            return np.zeros_like(u_hat)
        n, fine = self.n, self.fine
        padded = np.zeros(fine, dtype=np.complex128)
        padded[: n // 2] = u_hat[: n // 2]
        padded[fine - n // 2 :] = u_hat[n // 2 :]
        u_fine = np.fft.ifft(padded, norm="forward")
        w_fine = self.lam * np.abs(u_fine) ** (self.p - 1.0) * u_fine
        w_hat = np.fft.fft(w_fine, norm="forward")
        kept = np.concatenate([w_hat[: n // 2], w_hat[fine - n // 2 :]])
        total = float(np.sum(np.abs(w_hat) ** 2))
        kept_mass = float(np.sum(np.abs(kept) ** 2))
        self.last_alias = math.sqrt(max(total - kept_mass, 0.0) / total) if total > 0 else 0.0
        if self.cutoff is not None:
            kept = kept * self.cutoff
        return kept


def _phi1(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    small = np.abs(z) < 1e-6
    zs = z[small]
    out[small] = 1.0 + zs / 2.0 + zs * zs / 6.0
    zb = z[~small]
    out[~small] = np.expm1(zb) / zb
    return out


def _phi2(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    small = np.abs(z) < 1e-4
    zs = z[small]
    out[small] = 0.5 + zs / 6.0 + zs * zs / 24.0
    zb = z[~small]
    out[~small] = (np.expm1(zb) - zb) / (zb * zb)
    return out


def evolve(u0: Field, config: EvolutionConfig) -> Trajectory:
    """Run the configured stepper from u0; diagnostics recorded at every save.

    A NaN or a blow-up past the norm guard halts the run: the trajectory is
    returned truncated with ``blow_up`` set and the last valid time recorded,
    so threshold scans can classify it.
    """
    if u0.grid.dimension != 1:
        raise ValueError("evolution is one-dimensional")
    grid = u0.grid
    nl = _NonlinearTerm(grid, config)
    dt = config.dt
    lam = float(config.lambda_sign)
    xi2 = grid.frequency_magnitude() ** 2

    u_hat = to_spectrum(u0).coefficients.copy()

    if config.equation == "heat":
        lin = -xi2 * dt
        e_full = np.exp(lin)
        phi1 = _phi1(lin)
        phi2 = _phi2(lin)

        def step(uh: np.ndarray) -> np.ndarray:
            g0 = nl.coeffs(uh)
            pred = e_full * uh + dt * phi1 * g0
            if config.integrator == "etd1":
                return pred
            g1 = nl.coeffs(pred)
            return pred + dt * phi2 * (g1 - g0)

    else:
        half_linear = np.exp(1j * xi2 * dt)  # e^{-i dt Lap} on the resolved band

        def nonlinear_substep(uh: np.ndarray, tau: float) -> np.ndarray:
            if lam == 0.0:
                return uh
            if config.freq_cutoff_j is None:
                u = np.fft.ifft(uh, norm="forward")
                u = u * np.exp(-1j * lam * np.abs(u) ** (config.p - 1.0) * tau)
                return np.fft.fft(u, norm="forward")
            # midpoint rule on d/dt u = -i P_{<j}(lam |u|^{p-1} u)
            k1 = -1j * nl.coeffs(uh)
            mid = uh + 0.5 * tau * k1
            k2 = -1j * nl.coeffs(mid)
            return uh + tau * k2

        def step(uh: np.ndarray) -> np.ndarray:
            uh = nonlinear_substep(uh, dt / 2.0)
            uh = half_linear * uh
            return nonlinear_substep(uh, dt / 2.0)

    h = grid.spacing
    n_pts = grid.n_points

    def record(uh: np.ndarray):
        u = np.fft.ifft(uh, norm="forward")
        mass = h * float(np.sum(np.abs(u) ** 2))
        return u, mass, float(np.abs(u).max())

    saved_vals, masses, sups, aliases = [], [], [], []
    u_phys, mass, sup = record(u_hat)
    saved_vals.append(u_phys)
    masses.append(mass)
    sups.append(sup)
    aliases.append(0.0)

    blow_up = False
    last_valid = 0.0
    for n in range(1, config.n_steps + 1):
        u_hat = step(u_hat)
        finite = np.all(np.isfinite(u_hat))
        if finite:
            u_phys, mass, sup = record(u_hat)
        if not finite or math.sqrt(mass) > BLOWUP_NORM:
            blow_up = True
            break
        last_valid = n * dt
        if n % config.save_every == 0:
            saved_vals.append(u_phys)
            masses.append(mass)
            sups.append(sup)
            aliases.append(nl.last_alias)

    states = SpaceTimeField(
        grid,
        dt * config.save_every,
        np.stack(saved_vals, axis=0),
        origin_index=0,
    )
    return Trajectory(
        config=config,
        states=states,
        mass=np.asarray(masses),
        sup_norm=np.asarray(sups),
        alias_residual=np.asarray(aliases),
        blow_up=blow_up,
        last_valid_time=last_valid if blow_up else None,
    )


def time_antiderivative(stf: SpaceTimeField) -> SpaceTimeField:
    """Slice-wise cumulative trapezoid anchored at t = 0 (exact on affine data)."""
    vals = stf.values
    dt = stf.time_step
    increments = 0.5 * dt * (vals[1:] + vals[:-1])
    cum = np.concatenate(
        [np.zeros((1,) + vals.shape[1:], dtype=vals.dtype), np.cumsum(increments, axis=0)],
        axis=0,
    )
    cum = cum - cum[stf.origin_index]
    return SpaceTimeField(stf.grid, dt, cum, stf.origin_index)


def _spectral_antiderivative(stf: SpaceTimeField) -> SpaceTimeField:
    """Antiderivative via tau-space division plus a mean ramp, anchored at t = 0.

    Exact on the resolved band for integrands supported inside the span;
    used internally by :func:`time_truncate` to honor its accuracy target.
    """
    coeffs = np.fft.fft(stf.values, axis=0, norm="forward")
    tau = stf.tau_frequencies()
    inv = np.zeros_like(tau, dtype=np.complex128)
    inv[1:] = 1.0 / (1j * tau[1:])
    shape = (stf.n_slices,) + (1,) * stf.grid.dimension
    anti = np.fft.ifft(coeffs * inv.reshape(shape), axis=0, norm="forward")
    ramp = stf.times().reshape(shape) * coeffs[0]
    vals = anti + ramp
    vals = vals - vals[stf.origin_index]
    return SpaceTimeField(stf.grid, stf.time_step, vals, stf.origin_index)


def _time_bump(t: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """The phi0 bump on the time axis: 1 for |t| <= scale, 0 for |t| >= 2 scale."""
    return smooth_step(2.0 - np.abs(t) / scale)


def time_truncate(stf: SpaceTimeField, T: float, T1: float) -> SpaceTimeField:
    """Extension-compatible time truncation

        F_T = eta_{T1} * dt^{-1}( eta_T * dt F ) + eta_1(t) F(0, x),

    with eta the package bump rescaled in time.  F_T agrees with F on
    [-T, T] and vanishes for |t| > 2.  Enforces T <= T1/8 and T1 <= 1/8;
    the stack must span [-2, 2] and contain the t = 0 slice.
    """
    if not (T <= T1 / TIME_RATIO and T1 <= 1.0 / TIME_RATIO):
        raise ValueError(f"require T <= T1/{TIME_RATIO:g} and T1 <= 1/{TIME_RATIO:g}")
    if stf.n_slices < 8:
        raise ValueError("time window too short")
    times = stf.times()
    if times[0] > -TRUNCATION_SPAN + 1e-9 or times[-1] < TRUNCATION_SPAN - stf.time_step - 1e-9:
        raise ValueError("stack must span [-2, 2]")
    shape = (stf.n_slices,) + (1,) * stf.grid.dimension

    tapered = stf.values * _time_bump(times, 1.0).reshape(shape)
    coeffs = np.fft.fft(tapered, axis=0, norm="forward")
    tau = stf.tau_frequencies().reshape(shape)
    dt_f = np.fft.ifft(coeffs * (1j * tau), axis=0, norm="forward")

    g = dt_f * _time_bump(times, T).reshape(shape)
    anti = _spectral_antiderivative(SpaceTimeField(stf.grid, stf.time_step, g, stf.origin_index))

    vals = (
        anti.values * _time_bump(times, T1).reshape(shape)
        + stf.values[stf.origin_index][np.newaxis, ...] * _time_bump(times, 1.0).reshape(shape)
    )
    return SpaceTimeField(stf.grid, stf.time_step, vals, stf.origin_index)


def difference_probe(
    u0a: Field, u0b: Field, config: EvolutionConfig, q: float = 2.0
) -> float:
    """sup over saved times of ||u_a(t) - u_b(t)||_{L^q} / ||u0a - u0b||_{L^q}."""
    from .spaces import field_lq

    if u0a.grid != u0b.grid:
        raise ValueError("difference probe requires a shared grid")
    denom = field_lq(u0a - u0b, q)
    if denom == 0.0:
        raise ValueError("identical initial data: difference ratio undefined")
    traj_a = evolve(u0a, config)
    traj_b = evolve(u0b, config)
    n = min(traj_a.states.n_slices, traj_b.states.n_slices)
    worst = 0.0
    for i in range(1, n):
        diff = traj_a.states.slice(i) - traj_b.states.slice(i)
        worst = max(worst, field_lq(diff, q) / denom)
    return worst
