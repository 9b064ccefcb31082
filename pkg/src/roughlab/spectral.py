"""Spectral core: grids, fields, Fourier multipliers and dyadic projections.

Conventions used everywhere in this package:

* The computational domain is a periodic torus of circumference ``L``
  (default 16), sampled at ``N`` points (a power of two), with grid points
  ``x_i = -L/2 + i*L/N``.  Test functions are compactly supported in the
  middle half of the torus so that periodicity is inert.
* The forward transform carries the ``1/N`` factor
  (``numpy.fft`` with ``norm="forward"``); frequencies are
  ``xi_k = 2*pi*k/L`` in standard FFT layout.
* The dyadic bump ``phi0`` is the closed-form smooth step
  ``sigma(2 - |xi|)`` with ``sigma(t) = psi(t)/(psi(t) + psi(1-t))`` and
  ``psi(t) = exp(-1/t)`` for ``t > 0`` (zero otherwise).  It equals 1 for
  ``|xi| <= 1``, vanishes for ``|xi| >= 2`` and is C-infinity, so every
  projection in this package is bit-reproducible.  Identifier:
  ``sigma-step-r1``.
* Block ``j >= 1`` has symbol ``phi(2^-j xi)`` with
  ``phi(xi) = phi0(xi) - phi0(2 xi)``; block 0 has symbol ``phi0``.
  ``below j`` means the sum of blocks ``0 .. j-1`` (closed form
  ``phi0(2^-(j-1) xi)``), ``above j`` its complement.
* Enlarged temporal localizations used by the modulation split cover
  ``+-MODULATION_ENLARGEMENT`` dyadic sub-bands around the target block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Literal

import numpy as np

BUMP_ID = "sigma-step-r1"
PARAPRODUCT_GAP = 4
MODULATION_ENLARGEMENT = 3
MIN_TIME_SAMPLES = 8
_ROUNDTRIP_TOL = 1e-12


class SymbolRangeError(ValueError):
    """A multiplier produced a non-finite value; names the offending frequency."""


class ZeroModeWarning(UserWarning):
    """riesz(s<0) zeroed the mean mode of a field with nonzero mean."""


def smooth_step(t: np.ndarray | float) -> np.ndarray:
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, strictly monotone between."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = (t > 0.0) & (t < 1.0)
    ti = t[inside]
    a = np.exp(-1.0 / ti)
    b = np.exp(-1.0 / (1.0 - ti))
    out[inside] = a / (a + b)
    out[t >= 1.0] = 1.0
    return out


def bump_phi0(xi: np.ndarray) -> np.ndarray:
    """Radial dyadic bump: 1 on |xi| <= 1, 0 on |xi| >= 2, smooth between."""
    return smooth_step(2.0 - np.abs(xi))


def bump_block(xi: np.ndarray, j: int) -> np.ndarray:
    """Symbol of the dyadic block at scale 2^j (phi0 itself for j = 0)."""
    if j == 0:
        return bump_phi0(xi)
    return bump_phi0(np.abs(xi) * 2.0 ** (-j)) - bump_phi0(np.abs(xi) * 2.0 ** (-j + 1))


def bump_below(xi: np.ndarray, j: int) -> np.ndarray:
    """Symbol of the sum of blocks 0 .. j-1 (zero for j <= 0)."""
    if j <= 0:
        return np.zeros_like(np.asarray(xi, dtype=float))
    return bump_phi0(np.abs(xi) * 2.0 ** (-(j - 1)))


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on a torus of the given circumference.

    ``n_points`` is the number of samples per axis (a power of two) and
    ``dimension`` is 1 or 2; 2D grids are square.
    """

    n_points: int
    length: float = 16.0
    dimension: int = 1

    def __post_init__(self):
        if self.n_points <= 0 or (self.n_points & (self.n_points - 1)) != 0:
            raise ValueError(f"n_points must be a positive power of two, got {self.n_points}")
        if self.length <= 0:
            raise ValueError("length must be positive")
        if self.dimension not in (1, 2):
            raise ValueError("dimension must be 1 or 2")

    @property
    def spacing(self) -> float:
        return self.length / self.n_points

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n_points,) * self.dimension

    def coordinates(self) -> np.ndarray:
        """1D coordinate array x_i = -L/2 + i*h (shared by every axis)."""
        return -0.5 * self.length + self.spacing * np.arange(self.n_points)

    def axis_frequencies(self) -> np.ndarray:
        """Angular frequencies 2*pi*k/L in FFT layout for one axis."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.spacing)

    def frequency_magnitude(self) -> np.ndarray:
        """|xi| on the full FFT lattice (radial in 2D)."""
        xi = self.axis_frequencies()
        if self.dimension == 1:
            return np.abs(xi)
        xx, yy = np.meshgrid(xi, xi, indexing="ij")
        return np.sqrt(xx * xx + yy * yy)

    @property
    def nyquist(self) -> float:
        return np.pi / self.spacing

    def max_block(self) -> int:
        """Largest dyadic block whose support intersects the resolved band."""
        j = 0
        while 2.0 ** j < self.nyquist:
            j += 1
        return j


def _as_readonly(values: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(values, dtype=np.complex128)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Field:
    """Complex samples of a function on a :class:`Grid`.

    ``f`` and ``g`` expose the real and imaginary components used by the
    splitting u = f + i g.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _as_readonly(self.values))
        if self.values.shape != self.grid.shape:
            raise ValueError(f"values shape {self.values.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")

    @property
    def f(self) -> np.ndarray:
        return self.values.real

    @property
    def g(self) -> np.ndarray:
        return self.values.imag

    def __add__(self, other: "Field") -> "Field":
        self._check_grid(other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        self._check_grid(other)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, scalar: complex) -> "Field":
        return Field(self.grid, self.values * scalar)

    __rmul__ = __mul__

    def _check_grid(self, other: "Field") -> None:
        if other.grid != self.grid:
            raise ValueError("fields live on different grids")


@dataclass(frozen=True)
class Spectrum:
    """Fourier coefficients of a field, FFT layout, forward-normalized."""

    grid: Grid
    coefficients: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coefficients", _as_readonly(self.coefficients))
        if self.coefficients.shape != self.grid.shape:
            raise ValueError("coefficient shape mismatch")


def to_spectrum(field: Field) -> Spectrum:
    return Spectrum(field.grid, np.fft.fftn(field.values, norm="forward"))


def to_physical(spectrum: Spectrum) -> Field:
    return Field(spectrum.grid, np.fft.ifftn(spectrum.coefficients, norm="forward"))


@dataclass(frozen=True)
class SpaceTimeField:
    """Uniformly time-stamped stack of fields sharing one grid.

    ``origin_index`` marks the slice at t = 0; slice ``i`` sits at
    ``(i - origin_index) * time_step``.
    """

    grid: Grid
    time_step: float
    values: np.ndarray  # shape (n_t,) + grid.shape
    origin_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "values", _as_readonly(self.values))
        if self.time_step <= 0:
            raise ValueError("time_step must be positive")
        if self.values.ndim != 1 + self.grid.dimension or self.values.shape[1:] != self.grid.shape:
            raise ValueError("slice shape mismatch with grid")
        if not (0 <= self.origin_index < self.values.shape[0]):
            raise ValueError("origin_index outside the slice range")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("space-time values must be finite")

    @property
    def n_slices(self) -> int:
        return self.values.shape[0]

    def times(self) -> np.ndarray:
        return (np.arange(self.n_slices) - self.origin_index) * self.time_step

    def slice(self, i: int) -> Field:
        return Field(self.grid, self.values[i])

    @property
    def slices(self) -> list[Field]:
        return [self.slice(i) for i in range(self.n_slices)]

    def tau_frequencies(self) -> np.ndarray:
        """Angular time-frequencies on the span, FFT layout."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n_slices, d=self.time_step)

    @staticmethod
    def from_slices(slices: list[Field], time_step: float, origin_index: int = 0) -> "SpaceTimeField":
        grid = slices[0].grid
        vals = np.stack([s.values for s in slices], axis=0)
        return SpaceTimeField(grid, time_step, vals, origin_index)


SymbolKind = Literal["bessel", "riesz", "heat", "schrodinger", "lp_block", "lp_below", "lp_above"]


@dataclass(frozen=True)
class SymbolSpec:
    """A Fourier multiplier: <xi>^s, |xi|^s, e^{-t|xi|^2}, e^{it|xi|^2} or a dyadic projector."""

    kind: SymbolKind
    parameter: float

    def __post_init__(self):
        if self.kind in ("lp_block", "lp_below", "lp_above"):
            j = self.parameter
            if j < 0 or j != int(j):
                raise ValueError("dyadic level must be a nonnegative integer")

    @staticmethod
    def bessel(s: float) -> "SymbolSpec":
        return SymbolSpec("bessel", float(s))

    @staticmethod
    def riesz(s: float) -> "SymbolSpec":
        return SymbolSpec("riesz", float(s))

    @staticmethod
    def heat(t: float) -> "SymbolSpec":
        return SymbolSpec("heat", float(t))

    @staticmethod
    def schrodinger(t: float) -> "SymbolSpec":
        return SymbolSpec("schrodinger", float(t))


def symbol_values(spec: SymbolSpec, magnitude: np.ndarray) -> np.ndarray:
    """Evaluate the multiplier on an array of frequency magnitudes |xi|."""
    r = np.asarray(magnitude, dtype=float)
    if spec.kind == "bessel":
        with np.errstate(over="ignore"):
            return (1.0 + r * r) ** (0.5 * spec.parameter)
    if spec.kind == "riesz":
        s = spec.parameter
        if s == 0.0:
            return np.ones_like(r)
        with np.errstate(divide="ignore"):
            vals = r ** s
        if s < 0.0:
            vals = np.where(r == 0.0, 0.0, vals)
        return vals
    if spec.kind == "heat":
        if spec.parameter < 0:
            raise ValueError("backward heat multiplier rejected (t < 0)")
        return np.exp(-spec.parameter * r * r)
    if spec.kind == "schrodinger":
        return np.exp(1j * spec.parameter * r * r)
    if spec.kind == "lp_block":
        return bump_block(r, int(spec.parameter))
    if spec.kind == "lp_below":
        return bump_below(r, int(spec.parameter))
    if spec.kind == "lp_above":
        return 1.0 - bump_below(r, int(spec.parameter))
    raise ValueError(f"unknown symbol kind {spec.kind!r}")


def apply_symbol(field: Field, spec: SymbolSpec) -> Field:
    """Apply a Fourier multiplier to a field.

    Raises :class:`SymbolRangeError` when the multiplied coefficients
    overflow (e.g. bessel with very large s at high frequency), naming the
    first offending frequency.  riesz with s < 0 zeroes the mean mode and
    emits :class:`ZeroModeWarning` if that mode was nonzero.
    """
    import warnings

    mag = field.grid.frequency_magnitude()
    sym = symbol_values(spec, mag)
    coeffs = to_spectrum(field).coefficients
    if spec.kind == "riesz" and spec.parameter < 0:
        zero_idx = (0,) * field.grid.dimension
        if abs(coeffs[zero_idx]) > 1e-14 * (1.0 + np.abs(coeffs).max()):
            warnings.warn(
                "riesz(s<0) zeroed a nonzero mean mode", ZeroModeWarning, stacklevel=2
            )
    out = sym * coeffs
    if not np.all(np.isfinite(out)):
        bad = np.argwhere(~np.isfinite(out))[0]
        freq = mag[tuple(bad)]
        raise SymbolRangeError(
            f"{spec.kind}({spec.parameter}) overflowed at |xi| = {freq:.6g}"
        )
    return to_physical(Spectrum(field.grid, out))


Axis = Literal["space", "time"]
LPKind = Literal["block", "below", "above"]


def _lp_symbol(mag: np.ndarray, j: int, kind: LPKind) -> np.ndarray:
    if kind == "block":
        return bump_block(mag, j)
    if kind == "below":
        return bump_below(mag, j)
    if kind == "above":
        return 1.0 - bump_below(mag, j)
    raise ValueError(f"unknown projection kind {kind!r}")


def lp_project(obj, axis: Axis, j: int, kind: LPKind, return_truncated: bool = False):
    """Littlewood-Paley projection at dyadic level j along one axis.

    ``axis="space"`` accepts a Field or a SpaceTimeField (slice-wise);
    ``axis="time"`` requires a SpaceTimeField.  A block lying entirely
    above the Nyquist frequency yields a zero output; pass
    ``return_truncated=True`` to also receive that flag.
    """
    if j < 0:
        raise ValueError("j must be nonnegative")
    if isinstance(obj, Field):
        if axis != "space":
            raise ValueError("time-axis projection needs a SpaceTimeField")
        mag = obj.grid.frequency_magnitude()
        truncated = kind == "block" and j >= 1 and 2.0 ** (j - 1) >= obj.grid.nyquist
        coeffs = to_spectrum(obj).coefficients * _lp_symbol(mag, j, kind)
        out = to_physical(Spectrum(obj.grid, coeffs))
        return (out, truncated) if return_truncated else out
    if isinstance(obj, SpaceTimeField):
        if axis == "space":
            mag = obj.grid.frequency_magnitude()
            truncated = kind == "block" and j >= 1 and 2.0 ** (j - 1) >= obj.grid.nyquist
            sp_axes = tuple(range(1, 1 + obj.grid.dimension))
            coeffs = np.fft.fftn(obj.values, axes=sp_axes, norm="forward")
            coeffs = coeffs * _lp_symbol(mag, j, kind)[np.newaxis, ...]
            vals = np.fft.ifftn(coeffs, axes=sp_axes, norm="forward")
        else:
            tau = np.abs(obj.tau_frequencies())
            nyq_t = np.pi / obj.time_step
            truncated = kind == "block" and j >= 1 and 2.0 ** (j - 1) >= nyq_t
            shape = (obj.n_slices,) + (1,) * obj.grid.dimension
            coeffs = np.fft.fft(obj.values, axis=0, norm="forward")
            coeffs = coeffs * _lp_symbol(tau, j, kind).reshape(shape)
            vals = np.fft.ifft(coeffs, axis=0, norm="forward")
        out = SpaceTimeField(obj.grid, obj.time_step, vals, obj.origin_index)
        return (out, truncated) if return_truncated else out
    raise TypeError(f"cannot project object of type {type(obj).__name__}")


def paraproduct(v: Field, u: Field) -> Field:
    """Bony paraproduct T_v u = sum_k P_{<k-4} v * P_k u (u carries the high frequency)."""
    if v.grid != u.grid:
        raise ValueError("paraproduct inputs must share a grid")
    grid = u.grid
    mag = grid.frequency_magnitude()
    v_hat = to_spectrum(v).coefficients
    u_hat = to_spectrum(u).coefficients
    out = np.zeros(grid.shape, dtype=np.complex128)
    for k in range(PARAPRODUCT_GAP + 1, grid.max_block() + 1):
        low = np.fft.ifftn(v_hat * bump_below(mag, k - PARAPRODUCT_GAP), norm="forward")
        high = np.fft.ifftn(u_hat * bump_block(mag, k), norm="forward")
        out += low * high
    return Field(grid, out)


def paraproduct_remainder(u: Field, v: Field) -> Field:
    """Diagonal remainder Pi(u, v) = uv - T_u v - T_v u of the trichotomy."""
    product = Field(u.grid, u.values * v.values)
    return product - paraproduct(u, v) - paraproduct(v, u)


ModulationRegion = Literal["near", "far"]


def _modulation_symbol(stf: SpaceTimeField, region: ModulationRegion) -> np.ndarray:
    """Symbol on the (tau, xi) lattice; near + far = 1 exactly on the resolved band."""
    tau = np.abs(stf.tau_frequencies())
    mag = stf.grid.frequency_magnitude()
    t_shape = (stf.n_slices,) + (1,) * stf.grid.dimension
    near = np.zeros((stf.n_slices,) + stf.grid.shape, dtype=float)
    e = MODULATION_ENLARGEMENT
    for j in range(stf.grid.max_block() + 1):
        # enlarged temporal plateau over blocks [2j - e, 2j + e]
        plateau = bump_below(tau, 2 * j + e + 1) - bump_below(tau, 2 * j - e)
        near += plateau.reshape(t_shape) * bump_block(mag, j)[np.newaxis, ...]
    if region == "near":
        return near
    if region == "far":
        return 1.0 - near
    raise ValueError(f"unknown modulation region {region!r}")


def modulation_project(stf: SpaceTimeField, region: ModulationRegion) -> SpaceTimeField:
    """Project onto the near (|tau| ~ |xi|^2) or far space-time frequency region.

    The near symbol is sum_j [enlarged temporal plateau at 2j] * [spatial
    block j]; the far symbol is its pointwise complement, which coincides
    with the two-piece form sum_j S_{<2j-e} P_j + P_j S_{>2j+e} of the same
    blocks.  Near + far reproduce the identity exactly on the resolved band.
    """
    if stf.n_slices < MIN_TIME_SAMPLES:
        raise ValueError(f"time window must have at least {MIN_TIME_SAMPLES} samples")
    sym = _modulation_symbol(stf, region)
    sp_axes = tuple(range(stf.values.ndim))
    coeffs = np.fft.fftn(stf.values, axes=sp_axes, norm="forward")
    vals = np.fft.ifftn(coeffs * sym, axes=sp_axes, norm="forward")
    return SpaceTimeField(stf.grid, stf.time_step, vals, stf.origin_index)


def modulation_energy_split(stf: SpaceTimeField) -> tuple[float, float, float]:
    """Quadratic-form energy split (near, far, total); near + far = total exactly.

    Energy in region R is the pairing <u, Q_R u> = sum q_R |u_hat|^2 (up to
    the fixed quadrature weight), the decomposition of the L^2 energy induced
    by q_near + q_far = 1.
    """
    if stf.n_slices < MIN_TIME_SAMPLES:
        raise ValueError(f"time window must have at least {MIN_TIME_SAMPLES} samples")
    sp_axes = tuple(range(stf.values.ndim))
    coeffs = np.fft.fftn(stf.values, axes=sp_axes, norm="forward")
    power = np.abs(coeffs) ** 2
    q_near = _modulation_symbol(stf, "near")
    weight = stf.time_step * stf.grid.spacing ** stf.grid.dimension * power.size
    near = float(np.sum(q_near * power) * weight)
    total = float(np.sum(power) * weight)
    return near, total - near, total


def partition_defect(field: Field) -> float:
    """Relative L^2 defect of the dyadic partition of unity on this grid."""
    total = lp_project(field, "space", 0, "block")
    for j in range(1, field.grid.max_block() + 1):
        total = total + lp_project(field, "space", j, "block")
    num = np.linalg.norm((total - field).values.ravel())
    den = np.linalg.norm(field.values.ravel())
    return float(num / den) if den > 0 else float(num)
