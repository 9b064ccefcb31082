"""Test-function factory: windows, the linear-ramp datum and random corpora.

Every function built here is compactly supported in the middle half of the
torus; :func:`tail_mass_fraction` monitors boundary contamination (the
outer eighths must carry < 1e-10 of the total mass for windowed data).
"""

from __future__ import annotations

import numpy as np

from .spectral import Field, Grid, bump_below, smooth_step

WINDOW_PLATEAU_FRACTION = 0.125  # chi == 1 on |x| <= L/8
WINDOW_SUPPORT_FRACTION = 0.25   # chi == 0 on |x| >= L/4


def window_profile(x: np.ndarray, length: float) -> np.ndarray:
    """Smooth cutoff chi: 1 on the plateau, 0 outside the middle half."""
    a = WINDOW_PLATEAU_FRACTION * length
    b = WINDOW_SUPPORT_FRACTION * length
    return smooth_step((b - np.abs(x)) / (b - a))


def window(grid: Grid) -> Field:
    x = grid.coordinates()
    if grid.dimension == 1:
        vals = window_profile(x, grid.length)
    else:
        xx, yy = np.meshgrid(x, x, indexing="ij")
        vals = window_profile(np.sqrt(xx * xx + yy * yy), grid.length)
    return Field(grid, vals.astype(np.complex128))


def linear_ramp(grid: Grid, amplitude: float = 1.0, shift: float = 0.0) -> Field:
    """The flagship datum chi(x) * (x - shift): smooth, odd for shift = 0.

    Its absolute value carries the 1 + 1/q threshold kink; the datum itself
    is Schwartz-like on the torus.
    """
    if grid.dimension != 1:
        raise ValueError("linear_ramp is one-dimensional")
    x = grid.coordinates()
    vals = amplitude * window_profile(x, grid.length) * (x - shift)
    return Field(grid, vals.astype(np.complex128))


def pure_mode(grid: Grid, k: int) -> Field:
    """e^{i xi x} with xi = 2 pi k / L (tensor mode (k, k) in 2D)."""
    x = grid.coordinates()
    xi = 2.0 * np.pi * k / grid.length
    if grid.dimension == 1:
        return Field(grid, np.exp(1j * xi * x))
    xx, yy = np.meshgrid(x, x, indexing="ij")
    return Field(grid, np.exp(1j * xi * (xx + yy)))


def gaussian_bump(grid: Grid, width: float = 0.5) -> Field:
    """Windowed Gaussian centered at the origin."""
    x = grid.coordinates()
    if grid.dimension == 1:
        vals = np.exp(-(x / width) ** 2) * window_profile(x, grid.length)
    else:
        xx, yy = np.meshgrid(x, x, indexing="ij")
        r2 = xx * xx + yy * yy
        vals = np.exp(-r2 / width**2) * window_profile(np.sqrt(r2), grid.length)
    return Field(grid, vals.astype(np.complex128))


def band_limited(
    grid: Grid,
    rng: np.random.Generator,
    max_level: int = 5,
    real: bool = False,
) -> Field:
    """Windowed random field with spectrum confined below dyadic level max_level.

    Real variants generically change sign across the window interior
    (transversal zeros); complex variants generically do not vanish.
    """
    coeffs = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    mag = grid.frequency_magnitude()
    coeffs = coeffs * bump_below(mag, max_level + 1)
    raw = np.fft.ifftn(coeffs, norm="forward")
    raw = raw / max(np.abs(raw).max(), 1e-300)
    if real:
        raw = raw.real.astype(np.complex128)
    win = window(grid).values.real
    return Field(grid, raw * win)


def block_limited(grid: Grid, rng: np.random.Generator, j: int, plateau: float = 0.5) -> Field:
    """Random field with spectrum confined to the plateau of dyadic block j.

    The support is [2^j * (1 - plateau/2), 2^j * (1 + plateau)], well inside
    the block bump, so the field is an exact eigen-band for Bernstein checks.
    """
    coeffs = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    mag = grid.frequency_magnitude()
    lo = 2.0**j * (1.0 - 0.5 * plateau)
    hi = 2.0**j * (1.0 + plateau)
    mask = (mag >= lo) & (mag <= hi)
    if not mask.any():
        raise ValueError(f"block {j} plateau not resolved on this grid")
    coeffs = np.where(mask, coeffs, 0.0)
    vals = np.fft.ifftn(coeffs, norm="forward")
    return Field(grid, vals / max(np.abs(vals).max(), 1e-300))


def corpus(
    grid: Grid,
    seed: int,
    size: int,
    max_level: int = 5,
    real: bool = False,
) -> list[Field]:
    """Deterministic corpus of windowed band-limited fields."""
    rng = np.random.default_rng(seed)
    return [band_limited(grid, rng, max_level=max_level, real=real) for _ in range(size)]


def _mode_count(max_level: int, length: float) -> int:
    return int(np.floor(2.0**max_level * length / (2.0 * np.pi)))


def mode_table(
    rng: np.random.Generator,
    max_level: int,
    length: float,
    real: bool = False,
) -> np.ndarray:
    """Fixed table of Fourier coefficients for modes |k| <= K, K set by the band.

    The table pins one function of x independently of any grid, so the same
    corpus member can be realized at several resolutions for refinement
    studies.  Layout: index ``K + k`` holds the coefficient of
    ``exp(2 pi i k x / length)``.
    """
    kmax = _mode_count(max_level, length)
    coeffs = rng.standard_normal(2 * kmax + 1) + 1j * rng.standard_normal(2 * kmax + 1)
    if real:
        # hermitian symmetry c_{-k} = conj(c_k) makes the synthesis real
        coeffs[:kmax] = np.conj(coeffs[kmax + 1 :][::-1])
        coeffs[kmax] = coeffs[kmax].real
    return coeffs


def realize(table: np.ndarray, grid: Grid, windowed: bool = True) -> Field:
    """Synthesize the mode table on a grid (optionally windowed); exact per N."""
    if grid.dimension != 1:
        raise ValueError("mode tables are one-dimensional")
    kmax = (table.shape[0] - 1) // 2
    n = grid.n_points
    if kmax >= n // 2:
        raise ValueError("grid cannot resolve the mode table")
    spec = np.zeros(n, dtype=np.complex128)
    spec[0] = table[kmax]
    spec[1 : kmax + 1] = table[kmax + 1 :]
    spec[n - kmax :] = table[:kmax]
    vals = np.fft.ifft(spec, norm="forward")
    vals = vals / max(np.abs(vals).max(), 1e-300)
    if windowed:
        vals = vals * window_profile(grid.coordinates(), grid.length)
    return Field(grid, vals)


def corpus_family(
    seed: int, size: int, max_level: int = 5, real: bool = False, length: float = 16.0
) -> list[np.ndarray]:
    """Deterministic family of mode tables shared across resolutions."""
    rng = np.random.default_rng(seed)
    return [mode_table(rng, max_level, length, real=real) for _ in range(size)]


def kink_family(grid: Grid, size: int = 5, amplitude: float = 1.0) -> list[Field]:
    """Shifted linear-ramp data |.|-roughness carriers for divergence probes.

    Shifts are grid-exact fractions of the plateau so the simple zero stays
    in the window interior.
    """
    shifts = np.linspace(-0.5, 0.5, size)
    return [linear_ramp(grid, amplitude=amplitude, shift=float(s)) for s in shifts]


def tail_mass_fraction(field: Field) -> float:
    """Fraction of |u|^2 mass in the outer eighths of the torus."""
    x = field.grid.coordinates()
    outer = np.abs(x) > 0.375 * field.grid.length
    power = np.abs(field.values) ** 2
    if field.grid.dimension == 1:
        tail = power[outer].sum()
    else:
        mask = np.logical_or.outer(outer, outer)
        tail = power[mask].sum()
    total = power.sum()
    return float(tail / total) if total > 0 else 0.0
