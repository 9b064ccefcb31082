"""Dyadic piecewise-linear approximation and finite-difference tables.

Level-j knots sit at x = k * 2^-j.  Grids are sized so that 2^-j is an
integer multiple of the spacing for every resolvable level (the torus
circumference is a power of two), which makes knot reads exact and removes
interpolation error from the difference tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import WINDOW_PLATEAU_FRACTION
from .spectral import Field, Grid


class UnresolvedLevelError(ValueError):
    """Requested dyadic level is finer than the grid."""


def knot_stride(grid: Grid, level: int) -> int:
    """Grid points per knot interval at this level; raises if unresolvable."""
    if level < 0:
        raise ValueError("level must be nonnegative")
    stride = 2.0 ** (-level) / grid.spacing
    if stride < 1.0 or abs(stride - round(stride)) > 1e-9:
        raise UnresolvedLevelError(
            f"level {level} (step {2.0**-level}) is not an exact multiple of "
            f"the grid spacing {grid.spacing}"
        )
    return int(round(stride))


def max_level(grid: Grid) -> int:
    """Finest level whose knot interval is an exact multiple of the spacing."""
    j = 0
    while True:
        try:
            knot_stride(grid, j + 1)
        except UnresolvedLevelError:
            return j
        j += 1


@dataclass(frozen=True)
class DyadicSpline:
    """Continuous piecewise-linear interpolant at dyadic level j.

    ``knot_values[k]`` is the sample at grid index ``k * stride``;
    ``slopes[k] = 2^j * (knot_values[k+1] - knot_values[k])`` on the k-th
    interval, with periodic wrap on the last one.
    """

    level: int
    grid: Grid
    knot_values: np.ndarray
    slopes: np.ndarray

    @property
    def n_knots(self) -> int:
        return self.knot_values.shape[0]

    def knot_positions(self) -> np.ndarray:
        stride = knot_stride(self.grid, self.level)
        return self.grid.coordinates()[::stride]


def spline_approx(field: Field, level: int) -> tuple[DyadicSpline, Field]:
    """Level-j piecewise-linear approximant, componentwise on Re and Im.

    Returns the spline (knot table plus slopes) and its resampling back to
    the grid.  Knot values are read off the grid exactly; the level must be
    resolvable.
    """
    if field.grid.dimension != 1:
        raise ValueError("dyadic splines are one-dimensional")
    stride = knot_stride(field.grid, level)
    vals = field.values
    knots = vals[::stride].copy()
    nxt = np.roll(knots, -1)
    slopes = (nxt - knots) * 2.0**level
    spline = DyadicSpline(level, field.grid, knots, slopes)

    frac = (np.arange(field.grid.n_points) % stride) / stride
    base = np.repeat(knots, stride)
    step = np.repeat(nxt - knots, stride)
    resampled = Field(field.grid, base + frac * step)
    return spline, resampled


def spline_derivative_samples(spline: DyadicSpline) -> np.ndarray:
    """The a.e. derivative of the spline sampled on the grid (piecewise constant)."""
    stride = knot_stride(spline.grid, spline.level)
    return np.repeat(spline.slopes, stride)


@dataclass(frozen=True)
class DiffTable:
    """Finite differences of knot values, order 1 or 2, no periodic wrap.

    Order-1 entries telescope to the endpoint difference; an order-2 entry
    equals the difference of consecutive order-1 entries.
    """

    level: int
    order: int
    entries: np.ndarray
    first_knot_index: int = 0


def finite_diffs(field: Field, level: int, order: int) -> DiffTable:
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    stride = knot_stride(field.grid, level)
    knots = field.values[::stride]
    d1 = np.diff(knots)
    entries = d1 if order == 1 else np.diff(d1)
    return DiffTable(level, order, entries)


def _plateau_interval_mask(grid: Grid, level: int) -> np.ndarray:
    """Knot intervals fully inside the window plateau.

    The outermost transition intervals of the cutoff are excluded from the
    sign-change statistics: the cutoff forces every windowed function back
    to zero there, which would register spurious monotonicity breaks.
    """
    stride = knot_stride(grid, level)
    pos = grid.coordinates()[::stride]
    n = pos.shape[0] - 1  # interval count without wrap
    lo, hi = pos[:n], pos[1:n + 1]
    bound = WINDOW_PLATEAU_FRACTION * grid.length
    return (lo >= -bound) & (hi <= bound)


def sign_change_sets(field: Field, level: int) -> dict[str, np.ndarray]:
    """Maximal-variation representatives per monotonicity run, per component.

    Partitions the plateau intervals into maximal runs on which the spline
    derivative does not change sign (zeros extend the current run) and keeps,
    for each run, the index realizing the largest |difference|.  Consecutive
    selected differences then have non-positive product by construction.
    """
    table = finite_diffs(field, level, 1)
    mask = _plateau_interval_mask(field.grid, level)
    out: dict[str, np.ndarray] = {}
    for name, comp in (("f", table.entries.real), ("g", table.entries.imag)):
        ks = np.nonzero(mask)[0]
        selected: list[int] = []
        run: list[int] = []
        run_sign = 0
        for k in ks:
            s = 0 if comp[k] == 0.0 else (1 if comp[k] > 0 else -1)
            if run and s != 0 and run_sign != 0 and s != run_sign:
                selected.append(max(run, key=lambda i: abs(comp[i])))
                run = []
                run_sign = 0
            run.append(k)
            if run_sign == 0:
                run_sign = s
        if run:
            selected.append(max(run, key=lambda i: abs(comp[i])))
        out[name] = np.asarray(selected, dtype=int)
    return out


def oswald_sum(field: Field, s: float, q: float, order: int) -> float:
    """Weighted dyadic difference sum (sum_j sum_k 2^{j(sq-1)} |Delta|^q)^{1/q}.

    Order-1 sums run over the sign-change sets Lambda_j per component;
    order-2 sums run over all interior knots.  Valid for 1 <= s < 1 + 1/q.
    """
    if not (1.0 <= s < 1.0 + 1.0 / q):
        raise ValueError(f"s = {s} outside the validity strip [1, 1 + 1/q)")
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    total = 0.0
    for j in range(max_level(field.grid) + 1):
        weight = 2.0 ** (j * (s * q - 1.0))
        if order == 1:
            table = finite_diffs(field, j, 1)
            lam = sign_change_sets(field, j)
            for name, comp in (("f", table.entries.real), ("g", table.entries.imag)):
                idx = lam[name]
                if idx.size:
                    total += weight * float(np.sum(np.abs(comp[idx]) ** q))
        else:
            table = finite_diffs(field, j, 2)
            total += weight * float(np.sum(np.abs(table.entries) ** q))
    return total ** (1.0 / q)
