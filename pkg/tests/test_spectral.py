"""Spectral core: multipliers, dyadic projections, paraproducts, modulation."""

import math

import numpy as np
import pytest

from roughlab import fields as fieldlib
from roughlab.spaces import field_lq
from roughlab.spectral import (
    Field,
    Grid,
    SpaceTimeField,
    SymbolRangeError,
    SymbolSpec,
    apply_symbol,
    bump_below,
    bump_block,
    lp_project,
    modulation_energy_split,
    modulation_project,
    paraproduct,
    paraproduct_remainder,
    partition_defect,
    to_physical,
    to_spectrum,
)

GRID = Grid(4096)
RNG = np.random.default_rng(20240811)


def rel_l2(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


class TestGridAndField:
    def test_grid_rejects_non_power_of_two(self):
        with pytest.raises(ValueError):
            Grid(3000)

    def test_grid_rejects_bad_dimension(self):
        with pytest.raises(ValueError):
            Grid(64, dimension=3)

    def test_field_rejects_nonfinite(self):
        vals = np.zeros(64, dtype=complex)
        vals[3] = np.nan
        with pytest.raises(ValueError):
            Field(Grid(64), vals)

    def test_component_accessors(self):
        u = fieldlib.band_limited(GRID, RNG)
        assert np.array_equal(u.f + 1j * u.g, u.values)

    def test_roundtrip_identity(self):
        u = fieldlib.band_limited(GRID, RNG)
        back = to_physical(to_spectrum(u))
        assert rel_l2(back.values, u.values) < 1e-12

    def test_window_tail_mass(self):
        assert fieldlib.tail_mass_fraction(fieldlib.linear_ramp(GRID)) < 1e-10
        assert fieldlib.tail_mass_fraction(fieldlib.band_limited(GRID, RNG)) < 1e-10


class TestApplySymbol:
    def test_constant_bessel_identity(self):
        c = Field(GRID, np.full(GRID.shape, 2.5 - 1.0j))
        out = apply_symbol(c, SymbolSpec.bessel(1.9))
        assert np.abs(out.values - (2.5 - 1.0j)).max() < 1e-12

    def test_pure_mode_riesz_eigenvalue(self):
        k = 37
        mode = fieldlib.pure_mode(GRID, k)
        xi = 2 * np.pi * k / GRID.length
        out = apply_symbol(mode, SymbolSpec.riesz(0.8))
        assert rel_l2(out.values, xi**0.8 * mode.values) < 1e-12

    def test_heat_matches_quadrature_convolution(self):
        # oracle: direct convolution with the explicit Gaussian kernel
        t = 0.01
        u = fieldlib.gaussian_bump(GRID, width=0.5)
        x = GRID.coordinates()
        n = GRID.n_points
        kernel = (4 * np.pi * t) ** -0.5 * np.exp(-(x**2) / (4 * t))
        # w(x_i) = h * sum_j u(x_j) K(x_i - x_j): index i + n/2 of the full convolution
        full = np.convolve(u.values.real, kernel)
        direct = GRID.spacing * full[n // 2 : n // 2 + n]
        out = apply_symbol(u, SymbolSpec.heat(t))
        assert rel_l2(out.values.real, direct) < 1e-8

    def test_linear_in_field(self):
        u = fieldlib.band_limited(GRID, RNG)
        v = fieldlib.band_limited(GRID, RNG)
        spec = SymbolSpec.bessel(0.7)
        lhs = apply_symbol(Field(GRID, u.values + 2j * v.values), spec)
        rhs = apply_symbol(u, spec).values + 2j * apply_symbol(v, spec).values
        assert rel_l2(lhs.values, rhs) < 1e-12

    def test_overflow_reports_frequency(self):
        u = fieldlib.band_limited(GRID, RNG, max_level=9)
        with pytest.raises(SymbolRangeError, match=r"\|xi\|"):
            apply_symbol(u, SymbolSpec.bessel(400.0))

    def test_multiplier_composition(self):
        u = fieldlib.band_limited(GRID, RNG)
        s1, s2 = 0.9, -0.4
        chained = apply_symbol(apply_symbol(u, SymbolSpec.bessel(s2)), SymbolSpec.bessel(s1))
        direct = apply_symbol(u, SymbolSpec.bessel(s1 + s2))
        assert rel_l2(chained.values, direct.values) < 1e-12

    def test_backward_heat_rejected(self):
        u = fieldlib.gaussian_bump(GRID)
        with pytest.raises(ValueError):
            apply_symbol(u, SymbolSpec.heat(-0.1))


class TestLittlewoodPaley:
    def test_partition_of_unity(self):
        u = fieldlib.band_limited(GRID, RNG, max_level=8)
        assert partition_defect(u) < 1e-12

    def test_block_center_mode_unchanged(self):
        j = 5
        k = int(round(2.0**j * GRID.length / (2 * np.pi)))
        mode = fieldlib.pure_mode(GRID, k)
        out = lp_project(mode, "space", j, "block")
        assert rel_l2(out.values, mode.values) < 1e-10

    def test_below_above_disjoint_when_separated(self):
        u = fieldlib.band_limited(GRID, RNG, max_level=8)
        low = lp_project(u, "space", 4, "below")
        leftover = lp_project(low, "space", 6, "above")
        assert field_lq(leftover, 2.0) < 1e-12 * field_lq(u, 2.0)

    def test_below_above_overlap_matches_symbol_sum(self):
        # oracle: overlap mass by direct symbol summation on the lattice
        j = 6
        u = fieldlib.band_limited(GRID, RNG, max_level=8)
        coeffs = to_spectrum(u).coefficients
        mag = GRID.frequency_magnitude()
        overlap_symbol = bump_below(mag, j) * (1.0 - bump_below(mag, j))
        predicted = np.sqrt(GRID.spacing * GRID.n_points * np.sum(
            np.abs(overlap_symbol * coeffs) ** 2))
        composed = lp_project(lp_project(u, "space", j, "below"), "space", j, "above")
        assert abs(field_lq(composed, 2.0) - predicted) < 1e-10 * max(predicted, 1.0)

    def test_truncation_flag_above_nyquist(self):
        out, truncated = lp_project(
            fieldlib.band_limited(GRID, RNG), "space", 14, "block", return_truncated=True
        )
        assert truncated
        assert np.abs(out.values).max() < 1e-12

    def test_time_axis_projection(self):
        grid = Grid(64)
        n_t = 128
        dt = 0.05
        times = (np.arange(n_t) - n_t // 2) * dt
        omega = 8.0  # block 3 in tau
        vals = np.exp(1j * omega * times)[:, None] * fieldlib.gaussian_bump(grid).values[None, :]
        stf = SpaceTimeField(grid, dt, vals, origin_index=n_t // 2)
        kept = lp_project(stf, "time", 3, "block")
        removed = lp_project(stf, "time", 6, "block")
        assert np.linalg.norm(kept.values) > 0.9 * np.linalg.norm(vals)
        assert np.linalg.norm(removed.values) < 0.05 * np.linalg.norm(vals)


class TestParaproduct:
    def test_constant_low_factor(self):
        u = fieldlib.band_limited(GRID, RNG, max_level=8)
        c = Field(GRID, np.full(GRID.shape, 3.0 + 0.0j))
        lhs = paraproduct(c, u)
        tail = u - lp_project(u, "space", 5, "below")
        assert rel_l2(lhs.values, 3.0 * tail.values) < 1e-10

    def test_low_frequency_high_input_vanishes(self):
        # u supported in |xi| <= 1: every P_k u with k >= 2 vanishes
        coeffs = np.zeros(GRID.shape, dtype=complex)
        mag = GRID.frequency_magnitude()
        sel = mag <= 1.0
        coeffs[sel] = RNG.standard_normal(int(sel.sum())) + 1j * RNG.standard_normal(int(sel.sum()))
        u = Field(GRID, np.fft.ifftn(coeffs, norm="forward"))
        v = fieldlib.band_limited(GRID, RNG, max_level=8)
        out = paraproduct(v, u)
        assert field_lq(out, 2.0) < 1e-12 * field_lq(u, 2.0)

    def test_trichotomy_reconstructs_product(self):
        # oracle: direct pointwise product against paraproducts + diagonal sum
        u = fieldlib.band_limited(GRID, RNG, max_level=6)
        v = fieldlib.band_limited(GRID, RNG, max_level=6)
        mag = GRID.frequency_magnitude()
        u_hat = to_spectrum(u).coefficients
        v_hat = to_spectrum(v).coefficients
        jmax = GRID.max_block()
        diagonal = np.zeros(GRID.shape, dtype=complex)
        for k in range(jmax + 1):
            pk_u = np.fft.ifftn(u_hat * bump_block(mag, k), norm="forward")
            for l in range(max(0, k - 4), min(jmax, k + 4) + 1):
                pl_v = np.fft.ifftn(v_hat * bump_block(mag, l), norm="forward")
                diagonal += pk_u * pl_v
        remainder = paraproduct_remainder(u, v)
        assert rel_l2(remainder.values, diagonal) < 1e-10
        product = u.values * v.values
        recon = paraproduct(u, v).values + paraproduct(v, u).values + remainder.values
        assert rel_l2(recon, product) < 1e-10


def plane_wave_stack(grid: Grid, k_mode: int, n_t: int = 512, span: float = 4.0) -> SpaceTimeField:
    """Tapered discretization of e^{i(xi0 x - xi0^2 t)} on [-span/2, span/2)."""
    dt = span / n_t
    times = (np.arange(n_t) - n_t // 2) * dt
    x = grid.coordinates()
    xi0 = 2 * np.pi * k_mode / grid.length
    taper = np.exp(-((times / 1.1) ** 2))
    vals = taper[:, None] * np.exp(1j * (xi0 * x[None, :] - xi0**2 * times[:, None]))
    return SpaceTimeField(grid, dt, vals, origin_index=n_t // 2)


class TestModulation:
    def test_plane_wave_is_near(self):
        stf = plane_wave_stack(Grid(512), k_mode=20)
        near = modulation_project(stf, "near")
        frac = np.linalg.norm(near.values) ** 2 / np.linalg.norm(stf.values) ** 2
        assert frac >= 0.99

    def test_plane_wave_far_fraction_small(self):
        stf = plane_wave_stack(Grid(512), k_mode=20)
        far = modulation_project(stf, "far")
        frac = np.linalg.norm(far.values) ** 2 / np.linalg.norm(stf.values) ** 2
        assert frac <= 0.01

    def test_static_high_frequency_is_far(self):
        grid = Grid(512)
        n_t = 64
        mode = fieldlib.pure_mode(grid, 81)  # |xi| ~ 2^5
        vals = np.repeat(mode.values[None, :], n_t, axis=0)
        stf = SpaceTimeField(grid, 0.05, vals, origin_index=n_t // 2)
        near, far, total = modulation_energy_split(stf)
        assert far / total >= 0.99

    def test_energy_completeness(self):
        stf = plane_wave_stack(Grid(256), k_mode=11, n_t=128)
        near, far, total = modulation_energy_split(stf)
        assert abs((near + far) - total) <= 1e-10 * total

    def test_identity_reproduction(self):
        stf = plane_wave_stack(Grid(256), k_mode=7, n_t=128)
        near = modulation_project(stf, "near")
        far = modulation_project(stf, "far")
        recon = near.values + far.values
        assert rel_l2(recon, stf.values) < 1e-12

    def test_short_window_rejected(self):
        grid = Grid(64)
        vals = np.zeros((4,) + grid.shape, dtype=complex)
        vals[0, 0] = 1.0
        stf = SpaceTimeField(grid, 0.1, vals, origin_index=0)
        with pytest.raises(ValueError):
            modulation_project(stf, "near")
