"""Built-in quick checks: one line per module-level identity, runnable offline.

These are the cheap closed-form identities (eigenfunction relations,
partitions of unity, telescoping sums, exact conservation); the full
measured-bracket verification lives in the pytest suite.
"""

from __future__ import annotations

import math

import numpy as np

from . import fields as fieldlib
from .evolution import EvolutionConfig, evolve, linear_propagate, time_antiderivative, time_truncate
from .experiments import refinement_classifier
from .nonlinearity import HolderProbe, power_apply, precise_holder_probe
from .spaces import (
    admissible_pair,
    besov_norm_lp,
    critical_exponent,
    field_lq,
    modulus_of_smoothness,
    sobolev_norm,
)
from .spectral import (
    Field,
    Grid,
    SpaceTimeField,
    SymbolSpec,
    apply_symbol,
    lp_project,
    paraproduct,
    partition_defect,
    to_physical,
    to_spectrum,
)


def _grid(n: int = 1024) -> Grid:
    return Grid(n)


def check_symbol_constant_bessel():
    grid = _grid()
    c = Field(grid, np.full(grid.shape, 1.5 + 0.5j))
    out = apply_symbol(c, SymbolSpec.bessel(1.7))
    assert np.abs(out.values - (1.5 + 0.5j)).max() < 1e-12


def check_symbol_mode_riesz():
    grid = _grid()
    mode = fieldlib.pure_mode(grid, 12)
    xi = 2.0 * np.pi * 12 / grid.length
    out = apply_symbol(mode, SymbolSpec.riesz(0.6))
    assert np.abs(out.values - xi**0.6 * mode.values).max() < 1e-10


def check_roundtrip():
    grid = _grid()
    u = fieldlib.band_limited(grid, np.random.default_rng(0))
    back = to_physical(to_spectrum(u))
    assert np.abs(back.values - u.values).max() <= 1e-12 * np.abs(u.values).max()


def check_partition_of_unity():
    grid = _grid()
    u = fieldlib.band_limited(grid, np.random.default_rng(1), max_level=7)
    assert partition_defect(u) < 1e-12


def check_block_center_passthrough():
    grid = _grid()
    j = 4
    k = int(round(2.0**j * grid.length / (2.0 * np.pi)))
    mode = fieldlib.pure_mode(grid, k)
    out = lp_project(mode, "space", j, "block")
    assert np.abs(out.values - mode.values).max() < 1e-10


def check_below_then_above():
    grid = _grid()
    u = fieldlib.band_limited(grid, np.random.default_rng(2), max_level=7)
    # below 5 is supported in |xi| <= 32, above 7 in |xi| >= 64: disjoint
    low = lp_project(u, "space", 5, "below")
    both = lp_project(low, "space", 7, "above")
    assert field_lq(both, 2.0) < 1e-12 * field_lq(u, 2.0)


def check_paraproduct_constant():
    grid = _grid()
    u = fieldlib.band_limited(grid, np.random.default_rng(3), max_level=7)
    c = Field(grid, np.full(grid.shape, 2.0 + 0.0j))
    lhs = paraproduct(c, u)
    tail = u - lp_project(u, "space", 5, "below")
    assert field_lq(lhs - 2.0 * tail, 2.0) < 1e-10 * field_lq(u, 2.0)


def check_sobolev_constant():
    grid = _grid()
    c = Field(grid, np.full(grid.shape, -0.75 + 0.0j))
    for q in (1.5, 2.0, 3.0):
        val = sobolev_norm(c, 1.3, q)
        assert abs(val - 0.75 * grid.length ** (1.0 / q)) < 1e-10


def check_sobolev_mode():
    grid = _grid()
    k = 9
    mode = fieldlib.pure_mode(grid, k)
    xi = 2.0 * np.pi * k / grid.length
    expected = (1.0 + xi * xi) ** 0.6 * math.sqrt(grid.length)
    assert abs(sobolev_norm(mode, 1.2, 2.0) - expected) < 1e-9


def check_besov_r_ordering():
    grid = _grid()
    u = fieldlib.band_limited(grid, np.random.default_rng(4))
    assert besov_norm_lp(u, 0.7, 2.0, math.inf) <= besov_norm_lp(u, 0.7, 2.0, 1.0) + 1e-12


def check_modulus_affine():
    grid = _grid(2048)
    x = grid.coordinates()
    u = fieldlib.linear_ramp(grid)
    h = 2.0**-4
    shift = int(round(h / grid.spacing))
    vals = u.values.real
    # second differences of the affine stretch vanish where [x, x+2h] is in the plateau
    second = np.roll(vals, -2 * shift) - 2.0 * np.roll(vals, -shift) + vals
    plateau = (x >= -0.125 * grid.length) & (x + 2 * h <= 0.125 * grid.length)
    assert np.abs(second[plateau]).max() < 1e-12


def check_exponent_arithmetic():
    assert abs(critical_exponent(2.0, 2.0, 12) - 4.0) < 1e-14
    assert abs(critical_exponent(3.0, 2.0, 2) - 0.0) < 1e-14
    assert abs(critical_exponent(2.5, 2.0, 1) - (-5.0 / 6.0)) < 1e-14
    assert admissible_pair(math.inf, 2.0, 3)
    assert not admissible_pair(2.0, math.inf, 2)
    assert admissible_pair(6.0, 6.0, 1)


def check_power_identities():
    grid = _grid()
    u = fieldlib.band_limited(grid, np.random.default_rng(5))
    cubed = power_apply(u, 3.0)
    direct = Field(grid, u.values * u.values * np.conj(u.values))
    assert np.abs(cubed.values - direct.values).max() < 1e-13
    theta = 0.7
    rotated = power_apply(Field(grid, np.exp(1j * theta) * u.values), 2.5)
    assert np.abs(rotated.values - np.exp(1j * theta) * power_apply(u, 2.5).values).max() < 1e-14


def check_holder_trivial():
    lhs, rhs = precise_holder_probe(HolderProbe(z=1 + 1j, h=0.0, alpha1=0.7, alpha2=1, beta=0.5))
    assert lhs == 0.0
    lhs, rhs = precise_holder_probe(HolderProbe(z=0.0, h=0.3, alpha1=0.5, alpha2=1, beta=1.0))
    assert abs(lhs / rhs - 1.0) < 1e-12


def check_linear_flow():
    grid = _grid()
    u = fieldlib.gaussian_bump(grid)
    assert np.abs(linear_propagate(u, 0.0, "heat").values - u.values).max() < 1e-13
    moved = linear_propagate(u, 0.37, "schrodinger")
    assert abs(field_lq(moved, 2.0) - field_lq(u, 2.0)) < 1e-12
    k = 7
    mode = fieldlib.pure_mode(grid, k)
    xi = 2.0 * np.pi * k / grid.length
    decayed = linear_propagate(mode, 0.05, "heat")
    assert np.abs(decayed.values - math.exp(-0.05 * xi * xi) * mode.values).max() < 1e-14


def check_zero_coupling_trajectory():
    grid = _grid(512)
    u0 = fieldlib.gaussian_bump(grid)
    config = EvolutionConfig(
        equation="schrodinger", p=3.0, lambda_sign=0, dt=1e-3, t_final=2e-2,
        integrator="strang", save_every=20,
    )
    traj = evolve(u0, config)
    expected = linear_propagate(u0, 2e-2, "schrodinger")
    assert np.abs(traj.final().values - expected.values).max() < 1e-10


def check_antiderivative():
    grid = _grid(64)
    n_t = 33
    vals = np.ones((n_t,) + grid.shape, dtype=np.complex128) * (2.0 - 1.0j)
    stf = SpaceTimeField(grid, 0.01, vals, origin_index=16)
    anti = time_antiderivative(stf)
    times = stf.times()
    expected = times[:, None] * (2.0 - 1.0j)
    assert np.abs(anti.values - expected).max() < 1e-14
    assert np.abs(anti.values[16]).max() == 0.0


def check_truncation_support():
    grid = _grid(32)
    n_t = 512
    dt = 4.0 / n_t
    times = (np.arange(n_t) - n_t // 2) * dt
    profile = np.cos(1.3 * times) * np.exp(-times * times)
    vals = profile[:, None] * fieldlib.gaussian_bump(grid).values[None, :]
    stf = SpaceTimeField(grid, dt, vals, origin_index=n_t // 2)
    out = time_truncate(stf, T=1.0 / 64.0, T1=1.0 / 8.0)
    static = SpaceTimeField(grid, dt, np.repeat(vals[n_t // 2][None, :], n_t, axis=0), n_t // 2)
    static_out = time_truncate(static, T=1.0 / 64.0, T1=1.0 / 8.0)
    inner = np.abs(times) <= 1.0
    assert np.abs(static_out.values[inner] - static.values[inner]).max() < 1e-10
    assert out.values.shape == vals.shape


def check_classifier():
    assert refinement_classifier([1.0, 1.01, 1.005], band=0.05).status == "converged"
    v = refinement_classifier([1.0, 2.0, 4.0, 8.0])
    assert v.status == "diverged" and abs(v.exponent - 1.0) < 1e-12
    assert refinement_classifier([1.0, 1.5, 1.4, 2.2]).status == "inconclusive"


CHECKS = [
    check_symbol_constant_bessel,
    check_symbol_mode_riesz,
    check_roundtrip,
    check_partition_of_unity,
    check_block_center_passthrough,
    check_below_then_above,
    check_paraproduct_constant,
    check_sobolev_constant,
    check_sobolev_mode,
    check_besov_r_ordering,
    check_modulus_affine,
    check_exponent_arithmetic,
    check_power_identities,
    check_holder_trivial,
    check_linear_flow,
    check_zero_coupling_trajectory,
    check_antiderivative,
    check_truncation_support,
    check_classifier,
]


def run_selftest(verbose: bool = True) -> int:
    """Run every check; returns the number of failures."""
    failures = 0
    for check in CHECKS:
        name = check.__name__.removeprefix("check_")
        try:
            check()
        except Exception as err:  # report and continue
            failures += 1
            if verbose:
                print(f"FAIL {name}: {err}")
        else:
            if verbose:
                print(f"PASS {name}")
    if verbose:
        print(f"{len(CHECKS) - failures}/{len(CHECKS)} checks passed")
    return failures
