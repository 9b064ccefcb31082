"""The rough power nonlinearity |u|^{p-1} u and its derivative structure.

``leading_pieces`` evaluates the two extreme monomials of the m-th spatial
derivative of the power map,

    N  = C1 |u|^{p+1-2m} u_x Re(conj(u) u_x)^{m-1},
    N' = C2 |u|^{p-1-2m} u  Re(conj(u) u_x)^m,

whose coefficients follow from iterating the chain rule and keeping only the
terms where every derivative lands at first order:

    C1(m) = m * prod_{i=1}^{m-1} (p - 2i + 1),   C2(m) = prod_{i=1}^{m} (p - 2i + 1).

For m = 1 this is exact (the residual vanishes identically); for m >= 2 the
residual carries a better distribution of derivatives.  C1 + C2 =
C2(m-1) * (p - m + 1), nonzero for the powers in scope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spaces import sobolev_norm
from .spectral import Field, SymbolSpec, to_spectrum

ZERO_SET_FLOOR = 1e-12
MASK_FRACTION_LIMIT = 0.10
DEFAULT_EPS = 0.05


def smallest_piece_order(s: float) -> int:
    """The smallest integer m with 0 <= s - m < 1."""
    return int(math.floor(s))


@dataclass(frozen=True)
class PowerLaw:
    """Power nonlinearity lambda |u|^{p-1} u with optional derivative order m."""

    p: float
    coupling: complex = 1.0
    m: int | None = None

    def __post_init__(self):
        if self.p <= 1:
            raise ValueError("p must exceed 1")
        if self.coupling == 0:
            raise ValueError("coupling must be nonzero")


@dataclass(frozen=True)
class HolderProbe:
    """Sample point for the two-sided Holder inequality on power differences.

    Constraints: alpha1 + alpha2 = alpha with alpha2 an integer, and
    0 <= beta <= 1.
    """

    z: complex
    h: complex
    alpha1: float
    alpha2: int
    beta: float

    def __post_init__(self):
        if not (0.0 <= self.beta <= 1.0):
            raise ValueError("beta must lie in [0, 1]")
        if self.alpha2 != int(self.alpha2):
            raise ValueError("alpha2 must be an integer")

    @property
    def alpha(self) -> float:
        return self.alpha1 + self.alpha2


def power_apply(field: Field, p: float, coupling: complex = 1.0) -> Field:
    """Pointwise lambda |u|^{p-1} u (zero where u vanishes; well-defined for p > 1)."""
    if p <= 1:
        raise ValueError("p must exceed 1")
    mag = np.abs(field.values)
    return Field(field.grid, coupling * mag ** (p - 1.0) * field.values)


def _abs_power(z: complex, a: float) -> float:
    m = abs(z)
    if m == 0.0:
        if a > 0:
            return 0.0
        if a == 0:
            return 1.0
        return math.inf
    return m**a


def precise_holder_probe(probe: HolderProbe) -> tuple[float, float]:
    """Evaluate (lhs, rhs) of the precise Holder bound

        | |z+h|^{a1} (z+h)^{a2} - |z|^{a1} z^{a2} | / |h|^beta
            <= C * ( |z+h|^{alpha-beta} + |z|^{alpha-beta} );

    the caller asserts lhs <= C * rhs.  An infinite rhs (zero base with a
    negative exponent) is reported as is and counts as a vacuous pass.
    """
    z, h = probe.z, probe.h
    a1, a2, beta = probe.alpha1, int(probe.alpha2), probe.beta

    def branch(w: complex) -> complex:
        mag = _abs_power(w, a1)
        if math.isinf(mag):
            return complex(math.inf, 0.0)
        if w == 0 and a2 < 0:
            return complex(math.inf, 0.0)
        return mag * w**a2

    bz, bzh = branch(z), branch(z + h)
    if math.isinf(abs(bz)) or math.isinf(abs(bzh)):
        return math.inf, math.inf
    num = abs(bzh - bz)
    if h == 0:
        lhs = 0.0 if num == 0.0 else math.inf
    else:
        lhs = num / abs(h) ** beta
    rhs = _abs_power(z + h, probe.alpha - beta) + _abs_power(z, probe.alpha - beta)
    return lhs, rhs


def holder_ratio_scan(
    n_samples: int,
    seed: int,
    alpha_range: tuple[float, float] = (-2.0, 3.0),
) -> float:
    """Monte-Carlo maximum of lhs/rhs over random probes; the measured constant."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_samples):
        alpha = rng.uniform(*alpha_range)
        alpha2 = int(rng.integers(-2, 3))
        probe = HolderProbe(
            z=complex(rng.standard_normal(), rng.standard_normal()),
            h=complex(rng.standard_normal(), rng.standard_normal()),
            alpha1=alpha - alpha2,
            alpha2=alpha2,
            beta=float(rng.uniform(0.0, 1.0)),
        )
        lhs, rhs = precise_holder_probe(probe)
        if math.isinf(rhs) or rhs == 0.0:
            continue
        worst = max(worst, lhs / rhs)
    return worst


def piece_coefficients(m: int, p: float) -> tuple[float, float]:
    """(C1, C2) for the two leading pieces at derivative order m."""
    if m < 1:
        raise ValueError("m must be >= 1")
    c1 = float(m)
    for i in range(1, m):
        c1 *= p - 2.0 * i + 1.0
    c2 = 1.0
    for i in range(1, m + 1):
        c2 *= p - 2.0 * i + 1.0
    return c1, c2


def leading_pieces_sampled(
    values: np.ndarray, deriv: np.ndarray, m: int, p: float
) -> tuple[np.ndarray, np.ndarray, float]:
    """Evaluate N and N' from samples of u and u_x; returns (N, N', mask fraction).

    Points with |u| below ZERO_SET_FLOOR * max|u| are masked to zero wherever
    a negative power of |u| appears; both pieces tend to zero there anyway
    for the exponents in scope.
    """
    c1, c2 = piece_coefficients(m, p)
    mag = np.abs(values)
    floor = ZERO_SET_FLOOR * max(mag.max(), 1e-300)
    masked = mag < floor
    safe = np.where(masked, 1.0, mag)
    re_pair = np.real(np.conj(values) * deriv)
    n_vals = c1 * safe ** (p + 1.0 - 2.0 * m) * deriv * re_pair ** (m - 1)
    np_vals = c2 * safe ** (p - 1.0 - 2.0 * m) * values * re_pair**m
    needs_mask = (p + 1.0 - 2.0 * m < 0.0) or (p - 1.0 - 2.0 * m < 0.0)
    if needs_mask:
        n_vals = np.where(masked, 0.0, n_vals)
        np_vals = np.where(masked, 0.0, np_vals)
    frac = float(np.count_nonzero(masked) / masked.size) if needs_mask else 0.0
    return n_vals, np_vals, frac


def spectral_derivative(field: Field, order: int = 1) -> np.ndarray:
    xi = field.grid.axis_frequencies()
    coeffs = to_spectrum(field).coefficients
    return np.fft.ifftn(coeffs * (1j * xi) ** order, norm="forward")


@dataclass(frozen=True)
class LeadingPieces:
    """The two extreme monomials of d^m/dx^m (|u|^{p-1} u) plus the residual proxy."""

    n: Field
    n_prime: Field
    residual: Field
    mask_fraction: float
    unreliable: bool


def leading_pieces(u: Field, m: int, p: float) -> LeadingPieces:
    """Leading pieces with u_x by spectral differentiation.

    The residual is the full spectral m-th derivative of the power map minus
    N + N' -- the proxy for the better-derivative-distribution remainder
    (identically zero for m = 1 up to spectral accuracy).  A mask fraction
    above MASK_FRACTION_LIMIT marks the result unreliable.
    """
    if u.grid.dimension != 1:
        raise ValueError("leading pieces are one-dimensional")
    deriv = spectral_derivative(u)
    n_vals, np_vals, frac = leading_pieces_sampled(u.values, deriv, m, p)
    full = spectral_derivative(power_apply(u, p), order=m)
    residual = full - n_vals - np_vals
    return LeadingPieces(
        n=Field(u.grid, n_vals),
        n_prime=Field(u.grid, np_vals),
        residual=Field(u.grid, residual),
        mask_fraction=frac,
        unreliable=frac > MASK_FRACTION_LIMIT,
    )


def estimate_ratio_main(
    field: Field, p: float, s: float, q: float, eps: float = DEFAULT_EPS
) -> float:
    """Superposition-estimate ratio

        || |u|^{p-1} u ||_{W^{s,q}} / ( ||u||_{W^{1/q+eps,q}}^{p-1} ||u||_{W^{s,q}} ).

    Bounded under refinement inside the strip p <= s < p + 1/q; divergence
    probes above the strip are accepted as well.
    """
    lhs = sobolev_norm(power_apply(field, p), s, q)
    low = sobolev_norm(field, 1.0 / q + eps, q)
    high = sobolev_norm(field, s, q)
    denom = low ** (p - 1.0) * high
    if denom == 0.0:
        raise ZeroDivisionError("estimate ratio undefined for the zero field")
    return lhs / denom


def estimate_ratio_heat(
    field: Field,
    p: float,
    s: float,
    q: float,
    s0: float,
    flavor: str = "plus",
    eps: float = DEFAULT_EPS,
) -> float:
    """Two-derivative-gain ratio || |u|^{p-1}u ||_{W^{s-2 +- eps, q}} / (||u||_{s0}^{p-1} ||u||_s).

    Requires s0 >= max(2, s_c) and s0 <= s < p + 2 + 1/q; ``flavor``
    selects the +eps or -eps left-hand regularity (the latter admits the
    critical s0).
    """
    if flavor not in ("plus", "minus"):
        raise ValueError("flavor must be 'plus' or 'minus'")
    if s0 < 2.0:
        raise ValueError("s0 must be at least 2")
    if not (s0 <= s < p + 2.0 + 1.0 / q):
        raise ValueError("require s0 <= s < p + 2 + 1/q")
    shift = eps if flavor == "plus" else -eps
    lhs = sobolev_norm(power_apply(field, p), s - 2.0 + shift, q)
    denom = sobolev_norm(field, s0, q) ** (p - 1.0) * sobolev_norm(field, s, q)
    if denom == 0.0:
        raise ZeroDivisionError("estimate ratio undefined for the zero field")
    return lhs / denom


def interp_exponents(p: float, s: float, eps: float = DEFAULT_EPS) -> tuple[float, float]:
    """Interpolation exponents ((2s-p-1)/2 + eps, (3p-2s+1)/2 - eps); they sum to p."""
    return (2.0 * s - p - 1.0) / 2.0 + eps, (3.0 * p - 2.0 * s + 1.0) / 2.0 - eps


def estimate_ratio_interp(field: Field, p: float, s: float, eps: float = DEFAULT_EPS) -> float:
    """Interpolated piece estimate || (N, N') ||_{H^{s-2}} / ( ||u||_{H^2}^a ||u||_{H^1}^b )

    with (a, b) from :func:`interp_exponents`; valid for p > 3/2, 2 < s < 3,
    p <= s < p + 1/2.
    """
    if not (p > 1.5):
        raise ValueError("require p > 3/2")
    if not (2.0 < s < 3.0):
        raise ValueError("require 2 < s < 3")
    if not (p <= s < p + 0.5):
        raise ValueError("require p <= s < p + 1/2")
    pieces = leading_pieces(field, m=2, p=p)
    lhs = math.hypot(
        sobolev_norm(pieces.n, s - 2.0, 2.0),
        sobolev_norm(pieces.n_prime, s - 2.0, 2.0),
    )
    a, b = interp_exponents(p, s, eps)
    denom = sobolev_norm(field, 2.0, 2.0) ** a * sobolev_norm(field, 1.0, 2.0) ** b
    if denom == 0.0:
        raise ZeroDivisionError("estimate ratio undefined for the zero field")
    return lhs / denom
