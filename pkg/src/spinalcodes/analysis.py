"""Closed-form BLER analysis for spinal codes over AWGN and fading channels.

Three layers build on each other:

1. ``fading_exp_moment`` — the fading-averaged Gaussian kernel
   E_H[exp(-a |H|^2)] in closed form per channel model.
2. ``bler_upper_bound`` — finite-blocklength union bound evaluated through a
   quadrature over angles theta in (0, pi/2], with the pairwise sum over
   constellation points collapsed onto the distance spectrum.
3. ``error_floor`` / ``snr_threshold`` — the sigma -> 0 limit of the bound,
   and the closed-form SNR at which the bound curve flattens onto it.

Numerical policy: per-segment union terms are handled in the log2 domain
(exponents like 2^(n - ak - L_a c - 1) underflow doubles long before the
parameters stop being interesting), and products of (1 - eps) go through
log1p/expm1.  The floor and the sigma2 = 0 bound share the same code path
for the per-segment coefficient and the final product, so they agree
bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channel import ChannelModel
from .codec import CodeParams, Constellation, build_constellation


# ---------------------------------------------------------------------------
# Quadrature over (0, pi/2]
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class QuadratureScheme:
    """Angles theta_0 = 0 < theta_1 < ... < theta_N = pi/2 and weights
    b_t = (theta_t - theta_{t-1}) / pi."""

    angles: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        ang = np.asarray(self.angles, dtype=np.float64)
        w = np.asarray(self.weights, dtype=np.float64)
        if ang.ndim != 1 or ang.size < 2 or w.shape != (ang.size - 1,):
            raise ValueError("need N+1 angles and N weights with N >= 1")
        if ang[0] != 0.0 or ang[-1] != np.pi / 2:
            raise ValueError("angles must start at 0 and end at pi/2")
        if np.any(np.diff(ang) <= 0):
            raise ValueError("angles must be strictly increasing")
        if np.max(np.abs(w - np.diff(ang) / np.pi)) > 1e-12:
            raise ValueError("weights must equal (theta_t - theta_{t-1}) / pi")
        if abs(math.fsum(w) - 0.5) > 1e-15:
            raise ValueError("quadrature weights must sum to 1/2")
        ang.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "angles", ang)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_angles(cls, angles) -> "QuadratureScheme":
        ang = np.asarray(angles, dtype=np.float64)
        return cls(angles=ang, weights=np.diff(ang) / np.pi)

    @property
    def n_points(self) -> int:
        return self.weights.size


def quadrature_uniform(n_points: int) -> QuadratureScheme:
    """Uniform partition theta_t = t pi / (2N); every weight is 1/(2N)."""
    if n_points < 1:
        raise ValueError(f"n_points must be >= 1, got {n_points}")
    angles = np.linspace(0.0, np.pi / 2, n_points + 1)
    weights = np.full(n_points, 1.0 / (2 * n_points))
    return QuadratureScheme(angles=angles, weights=weights)


DEFAULT_QUADRATURE_POINTS = 64


def default_scheme() -> QuadratureScheme:
    return quadrature_uniform(DEFAULT_QUADRATURE_POINTS)


# ---------------------------------------------------------------------------
# Fading-averaged Gaussian kernel
# ---------------------------------------------------------------------------

def fading_exp_moment(model: ChannelModel, a):
    """E_H[exp(-a |H|^2)] in closed form; a is a scalar or ndarray >= 0.

    awgn      exp(-a)
    rayleigh  1 / (1 + a)          (|H|^2 ~ Exp(1))
    nakagami  (m / (m + a))^m      (|H|^2 ~ Gamma(m, 1/m))
    """
    a = np.asarray(a, dtype=np.float64)
    if np.any(a < 0):
        raise ValueError("exponent scale a must be >= 0")
    if model.kind == "awgn":
        out = np.exp(-a)
    elif model.kind == "rayleigh":
        out = 1.0 / (1.0 + a)
    else:
        out = (model.m / (model.m + a)) ** model.m
    if out.ndim == 0:
        return float(out)
    return out


def pairwise_expectation(model: ChannelModel, delta2: float, sigma2: float,
                         theta: float) -> float:
    """One pairwise term of the bound: E_H[exp(-|H|^2 delta2 / (4 sigma2 sin^2 theta))].

    Returns 1 when delta2 = 0.  At sigma2 = 0 with delta2 > 0 the exact
    limit 0 is returned (this is the collision/no-collision split that
    produces the error floor).
    """
    if delta2 < 0:
        raise ValueError(f"squared distance must be >= 0, got {delta2}")
    if not 0.0 < theta <= np.pi / 2:
        raise ValueError(f"theta must be in (0, pi/2], got {theta}")
    if sigma2 < 0:
        raise ValueError(f"sigma2 must be >= 0, got {sigma2}")
    if delta2 == 0.0:
        return 1.0
    if sigma2 == 0.0:
        return 0.0
    a = delta2 / (4.0 * sigma2 * math.sin(theta) ** 2)
    return float(fading_exp_moment(model, a))


# ---------------------------------------------------------------------------
# Distance spectrum of the square QAM grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DistanceSpectrum:
    """Ordered-pair multiplicities A_d over the finite distance set of the grid.

    Distances are d_min * sqrt(q) for integer q = dx^2 + dy^2, so bucketing
    is exact (no float quantization involved).
    """

    c: int
    d_min: float
    sq_multiples: np.ndarray  # sorted unique q = (d / d_min)^2, integers
    counts: np.ndarray        # A_d as int64, aligned with sq_multiples

    @property
    def distances(self) -> np.ndarray:
        return self.d_min * np.sqrt(self.sq_multiples.astype(np.float64))

    @property
    def total_pairs(self) -> int:
        return int(self.counts.sum())

    def as_dict(self) -> dict[float, int]:
        return {float(d): int(a) for d, a in zip(self.distances, self.counts)}


@lru_cache(maxsize=64)
def distance_spectrum(psi: Constellation) -> DistanceSpectrum:
    """Exact multiplicity of every ordered point pair at each grid distance.

    Enumerates offset classes (dx, dy): an offset occurs
    (side - |dx|) * (side - |dy|) times, which is an exhaustive ordered-pair
    count in O(4^(c/2)) instead of O(4^c).
    """
    side = 1 << (psi.c // 2)
    d = np.arange(-(side - 1), side)
    occ = (side - np.abs(d)).astype(np.int64)
    q = (d * d)[:, None] + (d * d)[None, :]
    mult = occ[:, None] * occ[None, :]
    counts = np.bincount(q.ravel(), weights=mult.ravel()).astype(np.int64)
    qs = np.nonzero(counts)[0]
    return DistanceSpectrum(
        c=psi.c,
        d_min=psi.d_min,
        sq_multiples=qs,
        counts=counts[qs],
    )


def g_value(psi: Constellation, sigma2: float, theta: float,
            model: ChannelModel) -> float:
    """Sum over all ordered pairs (beta_i, beta_j) of the pairwise expectation.

    Evaluated through the distance spectrum: sum_d A_d E_H[exp(-|H d|^2 /
    (4 sigma2 sin^2 theta))].  Ranges from 2^c (sigma2 -> 0, only the A_0
    zero-distance pairs survive) up to 2^(2c) (sigma2 -> inf).
    """
    if not 0.0 < theta <= np.pi / 2:
        raise ValueError(f"theta must be in (0, pi/2], got {theta}")
    spec = distance_spectrum(psi)
    if sigma2 == 0.0:
        return float(spec.counts[0])
    delta2 = spec.sq_multiples * (psi.d_min * psi.d_min)
    a = delta2 / (4.0 * sigma2 * math.sin(theta) ** 2)
    return float(np.dot(spec.counts.astype(np.float64),
                        fading_exp_moment(model, a)))


# ---------------------------------------------------------------------------
# The bound kernel F, per-segment terms, bound, and floor
# ---------------------------------------------------------------------------

def _logsumexp2(x: np.ndarray) -> float:
    m = float(np.max(x))
    if not math.isfinite(m):
        return m
    return m + float(np.log2(np.sum(np.exp2(x - m))))


def _log2_f_from_g(log2_weights: np.ndarray, log2_g: np.ndarray,
                   l_a: int, c: int) -> float:
    """log2 of F(L_a, sigma) given per-angle log2 G values."""
    return _logsumexp2(log2_weights + l_a * (log2_g - 2 * c))


def f_term(l_a: int, sigma2: float, psi: Constellation,
           scheme: QuadratureScheme, model: ChannelModel) -> float:
    """F(L_a, sigma) = sum_t b_t (2^(-2c) G(theta_t))^L_a.

    Monotone non-decreasing in sigma2; its sigma2 = 0 value is exactly
    2^(-L_a c - 1) for every channel model.
    """
    if l_a < 1:
        raise ValueError(f"L_a must be >= 1, got {l_a}")
    log2_g = np.log2([
        g_value(psi, sigma2, t, model) for t in scheme.angles[1:]
    ])
    return 2.0 ** _log2_f_from_g(np.log2(scheme.weights), log2_g, l_a, psi.c)


@dataclass(frozen=True)
class BoundResult:
    """Union-bound BLER: the product form plus its per-segment clamped terms."""

    p_e_upper: float
    per_segment_terms: tuple[float, ...]
    l_values: tuple[int, ...]


@dataclass(frozen=True)
class FloorResult:
    """Error floor (the sigma -> 0 limit of the bound)."""

    p_ef: float
    per_segment_terms: tuple[float, ...]
    l_values: tuple[int, ...]


def passes_remaining(params: CodeParams) -> tuple[int, ...]:
    """L_a = L (n/k - a + 1) for a = 1..n/k."""
    rows = params.n_segments
    return tuple(params.L * (rows - a + 1) for a in range(1, rows + 1))


def _segment_log2_coeff(params: CodeParams, a: int) -> float:
    """log2 of the union multiplicity (2^k - 1) 2^(n - ak) for segment a."""
    return math.log2((1 << params.k) - 1) + (params.n - a * params.k)


def _clamped_term(log2_term: float) -> float:
    """min(1, 2^log2_term) without leaving the log domain prematurely."""
    if log2_term >= 0.0:
        return 1.0
    return 2.0 ** log2_term


def _combine_segments(terms) -> float:
    """1 - prod_a (1 - eps_a), accumulated as sum of log1p(-eps_a)."""
    acc = 0.0
    for eps in terms:
        if eps >= 1.0:
            return 1.0
        acc += math.log1p(-eps)
    return -math.expm1(acc)


def bler_upper_bound(params: CodeParams, sigma2: float, model: ChannelModel,
                     scheme: QuadratureScheme | None = None) -> BoundResult:
    """Finite-blocklength BLER upper bound at noise variance sigma2.

    P_e <= 1 - prod_a (1 - min{1, (2^k - 1) 2^(n - ak) F(L_a, sigma)}).
    """
    if sigma2 < 0:
        raise ValueError(f"sigma2 must be >= 0, got {sigma2}")
    if scheme is None:
        scheme = default_scheme()
    psi = build_constellation(params.c, params.d_min)
    log2_w = np.log2(scheme.weights)
    log2_g = np.log2([
        g_value(psi, sigma2, t, model) for t in scheme.angles[1:]
    ])
    l_values = passes_remaining(params)
    terms = []
    for a, l_a in enumerate(l_values, start=1):
        log2_f = _log2_f_from_g(log2_w, log2_g, l_a, params.c)
        terms.append(_clamped_term(_segment_log2_coeff(params, a) + log2_f))
    return BoundResult(
        p_e_upper=_combine_segments(terms),
        per_segment_terms=tuple(terms),
        l_values=l_values,
    )


def error_floor(params: CodeParams) -> FloorResult:
    """Residual BLER as SNR -> infinity (hash/RNG codeword collisions).

    P_EF = 1 - prod_a (1 - min{1, (2^k - 1) 2^(n - ak - L_a c - 1)}),
    evaluated in the log2 domain.  Bit-identical to
    ``bler_upper_bound(params, 0.0, ...)`` by construction.
    """
    l_values = passes_remaining(params)
    terms = []
    for a, l_a in enumerate(l_values, start=1):
        log2_f = float(-1.0 - l_a * params.c)
        terms.append(_clamped_term(_segment_log2_coeff(params, a) + log2_f))
    return FloorResult(
        p_ef=_combine_segments(terms),
        per_segment_terms=tuple(terms),
        l_values=l_values,
    )


# ---------------------------------------------------------------------------
# SNR threshold of the error floor
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThresholdResult:
    """SNR at which the BLER curve flattens onto the floor.

    Depends only on the channel model, the modulation order c, and the
    precision constant x; in particular it never reads n, k, or L.
    """

    gamma_th_linear: float
    gamma_th_db: float
    x: float
    model: ChannelModel


def snr_threshold(model: ChannelModel, c: int, x: float = 0.01) -> ThresholdResult:
    """Closed-form SNR threshold: the gamma solving
    4 E_H[exp(-3 |H|^2 gamma / (2 (2^c - 1)))] = x.

    nakagami  (2 m (2^c - 1) / 3) ((4/x)^(1/m) - 1)
    rayleigh  (2 (2^c - 1) / 3) ((4/x) - 1)
    awgn      (2 (2^c - 1) / 3) ln(4/x)
    """
    if c % 2 != 0 or not 2 <= c <= 16:
        raise ValueError(f"c must be even in [2, 16], got {c}")
    if not 0.0 < x < 4.0:
        raise ValueError(f"precision constant x must be in (0, 4), got {x}")
    base = 2.0 * ((1 << c) - 1) / 3.0
    if model.kind == "awgn":
        gamma = base * math.log(4.0 / x)
    elif model.kind == "rayleigh":
        gamma = base * (4.0 / x - 1.0)
    else:
        gamma = model.m * base * ((4.0 / x) ** (1.0 / model.m) - 1.0)

    # Round-trip consistency: the closed forms invert the defining condition.
    back = 4.0 * fading_exp_moment(model, 3.0 * gamma / (2.0 * ((1 << c) - 1)))
    if abs(back - x) > 1e-9 * x:
        raise ArithmeticError(
            f"threshold round-trip failed: 4 E[...] = {back!r}, expected {x!r}"
        )
    return ThresholdResult(
        gamma_th_linear=gamma,
        gamma_th_db=10.0 * math.log10(gamma),
        x=x,
        model=model,
    )
