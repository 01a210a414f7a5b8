"""
Closed-Form Analysis

Outage-probability machinery for DF-MSC-opt and the high-SNR tradeoffs of
every scheme:
- phi / phi_at_alpha / phi_derivative: probability that fewer than K relays
  have decoded after a fraction alpha of the codeword, and its slope
- outage_upper_bound (+ breakdown and discrete-sum variant)
- diversity-multiplexing tradeoff curves and the optimal decoding threshold
- throughput-reliability coefficients and the predicted SNR shift
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .channel import SystemParams
from .config import ALPHA_GRID, DMT_GRID_STEP
from .errors import DomainError
from .numerics import binomial_coefficient, regularized_gamma_cdf

_LN2 = math.log(2.0)
_BRANCH_EPS = 1e-12  # keeps r exactly on a theta boundary in the upper region


# ============================================================================
# Listening-phase probabilities
# ============================================================================

def _snr_threshold(rate: float, snr: float) -> float:
    """(2^rate - 1) / snr, inf when 2^rate overflows."""
    if math.isinf(rate):
        return math.inf
    try:
        return math.expm1(rate * _LN2) / snr
    except OverflowError:
        return math.inf


def _decode_probability(alpha: float, params: SystemParams) -> float:
    """P(a relay has decoded after alpha*N uses) = exp(-(2^{R/alpha} - 1)/(rho_s sigma2_sr))."""
    threshold = _snr_threshold(params.R / alpha, params.rho_s * params.sigma2_sr)
    return math.exp(-threshold) if math.isfinite(threshold) else 0.0


def phi_at_alpha(alpha: float, params: SystemParams) -> float:
    """Phi as a continuous function of alpha = l/N; Phi(0) = 1."""
    if alpha <= 0.0:
        return 1.0
    p = _decode_probability(alpha, params)
    M, K = params.M, params.K
    value = math.fsum(
        binomial_coefficient(M, i) * (1.0 - p) ** (M - i) * p ** i for i in range(K)
    )
    return min(1.0, max(0.0, value))


def phi(l: int, params: SystemParams) -> float:
    """
    Probability that fewer than K relays have decoded by channel use l.

    Raises:
        DomainError: If l is outside [0, N]
    """
    if isinstance(l, bool) or int(l) != l or not 0 <= l <= params.N:
        raise DomainError(f"l must be an integer in [0, N={params.N}], got: {l}")
    return phi_at_alpha(int(l) / params.N, params)


def phi_derivative(alpha: float, params: SystemParams) -> float:
    """
    dPhi/dalpha, analytic.

    dPhi/dp telescopes to -M C(M-1, K-1) p^{K-1} (1-p)^{M-K}; dp/dalpha follows
    from p(alpha) = exp(-(2^{R/alpha} - 1)/(rho_s sigma2_sr)). Never positive.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got: {alpha}")
    snr = params.rho_s * params.sigma2_sr
    rate = params.R / alpha
    threshold = _snr_threshold(rate, 1.0)
    if not math.isfinite(threshold):
        return 0.0
    p = math.exp(-threshold / snr)
    if p == 0.0:
        return 0.0
    dp_dalpha = p * (threshold + 1.0) * _LN2 * params.R / (alpha * alpha * snr)
    M, K = params.M, params.K
    dphi_dp = -M * binomial_coefficient(M - 1, K - 1) * p ** (K - 1) * (1.0 - p) ** (M - K)
    return dphi_dp * dp_dalpha


def listening_length_pmf(params: SystemParams) -> Tuple[np.ndarray, float]:
    """
    Distribution of the listening length.

    Returns:
        (pmf, direct_only) where pmf[l-1] = Phi_{l-1} - Phi_l for l = 1..N and
        direct_only = Phi_N; the masses sum to one
    """
    values = np.array([phi(l, params) for l in range(params.N + 1)])
    pmf = np.maximum(values[:-1] - values[1:], 0.0)
    return pmf, float(values[-1])


# ============================================================================
# Outage bounds
# ============================================================================

def direct_outage_probability(params: SystemParams) -> float:
    """P(log2(1 + rho_s||h_sd||^2) < R) = F((2^R - 1)/(rho_s sigma2_d); Nr)."""
    return regularized_gamma_cdf(_snr_threshold(params.R, params.rho_s * params.sigma2_d), params.Nr)


def _relay_assisted_factor(alpha: float, params: SystemParams) -> float:
    """F(listening-phase threshold; Nr) * F(cooperative-phase threshold; Nr)^{K+1}."""
    snr = params.rho_s * params.sigma2_d
    first = regularized_gamma_cdf(_snr_threshold(params.R / alpha, snr), params.Nr)
    if first == 0.0:
        return 0.0
    if alpha >= 1.0:
        return first
    second = regularized_gamma_cdf(_snr_threshold(params.R / (1.0 - alpha), snr), params.Nr)
    return first * second ** (params.K + 1)


@dataclass(frozen=True)
class BoundBreakdown:
    """
    Terms of the DF-MSC-opt outage upper bound.

    cooperative_level is -Phi'(alpha) at the maximizing alpha.
    """

    direct_term: float
    relay_term: float
    alpha_star: float
    cooperative_level: float

    @property
    def total(self) -> float:
        return min(1.0, max(0.0, self.direct_term + self.relay_term))


def outage_bound_breakdown(params: SystemParams) -> BoundBreakdown:
    direct_term = phi(params.N, params) * direct_outage_probability(params)
    relay_term, alpha_star, level = 0.0, ALPHA_GRID[0], -phi_derivative(ALPHA_GRID[0], params)
    for alpha in ALPHA_GRID:
        slope = -phi_derivative(alpha, params)
        if slope == 0.0:
            continue
        value = slope * _relay_assisted_factor(alpha, params)
        if value > relay_term:
            relay_term, alpha_star, level = value, alpha, slope
    return BoundBreakdown(direct_term=direct_term, relay_term=relay_term, alpha_star=alpha_star, cooperative_level=level)


def outage_upper_bound(params: SystemParams) -> float:
    """
    Upper bound on the DF-MSC-opt outage probability.

    Direct-transmission term Phi_N F((2^R-1)/(rho_s sigma2_d); Nr) plus the
    supremum over the alpha grid of the relay-assisted term, clamped to [0, 1].
    """
    return outage_bound_breakdown(params).total


def outage_bound_discrete(params: SystemParams) -> float:
    """
    The bound before the mean-value step: sum over l of (Phi_{l-1} - Phi_l)
    times the relay-assisted factor at alpha = l/N, plus the direct term.
    """
    pmf, direct_only = listening_length_pmf(params)
    terms = [
        mass * _relay_assisted_factor(l / params.N, params)
        for l, mass in enumerate(pmf, start=1)
        if mass > 0.0
    ]
    total = direct_only * direct_outage_probability(params) + math.fsum(terms)
    return min(1.0, max(0.0, total))


# ============================================================================
# Diversity-multiplexing tradeoff
# ============================================================================

@dataclass(frozen=True)
class DmtPoint:
    r: float
    d: float

    def __post_init__(self):
        if not 0.0 <= self.r <= 1.0:
            raise DomainError(f"multiplexing gain must lie in [0, 1], got {self.r}")
        if self.d < 0.0:
            raise DomainError(f"diversity gain must be nonnegative, got {self.d}")


def _check_dmt_args(r: float, M: int, Nr: int, K: int = 1) -> None:
    if not 0.0 <= r <= 1.0:
        raise DomainError(f"r must lie in [0, 1], got: {r}")
    if M < 1 or Nr < 1 or not 1 <= K <= M:
        raise DomainError(f"DMT needs M >= 1, Nr >= 1, 1 <= K <= M, got M={M}, Nr={Nr}, K={K}")


def _positive(value: float) -> float:
    return value if value > 0.0 else 0.0


def _d3(r: float, K: int, Nr: int) -> float:
    L_T = min(Nr, K + 1)
    if r < 0.5:
        return Nr + (Nr - 1) * K
    if r >= L_T / (L_T + 1):
        return Nr * L_T * (1.0 - r) / r
    ratio = r / (1.0 - r)
    theta = min(int(math.floor(ratio + _BRANCH_EPS)), L_T)
    first = Nr + (Nr - theta) * (K + 1 - theta) - (Nr + K - 2 * theta) * (ratio - theta)
    second = (Nr - theta) * (K + 1 - theta) + Nr * theta * (1.0 - r) / r
    return min(first, second)


def dmt_msc(r: float, K: int, M: int, Nr: int) -> DmtPoint:
    """d(r, K) = min(d1, d2 + d3) for DF-MSC-opt waiting for K relays."""
    _check_dmt_args(r, M, Nr, K)
    d1 = (M - K + 1 + Nr) * _positive(1.0 - r)
    d2 = (M - K + 1) * _positive((1.0 - 2.0 * r) / (1.0 - r)) if r < 1.0 else 0.0
    d = min(d1, d2 + _d3(r, K, Nr)) if r < 1.0 else 0.0
    return DmtPoint(r=r, d=max(0.0, d))


def k_star(r: float, M: int, Nr: int) -> float:
    """
    Continuous optimum of the decoding threshold K.

    Returns math.inf where the closed form's denominator vanishes.
    """
    if not 0.0 <= r < 1.0:
        raise DomainError(f"k_star needs r in [0, 1), got: {r}")
    s = 1.0 - r
    if r <= 0.5:
        numerator = (M + 1) * (2.0 - 4.0 * r + r * r) + Nr * (2.0 - 3.0 * r + r * r)
        denominator = (Nr - 1) * s + r * r
    else:
        theta = math.ceil(r / s - _BRANCH_EPS) - 1
        numerator = (
            (M + 1) * s * s
            - Nr * (3.0 * r - r * r - s * 2 * theta)
            - theta * (3 * theta * s - 1.0 - r)
        )
        denominator = Nr * s - r + s * s
    if denominator == 0.0:
        return math.inf
    return numerator / denominator


def _dmt_scan(r: float, M: int, Nr: int) -> Tuple[int, float]:
    best_k, best_d = 1, -1.0
    for K in range(1, M + 1):
        d = dmt_msc(r, K, M, Nr).d
        if d > best_d:
            best_k, best_d = K, d
    return best_k, best_d


def dmt_msc_opt(r: float, M: int, Nr: int) -> DmtPoint:
    """
    max over K of d(r, K).

    The clamped floor/ceil of k_star is evaluated first and the full K scan
    guarantees the exact maximum.
    """
    _check_dmt_args(r, M, Nr)
    best = 0.0
    if r < 1.0:
        estimate = k_star(r, M, Nr)
        if math.isfinite(estimate):
            for K in {math.floor(estimate), math.ceil(estimate)}:
                best = max(best, dmt_msc(r, min(M, max(1, int(K))), M, Nr).d)
    best = max(best, _dmt_scan(r, M, Nr)[1])
    return DmtPoint(r=r, d=best)


def best_decoding_threshold(r: float, M: int, Nr: int) -> int:
    """Smallest K attaining dmt_msc_opt at r."""
    _check_dmt_args(r, M, Nr)
    return _dmt_scan(r, M, Nr)[0]


def dmt_ddf(r: float, M: int, Nr: int) -> DmtPoint:
    _check_dmt_args(r, M, Nr)
    if r >= 0.5:
        d = Nr * (1.0 - r) / r
    elif r <= Nr / (M + Nr):
        d = (M + Nr) * (1.0 - r)
    else:
        d = Nr + M * _positive((1.0 - 2.0 * r) / (1.0 - r))
    return DmtPoint(r=r, d=max(0.0, d))


def dmt_sdiv(r: float, M: int, Nr: int) -> DmtPoint:
    """M(1-2r)^+ + Nr(1-r)^+, shared by AF-SDiv and DF-SDiv."""
    _check_dmt_args(r, M, Nr)
    return DmtPoint(r=r, d=M * _positive(1.0 - 2.0 * r) + Nr * _positive(1.0 - r))


def dmt_grid(step: float = DMT_GRID_STEP) -> List[float]:
    """Multiplexing gains 0, step, ..., 1."""
    count = int(round(1.0 / step))
    return [round(i * step, 10) for i in range(count + 1)]


# ============================================================================
# Throughput-reliability tradeoff
# ============================================================================

@dataclass(frozen=True)
class TrtCoefficients:
    z: int
    c: int
    g: int
    t: float


def trt_coefficients(z: int, K: int, Nr: int) -> TrtCoefficients:
    """
    Throughput (c), reliability (g) and throughput-gain (t = g/c) coefficients
    for operating region z.

    Raises:
        DomainError: If z is outside [0, min(Nr, K+1))
    """
    L_T = min(Nr, K + 1)
    if isinstance(z, bool) or int(z) != z or not 0 <= z < L_T:
        raise DomainError(f"z must be an integer in [0, L_T={L_T}), got: {z}")
    z = int(z)
    c = K + 1 + Nr - (2 * z + 1)
    g = (K + 1) * Nr - z * (z + 1)
    return TrtCoefficients(z=z, c=c, g=g, t=g / c)


def predicted_snr_shift_db(delta_r_bits: float, z: int, K: int, Nr: int) -> float:
    """SNR shift 3*dR/t(z) dB between outage curves dR bits/channel-use apart."""
    if not delta_r_bits > 0.0:
        raise DomainError(f"delta_r_bits must be positive, got: {delta_r_bits}")
    return 3.0 * delta_r_bits / trt_coefficients(z, K, Nr).t
