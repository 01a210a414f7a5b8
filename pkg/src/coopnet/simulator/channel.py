"""
Channel Model and Listening Phase

Scenario parameters, block-fading Rayleigh channel draws, and the listening
phase: per-relay decode times, the listening length n1 and the decoding set.

Relay indices are 1-based throughout (relay m is feedback bit m); array
columns are 0-based, so relay m lives in column m - 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple

import numpy as np

from .config import DEFAULT_CODEWORD_LENGTH, MAX_GAMMA_ORDER, MAX_RELAYS
from .errors import ParameterError
from .numerics import SeedStream, db_to_linear, draw_complex_gaussian, linear_to_db

# decode_time value for a relay that does not decode within N channel uses
NOT_WITHIN_N = None

_RATIO_SLACK = 1e-12  # ceil() guard against N*R/C landing a hair above an integer


def _require_int(name: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ParameterError(f"{name} must be an integer, got: {value!r}")
    return int(value)


def _require_positive(name: str, value) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise ParameterError(f"{name} must be positive and finite, got: {value}")
    return value


@dataclass(frozen=True)
class SystemParams:
    """
    All constants of one scenario.

    Attributes:
        M: Relay count (1..64)
        K: Relays that must decode before the listening phase ends (1 <= K <= M)
        Nr: Destination antennas
        R: Target rate, bits/channel-use
        rho_s: Source transmit SNR, linear
        N: Codeword length in channel uses
        sigma2_sr: Source-relay link variance
        sigma2_d: Source-destination and relay-destination link variance
        relay_powers: Per-relay SNR; None means every relay transmits at rho_s
    """

    M: int
    K: int
    Nr: int
    R: float
    rho_s: float
    N: int = DEFAULT_CODEWORD_LENGTH
    sigma2_sr: float = 1.0
    sigma2_d: float = 1.0
    relay_powers: Optional[Tuple[float, ...]] = field(default=None)

    def __post_init__(self):
        M = _require_int("M", self.M)
        K = _require_int("K", self.K)
        Nr = _require_int("Nr", self.Nr)
        N = _require_int("N", self.N)
        if not 1 <= M <= MAX_RELAYS:
            raise ParameterError(f"1 ≤ M ≤ {MAX_RELAYS} required, got M={M}")
        if K < 1:
            raise ParameterError(f"K ≥ 1 required, got K={K}")
        if K > M:
            raise ParameterError(f"K ≤ M required, got K={K}, M={M}")
        if not 1 <= Nr <= MAX_GAMMA_ORDER:
            raise ParameterError(f"1 ≤ Nr ≤ {MAX_GAMMA_ORDER} required, got Nr={Nr}")
        if N < 2:
            raise ParameterError(f"N ≥ 2 required, got N={N}")
        for name in ("R", "rho_s", "sigma2_sr", "sigma2_d"):
            object.__setattr__(self, name, _require_positive(name, getattr(self, name)))
        for name, value in (("M", M), ("K", K), ("Nr", Nr), ("N", N)):
            object.__setattr__(self, name, value)

        if self.relay_powers is not None:
            powers = tuple(_require_positive("relay_powers", p) for p in self.relay_powers)
            if len(powers) != M:
                raise ParameterError(f"relay_powers needs M={M} entries, got {len(powers)}")
            object.__setattr__(self, "relay_powers", powers)

    # ------------------------------------------------------------------
    # Derived quantities
    # ------------------------------------------------------------------

    @property
    def snr_db(self) -> float:
        return linear_to_db(self.rho_s)

    @property
    def homogeneous(self) -> bool:
        return self.relay_powers is None or all(p == self.rho_s for p in self.relay_powers)

    def relay_power_vector(self) -> np.ndarray:
        if self.relay_powers is None:
            return np.full(self.M, self.rho_s)
        return np.asarray(self.relay_powers, dtype=np.float64)

    def node_powers(self, decoding_set: Sequence[int]) -> np.ndarray:
        """Transmit SNR of each candidate: the source, then decoding relays in order."""
        relay = self.relay_power_vector()
        return np.concatenate(([self.rho_s], relay[np.asarray(decoding_set, dtype=np.int64) - 1]))

    # ------------------------------------------------------------------
    # Variants
    # ------------------------------------------------------------------

    def with_snr(self, rho_s: float) -> "SystemParams":
        """Same scenario at a new source SNR; configured relay powers scale with it."""
        rho_s = _require_positive("rho_s", rho_s)
        powers = self.relay_powers
        if powers is not None:
            scale = rho_s / self.rho_s
            powers = tuple(p * scale for p in powers)
        return replace(self, rho_s=rho_s, relay_powers=powers)

    def with_snr_db(self, snr_db: float) -> "SystemParams":
        return self.with_snr(db_to_linear(snr_db))

    def with_rate(self, rate: float) -> "SystemParams":
        return replace(self, R=rate)


@dataclass(frozen=True)
class ChannelRealization:
    """One block-fading draw: h_sr (M,), h_sd (Nr,), h_rd (Nr, M)."""

    h_sr: np.ndarray
    h_sd: np.ndarray
    h_rd: np.ndarray

    def __post_init__(self):
        h_sr = np.asarray(self.h_sr, dtype=np.complex128).reshape(-1)
        h_sd = np.asarray(self.h_sd, dtype=np.complex128).reshape(-1)
        h_rd = np.asarray(self.h_rd, dtype=np.complex128)
        if h_rd.ndim == 1 and h_sd.size == 1:
            h_rd = h_rd.reshape(1, -1)
        if h_rd.shape != (h_sd.size, h_sr.size):
            raise ParameterError(
                f"h_rd must have shape (Nr, M)=({h_sd.size}, {h_sr.size}), got {h_rd.shape}"
            )
        for name, value in (("h_sr", h_sr), ("h_sd", h_sd), ("h_rd", h_rd)):
            if not np.all(np.isfinite(value)):
                raise ParameterError(f"{name} has non-finite entries")
        object.__setattr__(self, "h_sr", h_sr)
        object.__setattr__(self, "h_sd", h_sd)
        object.__setattr__(self, "h_rd", h_rd)

    @property
    def direct_gain(self) -> float:
        """||h_sd||^2"""
        return float(np.sum(np.abs(self.h_sd) ** 2))

    def relay_gains(self) -> np.ndarray:
        """||h_rd,m||^2 for every relay."""
        return np.sum(np.abs(self.h_rd) ** 2, axis=0)

    def matches(self, params: SystemParams) -> bool:
        return self.h_sr.size == params.M and self.h_sd.size == params.Nr


@dataclass(frozen=True)
class ListeningOutcome:
    """
    Result of the listening phase.

    decode_time holds one entry per relay (None = NOT_WITHIN_N). n1 is None
    when fewer than K relays decode within N (direct transmission only).
    """

    decode_time: Tuple[Optional[int], ...]
    n1: Optional[int]
    decoding_set: Tuple[int, ...]

    @property
    def direct_only(self) -> bool:
        return self.n1 is None

    @property
    def candidate_count(self) -> int:
        return len(self.decoding_set) + 1


def draw_channel(params: SystemParams, stream: SeedStream) -> ChannelRealization:
    """Draw h_sr ~ CN(0, sigma2_sr), then h_sd and h_rd ~ CN(0, sigma2_d), in that order."""
    rng = stream.generator()
    h_sr = draw_complex_gaussian(rng, params.sigma2_sr, (params.M,))
    h_sd = draw_complex_gaussian(rng, params.sigma2_d, (params.Nr,))
    h_rd = draw_complex_gaussian(rng, params.sigma2_d, (params.Nr, params.M))
    return ChannelRealization(h_sr=h_sr, h_sd=h_sd, h_rd=h_rd)


def decode_times(gains: np.ndarray, params: SystemParams) -> np.ndarray:
    """
    Vectorized decode times for S-R power gains |h|^2.

    Returns an int64 array where N + 1 marks "not within N". Times are
    clamped to at least 1, so the l -> 0 limit of a relay that decodes
    instantly is only approached asymptotically; one listening use is
    always spent.
    """
    gains = np.asarray(gains, dtype=np.float64)
    capacity = np.log1p(params.rho_s * gains) / math.log(2.0)
    with np.errstate(divide="ignore"):
        ratio = (params.N * params.R) / capacity
    ratio = ratio * (1.0 - _RATIO_SLACK)
    late = ~np.isfinite(ratio) | (ratio > params.N)
    times = np.ceil(np.where(late, params.N + 1, ratio))
    times = np.where(late, params.N + 1, np.maximum(times, 1.0))
    return times.astype(np.int64)


def decode_time(h: complex, params: SystemParams) -> Optional[int]:
    """
    First channel use l with l*log2(1 + rho_s|h|^2) >= N*R.

    Returns:
        ceil(N*R / log2(1 + rho_s|h|^2)) when that is at most N, else NOT_WITHIN_N
    """
    time = int(decode_times(np.array([abs(h) ** 2]), params)[0])
    return NOT_WITHIN_N if time > params.N else time


def listening_outcome(realization: ChannelRealization, params: SystemParams) -> ListeningOutcome:
    """
    Run the listening phase on one realization.

    n1 is the K-th smallest decode time; every relay decoding at or before n1
    joins the decoding set, so ties at n1 can make |D| exceed K.
    """
    times = decode_times(np.abs(realization.h_sr) ** 2, params)
    per_relay = tuple(int(t) if t <= params.N else NOT_WITHIN_N for t in times)

    if np.count_nonzero(times <= params.N) < params.K:
        return ListeningOutcome(decode_time=per_relay, n1=None, decoding_set=())

    n1 = int(np.partition(times, params.K - 1)[params.K - 1])
    decoding_set = tuple(int(m) + 1 for m in np.flatnonzero(times <= n1))
    return ListeningOutcome(decode_time=per_relay, n1=n1, decoding_set=decoding_set)
