"""
Reference Relaying Schemes

Mutual-information models of the schemes DF-MSC-opt is compared against:
- DF-SDiv: fixed half/half listening and cooperation, distributed space-time
  code, MRC at the destination
- AF-SDiv: every relay forwards a scaled copy of its observation
- DDF: each relay joins as soon as it decodes
- DF-MSC-rand: multi-stream cooperation with a random node selection

Relay-to-destination terms use each relay's own SNR when relay powers are
configured; relay decoding always uses the source SNR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, ListeningOutcome, SystemParams, decode_times
from .config import Scheme
from .numerics import SeedStream
from .protocol_msc import mutual_information_msc, random_selection


def _weighted_relay_gains(realization: ChannelRealization, params: SystemParams) -> np.ndarray:
    """rho_m ||h_rd,m||^2 for every relay."""
    return params.relay_power_vector() * realization.relay_gains()


def af_combiner(a, b):
    """Harmonic AF end-to-end SNR a*b/(a+b+1)."""
    return a * b / (a + b + 1.0)


def mi_df_sdiv(realization: ChannelRealization, params: SystemParams) -> float:
    """
    Half-duplex DF with selection of relays that decode in N/2 uses.

    Relays with 0.5*log2(1 + rho_s|h_sr|^2) >= R join the second half and
    the destination combines both halves by MRC.
    """
    direct_snr = params.rho_s * realization.direct_gain
    s_r = params.rho_s * np.abs(realization.h_sr) ** 2
    decoded = 0.5 * np.log2(1.0 + s_r) >= params.R
    relay_snr = float(np.sum(_weighted_relay_gains(realization, params)[decoded]))
    return 0.5 * math.log2(1.0 + direct_snr) + 0.5 * math.log2(1.0 + direct_snr + relay_snr)


def mi_af_sdiv(realization: ChannelRealization, params: SystemParams) -> float:
    """0.5*log2(1 + rho_s||h_sd||^2 + sum_m f(rho_s|h_sr,m|^2, rho_m||h_rd,m||^2))."""
    first_hop = params.rho_s * np.abs(realization.h_sr) ** 2
    second_hop = _weighted_relay_gains(realization, params)
    relayed = float(np.sum(af_combiner(first_hop, second_hop)))
    return 0.5 * math.log2(1.0 + params.rho_s * realization.direct_gain + relayed)


def mi_ddf(realization: ChannelRealization, params: SystemParams) -> float:
    """
    Dynamic DF: a relay decoding at channel use l transmits from use l + 1.

    The destination MRC SNR is piecewise constant between activations, so the
    per-use sum collapses to one term per activation segment.
    """
    N = params.N
    times = decode_times(np.abs(realization.h_sr) ** 2, params)
    gains = _weighted_relay_gains(realization, params)
    order = np.argsort(times, kind="stable")

    snr = params.rho_s * realization.direct_gain
    total = 0.0
    start = 1  # first channel use of the current segment
    for relay in order:
        active_from = int(times[relay]) + 1
        if active_from > N:
            break
        total += (active_from - start) * math.log2(1.0 + snr)
        snr += float(gains[relay])
        start = active_from
    total += (N + 1 - start) * math.log2(1.0 + snr)
    return total / N


def mi_df_msc_rand(
    realization: ChannelRealization,
    outcome: ListeningOutcome,
    stream: SeedStream,
    params: SystemParams,
) -> float:
    """Multi-stream cooperation with a uniformly random node selection."""
    selection = random_selection(stream, outcome.candidate_count, params.Nr)
    return mutual_information_msc(realization, outcome, selection, params)


# ============================================================================
# Scheme profiles
# ============================================================================

@dataclass(frozen=True)
class SchemeProfile:
    """How a scheme uses the network in its cooperative phase."""

    scheme: Scheme
    streams: str
    relays: str
    receiver: str


def scheme_profile(scheme: Scheme, params: SystemParams) -> SchemeProfile:
    """Streams, participating relays and receiver structure of a scheme."""
    scheme = Scheme(scheme)
    multi_stream = str(min(params.Nr, params.K + 1))
    table = {
        Scheme.DF_MSC_OPT: (multi_stream, f"best {params.Nr} of source + decoded relays", "MIMO (joint)"),
        Scheme.DF_MSC_RAND: (multi_stream, f"random {params.Nr} of source + decoded relays", "MIMO (joint)"),
        Scheme.DF_SDIV: ("1", "relays decoded in N/2", "MRC"),
        Scheme.AF_SDIV: ("1", f"all {params.M}", "MRC"),
        Scheme.DDF: ("1", "each relay once decoded", "MRC"),
        Scheme.DIRECT: ("1", "none", "MRC"),
    }
    streams, relays, receiver = table[scheme]
    return SchemeProfile(scheme=scheme, streams=streams, relays=relays, receiver=receiver)
