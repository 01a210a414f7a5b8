"""
Monte-Carlo Engine

Deterministic outage estimation over scheme x SNR x rate grids.

Trial i always draws its channel from SeedStream(master_seed, i), so every
estimate is a pure function of (scheme, params, trials, master_seed): the
same draws are reused at every SNR and rate (common random numbers), and the
worker count only changes how fixed-size trial chunks are scheduled, never
which trials they contain. Outage counts are integers, so the reduction is
order-independent.
"""

from __future__ import annotations

import asyncio
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from opentelemetry import trace
from scipy.stats import binomtest

from ..tracing.otel_config import add_run_attributes
from .analysis import outage_upper_bound
from .baselines import mi_af_sdiv, mi_ddf, mi_df_msc_rand, mi_df_sdiv
from .channel import ChannelRealization, SystemParams, draw_channel, listening_outcome
from .config import (
    CONFIDENCE_LEVEL,
    DEFAULT_RATE_TOLERANCE,
    DEFAULT_WORKERS,
    MONOTONICITY_CHECK_POINTS,
    MONOTONICITY_SIGMAS,
    RATE_CEILING,
    RATE_FLOOR,
    SNR_BISECTION_TOLERANCE_DB,
    SNR_SEARCH_RANGE_DB,
    TRIAL_CHUNK_SIZE,
    Scheme,
)
from .errors import DomainError, MonotonicityError, NonBracketingError
from .numerics import SeedStream
from .protocol_msc import (
    SELECTION_LANE,
    NodeSelection,
    direct_link_information,
    encode_feedback_pattern,
    mutual_information_msc,
    optimal_selection,
    outage_indicator,
    random_selection,
)

tracer = trace.get_tracer(__name__)


# ============================================================================
# Result types
# ============================================================================

@dataclass(frozen=True)
class TrialResult:
    """One Monte-Carlo trial; listening fields are None for non-MSC schemes."""

    outage: bool
    mi: float
    n1: Optional[int] = None
    decoding_set_size: Optional[int] = None
    selection: Optional[NodeSelection] = None
    feedback: Optional[str] = None


@dataclass(frozen=True)
class EstimateWithCI:
    """Outage estimate with a Wilson score interval."""

    trials: int
    outages: int
    p_out: float
    ci_low: float
    ci_high: float

    @classmethod
    def from_counts(cls, outages: int, trials: int, confidence: float = CONFIDENCE_LEVEL) -> "EstimateWithCI":
        if trials < 1 or not 0 <= outages <= trials:
            raise DomainError(f"need 0 <= outages <= trials and trials >= 1, got {outages}/{trials}")
        p_out = outages / trials
        interval = binomtest(outages, trials).proportion_ci(confidence_level=confidence, method="wilson")
        low = min(p_out, max(0.0, float(interval.low)))
        high = max(p_out, min(1.0, float(interval.high)))
        return cls(trials=trials, outages=outages, p_out=p_out, ci_low=low, ci_high=high)

    @property
    def std_error(self) -> float:
        return math.sqrt(self.p_out * (1.0 - self.p_out) / self.trials)


@dataclass(frozen=True)
class SweepRow:
    snr_db: float
    rate: float
    estimate: EstimateWithCI
    bound: Optional[float] = None


@dataclass(frozen=True)
class SweepResult:
    scheme: Scheme
    rows: Tuple[SweepRow, ...]
    master_seed: int

    def p_out(self) -> List[float]:
        return [row.estimate.p_out for row in self.rows]


# ============================================================================
# Single trial
# ============================================================================

def _evaluate(scheme: Scheme, realization: ChannelRealization, params: SystemParams, stream: SeedStream):
    """Return (mi, outcome, selection) for one realization."""
    if scheme is Scheme.DIRECT:
        return direct_link_information(realization, params), None, None
    if scheme is Scheme.DF_SDIV:
        return mi_df_sdiv(realization, params), None, None
    if scheme is Scheme.AF_SDIV:
        return mi_af_sdiv(realization, params), None, None
    if scheme is Scheme.DDF:
        return mi_ddf(realization, params), None, None

    outcome = listening_outcome(realization, params)
    if outcome.direct_only:
        return direct_link_information(realization, params), outcome, None
    if scheme is Scheme.DF_MSC_OPT:
        selection, _ = optimal_selection(realization, outcome.decoding_set, params)
        return mutual_information_msc(realization, outcome, selection, params), outcome, selection

    selection_stream = stream.with_lane(SELECTION_LANE)
    mi = mi_df_msc_rand(realization, outcome, selection_stream, params)
    return mi, outcome, None


def run_trial(
    scheme: Scheme, params: SystemParams, trial_index: int, master_seed: int, diagnostics: bool = False
) -> TrialResult:
    """
    Evaluate one trial on SeedStream(master_seed, trial_index).

    With diagnostics the feedback-pattern trace string of MSC trials is
    filled in (and the random selection recovered for DF-MSC-rand).
    """
    scheme = Scheme(scheme)
    stream = SeedStream(master_seed, trial_index)
    realization = draw_channel(params, stream)
    mi, outcome, selection = _evaluate(scheme, realization, params, stream)
    outage = outage_indicator(mi, params.R)
    if outcome is None:
        return TrialResult(outage=outage, mi=mi)

    feedback = None
    if diagnostics and not outcome.direct_only:
        if selection is None:
            selection = random_selection(stream.with_lane(SELECTION_LANE), outcome.candidate_count, params.Nr)
        feedback = str(encode_feedback_pattern(selection, outcome.decoding_set, params.M))
    return TrialResult(
        outage=outage,
        mi=mi,
        n1=outcome.n1,
        decoding_set_size=len(outcome.decoding_set),
        selection=selection,
        feedback=feedback,
    )


def count_outages(scheme: str, params: SystemParams, master_seed: int, start: int, stop: int) -> int:
    """Outages over trial indices [start, stop); the unit of parallel work."""
    scheme = Scheme(scheme)
    outages = 0
    for trial_index in range(start, stop):
        stream = SeedStream(master_seed, trial_index)
        mi, _, _ = _evaluate(scheme, draw_channel(params, stream), params, stream)
        outages += outage_indicator(mi, params.R)
    return outages


# ============================================================================
# Engine
# ============================================================================

class MonteCarloEngine:
    """
    Schedules trial chunks across worker processes and runs the searches
    built on outage estimates (SNR sweeps, outage capacity, SNR shifts).

    Use as a context manager, or call close(), to release the process pool.
    """

    def __init__(self, worker_count: int = DEFAULT_WORKERS, chunk_size: int = TRIAL_CHUNK_SIZE, verbose: bool = True):
        if worker_count < 1:
            raise DomainError(f"worker_count must be at least 1, got: {worker_count}")
        if chunk_size < 1:
            raise DomainError(f"chunk_size must be at least 1, got: {chunk_size}")
        self.worker_count = int(worker_count)
        self.chunk_size = int(chunk_size)
        self.verbose = verbose
        self._pool: Optional[ProcessPoolExecutor] = None
        if verbose:
            print("[OK] MonteCarloEngine initialized")
            print(f"   Workers: {self.worker_count}")
            print(f"   Trials per chunk: {self.chunk_size}")

    def __enter__(self) -> "MonteCarloEngine":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def _log(self, message: str) -> None:
        if self.verbose:
            print(message)

    def _banner(self, title: str) -> None:
        self._log("\n" + "=" * 80)
        self._log(title)
        self._log("=" * 80)

    def _chunks(self, trials: int) -> List[Tuple[int, int]]:
        return [(start, min(start + self.chunk_size, trials)) for start in range(0, trials, self.chunk_size)]

    # ------------------------------------------------------------------
    # Outage estimation
    # ------------------------------------------------------------------

    async def estimate_outage_async(
        self, scheme: Scheme, params: SystemParams, trials: int, master_seed: int
    ) -> EstimateWithCI:
        """
        Estimate P_out over trials [0, trials).

        Chunks go to the process pool in batches of worker_count through
        asyncio.gather; a failed chunk aborts the estimate.
        """
        scheme = Scheme(scheme)
        if trials < 1:
            raise DomainError(f"trials must be at least 1, got: {trials}")
        chunks = self._chunks(trials)

        with tracer.start_as_current_span("estimate_outage") as span:
            add_run_attributes(span, scheme=scheme, params=params, trials=trials, master_seed=master_seed)
            if self.worker_count == 1:
                outages = sum(count_outages(scheme.value, params, master_seed, a, b) for a, b in chunks)
            else:
                if self._pool is None:
                    self._pool = ProcessPoolExecutor(max_workers=self.worker_count)
                loop = asyncio.get_running_loop()
                outages = 0
                for i in range(0, len(chunks), self.worker_count):
                    batch = chunks[i:i + self.worker_count]
                    tasks = [
                        loop.run_in_executor(self._pool, count_outages, scheme.value, params, master_seed, a, b)
                        for a, b in batch
                    ]
                    results = await asyncio.gather(*tasks, return_exceptions=True)
                    for (a, b), result in zip(batch, results):
                        if isinstance(result, BaseException):
                            self._log(f"    ✗ trials {a}-{b}: {type(result).__name__}: {result}")
                            raise result
                        outages += result
            span.set_attribute("outages", outages)
        return EstimateWithCI.from_counts(outages, trials)

    def estimate_outage(self, scheme: Scheme, params: SystemParams, trials: int, master_seed: int) -> EstimateWithCI:
        return asyncio.run(self.estimate_outage_async(scheme, params, trials, master_seed))

    # ------------------------------------------------------------------
    # SNR sweep
    # ------------------------------------------------------------------

    def snr_sweep(
        self, scheme: Scheme, params: SystemParams, snr_grid_db: Sequence[float], trials: int, master_seed: int
    ) -> SweepResult:
        """
        Estimate P_out at every grid SNR (dB) on the same trial draws.

        DF-MSC-opt rows carry the analytic outage upper bound.
        """
        scheme = Scheme(scheme)
        grid = [float(x) for x in snr_grid_db]
        if not grid:
            raise DomainError("SNR grid is empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise DomainError(f"SNR grid must be strictly increasing, got {grid}")

        self._banner(f"SNR SWEEP - {scheme} (R={params.R:g}, {len(grid)} points, {trials} trials/point)")
        rows = []
        with tracer.start_as_current_span("snr_sweep") as span:
            add_run_attributes(span, scheme=scheme, params=params, trials=trials, master_seed=master_seed)
            for snr_db in grid:
                point = params.with_snr_db(snr_db)
                estimate = self.estimate_outage(scheme, point, trials, master_seed)
                bound = outage_upper_bound(point) if scheme is Scheme.DF_MSC_OPT else None
                rows.append(SweepRow(snr_db=snr_db, rate=params.R, estimate=estimate, bound=bound))
                suffix = f", bound={bound:.3e}" if bound is not None else ""
                self._log(f"  ✓ {snr_db:6.2f} dB: p_out={estimate.p_out:.3e} ({estimate.outages}/{trials}){suffix}")
        return SweepResult(scheme=scheme, rows=tuple(rows), master_seed=master_seed)

    # ------------------------------------------------------------------
    # Outage capacity
    # ------------------------------------------------------------------

    def check_rate_monotonicity(
        self,
        scheme: Scheme,
        params: SystemParams,
        rates: Sequence[float],
        trials: int,
        master_seed: int,
        cache: Optional[Dict[float, EstimateWithCI]] = None,
    ) -> List[EstimateWithCI]:
        """
        Verify P_out is nondecreasing in R along `rates`.

        Raises:
            MonotonicityError: If a drop exceeds MONOTONICITY_SIGMAS combined standard errors
        """
        cache = {} if cache is None else cache
        estimates = []
        for rate in rates:
            if rate not in cache:
                cache[rate] = self.estimate_outage(scheme, params.with_rate(rate), trials, master_seed)
            estimates.append(cache[rate])
        for (r_a, e_a), (r_b, e_b) in zip(zip(rates, estimates), zip(rates[1:], estimates[1:])):
            allowance = MONOTONICITY_SIGMAS * math.hypot(e_a.std_error, e_b.std_error)
            if e_b.p_out < e_a.p_out - allowance:
                raise MonotonicityError(
                    f"{scheme}: p_out({r_b:g})={e_b.p_out:.4g} < p_out({r_a:g})={e_a.p_out:.4g} beyond {MONOTONICITY_SIGMAS:g} sigma"
                )
        return estimates

    def outage_capacity(
        self,
        scheme: Scheme,
        params: SystemParams,
        target_pout: float,
        snr_db: float,
        rate_tolerance: float,
        trials: int,
        master_seed: int,
        validate_monotonicity: bool = True,
    ) -> float:
        """
        Largest rate whose estimated P_out stays at or below target_pout.

        Brackets by doubling from RATE_FLOOR, then bisects until the bracket is
        no wider than rate_tolerance.

        Raises:
            NonBracketingError: If even RATE_FLOOR is in outage, or RATE_CEILING is passed
            MonotonicityError: If the coarse rate-grid check fails
        """
        scheme = Scheme(scheme)
        if not 0.0 < target_pout < 1.0:
            raise DomainError(f"target_pout must lie in (0, 1), got: {target_pout}")
        if not rate_tolerance > 0.0:
            raise DomainError(f"rate_tolerance must be positive, got: {rate_tolerance}")

        base = params.with_snr_db(snr_db)
        cache: Dict[float, EstimateWithCI] = {}

        def p_out(rate: float) -> float:
            if rate not in cache:
                cache[rate] = self.estimate_outage(scheme, base.with_rate(rate), trials, master_seed)
            return cache[rate].p_out

        self._banner(f"OUTAGE CAPACITY - {scheme} at {snr_db:g} dB (target p_out={target_pout:g})")
        with tracer.start_as_current_span("outage_capacity") as span:
            add_run_attributes(span, scheme=scheme, params=base, trials=trials, master_seed=master_seed)
            low = RATE_FLOOR
            if p_out(low) > target_pout:
                raise NonBracketingError(
                    f"{scheme}: p_out={p_out(low):.4g} > {target_pout:g} already at R={low:g} ({snr_db:g} dB)"
                )
            high = 2.0 * low
            while p_out(high) <= target_pout:
                low, high = high, 2.0 * high
                if high > RATE_CEILING:
                    raise NonBracketingError(f"{scheme}: no outage up to the bracketing cap R={RATE_CEILING:g}")
            self._log(f"  ✓ bracket [{low:g}, {high:g}] bits/channel-use")

            if validate_monotonicity:
                rates = [float(r) for r in np.geomspace(RATE_FLOOR, high, MONOTONICITY_CHECK_POINTS)]
                self.check_rate_monotonicity(scheme, base, rates, trials, master_seed, cache)
                self._log(f"  ✓ p_out nondecreasing on {len(rates)} rates")

            while high - low > rate_tolerance:
                mid = 0.5 * (low + high)
                if p_out(mid) <= target_pout:
                    low = mid
                else:
                    high = mid
            span.set_attribute("capacity", low)
        self._log(f"  ✓ capacity = {low:.4f} bits/channel-use ({len(cache)} estimates)")
        return low

    # ------------------------------------------------------------------
    # SNR shift
    # ------------------------------------------------------------------

    def snr_at_target(
        self,
        scheme: Scheme,
        params: SystemParams,
        rate: float,
        target_pout: float,
        trials: int,
        master_seed: int,
        snr_range_db: Tuple[float, float] = SNR_SEARCH_RANGE_DB,
        tolerance_db: float = SNR_BISECTION_TOLERANCE_DB,
    ) -> float:
        """
        SNR (dB) where P_out crosses target_pout.

        Bisects on the dB axis down to tolerance_db, then interpolates log P_out
        linearly inside the final bracket.
        """
        scheme = Scheme(scheme)
        base = params.with_rate(rate)
        cache: Dict[float, float] = {}

        def p_out(snr_db: float) -> float:
            if snr_db not in cache:
                cache[snr_db] = self.estimate_outage(scheme, base.with_snr_db(snr_db), trials, master_seed).p_out
            return cache[snr_db]

        low, high = (float(x) for x in snr_range_db)
        if p_out(low) <= target_pout or p_out(high) > target_pout:
            raise NonBracketingError(
                f"{scheme}: p_out={target_pout:g} not crossed in [{low:g}, {high:g}] dB at R={rate:g}"
            )
        while high - low > tolerance_db:
            mid = 0.5 * (low + high)
            if p_out(mid) > target_pout:
                low = mid
            else:
                high = mid

        p_low, p_high = p_out(low), p_out(high)
        if p_high <= 0.0 or p_low <= p_high:
            return 0.5 * (low + high)
        fraction = (math.log(target_pout) - math.log(p_low)) / (math.log(p_high) - math.log(p_low))
        return low + min(1.0, max(0.0, fraction)) * (high - low)

    def measure_snr_shift_db(
        self,
        scheme: Scheme,
        params: SystemParams,
        rate_a: float,
        rate_b: float,
        target_pout: float,
        trials: int,
        master_seed: int,
        snr_range_db: Tuple[float, float] = SNR_SEARCH_RANGE_DB,
        tolerance_db: float = SNR_BISECTION_TOLERANCE_DB,
    ) -> Tuple[float, float, float]:
        """
        SNR gap between the outage curves of rate_b and rate_a at target_pout.

        Returns:
            (shift_db, snr_a_db, snr_b_db)

        Raises:
            NonBracketingError: If either curve misses the target inside snr_range_db
        """
        scheme = Scheme(scheme)
        if not rate_b > rate_a:
            raise DomainError(f"rate_b must exceed rate_a, got rate_a={rate_a}, rate_b={rate_b}")
        if not 0.0 < target_pout < 1.0:
            raise DomainError(f"target_pout must lie in (0, 1), got: {target_pout}")

        self._banner(f"SNR SHIFT - {scheme}: R={rate_a:g} -> {rate_b:g} at p_out={target_pout:g}")
        with tracer.start_as_current_span("measure_snr_shift_db") as span:
            add_run_attributes(span, scheme=scheme, params=params, trials=trials, master_seed=master_seed)
            snr_a = self.snr_at_target(scheme, params, rate_a, target_pout, trials, master_seed, snr_range_db, tolerance_db)
            self._log(f"  ✓ R={rate_a:g}: {snr_a:.3f} dB")
            snr_b = self.snr_at_target(scheme, params, rate_b, target_pout, trials, master_seed, snr_range_db, tolerance_db)
            self._log(f"  ✓ R={rate_b:g}: {snr_b:.3f} dB")
            span.set_attribute("shift_db", snr_b - snr_a)
        return snr_b - snr_a, snr_a, snr_b


def create_engine(worker_count: int = DEFAULT_WORKERS, verbose: bool = True) -> MonteCarloEngine:
    """Factory for the CLI and scripts."""
    return MonteCarloEngine(worker_count=worker_count, verbose=verbose)


# ============================================================================
# Function interface
# ============================================================================

def estimate_outage(
    scheme: Scheme, params: SystemParams, trials: int, master_seed: int, worker_count: int = DEFAULT_WORKERS
) -> EstimateWithCI:
    """P_out estimate; identical for every worker_count."""
    with MonteCarloEngine(worker_count=worker_count, verbose=False) as engine:
        return engine.estimate_outage(scheme, params, trials, master_seed)


def snr_sweep(
    scheme: Scheme,
    params: SystemParams,
    snr_grid_db: Sequence[float],
    trials: int,
    master_seed: int,
    worker_count: int = DEFAULT_WORKERS,
) -> SweepResult:
    with MonteCarloEngine(worker_count=worker_count, verbose=False) as engine:
        return engine.snr_sweep(scheme, params, snr_grid_db, trials, master_seed)


def outage_capacity(
    scheme: Scheme,
    params: SystemParams,
    target_pout: float,
    snr_db: float,
    rate_tolerance: float = DEFAULT_RATE_TOLERANCE,
    trials: int = 10_000,
    master_seed: int = 0,
    worker_count: int = DEFAULT_WORKERS,
    validate_monotonicity: bool = True,
) -> float:
    with MonteCarloEngine(worker_count=worker_count, verbose=False) as engine:
        return engine.outage_capacity(
            scheme, params, target_pout, snr_db, rate_tolerance, trials, master_seed, validate_monotonicity
        )


def measure_snr_shift_db(
    scheme: Scheme,
    params: SystemParams,
    rate_a: float,
    rate_b: float,
    target_pout: float,
    trials: int,
    master_seed: int,
    worker_count: int = DEFAULT_WORKERS,
    snr_range_db: Tuple[float, float] = SNR_SEARCH_RANGE_DB,
    tolerance_db: float = SNR_BISECTION_TOLERANCE_DB,
) -> float:
    """SNR gap in dB between the rate_b and rate_a outage curves."""
    with MonteCarloEngine(worker_count=worker_count, verbose=False) as engine:
        shift, _, _ = engine.measure_snr_shift_db(
            scheme, params, rate_a, rate_b, target_pout, trials, master_seed, snr_range_db, tolerance_db
        )
    return shift
