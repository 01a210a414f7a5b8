"""
Numeric Primitives

Special functions, the log-det capacity kernel and the random sampling
primitives shared by every other simulator module:
- regularized_gamma_cdf: F(x; k), the Gamma(k, 1) CDF for integer k
- capacity_logdet: log2 det(I + H diag(rho) H^H), single matrix or stacked
- SeedStream / sample_complex_gaussian: counter-based reproducible sampling
- binomial_coefficient: exact C(n, k)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from .config import MAX_GAMMA_ORDER
from .errors import DomainError, NumericalError

ComplexMatrix = np.ndarray
Power = Union[float, np.ndarray]

_UINT64_LIMIT = 1 << 64
_LANE_SHIFT = 192  # lanes occupy the top word of the 256-bit Philox counter
_SERIES_EPS = 1e-17
_SERIES_MAX_TERMS = 10_000


def as_complex_matrix(entries, name: str = "H") -> ComplexMatrix:
    """
    Validate and convert entries to a dense complex128 matrix.

    Raises:
        DomainError: If the result is not 2-D, is empty, or has non-finite entries
    """
    matrix = np.asarray(entries, dtype=np.complex128)
    if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 1:
        raise DomainError(f"{name} must be a non-empty 2-D matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise DomainError(f"{name} has non-finite entries")
    return matrix


# ============================================================================
# Special functions
# ============================================================================

def regularized_gamma_cdf(x: float, k: int) -> float:
    """
    F(x; k) = P(G < x) for G a sum of k unit-mean exponentials.

    Uses the finite series 1 - e^{-x} sum_{j<k} x^j/j! in the upper region and
    the convergent lower-tail series when x < k, where the finite form would
    lose every significant digit to cancellation.

    Args:
        x: Evaluation point, x >= 0 (math.inf gives 1)
        k: Shape, 1 <= k <= 64

    Returns:
        Probability in [0, 1]

    Raises:
        DomainError: If x < 0 (or NaN) or k is outside [1, 64]
    """
    if isinstance(k, bool) or int(k) != k or not 1 <= k <= MAX_GAMMA_ORDER:
        raise DomainError(f"k must be an integer in [1, {MAX_GAMMA_ORDER}], got: {k}")
    k = int(k)
    x = float(x)
    if math.isnan(x) or x < 0.0:
        raise DomainError(f"x must be nonnegative, got: {x}")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0

    log_x = math.log(x)
    if x < k:
        # P(k, x) = e^{-x} x^k / k! * sum_n x^n / ((k+1)...(k+n))
        prefactor = math.exp(-x + k * log_x - math.lgamma(k + 1))
        term, total = 1.0, 1.0
        for n in range(1, _SERIES_MAX_TERMS):
            term *= x / (k + n)
            total += term
            if term < _SERIES_EPS * total:
                break
        value = prefactor * total
    else:
        tail = math.fsum(math.exp(-x + j * log_x - math.lgamma(j + 1)) for j in range(k))
        value = 1.0 - tail
    return min(1.0, max(0.0, value))


def binomial_coefficient(n: int, k: int) -> int:
    """Exact C(n, k) for 0 <= k <= n <= 64."""
    for name, value in (("n", n), ("k", k)):
        if isinstance(value, bool) or int(value) != value:
            raise DomainError(f"{name} must be an integer, got: {value}")
    if not 0 <= k <= n <= MAX_GAMMA_ORDER:
        raise DomainError(f"binomial_coefficient requires 0 <= k <= n <= {MAX_GAMMA_ORDER}, got n={n}, k={k}")
    return math.comb(int(n), int(k))


# ============================================================================
# Capacity kernel
# ============================================================================

def capacity_logdet(H, rho: Power) -> Union[float, np.ndarray]:
    """
    log2 det(I + H diag(rho) H^H) through a Cholesky factorization.

    H may be a single Nr x L matrix or a stack of shape (S, Nr, L); the stacked
    form evaluates every matrix with the same arithmetic as the single form.
    rho is a scalar SNR or one power per column.

    Returns:
        float for a single matrix, ndarray of shape (S,) for a stack

    Raises:
        DomainError: If rho is not positive or H has non-finite entries
        NumericalError: If I + H diag(rho) H^H is not numerically positive definite
    """
    stack = np.asarray(H, dtype=np.complex128)
    single = stack.ndim == 2
    if single:
        as_complex_matrix(stack)
        stack = stack[np.newaxis]
    elif stack.ndim != 3 or stack.shape[1] < 1 or stack.shape[2] < 1:
        raise DomainError(f"H must be 2-D or a 3-D stack, got shape {stack.shape}")
    elif not np.all(np.isfinite(stack)):
        raise DomainError("H has non-finite entries")

    powers = np.asarray(rho, dtype=np.float64)
    if not np.all(np.isfinite(powers)) or np.any(powers <= 0.0):
        raise DomainError(f"rho must be positive and finite, got: {rho}")

    stack = np.ascontiguousarray(stack)
    rows = stack.shape[1]
    gram = np.matmul(stack * powers, np.conj(np.swapaxes(stack, -1, -2)))
    gram = gram + np.eye(rows, dtype=np.complex128)
    try:
        factor = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"I + rho*H*H^H lost positive definiteness: {exc}") from exc

    diagonal = np.real(np.diagonal(factor, axis1=-2, axis2=-1))
    values = 2.0 * np.sum(np.log2(diagonal), axis=-1)
    values = np.maximum(values, 0.0)
    return float(values[0]) if single else values


# ============================================================================
# Random sampling
# ============================================================================

@dataclass(frozen=True)
class SeedStream:
    """
    Reproducible random substream keyed by (master_seed, stream_index).

    Streams are Philox counter-based generators: the key is the seed pair and
    the lane sets the top word of the counter, so lanes of one stream never
    overlap. Lane 0 draws channels, lane 1 draws random node selections.
    """

    master_seed: int
    stream_index: int
    lane: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_index", "lane"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or not 0 <= value < _UINT64_LIMIT:
                raise DomainError(f"{name} must be a 64-bit unsigned integer, got: {value}")

    def with_lane(self, lane: int) -> "SeedStream":
        return SeedStream(self.master_seed, self.stream_index, lane)

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        key = (int(self.master_seed) << 64) | int(self.stream_index)
        counter = int(self.lane) << _LANE_SHIFT
        return np.random.Generator(np.random.Philox(key=key, counter=counter))


def draw_complex_gaussian(
    rng: np.random.Generator, variance: float, size: Optional[Tuple[int, ...]] = None
) -> np.ndarray:
    """CN(0, variance) samples drawn from an existing generator."""
    if variance < 0.0:
        raise DomainError(f"variance must be nonnegative, got: {variance}")
    shape = () if size is None else tuple(size)
    parts = rng.standard_normal((2,) + shape)
    return math.sqrt(variance / 2.0) * (parts[0] + 1j * parts[1])


def sample_complex_gaussian(stream: SeedStream, variance: float, size: Optional[Tuple[int, ...]] = None):
    """
    Draw from CN(0, variance) at the start of `stream`.

    Real and imaginary parts are independent Normal(0, variance/2). Two calls
    with the same stream return identical values.

    Returns:
        complex when size is None, otherwise an ndarray of the given shape
    """
    samples = draw_complex_gaussian(stream.generator(), variance, size)
    if size is None:
        return complex(samples)
    return samples


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (float(value_db) / 10.0)


def linear_to_db(value: float) -> float:
    if value <= 0.0:
        raise DomainError(f"dB conversion needs a positive value, got: {value}")
    return 10.0 * math.log10(value)
