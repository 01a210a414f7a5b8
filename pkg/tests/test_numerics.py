"""
Tests for the numeric kernels: Gamma CDF, binomials, the log-det capacity
and seeded complex-Gaussian sampling.

Usage:
    pytest tests/test_numerics.py -v
"""

import math

import numpy as np
import pytest
from scipy import integrate, special

from coopnet.simulator.errors import DomainError, NumericalError
from coopnet.simulator.numerics import (
    SeedStream,
    binomial_coefficient,
    capacity_logdet,
    db_to_linear,
    linear_to_db,
    regularized_gamma_cdf,
    sample_complex_gaussian,
)


def _gamma_cdf_by_quadrature(x: float, k: int) -> float:
    density = lambda t: t ** (k - 1) * math.exp(-t) / math.factorial(k - 1)  # noqa: E731
    value, _ = integrate.quad(density, 0.0, x, epsabs=1e-13, epsrel=1e-12, limit=200)
    return value


# ============================================================================
# Gamma CDF
# ============================================================================

class TestRegularizedGammaCdf:
    """F(x; k) against closed forms and a quadrature oracle."""

    def test_origin_is_zero(self):
        assert regularized_gamma_cdf(0, 3) == 0.0

    def test_exponential_special_case(self):
        assert regularized_gamma_cdf(1, 1) == pytest.approx(0.6321205588, abs=1e-10)
        for x in (0.01, 0.5, 3.0, 12.0):
            assert regularized_gamma_cdf(x, 1) == pytest.approx(-math.expm1(-x), abs=1e-14)

    def test_shape_two(self, tolerances):
        expected = 1.0 - 2.0 * math.exp(-1.0)
        assert regularized_gamma_cdf(1, 2) == pytest.approx(expected, abs=tolerances["gamma_quadrature"])
        assert regularized_gamma_cdf(1, 2) == pytest.approx(0.2642411177, abs=1e-10)

    @pytest.mark.parametrize("k", [1, 2, 3, 5, 8])
    @pytest.mark.parametrize("x", [0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0])
    def test_matches_quadrature(self, x, k, tolerances):
        assert abs(regularized_gamma_cdf(x, k) - _gamma_cdf_by_quadrature(x, k)) <= tolerances["gamma_quadrature"]

    @pytest.mark.parametrize("k", [1, 3, 16, 64])
    def test_matches_incomplete_gamma(self, k):
        for x in np.geomspace(1e-6, 200.0, 40):
            assert regularized_gamma_cdf(x, k) == pytest.approx(special.gammainc(k, x), rel=1e-9, abs=1e-300)

    def test_tiny_argument_keeps_relative_accuracy(self):
        # x^k / k! dominates; the finite form would return exactly zero
        assert regularized_gamma_cdf(1e-8, 3) == pytest.approx(1e-24 / 6.0, rel=1e-6)

    def test_monotone_in_x_and_k(self):
        xs = np.linspace(0.0, 30.0, 121)
        for k in (1, 2, 4, 9):
            values = [regularized_gamma_cdf(x, k) for x in xs]
            assert all(b >= a for a, b in zip(values, values[1:]))
        for x in (0.5, 3.0, 10.0):
            values = [regularized_gamma_cdf(x, k) for k in range(1, 20)]
            assert all(b <= a for a, b in zip(values, values[1:]))

    def test_infinity_gives_one(self):
        assert regularized_gamma_cdf(math.inf, 4) == 1.0

    @pytest.mark.parametrize("x,k", [(-0.1, 2), (1.0, 0), (1.0, 65), (math.nan, 1), (1.0, 2.5)])
    def test_domain_errors(self, x, k):
        with pytest.raises(DomainError):
            regularized_gamma_cdf(x, k)


# ============================================================================
# Binomial coefficients
# ============================================================================

class TestBinomialCoefficient:

    @pytest.mark.parametrize("n,k,expected", [(15, 0, 1), (15, 3, 455), (7, 7, 1), (14, 5, 2002)])
    def test_values(self, n, k, expected):
        assert binomial_coefficient(n, k) == expected

    def test_factorial_oracle(self):
        for n in range(0, 21):
            for k in range(0, n + 1):
                expected = math.factorial(n) // (math.factorial(k) * math.factorial(n - k))
                assert binomial_coefficient(n, k) == expected

    @pytest.mark.parametrize("n,k", [(5, 6), (65, 1), (-1, 0), (4, -1)])
    def test_domain_errors(self, n, k):
        with pytest.raises(DomainError):
            binomial_coefficient(n, k)


# ============================================================================
# Capacity kernel
# ============================================================================

class TestCapacityLogdet:
    """log2 det(I + rho H H^H) checks."""

    def test_scalar_channel(self):
        h = 0.3 - 1.2j
        for rho in (0.1, 1.0, 100.0):
            assert capacity_logdet([[h]], rho) == pytest.approx(math.log2(1.0 + rho * abs(h) ** 2), abs=1e-12)

    def test_identity(self):
        assert capacity_logdet(np.eye(2), 1.0) == pytest.approx(2.0, abs=1e-12)

    def test_eigenvalue_oracle(self, tolerances):
        rng = np.random.default_rng(7)
        for _ in range(50):
            H = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
            rho = float(rng.uniform(0.1, 50.0))
            eigenvalues = np.linalg.eigvalsh(H @ H.conj().T)
            expected = float(np.sum(np.log2(1.0 + rho * eigenvalues)))
            assert abs(capacity_logdet(H, rho) - expected) <= tolerances["logdet_oracle"]

    def test_monotone_in_rho(self):
        rng = np.random.default_rng(11)
        H = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
        values = [capacity_logdet(H, rho) for rho in np.geomspace(0.01, 1e4, 30)]
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_column_permutation_invariance(self):
        rng = np.random.default_rng(3)
        H = rng.standard_normal((3, 5)) + 1j * rng.standard_normal((3, 5))
        base = capacity_logdet(H, 5.0)
        for perm in ([4, 3, 2, 1, 0], [1, 0, 3, 2, 4], [2, 4, 0, 1, 3]):
            assert capacity_logdet(H[:, perm], 5.0) == pytest.approx(base, abs=1e-10)

    def test_stack_matches_single(self):
        rng = np.random.default_rng(5)
        stack = rng.standard_normal((20, 2, 3)) + 1j * rng.standard_normal((20, 2, 3))
        batched = capacity_logdet(stack, 3.0)
        assert batched.shape == (20,)
        for i in range(20):
            assert batched[i] == pytest.approx(capacity_logdet(stack[i], 3.0), abs=1e-12)

    def test_per_column_powers(self):
        rng = np.random.default_rng(9)
        H = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
        powers = np.array([1.0, 4.0, 0.25])
        scaled = H * np.sqrt(powers)
        assert capacity_logdet(H, powers) == pytest.approx(capacity_logdet(scaled, 1.0), abs=1e-12)

    def test_nonnegative(self):
        assert capacity_logdet(np.zeros((2, 2)), 10.0) == 0.0

    @pytest.mark.parametrize("rho", [0.0, -1.0, math.nan])
    def test_rejects_bad_rho(self, rho):
        with pytest.raises(DomainError):
            capacity_logdet(np.eye(2), rho)

    def test_rejects_non_finite_entries(self):
        with pytest.raises(DomainError):
            capacity_logdet(np.array([[1.0, math.nan]]), 1.0)

    def test_factorization_failure_is_numerical_error(self, monkeypatch):
        def fail(_):
            raise np.linalg.LinAlgError("not positive definite")

        monkeypatch.setattr(np.linalg, "cholesky", fail)
        with pytest.raises(NumericalError):
            capacity_logdet(np.eye(2), 1.0)


# ============================================================================
# Sampling
# ============================================================================

class TestSampling:
    """Seeded complex-Gaussian draws."""

    def test_zero_variance(self):
        assert sample_complex_gaussian(SeedStream(1, 2), 0.0) == 0j

    def test_same_stream_same_value(self):
        a = sample_complex_gaussian(SeedStream(42, 7), 1.0)
        b = sample_complex_gaussian(SeedStream(42, 7), 1.0)
        assert a == b
        assert isinstance(a, complex)

    def test_streams_and_lanes_are_distinct(self):
        base = sample_complex_gaussian(SeedStream(42, 7), 1.0, (8,))
        other_index = sample_complex_gaussian(SeedStream(42, 8), 1.0, (8,))
        other_seed = sample_complex_gaussian(SeedStream(43, 7), 1.0, (8,))
        other_lane = sample_complex_gaussian(SeedStream(42, 7, lane=1), 1.0, (8,))
        for other in (other_index, other_seed, other_lane):
            assert not np.array_equal(base, other)

    def test_with_lane(self):
        stream = SeedStream(5, 6).with_lane(1)
        assert (stream.master_seed, stream.stream_index, stream.lane) == (5, 6, 1)

    def test_second_moment(self):
        samples = sample_complex_gaussian(SeedStream(2010, 0), 1.0, (1_000_000,))
        assert np.mean(np.abs(samples) ** 2) == pytest.approx(1.0, abs=0.01)
        assert np.var(samples.real) == pytest.approx(0.5, abs=0.01)
        assert np.var(samples.imag) == pytest.approx(0.5, abs=0.01)
        assert abs(np.mean(samples)) < 0.01

    def test_negative_variance(self):
        with pytest.raises(DomainError):
            sample_complex_gaussian(SeedStream(1, 1), -1.0)

    @pytest.mark.parametrize("seed,index", [(-1, 0), (0, -3), (2 ** 64, 0)])
    def test_rejects_bad_seeds(self, seed, index):
        with pytest.raises(DomainError):
            SeedStream(seed, index)


class TestDecibels:

    def test_round_trip(self):
        assert db_to_linear(30.0) == pytest.approx(1000.0)
        assert linear_to_db(1000.0) == pytest.approx(30.0)

    def test_nonpositive_rejected(self):
        with pytest.raises(DomainError):
            linear_to_db(0.0)
