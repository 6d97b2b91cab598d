import math

import numpy as np
import pytest
from scipy import integrate

from chainsim import (
    ConfigurationError,
    Exponential,
    Gamma,
    Tabulated,
    Weibull,
    distribution_from_json,
    distribution_to_json,
    replication_stream,
    sum_dist,
)
from chainsim.distributions import gridded_sum


def make_tabulated():
    # Piecewise-linear approximation of a triangular-ish positive law.
    xs = (0.0, 0.5, 1.0, 2.0, 3.0)
    fs = (0.0, 0.1, 0.45, 0.9, 1.0)
    return Tabulated(x=xs, cdf_values=fs)


ALL_FAMILIES = [
    Exponential(rate=0.7),
    Gamma(shape=2.0, rate=10.0),
    Gamma(shape=0.5, rate=1.5),
    Weibull(scale=2.0, shape=1.5),
    make_tabulated(),
]


# --- pdf -----------------------------------------------------------------

def test_exponential_pdf_at_zero_is_rate():
    assert Exponential(rate=1.0).pdf(0.0) == 1.0
    assert Exponential(rate=2.5).pdf(0.0) == 2.5


def test_shape_one_gamma_is_exponential():
    lam = 0.8
    g, e = Gamma(shape=1.0, rate=lam), Exponential(rate=lam)
    for x in (0.0, 0.3, 1.0, 4.2):
        assert g.pdf(x) == pytest.approx(e.pdf(x), rel=1e-12)
        assert g.cdf(x) == pytest.approx(e.cdf(x), rel=1e-12, abs=1e-15)


def test_weibull_pdf_matches_differentiated_cdf():
    # Oracle: central finite difference of the CDF with h = 1e-6.
    w = Weibull(scale=2.0, shape=1.5)
    x, h = 1.3, 1e-6
    oracle = (w.cdf(x + h) - w.cdf(x - h)) / (2.0 * h)
    assert w.pdf(x) == pytest.approx(oracle, rel=1e-7)


def test_pdf_zero_for_negative_argument():
    for dist in ALL_FAMILIES:
        assert dist.pdf(-1.0) == 0.0
        assert dist.cdf(-1.0) == 0.0


# --- cdf -----------------------------------------------------------------

def test_cdf_zero_at_origin():
    for dist in ALL_FAMILIES:
        assert dist.cdf(0.0) == 0.0


def test_exponential_cdf_closed_form():
    assert Exponential(rate=0.2).cdf(5.0) == pytest.approx(1.0 - math.exp(-1.0), abs=1e-12)


def test_weibull_cdf_at_scale_point():
    for shape in (0.8, 1.5, 3.0):
        w = Weibull(scale=2.0, shape=shape)
        assert w.cdf(2.0) == pytest.approx(1.0 - math.exp(-1.0), abs=1e-12)


def test_cdf_non_decreasing_and_tends_to_one():
    xs = np.linspace(0.0, 60.0, 400)
    for dist in ALL_FAMILIES:
        values = np.asarray(dist.cdf(xs))
        assert np.all(np.diff(values) >= -1e-13)
        assert values[-1] > 1.0 - 1e-6


def test_pdf_integrates_to_cdf():
    # |int_0^Q pdf - cdf(Q)| <= 1e-6 at the 0.999 quantile.
    for dist in ALL_FAMILIES:
        q = dist.quantile(0.999)
        integral, _ = integrate.quad(lambda v: float(dist.pdf(v)), 0.0, q, limit=300)
        assert abs(integral - dist.cdf(q)) <= 1e-6


# --- sampling ------------------------------------------------------------

class _FixedUniform:
    """Stream stub returning a fixed uniform draw."""

    def __init__(self, u):
        self.u = u

    def random(self):
        return self.u


def test_exponential_sampling_is_inverse_cdf():
    lam, u = 0.7, 0.41
    expected = -math.log1p(-u) / lam
    assert Exponential(rate=lam).sample(_FixedUniform(u)) == expected


def test_weibull_sampling_is_inverse_cdf():
    w = Weibull(scale=2.0, shape=1.5)
    u = 0.77
    assert w.sample(_FixedUniform(u)) == pytest.approx(w.quantile(u), rel=1e-14)


def test_gamma_sample_mean_matches_moment_oracle():
    g = Gamma(shape=2.0, rate=10.0)
    stream = replication_stream(2024, 0)
    n = 100_000
    draws = np.array([g.sample(stream) for _ in range(n)])
    se = draws.std(ddof=1) / math.sqrt(n)
    assert abs(draws.mean() - 0.2) <= 3.0 * se


def test_sampling_deterministic_given_seed():
    for dist in ALL_FAMILIES:
        a = [dist.sample(replication_stream(7, 3)) for _ in range(1)]
        first = replication_stream(7, 3)
        second = replication_stream(7, 3)
        seq1 = [dist.sample(first) for _ in range(5)]
        seq2 = [dist.sample(second) for _ in range(5)]
        assert seq1 == seq2
        assert a[0] == seq1[0]


@pytest.mark.parametrize("dist", ALL_FAMILIES, ids=lambda d: d.family + str(id(d) % 97))
def test_empirical_cdf_passes_ks(dist):
    # KS statistic below the 1% critical value 1.628/sqrt(n).
    n = 100_000
    stream = replication_stream(99, 1)
    draws = np.sort([dist.sample(stream) for _ in range(n)])
    grid_cdf = np.asarray(dist.cdf(draws))
    ecdf_hi = np.arange(1, n + 1) / n
    ecdf_lo = np.arange(0, n) / n
    d_stat = max(np.max(np.abs(ecdf_hi - grid_cdf)), np.max(np.abs(grid_cdf - ecdf_lo)))
    assert d_stat < 1.628 / math.sqrt(n)


# --- quantiles and moments ------------------------------------------------

def test_quantile_inverts_cdf():
    for dist in ALL_FAMILIES:
        for p in (0.05, 0.3, 0.5, 0.9, 0.999):
            x = dist.quantile(p)
            assert dist.cdf(x) == pytest.approx(p, abs=1e-6)


def test_mean_matches_quadrature():
    for dist in ALL_FAMILIES:
        upper = dist.quantile(1.0 - 1e-12) if not isinstance(dist, Tabulated) else dist.x[-1]
        integral, _ = integrate.quad(lambda v: float(dist.sf(v)), 0.0, upper, limit=400)
        assert integral == pytest.approx(dist.mean(), rel=1e-6)


def test_partial_expectation_matches_quadrature():
    for dist in ALL_FAMILIES:
        b = dist.quantile(0.8)
        oracle, _ = integrate.quad(lambda v: v * float(dist.pdf(v)), 0.0, b, limit=400, points=[0.0])
        assert dist.partial_expectation(b) == pytest.approx(oracle, rel=1e-6, abs=1e-12)


# --- sums ----------------------------------------------------------------

def test_exponential_sum_is_gamma():
    s = sum_dist(Exponential(rate=0.2), 3)
    assert s.kind == "analytic-gamma"
    inner = s._delegate()
    assert isinstance(inner, Gamma)
    assert inner.shape == 3.0 and inner.rate == 0.2


def test_gamma_sum_scales_shape():
    s = sum_dist(Gamma(shape=0.05, rate=15.0), 12)
    inner = s._delegate()
    assert inner.shape == pytest.approx(0.6) and inner.rate == 15.0


def test_sum_of_one_is_identity():
    for dist in ALL_FAMILIES:
        s = sum_dist(dist, 1)
        xs = np.linspace(0.0, dist.quantile(0.999), 50)
        tol = 1e-12
        assert np.allclose(np.asarray(s.cdf(xs)), np.asarray(dist.cdf(xs)), atol=tol)


def test_gridded_convolution_matches_analytic_gamma():
    # Force the lattice route on a singular gamma base and compare with the
    # exact m-fold gamma at mid-range quantiles.
    base = Gamma(shape=0.05, rate=15.0)
    exact = Gamma(shape=0.6, rate=15.0)
    grid = gridded_sum(base, 12)
    for q in (0.1, 0.25, 0.5, 0.75, 0.9):
        x = exact.quantile(q)
        assert abs(float(grid.cdf(x)) - float(exact.cdf(x))) <= 2e-4


def test_mean_additivity():
    for dist, tol in [
        (Exponential(rate=0.7), 1e-6),
        (Gamma(shape=0.5, rate=1.5), 1e-6),
        (Weibull(scale=2.0, shape=1.5), 1e-3),
        (make_tabulated(), 1e-3),
    ]:
        for m in (2, 5):
            s = sum_dist(dist, m)
            assert s.mean() == pytest.approx(m * dist.mean(), abs=tol, rel=1e-6)


def test_sums_are_stochastically_ordered():
    # One more positive summand pushes the CDF down pointwise.
    for dist in [Exponential(rate=0.7), Weibull(scale=2.0, shape=1.5)]:
        s2, s3 = sum_dist(dist, 2), sum_dist(dist, 3)
        xs = np.linspace(0.01, dist.quantile(0.999) * 4, 60)
        assert np.all(np.asarray(s3.cdf(xs)) <= np.asarray(s2.cdf(xs)) + 1e-9)


def test_gridded_sum_total_mass_near_one():
    s = sum_dist(Weibull(scale=2.0, shape=1.5), 4)
    lat = s.lattice()
    assert lat is not None
    assert float(lat.masses.sum()) >= 1.0 - 1e-6


def test_gridded_sample_is_sum_of_base_draws():
    w = Weibull(scale=2.0, shape=1.5)
    s = sum_dist(w, 3)
    direct = replication_stream(5, 5)
    parts = replication_stream(5, 5)
    total = s.sample(direct)
    assert total == pytest.approx(sum(w.sample(parts) for _ in range(3)), rel=1e-15)


def test_sum_dist_rejects_bad_m():
    with pytest.raises(ConfigurationError):
        sum_dist(Exponential(rate=1.0), 0)
    with pytest.raises(ConfigurationError):
        sum_dist(Exponential(rate=1.0), 2.5)  # type: ignore[arg-type]


# --- validation and serialization ----------------------------------------

@pytest.mark.parametrize(
    "bad",
    [
        lambda: Exponential(rate=0.0),
        lambda: Exponential(rate=-1.0),
        lambda: Gamma(shape=-0.5, rate=1.0),
        lambda: Gamma(shape=1.0, rate=0.0),
        lambda: Weibull(scale=0.0, shape=1.0),
        lambda: Weibull(scale=1.0, shape=-2.0),
        lambda: Tabulated(x=(0.0, 1.0), cdf_values=(0.1, 1.0)),  # must start at 0
        lambda: Tabulated(x=(0.0, 1.0, 0.5), cdf_values=(0.0, 0.5, 1.0)),  # x not increasing
        lambda: Tabulated(x=(0.0, 1.0, 2.0), cdf_values=(0.0, 0.8, 0.7)),  # cdf decreasing
        lambda: Tabulated(x=(0.0, 1.0), cdf_values=(0.0, 0.9)),  # never reaches 1
    ],
)
def test_invalid_parameters_raise_configuration_error(bad):
    with pytest.raises(ConfigurationError):
        bad()


def test_json_round_trip():
    for dist in ALL_FAMILIES:
        again = distribution_from_json(distribution_to_json(dist))
        assert again == dist


def test_json_schema_examples():
    g = distribution_from_json({"family": "gamma", "shape": 0.05, "rate": 15})
    assert isinstance(g, Gamma) and g.shape == 0.05 and g.rate == 15.0
    e = distribution_from_json({"family": "exponential", "rate": 0.2})
    assert isinstance(e, Exponential) and e.rate == 0.2
    w = distribution_from_json({"family": "weibull", "scale": 2.0, "shape": 1.5})
    assert isinstance(w, Weibull) and w.scale == 2.0 and w.shape == 1.5


def test_json_rejects_unknown_and_missing_keys():
    with pytest.raises(ConfigurationError):
        distribution_from_json({"family": "exponential", "rate": 1.0, "mean": 2.0})
    with pytest.raises(ConfigurationError):
        distribution_from_json({"family": "gamma", "shape": 1.0})
    with pytest.raises(ConfigurationError):
        distribution_from_json({"family": "lognormal", "mu": 0.0})
