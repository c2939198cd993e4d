"""Special-function accuracy against quadrature and identity oracles."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from corteml import statmath
from corteml.errors import ComputeError


def normal_pdf(z):
    return math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)


def t_pdf(x, nu):
    ln_c = math.lgamma((nu + 1) / 2) - math.lgamma(nu / 2) - 0.5 * math.log(nu * math.pi)
    return math.exp(ln_c - (nu + 1) / 2 * math.log1p(x * x / nu))


def chi2_pdf(x, k):
    if x <= 0:
        return 0.0
    return math.exp((k / 2 - 1) * math.log(x) - x / 2 - math.lgamma(k / 2) - (k / 2) * math.log(2))


def f_pdf(x, d1, d2):
    if x <= 0:
        return 0.0
    ln_c = (
        math.lgamma((d1 + d2) / 2) - math.lgamma(d1 / 2) - math.lgamma(d2 / 2)
        + (d1 / 2) * math.log(d1 / d2)
    )
    return math.exp(ln_c + (d1 / 2 - 1) * math.log(x) - ((d1 + d2) / 2) * math.log1p(d1 * x / d2))


class TestLnGamma:
    def test_exact_identities(self):
        assert abs(statmath.ln_gamma(1.0)) <= 1e-12
        assert abs(statmath.ln_gamma(0.5) - 0.5 * math.log(math.pi)) <= 1e-12
        assert abs(statmath.ln_gamma(10.0) - math.log(362880.0)) <= 1e-10

    def test_relative_accuracy_over_range(self):
        for x in np.geomspace(1e-3, 1e3, 200):
            ours = statmath.ln_gamma(float(x))
            ref = math.lgamma(float(x))
            assert abs(ours - ref) <= 1e-10 * max(1.0, abs(ref))

    def test_domain(self):
        with pytest.raises(ComputeError):
            statmath.ln_gamma(0.0)
        with pytest.raises(ComputeError):
            statmath.ln_gamma(-1.5)


class TestRegIncBeta:
    def test_boundaries(self):
        for a, b in [(0.5, 0.5), (2.0, 3.0), (10.0, 1.0)]:
            assert statmath.reg_inc_beta(a, b, 0.0) == 0.0
            assert statmath.reg_inc_beta(a, b, 1.0) == 1.0

    def test_uniform_case(self):
        for x in np.linspace(0, 1, 11):
            assert abs(statmath.reg_inc_beta(1.0, 1.0, float(x)) - x) <= 1e-12

    def test_symmetric_midpoint(self):
        assert abs(statmath.reg_inc_beta(2.0, 2.0, 0.5) - 0.5) <= 1e-12

    def test_against_quadrature(self):
        # direct integral of the beta density
        for a, b in [(0.5, 1.5), (2.0, 3.0), (7.0, 2.5)]:
            ln_c = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)

            def pdf(t):
                return math.exp(ln_c + (a - 1) * math.log(t) + (b - 1) * math.log1p(-t))

            for x in (0.1, 0.3, 0.5, 0.8, 0.95):
                ref, _ = quad(pdf, 0.0, x, epsabs=1e-12, limit=200)
                assert abs(statmath.reg_inc_beta(a, b, x) - ref) <= 1e-10

    def test_domain(self):
        with pytest.raises(ComputeError):
            statmath.reg_inc_beta(0.0, 1.0, 0.5)
        with pytest.raises(ComputeError):
            statmath.reg_inc_beta(1.0, 1.0, 1.5)


class TestCdfs:
    def test_t_symmetry_at_zero(self):
        for nu in (1.0, 4.0, 29.0, 1e6):
            assert statmath.t_cdf(0.0, nu) == 0.5

    def test_normal_quantile(self):
        assert abs(statmath.normal_cdf(1.959964) - 0.975) <= 1e-6

    def test_t_against_quadrature(self):
        nu = 7.0
        for t in np.linspace(-6, 6, 25):
            ref = 0.5 + quad(lambda u: t_pdf(u, nu), 0.0, abs(t), epsabs=1e-12)[0]
            if t < 0:
                ref = 1.0 - ref
            assert abs(statmath.t_cdf(float(t), nu) - ref) <= 1e-8

    def test_chi2_against_quadrature(self):
        for k in (2.0, 4.0, 11.0):
            for x in (0.5, 2.0, 7.5, 20.0):
                ref = quad(lambda u: chi2_pdf(u, k), 0.0, x, epsabs=1e-12, limit=200)[0]
                assert abs(statmath.chi2_cdf(x, k) - ref) <= 1e-8

    def test_f_against_quadrature(self):
        for d1, d2 in [(5.0, 12.0), (1.0, 8.0)]:
            for x in (0.25, 1.0, 3.0):
                ref = quad(lambda u: f_pdf(u, d1, d2), 0.0, x, epsabs=1e-12, limit=200)[0]
                assert abs(statmath.f_cdf(x, d1, d2) - ref) <= 1e-8

    def test_f_reciprocal_identity(self):
        for x in (0.2, 0.9, 1.7, 5.0):
            for d1, d2 in [(3.0, 9.0), (10.0, 2.0)]:
                total = statmath.f_cdf(x, d1, d2) + statmath.f_cdf(1.0 / x, d2, d1)
                assert abs(total - 1.0) <= 1e-9

    def test_monotone_and_bounded(self):
        grids = {
            "normal": (statmath.normal_cdf, np.linspace(-8, 8, 101)),
            "t": (lambda v: statmath.t_cdf(v, 5.0), np.linspace(-8, 8, 101)),
            "chi2": (lambda v: statmath.chi2_cdf(v, 3.0), np.linspace(0, 30, 101)),
            "f": (lambda v: statmath.f_cdf(v, 4.0, 9.0), np.linspace(0, 30, 101)),
        }
        for name, (fn, grid) in grids.items():
            values = [fn(float(v)) for v in grid]
            assert all(0.0 <= v <= 1.0 for v in values), name
            assert all(b >= a - 1e-15 for a, b in zip(values, values[1:])), name

    def test_t_converges_to_normal(self):
        devs = [
            abs(statmath.t_cdf(float(t), 1e6) - statmath.normal_cdf(float(t)))
            for t in np.linspace(-5, 5, 81)
        ]
        assert max(devs) <= 1e-4

    def test_chi2_equals_gamma_cdf(self):
        from scipy.stats import gamma

        for k in (1.0, 4.0, 9.0):
            for x in (0.3, 2.2, 8.0):
                assert abs(statmath.chi2_cdf(x, k) - gamma.cdf(x, k / 2, scale=2)) <= 1e-9

    def test_domains(self):
        with pytest.raises(ComputeError):
            statmath.t_cdf(1.0, 0.0)
        with pytest.raises(ComputeError):
            statmath.f_cdf(-0.5, 2.0, 2.0)
        with pytest.raises(ComputeError):
            statmath.chi2_cdf(1.0, -2.0)


def test_two_sided_p():
    assert abs(statmath.two_sided_t_p(0.0, 10.0) - 1.0) <= 1e-12
    assert statmath.two_sided_t_p(50.0, 10.0) < 1e-10
    p = statmath.two_sided_t_p(-2.0, 12.0)
    assert abs(p - 2 * (1 - statmath.t_cdf(2.0, 12.0))) <= 1e-15
