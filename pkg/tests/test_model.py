import numpy as np
import pytest

from hestonsim.errors import DomainError, ParameterError
from hestonsim.model import (
    ModelParams,
    avg_variance_moments,
    cond_laplace_bk,
    cond_laplace_pois,
    eta_moments,
    iv_moments_bessel,
    iv_moments_pois,
    iv_moments_truncated,
    phi,
    series_coeffs,
    terminal_variance_moments,
)
from hestonsim.distributions import bessel_rv_logpmf
from hestonsim.presets import CASE_PRESETS


def test_model_params_validation():
    with pytest.raises(ParameterError):
        ModelParams(s0=-1, v0=0.04, kappa=1, theta=0.04, xi=1, rho=0)
    with pytest.raises(ParameterError):
        ModelParams(s0=100, v0=0.04, kappa=1, theta=0.04, xi=1, rho=1.5)
    with pytest.raises(ParameterError):
        ModelParams(s0=100, v0=0.04, kappa=1, theta=0.04, xi=1, rho=0, r=np.nan)


def test_derived_constants():
    m = CASE_PRESETS["IV"].model
    assert m.delta == pytest.approx(4.0 * 4.0 * 0.25 / 1.0)
    assert m.nu == pytest.approx(0.5 * m.delta - 1.0)


def test_phi_small_argument_limit():
    np.testing.assert_allclose(phi(1e-8, 1.0, 1.0), 4.0, rtol=1e-8)


def test_phi_case_one():
    np.testing.assert_allclose(phi(0.5, 10.0, 1.0), 1.0 / np.sinh(2.5), rtol=1e-14)


def test_phi_xi_scaling():
    assert phi(0.7, 2.0, 2.0) == pytest.approx(phi(0.7, 2.0, 1.0) / 4.0, rel=1e-14)


def test_phi_overflow_guard():
    with pytest.raises(DomainError):
        phi(2000.0, 1.0, 1.0)


def test_terminal_variance_moments_fixed_point():
    m = CASE_PRESETS["I"].model
    mean, _ = terminal_variance_moments(m.theta, 7.3, m)
    assert mean == pytest.approx(m.theta)


def test_terminal_variance_moments_long_horizon():
    m = CASE_PRESETS["IV"].model
    mean, var = terminal_variance_moments(m.v0, 1000.0, m)
    assert mean == pytest.approx(0.25, rel=1e-10)
    assert var == pytest.approx(1.0 * 0.25 / 8.0, rel=1e-10)


def test_terminal_variance_moments_short_horizon():
    m = CASE_PRESETS["II"].model
    mean, var = terminal_variance_moments(m.v0, 1e-12, m)
    assert mean == pytest.approx(m.v0, rel=1e-9)
    assert var == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize(
    "name,mean_ref,var_ref",
    [("I", 0.04, 0.011243), ("II", 0.04, 0.016118),
     ("III", 0.017586, 0.000126), ("IV", 0.198462, 0.007109)],
)
def test_avg_variance_moments_reference(name, mean_ref, var_ref):
    preset = CASE_PRESETS[name]
    mean, var = avg_variance_moments(preset.model, preset.maturity)
    assert round(mean, 6) == pytest.approx(mean_ref, abs=5.1e-7)
    assert round(var, 6) == pytest.approx(var_ref, abs=5.1e-7)


def test_avg_variance_fixed_point():
    m = CASE_PRESETS["I"].model
    mean, _ = avg_variance_moments(m, 3.0)
    assert mean == pytest.approx(m.theta)


def test_series_coeffs_small_a_limits():
    m = CASE_PRESETS["III"].model
    c = series_coeffs(m, 1e-9)
    assert c.m_x == pytest.approx(1.0 / 3.0, rel=1e-12)
    assert c.m_z == pytest.approx(1.0 / 12.0, rel=1e-12)
    assert c.v_x > 0 and c.v_z > 0


def test_series_coeffs_branch_continuity():
    # Series branch (a <= 0.2) and direct hyperbolic branch agree at the crossover.
    m = CASE_PRESETS["I"].model
    lo = series_coeffs(m, 2 * 0.2 / m.kappa * (1 - 1e-9))
    hi = series_coeffs(m, 2 * 0.2 / m.kappa * (1 + 1e-9))
    for attr in ("m_x", "v_x", "m_z", "v_z"):
        np.testing.assert_allclose(getattr(lo, attr), getattr(hi, attr), rtol=1e-8)


def test_series_partial_sums_converge_to_moment_scales():
    m = CASE_PRESETS["IV"].model
    h = 1.0
    c = series_coeffs(m, h)
    k = np.arange(1, 1_000_001, dtype=float)
    lam, gam = c.lam(k), c.gam(k)
    np.testing.assert_allclose(np.sum(lam / gam), c.mean_x, rtol=1e-6)
    np.testing.assert_allclose(np.sum(1.0 / gam), c.mean_z, rtol=1e-6)


def test_lambda_over_gamma_decreasing():
    c = series_coeffs(CASE_PRESETS["II"].model, 15.0)
    k = np.arange(1, 200, dtype=float)
    ratio = c.lam(k) / c.gam(k)
    assert np.all(np.diff(ratio) < 0)
    assert np.all(c.lam(k) > 0) and np.all(c.gam(k) > 0)


def test_iv_moments_pois_substitution():
    m = CASE_PRESETS["I"].model
    h, v = 2.0, 0.05
    c = series_coeffs(m, h)
    mom = iv_moments_pois(v, v, 0, m, h)
    assert mom.mean == pytest.approx(2 * v * c.mean_x + 0.5 * m.delta * c.mean_z)
    assert mom.variance == pytest.approx(2 * v * c.var_x + 0.5 * m.delta * c.var_z)


def test_iv_moments_pois_monotone_in_count():
    m = CASE_PRESETS["III"].model
    mus = np.arange(0, 10)
    mom = iv_moments_pois(0.02, 0.02, mus, m, 1.0)
    assert np.all(np.diff(mom.mean) > 0)
    assert np.all(np.diff(mom.variance) > 0)


def test_iv_moments_truncated_k0_identity():
    m = CASE_PRESETS["II"].model
    full = iv_moments_pois(0.03, 0.05, 2, m, 3.0)
    trunc = iv_moments_truncated(0, 0.03, 0.05, 2, m, 3.0)
    assert trunc.mean == full.mean and trunc.variance == full.variance


def test_iv_moments_truncated_additivity():
    m = CASE_PRESETS["I"].model
    h, v0, vt, mu, kk = 10.0, 0.04, 0.07, 3, 8
    c = series_coeffs(m, h)
    full = iv_moments_pois(v0, vt, mu, m, h, c)
    trunc = iv_moments_truncated(kk, v0, vt, mu, m, h, c)
    k = np.arange(1, kk + 1, dtype=float)
    removed = np.sum((v0 + vt) * c.lam(k) / c.gam(k) + (0.5 * m.delta + 2 * mu) / c.gam(k))
    np.testing.assert_allclose(trunc.mean + removed, full.mean, rtol=1e-12)


def test_iv_moments_truncated_tail_vanishes():
    m = CASE_PRESETS["III"].model
    full = iv_moments_pois(0.019, 0.019, 1, m, 1.0)
    trunc = iv_moments_truncated(100_000, 0.019, 0.019, 1, m, 1.0)
    assert trunc.mean < 1e-4 * full.mean
    assert trunc.mean >= 0 and trunc.variance >= 0


def test_bessel_pois_mixture_mean_identity():
    # Averaging the count-conditional mean over the Bessel pmf recovers the
    # endpoint-conditional mean.
    m = CASE_PRESETS["III"].model
    h, v0, vt = 1.0, 0.0102, 0.019
    z = np.sqrt(v0 * vt) * phi(m.kappa, h, m.xi)
    js = np.arange(0, 500)
    pmf = np.exp(bessel_rv_logpmf(m.nu, z, js))
    mixed = np.sum(pmf * iv_moments_pois(v0, vt, js, m, h).mean)
    ref = iv_moments_bessel(v0, vt, m, h).mean
    np.testing.assert_allclose(mixed, ref, rtol=1e-10)


def test_eta_moments_positive():
    m = CASE_PRESETS["I"].model
    mean, var = eta_moments(0.04, 0.04, m, 10.0)
    assert mean > 0 and var > 0


@pytest.mark.parametrize("laplace", [cond_laplace_pois, cond_laplace_bk])
def test_laplace_at_zero(laplace):
    m = CASE_PRESETS["III"].model
    args = (0.019, 0.019, 2, m, 1.0) if laplace is cond_laplace_pois else (0.019, 0.019, m, 1.0)
    assert laplace(0.0, *args) == pytest.approx(1.0, rel=1e-14)


def test_laplace_pois_derivatives_match_moments():
    m = CASE_PRESETS["III"].model
    v0, vt, mu, h = 0.019, 0.025, 3, 1.0
    mom = iv_moments_pois(v0, vt, mu, m, h)
    eps = 1e-6
    f = lambda u: cond_laplace_pois(u, v0, vt, mu, m, h)
    d1 = (f(eps) - f(0.0)) / eps
    np.testing.assert_allclose(-d1, mom.mean, rtol=1e-4)
    # a larger step keeps the second difference clear of rounding noise;
    # the truncation error is O(eps * third moment) and far below tolerance
    eps2 = 1e-3
    d2 = (f(2 * eps2) - 2 * f(eps2) + f(0.0)) / eps2**2
    np.testing.assert_allclose(d2, mom.variance + mom.mean**2, rtol=1e-3)


def test_laplace_bk_derivative_matches_mean():
    m = CASE_PRESETS["III"].model
    v0, vt, h = 0.0102, 0.019, 1.0
    mom = iv_moments_bessel(v0, vt, m, h)
    eps = 1e-6
    d1 = (cond_laplace_bk(eps, v0, vt, m, h) - 1.0) / eps
    np.testing.assert_allclose(-d1, mom.mean, rtol=1e-4)


def test_laplace_decreasing_in_u():
    m = CASE_PRESETS["I"].model
    us = np.array([0.0, 0.5, 1.0, 2.0, 5.0])
    vals = cond_laplace_pois(us, 0.04, 0.04, 1, m, 10.0)
    assert np.all(np.diff(vals) < 0)
    assert np.all(vals > 0) and vals[0] == pytest.approx(1.0)
