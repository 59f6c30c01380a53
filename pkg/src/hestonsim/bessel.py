"""Modified Bessel function of the first kind, I_nu, for nu > -1 and z >= 0.

Two evaluation branches are used:

* an adaptively truncated power series, summed outward from its largest term
  in log space so that neither large orders nor large arguments overflow, and
* the large-argument exponential-scaled asymptotic expansion.

Both branches compute ``ln(exp(-z) I_nu(z))``; the unscaled value is recovered
by exponentiation where representable.  All terms of the power series are
positive, so the series branch carries no cancellation and is accurate to
near machine precision for any admissible order.
"""

from __future__ import annotations

import numpy as np
from scipy.special import gammaln

from .errors import ParameterError

# Crossover to the asymptotic branch.  The scaled asymptotic series reaches
# machine precision before diverging once z is comfortably larger than nu^2;
# everywhere else the peak-summed power series is used.
_ASYM_Z_MIN = 50.0
_SERIES_RTOL = 1e-17
_MAX_TERMS = 100_000


def _check_args(nu: float, z: np.ndarray) -> None:
    if not np.isfinite(nu) or nu <= -1.0:
        raise ParameterError(f"Bessel order must satisfy nu > -1, got {nu}")
    if np.any(z < 0) or not np.all(np.isfinite(z)):
        raise ParameterError("Bessel argument must be finite and nonnegative")


def _log_ive_series(nu: float, z: np.ndarray) -> np.ndarray:
    """Peak-centered log-space summation of the power series for ln(e^-z I_nu)."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.empty_like(z)

    zero = z == 0.0
    out[zero] = 0.0 if nu == 0.0 else -np.inf
    pos = ~zero
    if not np.any(pos):
        return out

    zp = z[pos]
    logh = np.log(0.5 * zp)
    # Index of the largest series term; the terms are unimodal in k.
    kstar = np.floor(0.5 * (np.sqrt(nu * nu + zp * zp) - nu)).astype(np.int64)
    kstar = np.maximum(kstar, 0)
    log_peak = (nu + 2 * kstar) * logh - gammaln(kstar + 1.0) - gammaln(kstar + nu + 1.0)

    total = np.ones_like(zp)
    h2 = np.exp(2.0 * logh)

    # Upward from the peak.
    term = np.ones_like(zp)
    k = kstar.astype(float)
    for _ in range(_MAX_TERMS):
        term = term * h2 / ((k + 1.0) * (k + nu + 1.0))
        total += term
        k += 1.0
        if np.all(term <= _SERIES_RTOL * total):
            break

    # Downward from the peak (skipped for elements already at k = 0).
    term = np.ones_like(zp)
    k = kstar.astype(float)
    active = k > 0
    while np.any(active):
        term = np.where(active, term * k * (k + nu) / h2, 0.0)
        total += term
        k -= 1.0
        active = (k > 0) & (term > _SERIES_RTOL * total)

    out[pos] = log_peak + np.log(total) - zp
    return out


def _log_ive_asymptotic(nu: float, z: np.ndarray) -> np.ndarray:
    """Exponential-scaled asymptotic expansion, truncated at its smallest term."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    mu = 4.0 * nu * nu
    total = np.ones_like(z)
    term = np.ones_like(z)
    prev = np.full_like(z, np.inf)
    for k in range(60):
        term = term * -(mu - (2 * k + 1) ** 2) / (8.0 * z * (k + 1))
        mag = np.abs(term)
        # Stop once converged or the divergent tail starts growing.
        grow = mag >= prev
        if np.all((mag <= _SERIES_RTOL * np.abs(total)) | grow):
            total = np.where(grow, total, total + term)
            break
        total += np.where(grow, 0.0, term)
        prev = mag
    return -0.5 * np.log(2.0 * np.pi * z) + np.log(total)


def log_bessel_iv_scaled(nu: float, z):
    """Return ``ln(exp(-z) I_nu(z))`` elementwise.

    Parameters
    ----------
    nu : float
        Order, nu > -1.
    z : array_like
        Nonnegative argument(s).
    """
    z_arr = np.atleast_1d(np.asarray(z, dtype=float))
    _check_args(nu, z_arr)
    out = np.empty_like(z_arr)
    asym = (z_arr >= _ASYM_Z_MIN) & (nu * nu <= z_arr)
    if np.any(asym):
        out[asym] = _log_ive_asymptotic(nu, z_arr[asym])
    if np.any(~asym):
        out[~asym] = _log_ive_series(nu, z_arr[~asym])
    return out if np.ndim(z) else float(out[0])


def bessel_iv(nu: float, z):
    """Return ``I_nu(z)`` elementwise; overflows to ``inf`` for z beyond ~709.

    Use :func:`log_bessel_iv_scaled` when the unscaled value is not
    representable in double precision.
    """
    z_arr = np.atleast_1d(np.asarray(z, dtype=float))
    _check_args(nu, z_arr)
    out = np.exp(log_bessel_iv_scaled(nu, z_arr) + z_arr)
    return out if np.ndim(z) else float(out[0])


def bessel_ratio(nu: float, z, order_shift: int = 1):
    """Return ``I_{nu+order_shift}(z) / I_nu(z)`` elementwise, overflow-free."""
    z_arr = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.exp(
        log_bessel_iv_scaled(nu + order_shift, z_arr) - log_bessel_iv_scaled(nu, z_arr)
    )
    return out if np.ndim(z) else float(out[0])
