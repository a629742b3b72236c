r"""Modified Bessel functions of the first kind, :math:`I_\nu(z)`, for real
order :math:`\nu \ge 0` and real argument :math:`z \ge 0`.

Two evaluation regimes are used:

* ascending power series :math:`\sum_k (z/2)^{2k+\nu} / (k!\,\Gamma(k+\nu+1))`
  for :math:`z \le 20\max(1, \nu)`;
* the large-argument expansion
  :math:`I_\nu(z) \sim e^z/\sqrt{2\pi z}\,\sum_k (-1)^k a_k(\nu) z^{-k}`
  otherwise.

The exponentially scaled value :math:`e^{-z} I_\nu(z)` is what both branches
actually compute, so ratios such as :math:`I_\nu/I'_\nu` stay finite for
arguments where :math:`I_\nu` itself overflows.

Note that the leading large-:math:`z` behaviour is :math:`e^z/\sqrt{2\pi z}`;
the constant :math:`\sqrt{\pi z}` sometimes quoted differs by :math:`\sqrt 2`.
Only limits of ratios are affected by neither.
"""

import math

import numpy as np

__all__ = [
    "order_for_dimension",
    "bessel_i",
    "bessel_ie",
    "bessel_i_prime",
    "bessel_ie_prime",
    "switch_point",
]

_SERIES_TERMS_MAX = 400
_ASYMPTOTIC_TERMS_MAX = 200
_EPS = 2.0 ** -53


def order_for_dimension(n):
    """Bessel order ``(n - 2) / 2`` attached to the radial Laplacian in R^n."""
    if int(n) != n or n < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {n!r}")
    return (n - 2) / 2.0


def switch_point(nu):
    """Argument above which the asymptotic branch is used."""
    return 20.0 * max(1.0, nu)


def _check(nu, z):
    if not (math.isfinite(nu) and math.isfinite(z)):
        raise ValueError(f"non-finite input: nu={nu!r}, z={z!r}")
    if nu < 0:
        raise ValueError(f"order must be >= 0, got {nu!r}")
    if z < 0:
        raise ValueError(f"argument must be >= 0, got {z!r}")


def _series_scaled(nu, z):
    # all terms are positive, so plain summation loses nothing to cancellation
    if z == 0.0:
        return 1.0 if nu == 0 else 0.0
    log_lead = nu * math.log(z / 2.0) - math.lgamma(nu + 1.0) - z
    q = 0.25 * z * z
    term = 1.0
    total = 1.0
    for k in range(1, _SERIES_TERMS_MAX):
        term *= q / (k * (k + nu))
        total += term
        if term < _EPS * total:
            break
    return math.exp(log_lead) * total


def _asymptotic_scaled(nu, z):
    mu = 4.0 * nu * nu
    term = 1.0
    total = 1.0
    prev = math.inf
    for k in range(1, _ASYMPTOTIC_TERMS_MAX):
        term *= -(mu - (2 * k - 1) ** 2) / (k * 8.0 * z)
        mag = abs(term)
        if mag == 0.0 or mag < _EPS * abs(total):
            total += term
            break
        if mag > prev:
            # divergent tail reached; the smallest term bounds the error
            break
        total += term
        prev = mag
    return total / math.sqrt(2.0 * math.pi * z)


def bessel_ie(nu, z):
    r"""Exponentially scaled :math:`e^{-z} I_\nu(z)`."""
    nu = float(nu)
    z = float(z)
    _check(nu, z)
    if z <= switch_point(nu):
        return _series_scaled(nu, z)
    return _asymptotic_scaled(nu, z)


def bessel_i(nu, z):
    r"""Modified Bessel function :math:`I_\nu(z)`.

    Parameters
    ----------
    nu : float
        Order, ``nu >= 0``.
    z : float
        Argument, ``z >= 0``.

    Returns
    -------
    float
        :math:`I_\nu(z)`, relative accuracy about 1e-13. Returns ``inf`` once
        :math:`e^z` overflows.

    Raises
    ------
    ValueError
        On negative or non-finite input.
    """
    s = bessel_ie(nu, z)
    if z > 700.0:
        return math.inf
    return s * math.exp(z)


def bessel_ie_prime(nu, z):
    r"""Exponentially scaled derivative :math:`e^{-z} I'_\nu(z)`."""
    nu = float(nu)
    z = float(z)
    _check(nu, z)
    if z <= 0.0:
        raise ValueError(f"derivative requires z > 0, got {z!r}")
    if nu == 0.0:
        return bessel_ie(1.0, z)
    if nu >= 1.0:
        return 0.5 * (bessel_ie(nu - 1.0, z) + bessel_ie(nu + 1.0, z))
    # 0 < nu < 1: I_{nu-1} has negative order, use I' = I_{nu+1} + (nu/z) I_nu
    return bessel_ie(nu + 1.0, z) + (nu / z) * bessel_ie(nu, z)


def bessel_i_prime(nu, z):
    r"""Derivative :math:`I'_\nu(z)` for ``z > 0``.

    Uses :math:`I'_0 = I_1` and :math:`I'_\nu = (I_{\nu-1} + I_{\nu+1})/2` for
    :math:`\nu \ge 1`; for :math:`0 < \nu < 1` the equivalent form
    :math:`I_{\nu+1} + (\nu/z) I_\nu` avoids a negative order.
    """
    s = bessel_ie_prime(nu, z)
    if z > 700.0:
        return math.inf
    return s * math.exp(z)


def bessel_i_array(nu, z):
    """Vectorised convenience wrapper around :func:`bessel_i`."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    for idx, zi in np.ndenumerate(z):
        out[idx] = bessel_i(nu, zi)
    return out
