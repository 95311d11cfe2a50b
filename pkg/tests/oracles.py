"""Independent brute-force oracles used to validate the package.

Everything here deliberately avoids the faslcr implementation: special
functions come from power series / quadrature built on scipy, and the
crossing-rate oracles integrate the raw joint density directly.  Tests
compare faslcr's fast paths against these slow-but-simple routes.
"""

import math

import numpy as np
from scipy import integrate, special


def j0_series(x, terms=60):
    """Power-series J0, adequate to ~1e-14 on [0, 8]."""
    z = -0.25 * x * x
    term, total = 1.0, 1.0
    for m in range(1, terms):
        term *= z / (m * m)
        total += term
    return total


def i0_scaled_quad(x):
    """exp(-|x|) I0(x) via the integral (1/pi) int_0^pi exp(x (cos t - 1)) dt."""
    x = abs(x)
    val, _ = integrate.quad(
        lambda t: math.exp(x * (math.cos(t) - 1.0)), 0.0, math.pi,
        epsabs=1e-15, epsrel=1e-13, limit=200,
    )
    return val / math.pi


def marcum_q1_quad(a, b):
    """Q1(a, b) by adaptive quadrature of x exp(-(x^2+a^2)/2) I0(ax) over [b, inf)."""
    if b == 0.0:
        return 1.0

    def f(x):
        return x * special.i0e(a * x) * np.exp(-0.5 * (x - a) ** 2)

    hi = max(a, b) + 45.0
    val, _ = integrate.quad(f, b, hi, epsabs=1e-15, epsrel=1e-13, limit=400)
    return val


def lower_gamma_quad(k, x):
    """gamma(k+1, x) by adaptive quadrature of t^k exp(-t)."""
    val, _ = integrate.quad(
        lambda t: t ** k * math.exp(-t), 0.0, x,
        epsabs=1e-15, epsrel=1e-13, limit=400,
    )
    return val


def pair_density(sigma2, mu, x_ref, xk):
    """One bivariate factor of the joint envelope density (scipy I0)."""
    c = sigma2 * (1.0 - mu * mu)
    v = 2.0 * abs(mu) * x_ref * xk / c
    return 2.0 * xk / c * special.i0e(v) * np.exp(v - (xk * xk + mu * mu * x_ref * x_ref) / c)


def joint_density(sigma2, mus, xs):
    """Full joint density as the product of pair factors against port 1."""
    out = pair_density(sigma2, 0.0, xs[0], xs[0])
    for mu, xk in zip(mus[1:], xs[1:]):
        out = out * pair_density(sigma2, mu, xs[0], xk)
    return out


def rayleigh_lcr(sigma, fd, x_th):
    """Classical single-channel Rayleigh crossing rate."""
    return math.sqrt(2.0 * math.pi) / sigma * fd * x_th * math.exp(-x_th * x_th / (sigma * sigma))


def two_port_lcr_quad(sigma2, mu, x_th, fd=1.0):
    """Two-port crossing rate by direct quadrature of the bivariate density.

    L = sqrt(2 pi) sigma f_D int_0^{x_th} p(x_th, x2) dx2 (the two symmetric
    contributions already combined).
    """
    sigma = math.sqrt(sigma2)
    s = sigma2 * (1.0 - mu * mu)
    ridge = max(0.0, x_th - 6.0 * math.sqrt(s / 2.0))
    val, _ = integrate.quad(
        lambda x2: joint_density(sigma2, (0.0, mu), (x_th, x2)),
        0.0, x_th, epsabs=1e-14, epsrel=1e-12, points=[ridge, x_th], limit=400,
    )
    return math.sqrt(2.0 * math.pi) * sigma * fd * val


def n_port_lcr_bruteforce(sigma2, mus, x_th, fd=1.0):
    """N-port crossing rate from first principles for N <= 3.

    Evaluates sqrt(pi/2) sigma f_D sum_i int...int p(x_1,...,x_i=x_th,...)
    over [0, x_th]^(N-1) with adaptive (double) quadrature of the raw joint
    density.  Slow; used as the ground-truth anchor.
    """
    sigma = math.sqrt(sigma2)
    n = len(mus)
    total = 0.0
    if n == 1:
        total = joint_density(sigma2, mus, (x_th,))
    elif n == 2:
        for i in range(2):
            def f(xo, _i=i):
                xs = [xo, xo]
                xs[_i] = x_th
                return joint_density(sigma2, mus, xs)
            val, _ = integrate.quad(f, 0.0, x_th, epsabs=1e-13, epsrel=1e-11, limit=400)
            total += val
    elif n == 3:
        for i in range(3):
            def f(xa, xb, _i=i):
                xs = [None, None, None]
                free = [j for j in range(3) if j != _i]
                xs[_i] = x_th
                xs[free[0]] = xa
                xs[free[1]] = xb
                return joint_density(sigma2, mus, xs)
            val, _ = integrate.dblquad(
                lambda xb, xa: f(xa, xb), 0.0, x_th, 0.0, x_th,
                epsabs=1e-12, epsrel=1e-10,
            )
            total += val
    else:
        raise ValueError("brute-force oracle implemented for N <= 3 only")
    return math.sqrt(math.pi / 2.0) * sigma * fd * total
