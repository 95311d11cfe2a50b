"""Exact N-port level crossing rate and its closed-form specializations.

The general expression for the downward crossing rate of the selected
envelope at threshold ``x_th`` is

    L(x_th) = sqrt(2 pi) x_th f_D / sigma * { first + sum_{i=2}^N term_i }

where ``first`` handles the event that the reference port carries the
maximum and each ``term_i`` handles port i doing so.  Every factor of the
form [1 - Q1(.)] is the probability mass of one bivariate pair below the
threshold, and the inner integral of ``term_i`` runs over the reference
amplitude.  Three special cases collapse to closed forms:

* all correlations zero  -> the i.i.d. selection-combining rate,
* all correlations one   -> the classical single-channel Rayleigh rate,
* two ports              -> a single incomplete-gamma series.

Every product exp(-u) I0(v) is evaluated as ``bessel_i0_scaled(v) * exp(v-u)``
with the exponents merged analytically; the merged exponent is a negative
quadratic form, so nothing overflows even with correlations within 1e-9 of 1.
"""

import math
from dataclasses import dataclass

import numpy as np

from .channel_model import IDENTICAL_CHANNEL_CUTOFF, CorrelationProfile, FasConfig
from .errors import AccuracyError, ConfigError, DomainError, SingularityError
from .specfun import Tolerance, bessel_i0_scaled, marcum_q1

__all__ = [
    "QuadratureSpec",
    "DEFAULT_QUADRATURE",
    "SERIES_TOLERANCE",
    "lcr_theorem1",
    "lcr_iid",
    "lcr_identical",
    "lcr_two_port_series",
    "surviving_product",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class QuadratureSpec:
    """Adaptive-quadrature budget for the inner integral of the exact rate."""

    abs_eps: float = 1e-12
    rel_eps: float = 1e-9
    max_subdivisions: int = 200

    def __post_init__(self):
        for name in ("abs_eps", "rel_eps"):
            v = getattr(self, name)
            if not (isinstance(v, float) and 0.0 < v < 1.0):
                raise ConfigError(f"{name} must lie in (0, 1), got {v!r}")
        if not (isinstance(self.max_subdivisions, int) and self.max_subdivisions >= 1):
            raise ConfigError(
                f"max_subdivisions must be a positive integer, got {self.max_subdivisions!r}"
            )


DEFAULT_QUADRATURE = QuadratureSpec()

# Default truncation budget for the two-port series.  The number of terms
# grows like sqrt(mu^2 x_th^2 / (sigma^2 (1 - mu^2))), so correlations within
# ~1e-4 of 1 need an explicitly larger cap.
SERIES_TOLERANCE = Tolerance(rel_eps=1e-12, max_terms=500)

# The exact rate's Marcum factors see Poisson means up to mu^2 x1^2/(s^2(1-mu^2));
# dense in-range port layouts (e.g. 64 ports at W = 0.1) push this to ~1e4.
_THEOREM1_MARCUM = Tolerance(rel_eps=1e-12, max_terms=20000)

# Paired fixed-order Gauss panels; the high rule's value is kept, the
# difference to the low rule is the panel error estimate.
_GL_LO_NODES, _GL_LO_WEIGHTS = np.polynomial.legendre.leggauss(10)
_GL_HI_NODES, _GL_HI_WEIGHTS = np.polynomial.legendre.leggauss(21)


def _validate_threshold(x_th):
    if not (isinstance(x_th, (int, float, np.floating)) and math.isfinite(x_th) and x_th > 0.0):
        raise DomainError(f"threshold must be finite and > 0, got {x_th!r}")
    return float(x_th)


def _check_profile(cfg, profile):
    if not isinstance(profile, CorrelationProfile) or profile.n_ports != cfg.n_ports:
        raise ConfigError("profile does not match the configuration's port count")
    singular = profile.singular_ports()
    if singular:
        raise SingularityError(
            f"correlation at port(s) {singular} is at the identical-channel "
            "singularity; mixed singular profiles are outside the model, and "
            "all-identical profiles are covered by lcr_identical"
        )


# ---------------------------------------------------------------------------
# Adaptive panel quadrature
# ---------------------------------------------------------------------------

def _integrate_adaptive(f, lo, hi, quad):
    """Integrate a smooth vectorised integrand over [lo, hi] adaptively.

    Each panel is evaluated with 10- and 21-point Gauss rules; |difference|
    is the error estimate, and panels failing their width-proportional share
    of the budget are bisected.  All pending panels are evaluated in a single
    integrand call per round.
    """
    if hi <= lo:
        return 0.0
    width = hi - lo
    panels = [(lo, hi)]
    accepted = 0.0
    splits = 0
    scale = None
    while panels:
        a = np.array([p[0] for p in panels])
        b = np.array([p[1] for p in panels])
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        # nodes: shape (n_panels, n_lo + n_hi), flattened for one call
        x_lo = mid[:, None] + half[:, None] * _GL_LO_NODES[None, :]
        x_hi = mid[:, None] + half[:, None] * _GL_HI_NODES[None, :]
        xs = np.concatenate([x_lo, x_hi], axis=1)
        vals = f(xs.ravel()).reshape(xs.shape)
        n_lo = _GL_LO_NODES.size
        i_lo = half * (vals[:, :n_lo] @ _GL_LO_WEIGHTS)
        i_hi = half * (vals[:, n_lo:] @ _GL_HI_WEIGHTS)
        err = np.abs(i_hi - i_lo)
        if scale is None:
            scale = max(float(np.sum(np.abs(i_hi))), 1e-300)
        budget = np.maximum(quad.abs_eps, quad.rel_eps * scale) * (b - a) / width
        ok = err <= budget
        accepted += float(np.sum(i_hi[ok]))
        next_panels = []
        for j in np.nonzero(~ok)[0]:
            splits += 1
            if splits > quad.max_subdivisions:
                partial = accepted + float(np.sum(i_hi[~ok]))
                raise AccuracyError(
                    f"adaptive quadrature exceeded {quad.max_subdivisions} subdivisions",
                    partial=partial,
                )
            m = float(mid[j])
            next_panels.append((float(a[j]), m))
            next_panels.append((m, float(b[j])))
        panels = next_panels
    return accepted


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def lcr_iid(cfg, x_th):
    """Crossing rate with all correlations zero (i.i.d. selection combining).

    N sqrt(2 pi) f_D (x_th/sigma) exp(-x_th^2/sigma^2) (1 - exp(-x_th^2/sigma^2))^(N-1)
    """
    x_th = _validate_threshold(x_th)
    rho2 = x_th * x_th / cfg.sigma2
    cdf = -math.expm1(-rho2)
    return (
        cfg.n_ports * _SQRT_2PI * cfg.f_doppler * (x_th / cfg.sigma)
        * math.exp(-rho2) * cdf ** (cfg.n_ports - 1)
    )


def lcr_identical(cfg, x_th):
    """Crossing rate with fully correlated ports; independent of the port count."""
    x_th = _validate_threshold(x_th)
    rho2 = x_th * x_th / cfg.sigma2
    return _SQRT_2PI / cfg.sigma * cfg.f_doppler * x_th * math.exp(-rho2)


# ---------------------------------------------------------------------------
# Exact N-port rate
# ---------------------------------------------------------------------------

def surviving_product(cfg, profile, x1, x_th, skip_index, tol=_THEOREM1_MARCUM):
    """prod_{k>=2, k != skip_index} [1 - Q1(sqrt(2 mu_k^2/s_k) x1, sqrt(2/s_k) x_th)]
    with s_k = sigma^2 (1 - mu_k^2).

    Each factor is the probability that the bivariate pair (reference = x1,
    port k) stays below the threshold.  ``x1`` may be a vector; the result is
    clipped into [0, 1].
    """
    x_th = _validate_threshold(x_th)
    _check_profile(cfg, profile)
    if not (1 <= skip_index <= cfg.n_ports):
        raise DomainError(
            f"skip_index must lie in 1..{cfg.n_ports}, got {skip_index!r}"
        )
    x1_arr = np.asarray(x1, dtype=float)
    scalar = x1_arr.ndim == 0
    x1_arr = np.atleast_1d(x1_arr)
    if not np.all(np.isfinite(x1_arr)) or np.any(x1_arr < 0.0) or np.any(x1_arr > x_th):
        raise DomainError("x1 must satisfy 0 <= x1 <= x_th")
    result = np.ones_like(x1_arr)
    sigma2 = cfg.sigma2
    for k in range(2, cfg.n_ports + 1):
        if k == skip_index:
            continue
        mu = abs(profile.mu[k - 1])
        s = sigma2 * (1.0 - mu * mu)
        a = math.sqrt(2.0 * mu * mu / s) * x1_arr
        b = math.sqrt(2.0 / s) * x_th
        result = result * (1.0 - marcum_q1(a, b, tol))
    result = np.clip(result, 0.0, 1.0)
    return float(result[0]) if scalar else result


def lcr_theorem1(cfg, profile, x_th, quad=DEFAULT_QUADRATURE):
    """Exact crossing rate of the N-port selected envelope, in crossings/second.

    The first term covers the reference port being the strongest at the
    crossing instant; each summand of the second covers port i being the
    strongest, integrating over the reference amplitude x1 in [0, x_th].  The
    integrand fuses the Gaussian exponents with the scaled I0 so that the net
    exponent -((x_th - |mu_i| x1)^2 + (1 - mu_i^2) x1^2)/s_i stays <= 0.
    """
    x_th = _validate_threshold(x_th)
    _check_profile(cfg, profile)
    sigma2 = cfg.sigma2
    sigma = cfg.sigma
    n = cfg.n_ports

    first = math.exp(-x_th * x_th / sigma2) * surviving_product(
        cfg, profile, x_th, x_th, skip_index=1
    )

    second = 0.0
    for i in range(2, n + 1):
        mu = abs(profile.mu[i - 1])
        s = sigma2 * (1.0 - mu * mu)

        def integrand(x1, _mu=mu, _s=s, _i=i):
            v = 2.0 * _mu * x_th * x1 / _s
            fused = v - (x_th * x_th + x1 * x1) / _s
            prod = surviving_product(cfg, profile, x1, x_th, skip_index=_i)
            return (2.0 * x1 / sigma2) * bessel_i0_scaled(v) * np.exp(fused) * prod

        inner = _integrate_adaptive(integrand, 0.0, x_th, quad)
        second += inner / (1.0 - mu * mu)

    return _SQRT_2PI * x_th * cfg.f_doppler / sigma * (first + second)


# ---------------------------------------------------------------------------
# Two-port incomplete-gamma series
# ---------------------------------------------------------------------------

def lcr_two_port_series(cfg, mu, x_th, tol=SERIES_TOLERANCE):
    """Two-port crossing rate as an incomplete-gamma series in the correlation.

    With s = sigma^2 (1 - mu^2) and y = x_th^2 / s, the series

        prefactor * sum_k (mu x_th)^{2k} / ((k!)^2 s^{k-1}) gamma(k+1, y)

    is summed in its regularized form: each term equals the Poisson(mu^2 y)
    weight at k times the survivor mass Pr[Poisson(y) > k], with the common
    factor 2 sqrt(2 pi) f_D (x_th/sigma) exp(-x_th^2/sigma^2) pulled out.
    Summation starts at the dominant weight k0 = floor(mu^2 y) so that
    correlations within 1e-6 of 1 (where y reaches ~1e6) stay computable;
    terms are added outward until their relative contribution drops below
    ``tol.rel_eps``.
    """
    x_th = _validate_threshold(x_th)
    if not (isinstance(mu, (int, float, np.floating)) and math.isfinite(mu) and 0.0 <= mu):
        raise DomainError(f"mu must be finite and >= 0, got {mu!r}")
    mu = float(mu)
    if mu >= IDENTICAL_CHANNEL_CUTOFF:
        raise SingularityError(
            f"mu = {mu!r} is at the identical-channel singularity; "
            "use lcr_identical"
        )
    rho2 = x_th * x_th / cfg.sigma2
    prefactor = 2.0 * _SQRT_2PI * cfg.f_doppler * (x_th / cfg.sigma) * math.exp(-rho2)
    y = rho2 / (1.0 - mu * mu)
    lam = mu * mu * y
    mixture, converged = _poisson_survivor_mixture(lam, y, tol)
    if not converged:
        raise AccuracyError(
            f"two-port series did not converge within {tol.max_terms} terms",
            partial=prefactor * mixture,
        )
    return prefactor * mixture


def _poisson_survivor_mixture(lam, y, tol):
    """sum_k PoisPmf(k; lam) * Pr[Pois(y) > k], summed outward from floor(lam).

    Returns (value, converged).  The value lies in [0, 1]; it tends to the
    two-sided limit 1/2 as lam -> y and to 1 - exp(-y) as lam -> 0.
    """
    if lam == 0.0:
        return -math.expm1(-y), True
    k0 = int(lam)
    w0 = math.exp(k0 * math.log(lam) - lam - math.lgamma(k0 + 1))
    surv0 = _poisson_survivor(k0, y)
    total = w0 * surv0
    terms = 1

    # upward from k0: weights shrink by lam/(k+1) <= 1, survivor shrinks too
    w, surv = w0, surv0
    r = _pmf(k0 + 1, y)
    k = k0
    up_done = False
    while terms < tol.max_terms:
        w = w * lam / (k + 1)
        surv = max(surv - r, 0.0)
        k += 1
        r = r * y / (k + 1)
        term = w * surv
        total += term
        terms += 1
        if term <= tol.rel_eps * total:
            up_done = True
            break
    if not up_done:
        return min(total, 1.0), False

    # downward from k0: weights shrink by k/lam <= 1, survivor grows toward 1
    w, surv = w0, surv0
    r = _pmf(k0, y)
    k = k0
    while k > 0 and terms < tol.max_terms:
        w = w * k / lam
        surv = min(surv + r, 1.0)
        k -= 1
        r = r * (k + 1) / y
        term = w * surv
        total += term
        terms += 1
        if term <= tol.rel_eps * total:
            return min(total, 1.0), True
    return min(total, 1.0), k == 0


def _pmf(k, lam):
    if lam == 0.0:
        return 1.0 if k == 0 else 0.0
    return math.exp(k * math.log(lam) - lam - math.lgamma(k + 1))


def _poisson_survivor(k0, lam):
    """Pr[Poisson(lam) > k0] without cancellation, any lam."""
    if k0 < 0:
        return 1.0
    if lam == 0.0:
        return 0.0
    if k0 >= lam:
        # small upper tail, summed directly
        r = _pmf(k0 + 1, lam)
        tail = r
        j = k0 + 1
        while True:
            r = r * lam / (j + 1)
            j += 1
            tail += r
            if r <= 1e-18 * tail or r == 0.0:
                break
        return min(tail, 1.0)
    # complement of a small CDF, summed downward
    r = _pmf(k0, lam)
    cdf = r
    j = k0
    while j > 0:
        r = r * j / lam
        j -= 1
        cdf += r
        if r <= 1e-18 * cdf:
            break
    return max(1.0 - cdf, 0.0)
