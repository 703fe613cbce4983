"""Analytic SINR distributions and mean rates for BS-served links.

The serving BS is the nearest one, so its distance has density
2 pi lambda_b r exp(-pi lambda_b r^2).  Interferers form the thinned BS process
of density ``lambda_active`` outside the serving distance.  Substituting
v = r^2 turns the coverage probability P(SINR > T) into

    pi lambda_b  int_0^inf exp(-mu T sigma^2 v^(alpha/2) / P_b - c(T) v) dv,
    c(T) = pi lambda_b + pi lambda_active (phi(T) - 1),

and the mean rate into the integral of that coverage over t with T = e^t - 1.
Rates are in nats per channel use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .cell_load import busy_probabilities
from .params import NetworkParams
from .special import fading_moment, gamma_expectation, half_gaussian_integral

INNER_EPSABS = 1e-11
OUTER_EPSABS = 1e-9
RATE_TOL = 1e-6
TAIL_TOL = 1e-12


class ConvergenceError(ArithmeticError):
    """A numerical integral did not reach its requested accuracy, or diverges."""


@dataclass(frozen=True)
class RateResult:
    """Mean achievable rate in nats per channel use with its error budget."""

    value: float
    abserr: float = 0.0
    t_max: float = math.inf
    tail_bound: float = 0.0

    @property
    def bits(self) -> float:
        return self.value / math.log(2.0)

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class SinrCdf:
    """Evaluable distribution function T -> P(SINR <= T) for one link type."""

    link: str
    ccdf_fn: object = field(repr=False)
    tol: float = INNER_EPSABS

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.array([1.0 - self.ccdf_fn(float(x)) if x > 0 else 0.0 for x in t.ravel()])
        return out.reshape(t.shape) if t.shape else float(out[0])


# --- interference functionals ----------------------------------------------

def phi(T, alpha, fading="exponential", mu=1.0, method="closed"):
    """(2/alpha) (mu T)^(2/alpha) E_g[g^(2/alpha) (Gamma(-2/alpha, mu T g) - Gamma(-2/alpha))].

    Nondecreasing in T with phi(0+) = 1, so ``phi - 1`` is the interference
    exponent per unit of pi lambda' r^2.  T = 0 returns the limit 1.
    """
    T = float(T)
    if T < 0:
        raise ValueError("T must be >= 0")
    if T == 0:
        return 1.0
    d = 2.0 / alpha
    x = mu * T
    return d * x ** d * gamma_expectation(x, d, fading, mu, method=method)


def phi_excess(T, alpha, fading="exponential", mu=1.0):
    """phi(T) - 1 without the cancellation phi suffers at small T.

    For exponential fading the excess is independent of mu and equals
    (2/alpha) T / (1 - 2/alpha) 2F1(1, 1 - 2/alpha; 2 - 2/alpha; -T).
    """
    T = float(T)
    if T < 0:
        raise ValueError("T must be >= 0")
    if T == 0:
        return 0.0
    if fading == "exponential":
        d = 2.0 / alpha
        return d * T / (1.0 - d) * float(special.hyp2f1(1.0, 1.0 - d, 2.0 - d, -T))
    return phi(T, alpha, fading, mu) - 1.0


def laplace_bs_tier(s, r, lambda_active, p_tx, alpha, fading="exponential", mu=1.0):
    """Laplace transform of BS-tier interference beyond the serving distance ``r``.

    exp(-2 pi lambda' A) with
    A = -r^2/2 + (s P)^(2/alpha)/alpha E_g[g^(2/alpha)(Gamma(-2/alpha, s P g r^-alpha) - Gamma(-2/alpha))].
    """
    if s < 0 or r < 0:
        raise ValueError("need s >= 0 and r >= 0")
    if s == 0 or lambda_active == 0:
        return 1.0
    d = 2.0 / alpha
    sp = s * p_tx
    if r == 0:
        # no exclusion: the PPP integral over the whole plane
        return math.exp(-math.pi * lambda_active * sp ** d * special.gamma(1.0 - d) * fading_moment(d, fading, mu))
    area = -r * r / 2.0 + sp ** d / alpha * gamma_expectation(sp * r ** -alpha, d, fading, mu)
    return math.exp(-2.0 * math.pi * lambda_active * area)


def laplace_rs_tier(s, lambda_active, p_tx, alpha, fading="exponential", mu=1.0):
    """Laplace transform of RS-tier interference (interferers over the whole plane)."""
    if s < 0:
        raise ValueError("s must be >= 0")
    if s == 0 or lambda_active == 0:
        return 1.0
    d = 2.0 / alpha
    return math.exp(-math.pi * lambda_active * (s * p_tx) ** d * special.gamma(1.0 - d)
                    * fading_moment(d, fading, mu))


# --- BS-served link ---------------------------------------------------------

@dataclass(frozen=True)
class BsLink:
    """Everything a nearest-BS link's SINR law depends on."""

    lambda_b: float
    lambda_active: float
    p_tx: float
    alpha: float
    mu: float
    noise: float
    fading: str = "exponential"

    @property
    def p_busy(self) -> float:
        return self.lambda_active / self.lambda_b


def bs_link(params: NetworkParams, band: str = "b1") -> BsLink:
    """Link seen by a non-cooperative UE (``b1``) or by a relay / cooperative UE (``b2``)."""
    busy = busy_probabilities(params)
    lam = {"b1": busy.lambda_b1, "b2": busy.lambda_b2}[band]
    return BsLink(params.lambda_b, lam, params.p_b, params.alpha, params.mu, params.noise,
                  params.interferer_fading)


def exponent_rate(link: BsLink, T: float) -> float:
    """c(T) above; raises if the printed bracket would make the integrand grow."""
    ex = phi_excess(T, link.alpha, link.fading, link.mu)
    c = math.pi * link.lambda_b + math.pi * link.lambda_active * max(ex, 0.0)
    # the excess is positive in exact arithmetic; anything beyond roundoff is a bug
    if not (ex >= -1e-9 and c > 0):
        raise ConvergenceError(f"non-decaying exponent at T={T}: phi-1={ex}, c={c}")
    return c


@lru_cache(maxsize=200_000)
def _bs_ccdf(link: BsLink, T: float) -> tuple[float, float]:
    if T <= 0:
        return 1.0, 0.0
    c = exponent_rate(link, T)
    a = link.mu * T * link.noise / link.p_tx
    lead = math.pi * link.lambda_b / c
    if a == 0:
        return lead, 0.0
    half = link.alpha / 2.0
    # x = c v; the integrand is bounded by exp(-x)
    scale = a / c ** half
    fn = lambda x: math.exp(-x - scale * x ** half)  # noqa: E731
    width = min(1.0, scale ** (-1.0 / half))
    if width < 1.0:
        # noise-dominated: mass sits in [0, ~width]; split so quad sees it
        edge = 64.0 * width
        head, e1 = integrate.quad(fn, 0.0, edge, points=[width, 8.0 * width], epsabs=INNER_EPSABS / lead,
                                  epsrel=1e-10, limit=200)
        rest, e2 = integrate.quad(fn, edge, math.inf, epsabs=INNER_EPSABS / lead, epsrel=1e-10, limit=200)
        val, err = head + rest, e1 + e2
    else:
        val, err = integrate.quad(fn, 0.0, math.inf, epsabs=INNER_EPSABS / lead, epsrel=1e-10, limit=200)
    return lead * val, lead * err


def bs_ccdf(link: BsLink, T: float) -> float:
    return _bs_ccdf(link, float(T))[0]


def bs_sinr_cdf(link: BsLink, tag: str = "bs") -> SinrCdf:
    return SinrCdf(tag, lambda T: bs_ccdf(link, T))


def _rate_tail_bound(link_consts, t):
    """Certified bound on int_t^inf ccdf(e^u - 1) du for ccdf <= K T^-d, t >= 1."""
    K, d = link_consts
    if not math.isfinite(K):
        return math.inf
    return K * (1.0 - math.exp(-1.0)) ** (-d) * math.exp(-d * t) / d


def _bs_ccdf_envelope(link: BsLink):
    """K with ccdf(T) <= K T^(-2/alpha) for T >= 1."""
    d = 2.0 / link.alpha
    bounds = []
    if link.noise > 0:
        a1 = link.mu * link.noise / link.p_tx
        bounds.append(math.pi * link.lambda_b * special.gamma(1.0 + d) * a1 ** -d)
    if link.lambda_active > 0 and link.fading == "exponential":
        # phi(T) - 1 >= T^d / (alpha - 2) for T >= 1 under exponential fading
        bounds.append((link.alpha - 2.0) / link.p_busy)
    return (min(bounds) if bounds else math.inf), d


def _integrate_rate(ccdf_with_err, envelope) -> RateResult:
    K, d = envelope
    if not math.isfinite(K):
        raise ConvergenceError("mean rate diverges: no noise and no interference")
    t_max = max(1.0, math.log(K * (1.0 - math.exp(-1.0)) ** (-d) / (d * TAIL_TOL)) / d)
    tail = _rate_tail_bound(envelope, t_max)
    inner_err = [0.0]

    def f(t):
        v, e = ccdf_with_err(math.expm1(t))
        inner_err[0] = max(inner_err[0], e)
        return v

    val, err = integrate.quad(f, 0.0, t_max, epsabs=OUTER_EPSABS, epsrel=1e-10, limit=400)
    total_err = err + tail + inner_err[0] * t_max
    if total_err > RATE_TOL:
        raise ConvergenceError(f"rate integral error {total_err:.3g} exceeds {RATE_TOL:g}")
    return RateResult(val, total_err, t_max, tail)


@lru_cache(maxsize=4096)
def bs_rate(link: BsLink) -> RateResult:
    """E[ln(1 + SINR)] for a nearest-BS link."""
    return _integrate_rate(lambda T: _bs_ccdf(link, T), _bs_ccdf_envelope(link))


# --- public, parameter-level API ---------------------------------------------

def sinr_cdf_noncoop(T, params: NetworkParams):
    """P(SINR <= T) of a non-cooperative UE; scalar or array ``T``."""
    return bs_sinr_cdf(bs_link(params, "b1"), "bs-noncoop")(T)


def mean_rate_noncoop(params: NetworkParams) -> RateResult:
    return bs_rate(bs_link(params, "b1"))


# --- Rayleigh interference, alpha = 4 ---------------------------------------

def _check_special(link_alpha, fading):
    if link_alpha != 4 or fading != "exponential":
        raise ValueError("closed forms need alpha = 4 and exponential interferer fading")


def kappa(T, lambda_b, p_busy):
    """pi lambda_b (1 + p_busy sqrt(T) (pi/2 - arctan(1/sqrt(T))))."""
    T = float(T)
    if T == 0:
        return math.pi * lambda_b
    rt = math.sqrt(T)
    return math.pi * lambda_b * (1.0 + p_busy * rt * (math.pi / 2.0 - math.atan(1.0 / rt)))


def bs_ccdf_special(link: BsLink, T: float) -> float:
    _check_special(link.alpha, link.fading)
    if T <= 0:
        return 1.0
    k = kappa(T, link.lambda_b, link.p_busy)
    if link.noise == 0:
        return math.pi * link.lambda_b / k
    a = link.mu * T * link.noise / link.p_tx
    return math.pi * link.lambda_b * half_gaussian_integral(a, k)


def bs_rate_special(link: BsLink) -> RateResult:
    _check_special(link.alpha, link.fading)
    return _integrate_rate(lambda T: (bs_ccdf_special(link, T), 0.0), _bs_ccdf_envelope(link))


def sinr_cdf_noncoop_special(T, params: NetworkParams):
    link = bs_link(params, "b1")
    _check_special(link.alpha, link.fading)
    t = np.asarray(T, dtype=float)
    out = np.array([1.0 - bs_ccdf_special(link, float(x)) for x in t.ravel()])
    return out.reshape(t.shape) if t.shape else float(out[0])


def mean_rate_noncoop_special(params: NetworkParams) -> RateResult:
    return bs_rate_special(bs_link(params, "b1"))
