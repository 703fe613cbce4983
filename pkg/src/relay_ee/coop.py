"""Cooperative users: relay decoding, the two coded-cooperation modes and the RS link.

The BS->UE SINR of a cooperative user is approximated by the BS->RS SINR
(gamma_1), whose law is the nearest-BS law with the cooperative-band busy
probability.  Rates are nats per channel use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from scipy import integrate, special

from .cell_load import busy_probabilities
from .params import NetworkParams
from .sinr import (BsLink, ConvergenceError, RateResult, SinrCdf, _bs_ccdf, _bs_ccdf_envelope, _integrate_rate,
                   bs_ccdf_special, bs_link, bs_rate, bs_rate_special)
from .special import complete_gamma, fading_moment, scaled_gauss_diff

QUAD_EPSABS = 1e-10


@dataclass(frozen=True)
class RsLink:
    """RS -> cooperative UE link; UE uniform in the relay disc."""

    lambda_active: float
    p_tx: float
    r_relay: float
    alpha: float
    mu: float
    noise: float
    fading: str = "exponential"


def rs_link(params: NetworkParams) -> RsLink:
    busy = busy_probabilities(params)
    return RsLink(busy.lambda_r, params.p_r, params.r_relay, params.alpha, params.mu, params.noise,
                  params.interferer_fading)


def psi(link: RsLink) -> float:
    """(2/alpha) pi mu^(2/alpha) lambda' Gamma(-2/alpha) E[g^(2/alpha)]; never positive."""
    d = 2.0 / link.alpha
    val = d * math.pi * link.mu ** d * link.lambda_active * complete_gamma(-d) * fading_moment(d, link.fading, link.mu)
    assert val <= 0.0, "psi must be non-positive; check the sign of Gamma(-2/alpha)"
    return val


@lru_cache(maxsize=200_000)
def _rs_ccdf(link: RsLink, T: float) -> tuple[float, float]:
    if T <= 0:
        return 1.0, 0.0
    d = 2.0 / link.alpha
    big_v = link.r_relay ** 2
    a = link.mu * T * link.noise / link.p_tx
    b = -psi(link) * T ** d
    if a == 0:
        if b == 0:
            return 1.0, 0.0
        return -math.expm1(-b * big_v) / (b * big_v), 0.0
    half = link.alpha / 2.0
    # the integrand can be concentrated near 0 at high T; break at its width
    width = min(a ** (-1.0 / half), 1.0 / b if b > 1e-300 else math.inf)
    points = [width * k for k in (1.0, 8.0, 64.0) if width * k < big_v]
    val, err = integrate.quad(lambda v: math.exp(-a * v ** half - b * v), 0.0, big_v, points=points or None,
                              epsabs=QUAD_EPSABS * big_v, epsrel=1e-10, limit=200)
    return val / big_v, err / big_v


def rs_ccdf(link: RsLink, T: float) -> float:
    return _rs_ccdf(link, float(T))[0]


def _rs_envelope(link: RsLink):
    d = 2.0 / link.alpha
    big_v = link.r_relay ** 2
    bounds = []
    if link.noise > 0:
        bounds.append(special.gamma(1.0 + d) * (link.mu * link.noise / link.p_tx) ** -d / big_v)
    ps = psi(link)
    if ps < 0:
        bounds.append(1.0 / (big_v * -ps))
    return (min(bounds) if bounds else math.inf), d


def rs_link_cdf(T, params: NetworkParams):
    """P(gamma_2 <= T) for the RS -> UE link."""
    link = rs_link(params)
    return SinrCdf("rs", lambda t: rs_ccdf(link, t))(T)


@lru_cache(maxsize=4096)
def rs_rate(link: RsLink) -> RateResult:
    return _integrate_rate(lambda T: _rs_ccdf(link, T), _rs_envelope(link))


def rs_link_rate(params: NetworkParams) -> RateResult:
    return rs_rate(rs_link(params))


def rs_ccdf_special(link: RsLink, T: float) -> float:
    """Closed-form RS-link coverage for alpha = 4 and exponential interferer fading."""
    if link.alpha != 4 or link.fading != "exponential":
        raise ValueError("closed forms need alpha = 4 and exponential interferer fading")
    if T <= 0:
        return 1.0
    r2 = link.r_relay ** 2
    lam = link.lambda_active
    if link.noise == 0:
        b = math.pi ** 2 * lam * math.sqrt(T) / 2.0
        return 1.0 if b == 0 else -math.expm1(-b * r2) / (b * r2)
    ms = link.mu * link.noise
    x0 = math.pi ** 2 * lam * math.sqrt(link.p_tx / (8.0 * ms))
    width = r2 * math.sqrt(2.0 * ms * T / link.p_tx)  # x1 - x0
    # exp(pi^4 lam^2 P / (16 mu sigma^2)) = exp(x0^2 / 2); fold it into the scaled tails
    return math.sqrt(math.pi * link.p_tx / (ms * T)) * scaled_gauss_diff(x0, width) / r2


def rs_rate_special(link: RsLink) -> RateResult:
    return _integrate_rate(lambda T: (rs_ccdf_special(link, T), 0.0), _rs_envelope(link))


# --- coded cooperation ---------------------------------------------------------

@dataclass(frozen=True)
class CoopRateBreakdown:
    """Rates of a cooperative UE (nats per channel use).

    ``degenerate`` is ``"never-decodes"`` or ``"always-decodes"`` when the
    relay's decoding probability is 0 or 1; the unused mode's rate is then 0.
    """

    p_decode: float
    tau_1: float
    tau_0: float
    tau_2: float
    tau_m1: float
    tau_m2: float
    tau_c: float
    t_th: float
    beta: float
    degenerate: str | None = None
    abserr: float = 0.0

    @property
    def tau_c_bits(self) -> float:
        return self.tau_c / math.log(2.0)


def _ccdf_fn(link: BsLink, special_form: bool):
    if special_form:
        return lambda T: bs_ccdf_special(link, T)
    return lambda T: _bs_ccdf(link, T)[0]


def _rate_fn(link: BsLink, special_form: bool) -> RateResult:
    return bs_rate_special(link) if special_form else bs_rate(link)


def _mode1(ccdf, t_th: float, p_d: float) -> tuple[float, float]:
    """ln(1+T_th) - 1/(1-P_d) int_0^T_th P(gamma_1 < t)/(1+t) dt."""
    if t_th == 0 or p_d >= 1.0:
        return 0.0, 0.0
    val, err = integrate.quad(lambda t: (1.0 - ccdf(t)) / (1.0 + t), 0.0, t_th,
                              epsabs=1e-12, epsrel=1e-11, limit=200)
    return math.log1p(t_th) - val / (1.0 - p_d), err / (1.0 - p_d)


def decode_probability(params: NetworkParams, special_form: bool = False) -> float:
    """P_d = P(gamma_1 >= T_th), the relay's chance of decoding phase one."""
    link = bs_link(params, "b2")
    return _ccdf_fn(link, special_form)(params.t_th) if params.t_th > 0 else 1.0


def mode1_rate(params: NetworkParams, special_form: bool = False) -> float:
    """Mean rate conditioned on the relay failing (gamma_1 < T_th); 0 if it never fails."""
    link = bs_link(params, "b2")
    ccdf = _ccdf_fn(link, special_form)
    p_d = ccdf(params.t_th) if params.t_th > 0 else 1.0
    return _mode1(ccdf, params.t_th, p_d)[0]


def mode2_bs_rate(params: NetworkParams, special_form: bool = False) -> float:
    """tau_0 from tau_1 = P_d tau_0 + (1 - P_d) tau_m1."""
    return coop_rate(params, special_form=special_form).tau_0


def mode2_bs_rate_direct(params: NetworkParams) -> float:
    """tau_0 = ln(1+T_th) + (1/P_d) int_{ln(1+T_th)}^inf P(gamma_1 > e^u - 1) du.

    Independent of the decomposition used in :func:`coop_rate`.
    """
    link = bs_link(params, "b2")
    t_th = params.t_th
    p_d = _bs_ccdf(link, t_th)[0] if t_th > 0 else 1.0
    if p_d == 0:
        raise ConvergenceError("relay never decodes; tau_0 undefined")
    u0 = math.log1p(t_th)
    K, d = _bs_ccdf_envelope(link)
    u_max = max(u0 + 1.0, math.log(K * (1.0 - math.exp(-1.0)) ** (-d) / (d * 1e-12)) / d)
    val, _ = integrate.quad(lambda u: _bs_ccdf(link, math.expm1(u))[0], u0, u_max,
                            epsabs=1e-10, epsrel=1e-10, limit=400)
    return u0 + val / p_d


def coop_rate(params: NetworkParams, special_form: bool = False) -> CoopRateBreakdown:
    """Full rate breakdown of a cooperative UE.

    ``special_form=True`` uses the alpha = 4 / Rayleigh closed forms for every
    CDF; the default evaluates the general integrals.
    """
    b2 = bs_link(params, "b2")
    rs = rs_link(params)
    ccdf = _ccdf_fn(b2, special_form)
    t_th = params.t_th
    p_d = min(max(ccdf(t_th), 0.0), 1.0) if t_th > 0 else 1.0
    r1 = _rate_fn(b2, special_form)
    r2 = rs_rate_special(rs) if special_form else rs_rate(rs)
    tau_1, tau_2 = r1.value, r2.value
    tau_m1, err_m1 = _mode1(ccdf, t_th, p_d)

    degenerate = None
    if p_d >= 1.0:
        degenerate, tau_m1, tau_0 = "always-decodes", 0.0, tau_1
    elif p_d <= 0.0:
        degenerate, tau_0 = "never-decodes", 0.0
    else:
        tau_0 = (tau_1 - (1.0 - p_d) * tau_m1) / p_d
    beta = params.beta
    tau_m2 = beta * tau_0 + (1.0 - beta) * tau_2
    tau_c = (1.0 - p_d) * tau_m1 + p_d * tau_m2
    return CoopRateBreakdown(
        p_decode=p_d, tau_1=tau_1, tau_0=tau_0, tau_2=tau_2, tau_m1=tau_m1, tau_m2=tau_m2,
        tau_c=tau_c, t_th=t_th, beta=beta, degenerate=degenerate,
        abserr=r1.abserr + r2.abserr + err_m1,
    )
