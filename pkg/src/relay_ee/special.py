"""Special functions used by the interference analysis.

scipy's regularised incomplete gamma only accepts positive shape, while the
interference integrals need Gamma(-2/alpha, x).  Negative shapes are lifted
with Gamma(s + 1, x) = s Gamma(s, x) + x**s exp(-x).
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, special

SQRT2 = math.sqrt(2.0)


def upper_gamma(s, x):
    """Non-regularised upper incomplete gamma Gamma(s, x) for real s, x > 0.

    Negative non-integer ``s`` is handled by downward recurrence from the
    first positive shape.  ``s = 0`` gives the exponential integral E1.
    """
    s = float(s)
    x = np.asarray(x, dtype=float)
    if s > 0:
        return special.gammaincc(s, x) * special.gamma(s)
    if s == 0:
        return special.exp1(x)
    if s == math.floor(s):
        raise ValueError(f"upper_gamma: negative integer shape {s} not supported")
    n = math.ceil(-s)  # number of recurrence steps to reach s + n > 0
    top = s + n
    val = special.gammaincc(top, x) * special.gamma(top)
    with np.errstate(over="ignore", divide="ignore"):
        for k in range(n - 1, -1, -1):
            sk = s + k
            val = (val - x ** sk * np.exp(-x)) / sk
    return val


def complete_gamma(s):
    """Gamma(s), including negative non-integer s via Gamma(s) = Gamma(s+1)/s."""
    s = float(s)
    if s > 0:
        return special.gamma(s)
    if s == math.floor(s):
        raise ValueError(f"complete_gamma: pole at {s}")
    return complete_gamma(s + 1.0) / s


def gauss_tail(x):
    """Q(x), the standard normal upper tail probability."""
    return 0.5 * special.erfc(np.asarray(x, dtype=float) / SQRT2)


def scaled_gauss_tail(x):
    """exp(x**2 / 2) * Q(x), finite for every real x."""
    return 0.5 * special.erfcx(np.asarray(x, dtype=float) / SQRT2)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def scaled_gauss_diff(x0, width):
    """exp(x0**2 / 2) * (Q(x0) - Q(x0 + width)) for width >= 0.

    Taking the width rather than the right end keeps it exact when x0 is
    large.  Short intervals, where the two tails nearly cancel, are
    integrated directly with Gauss-Legendre nodes.
    """
    if width < 0:
        raise ValueError("width must be >= 0")
    x1 = x0 + width
    if width * max(1.0, abs(x0), abs(x1)) <= 0.5:
        half = 0.5 * width
        d = half * (_GL_NODES + 1.0)
        return half * float(np.dot(_GL_WEIGHTS, np.exp(-0.5 * d * (2.0 * x0 + d)))) / math.sqrt(2.0 * math.pi)
    far = math.exp(-0.5 * width * (2.0 * x0 + width)) * float(scaled_gauss_tail(x1))
    return float(scaled_gauss_tail(x0)) - far


def half_gaussian_integral(a, b, upper=math.inf):
    """Integral of exp(-a v**2 - b v) over v in [0, upper], for a > 0.

    Evaluates sqrt(pi/a) exp(b**2/(4a)) (Q(x0) - Q(x0 + upper sqrt(2a))) with
    x0 = b / sqrt(2a), in scaled form so nothing overflows.
    """
    x0 = b / math.sqrt(2.0 * a)
    pref = math.sqrt(math.pi / a)
    if math.isinf(upper):
        return pref * float(scaled_gauss_tail(x0))
    return pref * scaled_gauss_diff(x0, upper * math.sqrt(2.0 * a))


# --- interferer fading laws -------------------------------------------------

def fading_moment(q, fading, mu):
    """E[g**q] for the interferer fading law."""
    if fading == "exponential":
        return special.gamma(1.0 + q) / mu ** q
    if fading == "deterministic":
        return 1.0
    raise ValueError(f"unknown fading law {fading!r}")


def gamma_expectation(x, delta, fading, mu, method="closed"):
    """E_g[g**delta * (Gamma(-delta, x g) - Gamma(-delta))] for x > 0.

    For exponential fading (rate ``mu``) the expectation has the closed form

        mu**-delta * [ y**-delta / ((1+delta)(1+y)) 2F1(1, 1; 2+delta; 1/(1+y))
                       + pi / sin(pi delta) ],   y = x / mu

    (the second term is -Gamma(1+delta) Gamma(-delta), by reflection).

    ``method="quadrature"`` integrates against the fading density instead,
    using :func:`upper_gamma`; it is kept as an independent check.
    """
    x = float(x)
    g_neg = complete_gamma(-delta)
    if fading == "deterministic":
        return float(upper_gamma(-delta, x)) - g_neg
    if fading != "exponential":
        raise ValueError(f"unknown fading law {fading!r}")
    if method == "closed":
        y = x / mu
        head = y ** (-delta) / ((1.0 + delta) * (1.0 + y)) * special.hyp2f1(1.0, 1.0, 2.0 + delta, 1.0 / (1.0 + y))
        tail = math.pi / math.sin(math.pi * delta)
        return mu ** (-delta) * (head + tail)
    if method == "quadrature":
        def integrand(g):
            if g == 0.0:
                return 0.0 if x == 0 else mu * (x ** -delta) / delta
            return mu * math.exp(-mu * g) * g ** delta * (float(upper_gamma(-delta, x * g)) - g_neg)
        val, _ = integrate.quad(integrand, 0.0, math.inf, epsabs=1e-13, epsrel=1e-12, limit=400)
        return val
    raise ValueError(f"unknown method {method!r}")
