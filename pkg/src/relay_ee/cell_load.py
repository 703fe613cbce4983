"""Per-cell load: cell areas, user/relay counts and subchannel busy probabilities."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .params import NetworkParams

# shape of the gamma law fitted to Poisson-Voronoi cell areas
AREA_SHAPE = 3.5
DEFAULT_TAIL_TOL = 1e-14
MAX_TAIL = 1e-10


class TailMassError(ValueError):
    """The requested truncation point leaves too much probability in the tail."""


@dataclass(frozen=True)
class CellAreaPdf:
    """Approximate density of a Voronoi cell's area for BS density ``lambda_b``."""

    lambda_b: float

    def __post_init__(self):
        if not self.lambda_b > 0:
            raise ValueError(f"lambda_b must be > 0 (got {self.lambda_b})")

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        x = np.clip(s, 0.0, None) * self.lambda_b
        const = 343.0 / 15.0 * math.sqrt(7.0 / (2.0 * math.pi))
        out = const * x ** 2.5 * np.exp(-3.5 * x) * self.lambda_b
        return np.where(s >= 0, out, 0.0)

    @property
    def mean(self) -> float:
        return 1.0 / self.lambda_b

    @property
    def mode(self) -> float:
        return (5.0 / 7.0) / self.lambda_b

    def sample(self, rng: np.random.Generator, size=None):
        return rng.gamma(AREA_SHAPE, 1.0 / (AREA_SHAPE * self.lambda_b), size=size)


def cell_area_pdf(lambda_b: float) -> CellAreaPdf:
    return CellAreaPdf(float(lambda_b))


@dataclass(frozen=True)
class CountDistribution:
    """Truncated probability mass function of a non-negative count.

    ``tail_bound`` is a certified upper bound on P{U > len(pmf) - 1}.
    ``mean`` is the exact (analytic) mean, not the truncated sum.
    """

    pmf: np.ndarray
    mean: float
    kind: str
    tail_bound: float

    @property
    def i_max(self) -> int:
        return len(self.pmf) - 1

    def sf(self) -> np.ndarray:
        """P{U > k} for k = 0..i_max, tail bound included."""
        rev = np.cumsum(self.pmf[::-1])[::-1]
        return np.append(rev[1:], 0.0) + self.tail_bound

    def expected_min(self, cap, method="series") -> float:
        """E[min(U, cap)] for a real cap >= 0.

        ``series`` sums min(i, cap) P{U=i}; ``survival`` sums P{U > k} over
        k < cap.  Both add the truncated tail at weight ``cap``.
        """
        cap = float(cap)
        if cap <= 0:
            return 0.0
        if method == "series":
            i = np.arange(len(self.pmf), dtype=float)
            return float(np.sum(np.minimum(i, cap) * self.pmf) + cap * self.tail_bound)
        if method == "survival":
            sf = self.sf()
            whole = int(math.floor(cap))
            frac = cap - whole
            head = float(np.sum(sf[:min(whole, len(sf))]))
            if whole > len(sf):
                head += (whole - len(sf)) * self.tail_bound
            if frac:
                head += frac * (sf[whole] if whole < len(sf) else self.tail_bound)
            return head
        raise ValueError(f"unknown method {method!r}")


def _choose_i_max(log_pmf_fn, ratio_fn, mean, sd, i_max, tol):
    """Return (log pmf array, tail bound).

    The pmf ratio p(i+1)/p(i) is nonincreasing past the mode, so once it is
    below one the tail is bounded by the geometric series p(i_max) r / (1 - r).
    """
    if i_max is not None:
        i = np.arange(int(i_max) + 1)
        logp = log_pmf_fn(i)
        bound = _geometric_tail(logp[-1], ratio_fn(i[-1]))
        if bound > MAX_TAIL:
            raise TailMassError(f"tail mass above {MAX_TAIL:g} at i_max={i_max} (bound {bound:.3g})")
        return logp, bound
    n = int(math.ceil(mean + 12.0 * sd + 20))
    while True:
        i = np.arange(n + 1)
        logp = log_pmf_fn(i)
        bound = _geometric_tail(logp[-1], ratio_fn(i[-1]))
        if bound < tol:
            return logp, bound
        n *= 2


def _geometric_tail(log_last, r):
    if r >= 1.0:
        return math.inf
    return math.exp(log_last) * r / (1.0 - r)


def count_distribution_voronoi(lambda_pts: float, lambda_b: float, i_max: int | None = None,
                               tail_tol: float = DEFAULT_TAIL_TOL) -> CountDistribution:
    """Number of points of a PPP of density ``lambda_pts`` inside a typical cell.

    Mixing a Poisson count over the gamma(7/2) area law gives, with
    c = lambda_pts / lambda_b and k = 7/2,

        P{U=i} = k**k c**i (k)_i / (i! (k + c)**(k + i)),

    evaluated in log space ((k)_i is the rising factorial).
    """
    if lambda_pts < 0 or not lambda_b > 0:
        raise ValueError("need lambda_pts >= 0 and lambda_b > 0")
    c = lambda_pts / lambda_b
    k = AREA_SHAPE
    if c == 0:
        return CountDistribution(np.array([1.0]), 0.0, "mixed-poisson-voronoi", 0.0)

    log_ratio = -math.log1p(k / c) if c > k else math.log(c) - math.log(k + c)

    def log_pmf(i):
        # (k)_i / i! = 1 / ((k + i) B(k, i + 1)); betaln and log1p avoid the
        # cancellation between huge gammaln terms when the mean count is large
        i = np.asarray(i, dtype=float)
        return (k * math.log(k / (k + c)) + i * log_ratio
                - special.betaln(k, i + 1.0) - np.log(k + i))

    def ratio(i):
        return c * (k + i) / ((i + 1.0) * (k + c))

    sd = math.sqrt(c + c * c / k)
    logp, bound = _choose_i_max(log_pmf, ratio, c, sd, i_max, tail_tol)
    return CountDistribution(np.exp(logp), c, "mixed-poisson-voronoi", bound)


def count_distribution_disc(lambda_c: float, r_relay: float, i_max: int | None = None,
                            tail_tol: float = DEFAULT_TAIL_TOL) -> CountDistribution:
    """Poisson count of cooperative users in a relay disc of radius ``r_relay``."""
    if lambda_c < 0 or not r_relay > 0:
        raise ValueError("need lambda_c >= 0 and r_relay > 0")
    m = lambda_c * math.pi * r_relay ** 2
    if m == 0:
        return CountDistribution(np.array([1.0]), 0.0, "poisson-disc", 0.0)

    def log_pmf(i):
        i = np.asarray(i, dtype=float)
        return i * math.log(m) - m - special.gammaln(i + 1.0)

    def ratio(i):
        return m / (i + 1.0)

    logp, bound = _choose_i_max(log_pmf, ratio, m, math.sqrt(m), i_max, tail_tol)
    return CountDistribution(np.exp(logp), m, "poisson-disc", bound)


@dataclass(frozen=True)
class BusyProbabilities:
    """Chance that a given subchannel is used, per band, and the thinned densities."""

    p_b1: float
    p_b2: float
    p_r: float
    lambda_b1: float  # active BS density on a non-cooperative subchannel
    lambda_b2: float  # active BS density on a cooperative subchannel
    lambda_r: float   # active RS density on a relay subchannel


def load_distributions(params: NetworkParams):
    """(U_nc, U_r, U_c) count distributions for a parameter set."""
    u_nc = count_distribution_voronoi(params.lambda_nc, params.lambda_b)
    u_r = count_distribution_voronoi(params.lambda_r, params.lambda_b)
    u_c = count_distribution_disc(params.lambda_c, params.r_relay)
    return u_nc, u_r, u_c


def busy_probabilities(params: NetworkParams) -> BusyProbabilities:
    u_nc, u_r, u_c = load_distributions(params)
    p_b1 = _clip01(u_nc.expected_min(params.m_b1) / params.m_b1)
    rho = float(params.rho)
    p_b2 = _clip01(u_r.expected_min(rho) / rho) if rho > 0 else 0.0
    p_r = _clip01(u_c.expected_min(params.m_r) / params.m_r) if params.m_r else 0.0
    return BusyProbabilities(
        p_b1=p_b1, p_b2=p_b2, p_r=p_r,
        lambda_b1=params.lambda_b * p_b1,
        lambda_b2=params.lambda_b * p_b2,
        lambda_r=params.lambda_r * p_r,
    )


def _clip01(x):
    # the certified tail term can push a saturated value a hair above 1
    return min(max(x, 0.0), 1.0)
