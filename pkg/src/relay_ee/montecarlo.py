"""Monte Carlo oracle for the analytic SINR, rate and energy-efficiency results.

Each realization puts a tagged receiver at the origin and samples the relevant
Poisson processes in a disc around it.  Points are generated outward in
distance order (cumulative exponential gaps in pi * lambda * r^2), in fixed-size
blocks, so enlarging the window only appends far points and leaves the near
field of every realization unchanged.

Randomness for realization ``k`` comes from Philox streams keyed by
``(seed, k, stream)``; results do not depend on how realizations are split
across workers.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .cell_load import AREA_SHAPE, busy_probabilities
from .energy import EnergyEfficiencyResult, PowerModel, total_consumed_power
from .params import NetworkParams

BLOCK = 64
WINDOW_SPACINGS = 30.0

# stream ids inside one realization
_NONCOOP, _COOP_BS, _RS_TIER, _TAGGED, _LOAD = range(5)


@dataclass(frozen=True)
class McConfig:
    """Simulation controls.

    ``window_radius`` bounds the BS processes (default 30 / sqrt(pi lambda_b),
    about 900 BSs per realization); ``rs_window_radius`` does the same for the
    relay tier (default 30 / sqrt(pi lambda_r)).
    """

    n_realizations: int = 10_000
    seed: int = 0
    window_radius: float | None = None
    rs_window_radius: float | None = None
    workers: int = 1
    guard: str = "typical-point-at-origin"

    def __post_init__(self):
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be >= 1")
        if self.guard != "typical-point-at-origin":
            raise ValueError(f"unsupported edge handling {self.guard!r}")

    def bs_window(self, params: NetworkParams) -> float:
        w = self.window_radius or WINDOW_SPACINGS / math.sqrt(math.pi * params.lambda_b)
        if w < 10.0 / math.sqrt(params.lambda_b):
            raise ValueError(f"window_radius {w:g} m is below 10 mean BS spacings")
        return w

    def rs_window(self, params: NetworkParams) -> float:
        if self.rs_window_radius:
            return self.rs_window_radius
        if params.lambda_r <= 0:
            return 0.0
        return WINDOW_SPACINGS / math.sqrt(math.pi * params.lambda_r)


def _stream(seed: int, k: int, stream: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(k, stream))
    return np.random.Generator(np.random.Philox(ss))


def radial_ppp(rng: np.random.Generator, intensity: float, radius: float, n_marks: int = 1):
    """Homogeneous PPP in a disc, sorted by distance from the centre.

    Returns (r, theta, marks) with ``marks`` uniform on [0, 1), shape (n, n_marks).
    """
    if intensity <= 0 or radius <= 0:
        return np.empty(0), np.empty(0), np.empty((0, n_marks))
    target = math.pi * intensity * radius * radius
    gaps, thetas, marks = [], [], []
    total = 0.0
    while True:
        g = rng.standard_exponential(BLOCK)
        th = rng.random(BLOCK) * (2.0 * math.pi)
        mk = rng.random((BLOCK, n_marks))
        gaps.append(g)
        thetas.append(th)
        marks.append(mk)
        total += g.sum()
        if total > target:
            break
    cum = np.cumsum(np.concatenate(gaps))
    n = int(np.searchsorted(cum, target, side="right"))
    r = np.sqrt(cum[:n] / (math.pi * intensity))
    return r, np.concatenate(thetas)[:n], np.concatenate(marks)[:n]


def _fading(u, params: NetworkParams):
    if params.interferer_fading == "deterministic":
        return np.ones_like(u)
    return -np.log1p(-u) / params.mu


def sinr(p_tx, h, d_serv, g, d_int, alpha, noise):
    """SINR of a link with serving fade ``h`` at distance ``d_serv`` and interferer arrays."""
    interference = p_tx * np.sum(g * np.asarray(d_int, dtype=float) ** -alpha) if len(d_int) else 0.0
    return p_tx * h * d_serv ** -alpha / (interference + noise)


@dataclass
class McRealization:
    """One sampled network around the tagged receivers.

    ``bs_points`` surround the non-cooperative UE; ``coop_bs_points`` surround
    the tagged relay (at the origin, UE at ``ue_offset``); ``rs_points`` are
    the active relay interferers around the cooperative UE.  Index 0 of each
    BS array is the serving BS.
    """

    k: int
    bs_points: np.ndarray
    bs_active: np.ndarray
    coop_bs_points: np.ndarray
    coop_bs_active: np.ndarray
    rs_points: np.ndarray
    ue_offset: np.ndarray
    fades: dict = field(repr=False)
    gamma_nc: float
    gamma_1: float
    gamma_0: float
    gamma_2: float
    decoded: bool
    counts: tuple = (0, 0, 0)
    resampled: int = 0


def _xy(r, th):
    return np.column_stack((r * np.cos(th), r * np.sin(th)))


def _bs_process(rng, params, window):
    """BS process with at least one point; returns (r, th, marks, resample count)."""
    resampled = 0
    while True:
        r, th, mk = radial_ppp(rng, params.lambda_b, window, n_marks=3)
        if len(r):
            return r, th, mk, resampled
        resampled += 1


def sample_realization(params: NetworkParams, mc: McConfig, k: int,
                       busy=None) -> McRealization:
    """Draw realization ``k``; identical for identical ``(mc.seed, k)``."""
    busy = busy or busy_probabilities(params)
    a, noise = params.alpha, params.noise
    w_bs = mc.bs_window(params)

    tag = _stream(mc.seed, k, _TAGGED)
    h = -np.log1p(-tag.random(4)) / params.mu  # h_nc, h_1, h_0, h_2
    u_rad, u_ang = tag.random(2)

    # non-cooperative UE at the origin
    r, th, mk, res_a = _bs_process(_stream(mc.seed, k, _NONCOOP), params, w_bs)
    act = np.concatenate(([True], mk[1:, 0] < busy.p_b1))
    g = _fading(mk[1:, 1], params)[act[1:]]
    gamma_nc = sinr(params.p_b, h[0], r[0], g, r[1:][act[1:]], a, noise)
    bs_points = _xy(r, th)

    # tagged relay at the origin, its cooperative UE at ue_offset
    r1, th1, mk1, res_b = _bs_process(_stream(mc.seed, k, _COOP_BS), params, w_bs)
    act1 = np.concatenate(([True], mk1[1:, 0] < busy.p_b2))
    pts1 = _xy(r1, th1)
    r_ue = params.r_relay * math.sqrt(u_rad)
    ue = np.array([r_ue * math.cos(2 * math.pi * u_ang), r_ue * math.sin(2 * math.pi * u_ang)])
    keep = act1[1:]
    g1 = _fading(mk1[1:, 1], params)[keep]
    g0 = _fading(mk1[1:, 2], params)[keep]
    gamma_1 = sinr(params.p_b, h[1], r1[0], g1, r1[1:][keep], a, noise)
    d_ue = np.hypot(pts1[:, 0] - ue[0], pts1[:, 1] - ue[1])
    gamma_0 = sinr(params.p_b, h[2], d_ue[0], g0, d_ue[1:][keep], a, noise)

    # relay tier around the cooperative UE: active interferers at lambda_r'
    if params.has_relays:
        rr, thr, mkr = radial_ppp(_stream(mc.seed, k, _RS_TIER), busy.lambda_r, mc.rs_window(params), 1)
        g2 = _fading(mkr[:, 0], params)
        gamma_2 = sinr(params.p_r, h[3], r_ue, g2, rr, a, noise)
        rs_points = _xy(rr, thr)
    else:
        gamma_2, rs_points, g2 = 0.0, np.empty((0, 2)), np.empty(0)

    decoded = bool(gamma_1 >= params.t_th)
    return McRealization(
        k=k, bs_points=bs_points, bs_active=act, coop_bs_points=pts1, coop_bs_active=act1,
        rs_points=rs_points, ue_offset=ue,
        fades={"h": h, "g_nc": g, "g_1": g1, "g_0": g0, "g_2": g2},
        gamma_nc=float(gamma_nc), gamma_1=float(gamma_1), gamma_0=float(gamma_0), gamma_2=float(gamma_2),
        decoded=decoded, counts=_cell_counts(params, mc.seed, k), resampled=res_a + res_b,
    )


def _cell_counts(params: NetworkParams, seed: int, k: int) -> tuple[int, int, int]:
    """(U_nc, U_r, U_c) for one cell: gamma-distributed area, Poisson counts."""
    rng = _stream(seed, k, _LOAD)
    area = rng.gamma(AREA_SHAPE, 1.0 / (AREA_SHAPE * params.lambda_b))
    u_nc = rng.poisson(params.lambda_nc * area)
    u_r = rng.poisson(params.lambda_r * area)
    u_c = rng.poisson(params.lambda_c * math.pi * params.r_relay ** 2)
    return int(u_nc), int(u_r), int(u_c)


# --- batch simulation ---------------------------------------------------------

SAMPLE_FIELDS = ("gamma_nc", "gamma_1", "gamma_0", "gamma_2", "decoded", "r_serving", "r_rs_ue",
                 "n_bs", "n_rs_active", "u_nc", "u_r", "u_c", "resampled")


@dataclass
class McSamples:
    """Per-realization outputs, ordered by realization index."""

    k: np.ndarray
    gamma_nc: np.ndarray
    gamma_1: np.ndarray
    gamma_0: np.ndarray
    gamma_2: np.ndarray
    decoded: np.ndarray
    r_serving: np.ndarray
    r_rs_ue: np.ndarray
    n_bs: np.ndarray
    n_rs_active: np.ndarray
    u_nc: np.ndarray
    u_r: np.ndarray
    u_c: np.ndarray
    resampled: np.ndarray

    @property
    def n(self) -> int:
        return len(self.k)

    def write_csv(self, path) -> None:
        """One row per realization: k, link SINRs, decode flag."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "gamma_nc", "gamma_1", "gamma_0", "gamma_2", "decoded"])
            for i in range(self.n):
                w.writerow([int(self.k[i]), repr(float(self.gamma_nc[i])), repr(float(self.gamma_1[i])),
                            repr(float(self.gamma_0[i])), repr(float(self.gamma_2[i])), int(self.decoded[i])])


def _simulate_range(args):
    params, mc, start, stop = args
    busy = busy_probabilities(params)
    rows = []
    for k in range(start, stop):
        real = sample_realization(params, mc, k, busy)
        rows.append((real.gamma_nc, real.gamma_1, real.gamma_0, real.gamma_2, real.decoded,
                     float(np.hypot(*real.bs_points[0])), float(np.hypot(*real.ue_offset)),
                     len(real.bs_points), len(real.rs_points), *real.counts, real.resampled))
    return rows


def simulate(params: NetworkParams, mc: McConfig) -> McSamples:
    """Run ``mc.n_realizations`` realizations, optionally across worker processes."""
    n = mc.n_realizations
    workers = max(1, int(mc.workers))
    if workers == 1:
        rows = _simulate_range((params, mc, 0, n))
    else:
        edges = np.linspace(0, n, 4 * workers + 1).astype(int)
        jobs = [(params, mc, int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]
        rows = []
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_simulate_range, jobs):
                rows.extend(part)
    cols = list(zip(*rows))
    out = {name: np.asarray(col) for name, col in zip(SAMPLE_FIELDS, cols)}
    out["decoded"] = out["decoded"].astype(bool)
    return McSamples(k=np.arange(n), **out)


# --- estimators ---------------------------------------------------------------

@dataclass(frozen=True)
class McEstimate:
    """Sample mean with standard error sd / sqrt(n); ``samples`` sorted when kept."""

    value: float
    se: float
    n: int
    samples: np.ndarray | None = field(default=None, repr=False)

    def cdf(self, t):
        """Empirical CDF P(X <= t) of the kept samples."""
        if self.samples is None:
            raise ValueError("estimate has no samples")
        return np.searchsorted(self.samples, np.asarray(t, dtype=float), side="right") / len(self.samples)

    def within(self, target: float, n_se: float = 2.0) -> bool:
        return abs(self.value - target) <= n_se * self.se


def mean_estimate(x, keep_samples=False) -> McEstimate:
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n == 0:
        return McEstimate(float("nan"), float("nan"), 0)
    se = float(np.std(x, ddof=1) / math.sqrt(n)) if n > 1 else float("inf")
    return McEstimate(float(np.mean(x)), se, n, np.sort(x) if keep_samples else None)


LINKS = {"bs-noncoop": "gamma_nc", "bs-rs": "gamma_1", "bs-ue": "gamma_0", "rs": "gamma_2"}


def estimate_sinr_cdf(link: str, params: NetworkParams, mc: McConfig,
                      samples: McSamples | None = None) -> McEstimate:
    """Empirical SINR distribution of one link; ``value`` is the mean of ln(1 + SINR)."""
    samples = samples or simulate(params, mc)
    g = getattr(samples, LINKS[link])
    est = mean_estimate(np.log1p(g))
    return McEstimate(est.value, est.se, est.n, np.sort(g))


@dataclass(frozen=True)
class McRateReport:
    """Simulated counterparts of the analytic rate breakdown and energy efficiency.

    ``tau_c`` mixes modes with the BS->RS SINR standing in for the BS->UE one,
    as the analysis does; ``tau_c_true`` uses the simulated BS->UE SINR.
    """

    tau_nc: McEstimate
    p_decode: McEstimate
    tau_1: McEstimate
    tau_m1: McEstimate
    tau_0: McEstimate
    tau_0_true: McEstimate
    tau_2: McEstimate
    tau_c: McEstimate
    tau_c_true: McEstimate
    throughput: McEstimate
    ee: EnergyEfficiencyResult
    q_se: float


def estimate_rates_and_ee(params: NetworkParams, model: PowerModel, mc: McConfig,
                          samples: McSamples | None = None) -> McRateReport:
    s = samples or simulate(params, mc)
    ln_nc = np.log1p(s.gamma_nc)
    ln_1 = np.log1p(s.gamma_1)
    ln_0 = np.log1p(s.gamma_0)
    ln_2 = np.log1p(s.gamma_2)
    d = s.decoded
    beta = params.beta
    c = np.where(d, beta * ln_1 + (1 - beta) * ln_2, ln_1)
    c_true = np.where(d, beta * ln_0 + (1 - beta) * ln_2, ln_1)

    thr = np.minimum(s.u_nc, params.m_b1) * ln_nc
    if params.has_relays:
        thr = thr + np.minimum(s.u_r, float(params.rho)) * np.minimum(s.u_c, params.m_r) * c
    throughput = mean_estimate(thr)
    denom = total_consumed_power(params, model)
    s1 = float(np.mean(np.minimum(s.u_nc, params.m_b1)) * np.mean(ln_nc))
    s2 = throughput.value - s1
    ee = EnergyEfficiencyResult(throughput.value / denom, s1, s2, denom)
    return McRateReport(
        tau_nc=mean_estimate(ln_nc), p_decode=mean_estimate(d.astype(float)), tau_1=mean_estimate(ln_1),
        tau_m1=mean_estimate(ln_1[~d]), tau_0=mean_estimate(ln_1[d]), tau_0_true=mean_estimate(ln_0[d]),
        tau_2=mean_estimate(ln_2), tau_c=mean_estimate(c), tau_c_true=mean_estimate(c_true),
        throughput=throughput, ee=ee, q_se=throughput.se / denom,
    )


def single_interferer_sir(n: int, r_serving: float, r_interferer: float, alpha: float,
                          seed: int = 0, mu: float = 1.0) -> np.ndarray:
    """Noise-free SIR with one forced interferer; P(SIR > T) = 1 / (1 + T (r_s / r_i)^alpha)."""
    rng = _stream(seed, 0, 0)
    h = rng.standard_exponential(n) / mu
    g = rng.standard_exponential(n) / mu
    return np.array([sinr(1.0, h[i], r_serving, g[i:i + 1], [r_interferer], alpha, 0.0) for i in range(n)])
